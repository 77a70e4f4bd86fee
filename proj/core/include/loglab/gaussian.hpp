#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace loglab::gaussian {

// Constant c for which c x^{-1} e^{-x^2/2} <= P[N(0,1) >= x] <= c^{-1} x^{-1} e^{-x^2/2} on [1/2, 8].
inline constexpr double kTailConstant = 0.15;

double normal_tail(double x);
double log_normal_tail(double x);
double log_normal_pdf(double x, double mean = 0.0, double variance = 1.0);

struct BivariateSpec {
    double var_x = 1.0;
    double var_y = 1.0;
    double cov_xy = 0.0;
    double t = 1.0;

    void validate() const;
};

// P[X >= t, Y >= t] / (P[X >= t] P[Y >= t]).
double orthant_ratio(const BivariateSpec& spec);
double log_orthant_ratio(const BivariateSpec& spec);

struct MonteCarloRatio {
    double ratio = 0.0;
    double std_error = 0.0;
    std::size_t joint_hits = 0;
};
MonteCarloRatio orthant_ratio_mc(const BivariateSpec& spec, std::size_t samples, std::uint64_t seed);

// Density of X at t given X + Y >= (m+1) sigma2 theta, divided by the N(sigma2 theta, sigma2) density,
// for independent X ~ N(0, sigma2), Y ~ N(0, m sigma2).
double repulsion_ratio(double sigma2, double m, double theta, double t);
double log_repulsion_ratio(double sigma2, double m, double theta, double t);

// Largest theta in (0,1] with (1 - theta) theta^delta >= 1 - p; empty if none.
std::optional<double> domination_theta(double p, unsigned delta);

enum class SequenceKind { A, B };

struct SequenceResult {
    std::vector<double> terms;
    // For kind B: terms[i] - 1 evaluated without cancellation.
    std::vector<double> excess;
    bool overflow = false;
    std::size_t overflow_index = 0;
};

// Kind A: a_1 = a, a_{i+1} = a (1 + a_i^11 / b)^2.
// Kind B: b_1 = a, b_{i+1} = (1 + (b_i^11 - 1) / b)^2.
SequenceResult sequence_iterate(SequenceKind kind, double a, double b, std::size_t n);

}  // namespace loglab::gaussian
