#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "loglab/paths.hpp"

namespace loglab::brw {

// Lazily evaluated i.i.d. Gaussians a_{j,B}, keyed by (seed, level, box corner).
class BoxNoise {
public:
    explicit BoxNoise(std::uint64_t seed, double variance = std::log(2.0));

    double operator()(int level, std::span<const std::int64_t> box) const;

    std::uint64_t seed() const { return seed_; }
    double variance() const { return variance_; }

private:
    std::uint64_t seed_;
    double variance_;
    double sd_;
};

// Noise whose box values are good (>= alpha) with probability `tilt` instead of p, drawn from the
// matching conditional law. Tracks the distinct boxes queried so the likelihood ratio can be formed.
class TiltedBoxNoise {
public:
    TiltedBoxNoise(std::uint64_t seed, double alpha, double tilt, double variance = std::log(2.0));

    double operator()(int level, std::span<const std::int64_t> box);

    std::size_t distinct_queries() const { return seen_.size(); }
    std::size_t bad_queries() const { return bad_; }
    // log of prod over distinct queried boxes of (true density / tilted density).
    double log_likelihood_ratio() const;
    double log_p() const { return log_p_; }

private:
    std::uint64_t seed_;
    double alpha_;
    double tilt_;
    double sd_;
    double log_p_;
    double log_q_;  // log(1 - p)
    std::unordered_map<std::uint64_t, double> seen_;
    std::size_t bad_ = 0;
};

// Box corner floor(x 2^j) of a real point.
std::vector<std::int64_t> box_of_point(std::span<const double> x, int j);

// R_n(x) = sum_{j=0}^n a_{j, B_j(x)}.
double brw_value(std::span<const double> x, int n, const BoxNoise& noise);

// p = P[N(0, variance) >= alpha], in log space.
double log_good_probability(double alpha, double variance = std::log(2.0));

struct GoodPathVerdict {
    bool is_good = true;
    int failure_level = -1;
    std::size_t failure_vertex = 0;
};

// Checks a_{m, B_m(x)} >= alpha for m in [k, n] and every vertex x of `path`
// (levels outer, vertices inner; stops at the first failure).
template <class Noise>
GoodPathVerdict check_good(const Path& path, double alpha, int k, int n, Noise& noise) {
    GoodPathVerdict verdict;
    std::vector<std::int64_t> box(static_cast<std::size_t>(path.d));
    for (int m = k; m <= n; ++m)
        for (std::size_t i = 0; i < path.size(); ++i) {
            paths::box_of_vertex(path.vertex(i), path.scale, path.denominator, m, box);
            if (!(noise(m, box) >= alpha)) {
                verdict.is_good = false;
                verdict.failure_level = m;
                verdict.failure_vertex = i;
                return verdict;
            }
        }
    return verdict;
}

// Uses the finest path of the chain.
GoodPathVerdict is_k_good(const paths::Chain& chain, double alpha, int k, int n, const BoxNoise& noise);

// sum_{j=k}^n |B_j(P_n) ∩ B_j(Q_n)|.
std::size_t box_overlap_exponent(const Path& p, const Path& q, int k, int n);
// sum_{j=k}^n |B_j(P_n)|.
std::size_t box_count(const Path& p, int k, int n);

struct MomentParams {
    int d = 110;
    int M = 10;
    int n = 1;
    int k = 1;
    double alpha = 0.0;
    std::size_t pairs = 1000;
    std::uint64_t seed = 1;
    PathFamily family = PathFamily::P;
    paths::RefinementOptions refinement{};
    bool identical_pairs = false;  // Q := P
};

struct MomentReport {
    double log_p = 0.0;
    double ratio_estimate = 0.0;
    double std_error = 0.0;
    // Largest per-sample exponent and the matching intersection bound sum_{j >= floor(k/4)} 100 Y_j.
    std::size_t max_exponent = 0;
    std::size_t bound_violations = 0;
    std::vector<std::size_t> exponent_histogram;
    std::vector<double> mean_intersections;  // E[Y_j], j = 0..n
    // Empirical geometric rate c_1 = max_m P[Y_0 >= m]^{1/m}, and the target (1-c)/(1-c(1+2^{-floor(k/4)})).
    double c1_estimate = 0.0;
    double bound_rhs = 0.0;
    bool canonical = true;
};

// E[p^{-exponent}] over uniform chain pairs.
MomentReport weighted_count_moments(const MomentParams& params);

struct DirectReport {
    double ratio_estimate = 0.0;
    double std_error = 0.0;
    std::size_t successes = 0;
    double tilt = 0.0;
};

// E[1{P good} 1{Q good} / (P[P good] P[Q good])] by simulating a shared noise for each pair,
// importance sampled with TiltedBoxNoise.
DirectReport direct_moment_estimate(const MomentParams& params, double tilt = 0.95);

struct SearchResult {
    bool found = false;
    std::size_t tried = 0;
    std::optional<paths::Chain> exemplar;
    std::uint64_t noise_seed = 0;  // seed of the BoxNoise the chains were tested against
};

// Rejection-samples chains against one fixed BoxNoise until a k-good chain appears.
SearchResult good_path_search(int d, int M, int n, int k, double alpha, std::size_t attempts, std::uint64_t seed,
                              const paths::RefinementOptions& refinement = {}, PathFamily family = PathFamily::P);

}  // namespace loglab::brw
