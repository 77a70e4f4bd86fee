#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace loglab {

// Welford accumulator.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::size_t count() const { return n_; }
    double mean() const { return mean_; }
    double variance() const;  // unbiased
    double std_error() const;

private:
    std::size_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_std_error = 0.0;
};

LineFit least_squares(std::span<const double> x, std::span<const double> y);

// Lower median: element of rank floor((n-1)/2).
double lower_median(std::vector<double> values);

// Pool-adjacent-violators fit of a nondecreasing sequence.
std::vector<double> isotonic_increasing(std::span<const double> y, std::span<const double> weights);

// Two-sided Student t quantile at 1 - alpha/2 for alpha = 0.05.
double student_t_975(std::size_t dof);

// Wilson score interval at ~95% for a binomial proportion.
std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

}  // namespace loglab
