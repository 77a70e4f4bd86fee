#include "loglab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace loglab {

void RunningStats::add(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double total = static_cast<double>(n_ + other.n_);
    const double delta = other.mean_ - mean_;
    mean_ += delta * static_cast<double>(other.n_) / total;
    m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
    n_ += other.n_;
}

double RunningStats::variance() const {
    return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double RunningStats::std_error() const {
    return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

LineFit least_squares(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("least_squares: need >= 2 paired points");
    const double n = static_cast<double>(x.size());
    // Centering on y[0] keeps the slope of a constant sequence exactly zero.
    const double y0 = y[0];
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i] - y0;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - y0 - my);
    }
    if (sxx == 0) throw std::invalid_argument("least_squares: degenerate abscissae");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = y0 + my - fit.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - fit.intercept - fit.slope * x[i];
            rss += r * r;
        }
        fit.slope_std_error = std::sqrt(rss / (n - 2) / sxx);
    }
    return fit;
}

double lower_median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("lower_median: empty input");
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    return *mid;
}

std::vector<double> isotonic_increasing(std::span<const double> y, std::span<const double> weights) {
    struct Block {
        double value, weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double w = weights.empty() ? 1.0 : weights[i];
        blocks.push_back({y[i], w, 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].value > blocks.back().value) {
            Block b = blocks.back();
            blocks.pop_back();
            Block& a = blocks.back();
            const double w_sum = a.weight + b.weight;
            a.value = w_sum > 0 ? (a.value * a.weight + b.value * b.weight) / w_sum : 0.5 * (a.value + b.value);
            a.weight = w_sum;
            a.count += b.count;
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const Block& b : blocks) out.insert(out.end(), b.count, b.value);
    return out;
}

double student_t_975(std::size_t dof) {
    static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                                       2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
                                       2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (dof == 0) throw std::invalid_argument("student_t_975: zero degrees of freedom");
    if (dof <= 30) return table[dof - 1];
    // Cornish-Fisher expansion around the normal quantile.
    const double z = 1.959963984540054;
    const double v = static_cast<double>(dof);
    return z + (z * z * z + z) / (4 * v) + (5 * std::pow(z, 5) + 16 * z * z * z + 3 * z) / (96 * v * v);
}

std::pair<double, double> wilson_interval(std::size_t successes, std::size_t trials, double z) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double denom = 1 + z * z / n;
    const double centre = (p + z * z / (2 * n)) / denom;
    const double half = z * std::sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

}  // namespace loglab
