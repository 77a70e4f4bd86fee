#include "loglab/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "loglab/quadrature.hpp"
#include "loglab/random.hpp"

namespace loglab::gaussian {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// log of the Mills ratio Q(x) / phi(x) for large positive x, by backward continued fraction.
double log_mills_ratio_cf(double x) {
    double tail = x;
    for (int k = 80; k >= 1; --k) tail = x + k / tail;
    return -std::log(tail);
}

}  // namespace

double normal_tail(double x) {
    if (x > 37) return std::exp(log_normal_tail(x));
    return 0.5 * std::erfc(x / M_SQRT2);
}

double log_normal_tail(double x) {
    if (x <= -20) return std::log1p(-std::exp(log_normal_tail(-x)));
    if (x <= 20) return std::log(0.5 * std::erfc(x / M_SQRT2));
    return -0.5 * x * x - kLogSqrt2Pi + log_mills_ratio_cf(x);
}

double log_normal_pdf(double x, double mean, double variance) {
    const double z = x - mean;
    return -0.5 * z * z / variance - kLogSqrt2Pi - 0.5 * std::log(variance);
}

void BivariateSpec::validate() const {
    if (!(var_x > 0 && var_x <= 1) || !(var_y > 0 && var_y <= 1))
        throw std::invalid_argument("BivariateSpec: variances must lie in (0, 1]");
    if (!(cov_xy >= 0)) throw std::invalid_argument("BivariateSpec: covariance must be nonnegative");
    if (cov_xy > std::sqrt(var_x * var_y) * (1 + 1e-12))
        throw std::invalid_argument("BivariateSpec: covariance exceeds sqrt(var_x var_y)");
    if (!(t >= 1)) throw std::invalid_argument("BivariateSpec: threshold must be at least 1");
}

double log_orthant_ratio(const BivariateSpec& spec) {
    spec.validate();
    const double sx = std::sqrt(spec.var_x);
    const double sy = std::sqrt(spec.var_y);
    const double log_px = log_normal_tail(spec.t / sx);
    const double log_py = log_normal_tail(spec.t / sy);
    if (spec.cov_xy == 0) return 0.0;

    // Y | X = x ~ N(slope x, cond_var).
    const double slope = spec.cov_xy / spec.var_x;
    const double cond_var = std::max(0.0, spec.var_y - spec.cov_xy * slope);
    if (cond_var <= 1e-24 * spec.var_y) {
        const double x_min = std::max(spec.t, spec.t / slope);
        return log_normal_tail(x_min / sx) - log_px - log_py;
    }
    const double cond_sd = std::sqrt(cond_var);
    const double a = spec.t / sx;
    // x = sx (a + w); density ratio phi(a + w) / phi(a) = exp(-a w - w^2 / 2).
    auto log_integrand = [&](double w) {
        const double x = sx * (a + w);
        return -a * w - 0.5 * w * w + log_normal_tail((spec.t - slope * x) / cond_sd);
    };
    // The conditional tail switches on near x = t / slope; integrate past it with room for decay.
    const double onset = std::max(0.0, (spec.t / slope - spec.t) / sx);
    const double upper = onset + 12 + 40 / (a + onset + 1);
    double peak = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 400; ++i) peak = std::max(peak, log_integrand(upper * i / 400.0));
    auto integrand = [&](double w) { return std::exp(log_integrand(w) - peak); };
    QuadratureOptions opts;
    opts.abs_tol = 0;
    opts.rel_tol = 1e-10;
    opts.max_intervals = 4000;
    double integral = 0;
    if (onset > 0) integral += integrate(integrand, 0.0, onset, opts, "orthant_ratio");
    integral += integrate(integrand, onset, upper, opts, "orthant_ratio");
    const double log_joint = log_normal_pdf(a) + peak + std::log(integral);
    return log_joint - log_px - log_py;
}

double orthant_ratio(const BivariateSpec& spec) { return std::exp(log_orthant_ratio(spec)); }

MonteCarloRatio orthant_ratio_mc(const BivariateSpec& spec, std::size_t samples, std::uint64_t seed) {
    spec.validate();
    if (samples == 0) throw std::invalid_argument("orthant_ratio_mc: samples must be positive");
    const double sx = std::sqrt(spec.var_x);
    const double slope = spec.cov_xy / spec.var_x;
    const double cond_sd = std::sqrt(std::max(0.0, spec.var_y - spec.cov_xy * slope));
    Stream rng(seed);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        const double x = sx * rng.normal();
        const double y = slope * x + cond_sd * rng.normal();
        if (x >= spec.t && y >= spec.t) ++hits;
    }
    const double denom = normal_tail(spec.t / sx) * normal_tail(spec.t / std::sqrt(spec.var_y));
    const double p = static_cast<double>(hits) / static_cast<double>(samples);
    MonteCarloRatio out;
    out.ratio = p / denom;
    out.std_error = std::sqrt(p * (1 - p) / static_cast<double>(samples)) / denom;
    out.joint_hits = hits;
    return out;
}

double log_repulsion_ratio(double sigma2, double m, double theta, double t) {
    if (!(sigma2 > 0 && sigma2 <= 1)) throw std::invalid_argument("repulsion_ratio: sigma2 must lie in (0, 1]");
    if (!(m > 0)) throw std::invalid_argument("repulsion_ratio: m must be positive");
    if (!(theta > 0)) throw std::invalid_argument("repulsion_ratio: theta must be positive");
    const double sigma = std::sqrt(sigma2);
    const double s = (m + 1) * sigma2 * theta;
    const double numerator = log_normal_pdf(t, 0.0, sigma2) + log_normal_tail((s - t) / (sigma * std::sqrt(m))) -
                             log_normal_tail(s / (sigma * std::sqrt(m + 1)));
    return numerator - log_normal_pdf(t, sigma2 * theta, sigma2);
}

double repulsion_ratio(double sigma2, double m, double theta, double t) {
    return std::exp(log_repulsion_ratio(sigma2, m, theta, t));
}

std::optional<double> domination_theta(double p, unsigned delta) {
    if (!(p > 0 && p <= 1)) throw std::invalid_argument("domination_theta: p must lie in (0, 1]");
    if (p == 1) return 1.0;
    const double target = 1 - p;
    auto f = [delta](double theta) { return (1 - theta) * std::pow(theta, static_cast<double>(delta)); };
    double lo = static_cast<double>(delta) / (delta + 1.0);
    if (f(lo) < target) return std::nullopt;
    double hi = 1.0;
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) >= target ? lo : hi) = mid;
    }
    return lo;
}

SequenceResult sequence_iterate(SequenceKind kind, double a, double b, std::size_t n) {
    if (!(a > 1)) throw std::invalid_argument("sequence_iterate: a must exceed 1");
    if (!(b > 0)) throw std::invalid_argument("sequence_iterate: b must be positive");
    if (n == 0 || n > 1000000) throw std::invalid_argument("sequence_iterate: n must lie in [1, 1e6]");
    constexpr double kLimit = 1e300;
    SequenceResult out;
    out.terms.reserve(n);
    if (kind == SequenceKind::A) {
        double value = a;
        for (std::size_t i = 0; i < n; ++i) {
            if (!(value <= kLimit)) {
                out.overflow = true;
                out.overflow_index = i;
                break;
            }
            out.terms.push_back(value);
            const double grow = 1 + std::pow(value, 11.0) / b;
            value = a * grow * grow;
        }
        return out;
    }
    out.excess.reserve(n);
    double excess = a - 1;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(excess <= kLimit)) {
            out.overflow = true;
            out.overflow_index = i;
            break;
        }
        out.terms.push_back(1 + excess);
        out.excess.push_back(excess);
        const double x = std::expm1(11 * std::log1p(excess)) / b;
        excess = x * (2 + x);
    }
    return out;
}

}  // namespace loglab::gaussian
