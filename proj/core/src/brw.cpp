#include "loglab/brw.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

#include "loglab/gaussian.hpp"
#include "loglab/random.hpp"
#include "loglab/stats.hpp"

namespace loglab::brw {

namespace {

std::uint64_t box_key(int level, std::span<const std::int64_t> box) {
    return hash_coords(box, static_cast<std::uint64_t>(level) * 0x9e3779b97f4a7c15ULL);
}

std::uint64_t pair_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t slot) {
    return splitmix64(splitmix64(seed ^ (0xa0761d6478bd642fULL * (index + 1))) + slot);
}

}  // namespace

BoxNoise::BoxNoise(std::uint64_t seed, double variance) : seed_(seed), variance_(variance), sd_(std::sqrt(variance)) {
    if (!(variance > 0)) throw std::invalid_argument("BoxNoise: variance must be positive");
}

double BoxNoise::operator()(int level, std::span<const std::int64_t> box) const {
    const double u = keyed_uniform(seed_, DrawDomain::box_noise, static_cast<std::uint32_t>(level), box_key(level, box));
    return sd_ * normal_quantile(u);
}

TiltedBoxNoise::TiltedBoxNoise(std::uint64_t seed, double alpha, double tilt, double variance)
    : seed_(seed), alpha_(alpha), tilt_(tilt), sd_(std::sqrt(variance)) {
    if (!(tilt > 0 && tilt < 1)) throw std::invalid_argument("TiltedBoxNoise: tilt must lie in (0, 1)");
    log_p_ = gaussian::log_normal_tail(alpha / sd_);
    log_q_ = gaussian::log_normal_tail(-alpha / sd_);
}

double TiltedBoxNoise::operator()(int level, std::span<const std::int64_t> box) {
    const std::uint64_t key = box_key(level, box);
    auto it = seen_.find(key);
    if (it != seen_.end()) return it->second;
    const auto lvl = static_cast<std::uint32_t>(level);
    const double u_class = keyed_uniform(seed_, DrawDomain::box_noise, lvl, key);
    const double u_value = keyed_uniform(seed_, DrawDomain::box_noise, lvl, splitmix64(key ^ 0x2545f4914f6cdd1dULL));
    double value;
    if (u_class < tilt_) {
        value = std::max(alpha_, -sd_ * normal_quantile(std::exp(log_p_) * u_value));
    } else {
        value = std::min(std::nextafter(alpha_, -std::numeric_limits<double>::infinity()),
                         sd_ * normal_quantile(std::exp(log_q_) * u_value));
        ++bad_;
    }
    seen_.emplace(key, value);
    return value;
}

double TiltedBoxNoise::log_likelihood_ratio() const {
    const double good = static_cast<double>(seen_.size() - bad_);
    const double bad = static_cast<double>(bad_);
    return good * (log_p_ - std::log(tilt_)) + bad * (log_q_ - std::log1p(-tilt_));
}

std::vector<std::int64_t> box_of_point(std::span<const double> x, int j) {
    std::vector<std::int64_t> out(x.size());
    const double scale = std::ldexp(1.0, j);
    for (std::size_t k = 0; k < x.size(); ++k) out[k] = static_cast<std::int64_t>(std::floor(x[k] * scale));
    return out;
}

double brw_value(std::span<const double> x, int n, const BoxNoise& noise) {
    if (n < 0) throw std::invalid_argument("brw_value: n must be nonnegative");
    double total = 0;
    for (int j = 0; j <= n; ++j) total += noise(j, box_of_point(x, j));
    return total;
}

double log_good_probability(double alpha, double variance) {
    return gaussian::log_normal_tail(alpha / std::sqrt(variance));
}

GoodPathVerdict is_k_good(const paths::Chain& chain, double alpha, int k, int n, const BoxNoise& noise) {
    if (chain.levels.empty()) throw std::invalid_argument("is_k_good: empty chain");
    if (k < 0 || k > n) throw std::invalid_argument("is_k_good: need 0 <= k <= n");
    const BoxNoise& ref = noise;
    auto lookup = [&ref](int level, std::span<const std::int64_t> box) { return ref(level, box); };
    return check_good(chain.levels.back(), alpha, k, n, lookup);
}

std::size_t box_overlap_exponent(const Path& p, const Path& q, int k, int n) {
    std::size_t total = 0;
    for (int j = k; j <= n; ++j) total += paths::box_intersection_count(paths::boxes_touching(p, j), paths::boxes_touching(q, j));
    return total;
}

std::size_t box_count(const Path& p, int k, int n) {
    std::size_t total = 0;
    for (int j = k; j <= n; ++j) total += paths::boxes_touching(p, j).size();
    return total;
}

MomentReport weighted_count_moments(const MomentParams& params) {
    if (params.pairs == 0) throw std::invalid_argument("weighted_count_moments: pairs must be positive");
    if (params.k < 0 || params.k > params.n) throw std::invalid_argument("weighted_count_moments: need 0 <= k <= n");
    MomentReport report;
    report.log_p = log_good_probability(params.alpha);
    report.mean_intersections.assign(static_cast<std::size_t>(params.n) + 1, 0.0);
    RunningStats weights;
    std::vector<std::size_t> y0_tail;  // y0_tail[m] = #{Y_0 >= m}
    const int lo = params.k / 4;
    for (std::size_t i = 0; i < params.pairs; ++i) {
        const auto P = paths::sample_refined_chain(params.d, params.M, params.n, params.family,
                                                   pair_seed(params.seed, i, 0), params.refinement);
        const auto Q = params.identical_pairs ? P
                                              : paths::sample_refined_chain(params.d, params.M, params.n, params.family,
                                                                            pair_seed(params.seed, i, 1), params.refinement);
        if (i == 0) report.canonical = params.n == 0 || P.canonical;
        const std::size_t exponent = box_overlap_exponent(P.levels.back(), Q.levels.back(), params.k, params.n);
        std::size_t bound = 0;
        for (int j = 0; j <= params.n; ++j) {
            const std::size_t y = paths::intersection_count(P.levels[j], Q.levels[j]);
            report.mean_intersections[j] += static_cast<double>(y);
            if (j >= lo) bound += 100 * y;
            if (j == 0) {
                if (y0_tail.size() <= y) y0_tail.resize(y + 1, 0);
                for (std::size_t m = 0; m <= y; ++m) ++y0_tail[m];
            }
        }
        if (exponent > bound) ++report.bound_violations;
        report.max_exponent = std::max(report.max_exponent, exponent);
        if (report.exponent_histogram.size() <= exponent) report.exponent_histogram.resize(exponent + 1, 0);
        ++report.exponent_histogram[exponent];
        weights.add(std::exp(-static_cast<double>(exponent) * report.log_p));
    }
    for (double& y : report.mean_intersections) y /= static_cast<double>(params.pairs);
    report.ratio_estimate = weights.mean();
    report.std_error = weights.std_error();
    double c1 = 0;
    for (std::size_t m = 1; m < y0_tail.size(); ++m)
        c1 = std::max(c1, std::pow(static_cast<double>(y0_tail[m]) / static_cast<double>(params.pairs), 1.0 / static_cast<double>(m)));
    report.c1_estimate = c1;
    const double inflated = c1 * (1 + std::ldexp(1.0, -lo));
    report.bound_rhs = inflated < 1 ? (1 - c1) / (1 - inflated) : std::numeric_limits<double>::infinity();
    return report;
}

DirectReport direct_moment_estimate(const MomentParams& params, double tilt) {
    if (params.pairs == 0) throw std::invalid_argument("direct_moment_estimate: pairs must be positive");
    DirectReport report;
    report.tilt = tilt;
    const double log_p = log_good_probability(params.alpha);
    RunningStats weights;
    for (std::size_t i = 0; i < params.pairs; ++i) {
        const auto P = paths::sample_refined_chain(params.d, params.M, params.n, params.family,
                                                   pair_seed(params.seed, i, 2), params.refinement);
        const auto Q = params.identical_pairs ? P
                                              : paths::sample_refined_chain(params.d, params.M, params.n, params.family,
                                                                            pair_seed(params.seed, i, 3), params.refinement);
        TiltedBoxNoise noise(pair_seed(params.seed, i, 4), params.alpha, tilt);
        const bool good = check_good(P.levels.back(), params.alpha, params.k, params.n, noise).is_good &&
                          check_good(Q.levels.back(), params.alpha, params.k, params.n, noise).is_good;
        double w = 0;
        if (good) {
            ++report.successes;
            const double denom = static_cast<double>(box_count(P.levels.back(), params.k, params.n) +
                                                     box_count(Q.levels.back(), params.k, params.n));
            w = std::exp(noise.log_likelihood_ratio() - denom * log_p);
        }
        weights.add(w);
    }
    report.ratio_estimate = weights.mean();
    report.std_error = weights.std_error();
    return report;
}

SearchResult good_path_search(int d, int M, int n, int k, double alpha, std::size_t attempts, std::uint64_t seed,
                              const paths::RefinementOptions& refinement, PathFamily family) {
    SearchResult result;
    const BoxNoise noise(splitmix64(seed ^ 0x1d8e4e27c47d124fULL));
    result.noise_seed = noise.seed();
    for (std::size_t i = 0; i < attempts; ++i) {
        ++result.tried;
        auto chain = paths::sample_refined_chain(d, M, n, family, pair_seed(seed, i, 5), refinement);
        if (is_k_good(chain, alpha, k, n, noise).is_good) {
            result.found = true;
            result.exemplar = std::move(chain);
            break;
        }
    }
    return result;
}

}  // namespace loglab::brw
