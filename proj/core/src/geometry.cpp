#include "loglab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "loglab/quadrature.hpp"
#include "loglab/stats.hpp"

namespace loglab {

PointSet::PointSet(int d, std::vector<double> flat) : d_(d), coords_(std::move(flat)) {
    if (d <= 0 || coords_.size() % static_cast<std::size_t>(d) != 0)
        throw std::invalid_argument("PointSet: flat size is not a multiple of the dimension");
}

void PointSet::push_back(std::span<const double> p) {
    if (static_cast<int>(p.size()) != d_) throw std::invalid_argument("PointSet: dimension mismatch");
    coords_.insert(coords_.end(), p.begin(), p.end());
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

}  // namespace loglab

namespace loglab::geometry {

double log_gamma(double x) {
    if (!(x > 0)) throw std::domain_error("log_gamma: argument must be positive");
    // Shift up so the Stirling series is accurate, then undo with a log-sum.
    double shift = 0;
    while (x < 15) {
        shift += std::log(x);
        x += 1;
    }
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    const double series =
        inv * (1.0 / 12 - inv2 * (1.0 / 360 - inv2 * (1.0 / 1260 - inv2 * (1.0 / 1680 - inv2 * (1.0 / 1188)))));
    return (x - 0.5) * std::log(x) - x + 0.5 * std::log(2 * M_PI) + series - shift;
}

double log_ball_volume(int d, double t) {
    if (d <= 0) throw std::domain_error("ball_volume: dimension must be positive");
    if (!(t > 0)) throw std::domain_error("ball_volume: radius must be positive");
    return 0.5 * d * std::log(M_PI) + d * std::log(t) - log_gamma(1.0 + 0.5 * d);
}

double ball_volume(int d, double t) { return std::exp(log_ball_volume(d, t)); }

double surface_to_volume_ratio(int d) {
    if (d < 2) throw std::domain_error("surface_to_volume_ratio: dimension must be at least 2");
    return std::exp(log_ball_volume(d - 1, 1.0) - log_ball_volume(d, 1.0));
}

double intersection_ratio(double u, double t, int d) {
    if (!(u >= 0)) throw std::domain_error("intersection_ratio: distance must be nonnegative");
    if (!(t > 0)) throw std::domain_error("intersection_ratio: radius must be positive");
    if (d <= 0) throw std::domain_error("intersection_ratio: dimension must be positive");
    const double a = 0.5 * u / t;
    if (a >= 1.0) return 0.0;
    if (u == 0.0) return 1.0;
    const double slice_ratio = d == 1 ? 0.5 : surface_to_volume_ratio(d);
    const double power = 0.5 * (d - 1);
    auto slice = [power](double r) { return r >= 1.0 ? 0.0 : std::exp(power * std::log1p(-r * r)); };
    QuadratureOptions opts;
    opts.abs_tol = 1e-10 / (2 * slice_ratio);
    opts.rel_tol = 1e-12;
    const double integral = integrate(slice, a, 1.0, opts, "intersection_ratio");
    return std::clamp(2.0 * slice_ratio * integral, 0.0, 1.0);
}

bool BoxRegion::contains(std::span<const double> p) const {
    for (std::size_t i = 0; i < p.size(); ++i)
        if (std::fabs(p[i] - center[i]) > half_width) return false;
    return true;
}

BallUnion::BallUnion(PointSet centers, double t, std::size_t brute_force_limit)
    : centers_(std::move(centers)), t_(t) {
    if (centers_.empty()) throw std::invalid_argument("BallUnion: no centers");
    if (!(t > 0)) throw std::invalid_argument("BallUnion: radius must be positive");
    if (centers_.size() <= brute_force_limit) return;

    const int d = centers_.dim();
    std::vector<std::pair<double, int>> spread(d);
    for (int k = 0; k < d; ++k) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t i = 0; i < centers_.size(); ++i) {
            lo = std::min(lo, centers_[i][k]);
            hi = std::max(hi, centers_[i][k]);
        }
        spread[k] = {hi - lo, k};
    }
    std::sort(spread.rbegin(), spread.rend());
    const int axes = std::min(d, 3);
    for (int a = 0; a < axes; ++a) index_axes_.push_back(spread[a].second);

    cell_lo_.assign(axes, std::numeric_limits<std::int64_t>::max());
    std::vector<std::int64_t> cell_hi(axes, std::numeric_limits<std::int64_t>::min());
    for (std::size_t i = 0; i < centers_.size(); ++i)
        for (int a = 0; a < axes; ++a) {
            const auto c = static_cast<std::int64_t>(std::floor(centers_[i][index_axes_[a]] / t_));
            cell_lo_[a] = std::min(cell_lo_[a], c);
            cell_hi[a] = std::max(cell_hi[a], c);
        }
    std::size_t total = 1;
    cell_extent_.resize(axes);
    for (int a = 0; a < axes; ++a) {
        cell_extent_[a] = cell_hi[a] - cell_lo_[a] + 1;
        total *= static_cast<std::size_t>(cell_extent_[a]);
    }
    if (total > 8 * centers_.size() + 1024) {
        // Too sparse for a dense cell table; fall back to brute force.
        index_axes_.clear();
        return;
    }
    cells_.resize(total);
    for (std::size_t i = 0; i < centers_.size(); ++i) {
        std::size_t flat = 0;
        for (int a = 0; a < axes; ++a) {
            const auto c = static_cast<std::int64_t>(std::floor(centers_[i][index_axes_[a]] / t_)) - cell_lo_[a];
            flat = flat * static_cast<std::size_t>(cell_extent_[a]) + static_cast<std::size_t>(c);
        }
        cells_[flat].push_back(static_cast<std::uint32_t>(i));
    }
}

template <class Visit>
void BallUnion::for_candidates(std::span<const double> p, Visit&& visit) const {
    if (index_axes_.empty()) {
        for (std::size_t i = 0; i < centers_.size(); ++i)
            if (!visit(i)) return;
        return;
    }
    const int axes = static_cast<int>(index_axes_.size());
    std::int64_t base[3];
    for (int a = 0; a < axes; ++a)
        base[a] = static_cast<std::int64_t>(std::floor(p[index_axes_[a]] / t_)) - cell_lo_[a];
    int offsets[3] = {-1, -1, -1};
    while (true) {
        bool inside = true;
        std::size_t flat = 0;
        for (int a = 0; a < axes; ++a) {
            const std::int64_t c = base[a] + offsets[a];
            if (c < 0 || c >= cell_extent_[a]) {
                inside = false;
                break;
            }
            flat = flat * static_cast<std::size_t>(cell_extent_[a]) + static_cast<std::size_t>(c);
        }
        if (inside)
            for (std::uint32_t i : cells_[flat])
                if (!visit(i)) return;
        int a = 0;
        while (a < axes && offsets[a] == 1) offsets[a++] = -1;
        if (a == axes) break;
        ++offsets[a];
    }
}

std::size_t BallUnion::multiplicity(std::span<const double> p) const {
    const double t2 = t_ * t_;
    std::size_t count = 0;
    for_candidates(p, [&](std::size_t i) {
        if (squared_distance(p, centers_[i]) < t2) ++count;
        return true;
    });
    return count;
}

bool BallUnion::covers(std::span<const double> p) const {
    const double t2 = t_ * t_;
    bool hit = false;
    for_candidates(p, [&](std::size_t i) {
        hit = squared_distance(p, centers_[i]) < t2;
        return !hit;
    });
    return hit;
}

void sample_in_ball(std::span<const double> center, double t, Stream& rng, std::span<double> out) {
    const std::size_t d = center.size();
    double norm2 = 0;
    for (std::size_t i = 0; i < d; ++i) {
        out[i] = rng.normal();
        norm2 += out[i] * out[i];
    }
    const double radius = t * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
    const double scale = radius / std::sqrt(norm2);
    for (std::size_t i = 0; i < d; ++i) out[i] = center[i] + out[i] * scale;
}

VolumeEstimate union_ball_region_fraction(const BallUnion& balls, const BoxRegion& region, std::size_t samples,
                                          Stream& rng) {
    if (samples == 0) throw std::invalid_argument("union_ball_region_fraction: samples must be positive");
    const std::size_t n = balls.size();
    std::vector<double> point(balls.centers().dim());
    RunningStats stats;
    for (std::size_t s = 0; s < samples; ++s) {
        const std::size_t which = rng.below(n);
        sample_in_ball(balls.centers()[which], balls.radius(), rng, point);
        double w = 0;
        if (region.contains(point)) {
            const std::size_t mult = std::max<std::size_t>(1, balls.multiplicity(point));
            w = static_cast<double>(n) / static_cast<double>(mult);
        }
        stats.add(w);
    }
    return {stats.mean(), stats.std_error()};
}

VolumeEstimate union_ball_region_volume(const PointSet& centers, double t, const BoxRegion& region,
                                        std::size_t samples, std::uint64_t seed) {
    BallUnion balls(centers, t);
    Stream rng(seed);
    VolumeEstimate frac = union_ball_region_fraction(balls, region, samples, rng);
    const double v = ball_volume(centers.dim(), t);
    return {frac.estimate * v, frac.std_error * v};
}

}  // namespace loglab::geometry
