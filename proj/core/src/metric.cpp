#include "loglab/metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <stdexcept>

#include "loglab/random.hpp"
#include "loglab/stats.hpp"

namespace loglab::metric {

namespace {

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ (0xd1b54a32d192ed03ULL * (a + 1))) + b);
}

double log2_median(const std::vector<double>& v) { return std::log2(lower_median(v)); }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) { return least_squares(x, y).slope; }

std::pair<double, double> percentile_interval(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(v.size() - 1);
        const auto i = static_cast<std::size_t>(std::floor(pos));
        const double f = pos - static_cast<double>(i);
        return i + 1 < v.size() ? v[i] * (1 - f) + v[i + 1] * f : v[i];
    };
    return {at(0.025), at(0.975)};
}

std::vector<double> resample(const std::vector<double>& values, const std::vector<std::size_t>& idx) {
    std::vector<double> out;
    out.reserve(idx.size());
    for (std::size_t i : idx) out.push_back(values[i]);
    return out;
}

std::vector<std::size_t> draw_indices(std::size_t n, Stream& rng) {
    std::vector<std::size_t> idx(n);
    for (auto& i : idx) i = static_cast<std::size_t>(rng.below(n));
    return idx;
}

double q_of(double slope, double xi) {
    return xi != 0 ? (1 + slope) / xi : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

WeightedGrid::WeightedGrid(const whitenoise::GridField& field, double xi, double shift)
    : d_(field.d), side_(field.side), spacing_(field.step), xi_(xi) {
    if (!(xi >= 0)) throw std::invalid_argument("WeightedGrid: xi must be nonnegative");
    if (field.values.empty()) throw std::invalid_argument("WeightedGrid: empty field");
    weights_.resize(field.values.size());
    for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] = std::exp(xi * (field.values[i] + shift));
}

std::size_t WeightedGrid::snap(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != d_) throw std::invalid_argument("WeightedGrid::snap: dimension mismatch");
    std::size_t idx = 0;
    for (std::size_t k = x.size(); k-- > 0;) {
        const double c = std::round(x[k] / spacing_);
        if (c < 0 || c > static_cast<double>(side_ - 1)) throw std::out_of_range("WeightedGrid::snap: point outside the grid");
        idx = idx * side_ + static_cast<std::size_t>(c);
    }
    return idx;
}

std::vector<std::size_t> WeightedGrid::coordinates(std::size_t index) const {
    std::vector<std::size_t> out(static_cast<std::size_t>(d_));
    for (auto& c : out) {
        c = index % side_;
        index /= side_;
    }
    return out;
}

double lfpp_distance(const WeightedGrid& grid, std::span<const std::size_t> sources, std::span<const std::size_t> targets) {
    if (sources.empty() || targets.empty()) throw std::invalid_argument("lfpp_distance: empty source or target set");
    const std::size_t n = grid.size();
    std::vector<char> is_target(n, 0);
    for (std::size_t t : targets) {
        if (t >= n) throw std::out_of_range("lfpp_distance: target outside the grid");
        is_target[t] = 1;
    }
    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::size_t s : sources) {
        if (s >= n) throw std::out_of_range("lfpp_distance: source outside the grid");
        if (is_target[s]) return 0.0;
        dist[s] = 0.0;
        heap.emplace(0.0, s);
    }
    const double half = 0.5 * grid.spacing();
    while (!heap.empty()) {
        const auto [du, u] = heap.top();
        heap.pop();
        if (du > dist[u]) continue;
        if (is_target[u]) return du;
        const double wu = grid.node_weight(u);
        grid.for_neighbors(u, [&](std::size_t v) {
            const double nd = du + half * (wu + grid.node_weight(v));
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        });
    }
    throw std::runtime_error("lfpp_distance: target unreachable");
}

double lfpp_distance(const WeightedGrid& grid, std::size_t source, std::size_t target) {
    return lfpp_distance(grid, std::span<const std::size_t>(&source, 1), std::span<const std::size_t>(&target, 1));
}

std::vector<std::size_t> slab_nodes(const WeightedGrid& grid, double lo, double hi) {
    std::vector<std::size_t> out;
    const double h = grid.spacing();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double x = static_cast<double>(i % grid.side()) * h;
        if (x >= lo - 1e-12 && x <= hi + 1e-12) out.push_back(i);
    }
    return out;
}

ExponentSweep exponent_fit(const ExponentFitParams& params) {
    if (params.levels.size() < 3) throw std::invalid_argument("exponent_fit: need at least three levels");
    if (!std::is_sorted(params.levels.begin(), params.levels.end()))
        throw std::invalid_argument("exponent_fit: levels must be ascending");
    if (params.replicas < 2) throw std::invalid_argument("exponent_fit: need at least two replicas");
    if (static_cast<int>(params.x.size()) != params.d || static_cast<int>(params.y.size()) != params.d)
        throw std::invalid_argument("exponent_fit: endpoints must have dimension d");
    if (params.xis.empty()) throw std::invalid_argument("exponent_fit: no xi values");

    ExponentSweep sweep;
    sweep.bootstrap_seed = mix(params.seed, 0xb007);
    sweep.fits.resize(params.xis.size());
    for (std::size_t a = 0; a < params.xis.size(); ++a) {
        sweep.fits[a].xi = params.xis[a];
        sweep.fits[a].levels = params.levels;
    }
    const double w = params.slab_width * params.extent;
    for (int n : params.levels) {
        const double step = std::ldexp(1.0, -n);
        const whitenoise::GridFieldSampler sampler(whitenoise::CovarianceSpec::level(params.d, n), params.extent, step,
                                                   params.time_nodes);
        sweep.discretization_error.push_back(sampler.discretization_error());
        std::vector<std::vector<double>> pp(params.xis.size()), ss(params.xis.size());
        for (std::size_t r = 0; r < params.replicas; ++r) {
            const auto field = sampler.sample(mix(params.seed, static_cast<std::uint64_t>(n), r));
            for (std::size_t a = 0; a < params.xis.size(); ++a) {
                const WeightedGrid grid(field, params.xis[a]);
                pp[a].push_back(lfpp_distance(grid, grid.snap(params.x), grid.snap(params.y)));
                const auto k1 = slab_nodes(grid, 0.0, w);
                const auto k2 = slab_nodes(grid, params.extent - w, params.extent);
                ss[a].push_back(lfpp_distance(grid, k1, k2));
            }
        }
        for (std::size_t a = 0; a < params.xis.size(); ++a) {
            auto& fit = sweep.fits[a];
            fit.median_pp.push_back(lower_median(pp[a]));
            fit.median_ss.push_back(lower_median(ss[a]));
            fit.distances_pp.push_back(std::move(pp[a]));
            fit.distances_ss.push_back(std::move(ss[a]));
        }
    }

    const std::vector<double> x(params.levels.begin(), params.levels.end());
    for (auto& fit : sweep.fits) {
        std::vector<double> ypp, yss;
        for (std::size_t l = 0; l < x.size(); ++l) {
            ypp.push_back(std::log2(fit.median_pp[l]));
            yss.push_back(std::log2(fit.median_ss[l]));
        }
        fit.point_to_point.slope = fit_slope(x, ypp);
        fit.set_to_set.slope = fit_slope(x, yss);
        std::vector<double> bpp, bss, bdiff;
        Stream rng(sweep.bootstrap_seed, 1);
        for (std::size_t b = 0; b < params.bootstrap; ++b) {
            std::vector<double> rpp, rss;
            for (std::size_t l = 0; l < x.size(); ++l) {
                const auto idx = draw_indices(params.replicas, rng);
                rpp.push_back(log2_median(resample(fit.distances_pp[l], idx)));
                rss.push_back(log2_median(resample(fit.distances_ss[l], idx)));
            }
            bpp.push_back(fit_slope(x, rpp));
            bss.push_back(fit_slope(x, rss));
            bdiff.push_back(bpp.back() - bss.back());
        }
        for (auto [sf, boot] : {std::pair{&fit.point_to_point, &bpp}, std::pair{&fit.set_to_set, &bss}}) {
            if (!boot->empty()) std::tie(sf->slope_lo, sf->slope_hi) = percentile_interval(*boot);
            sf->q_estimate = q_of(sf->slope, fit.xi);
            sf->q_lo = q_of(sf->slope_lo, fit.xi);
            sf->q_hi = q_of(sf->slope_hi, fit.xi);
        }
        if (!bdiff.empty()) std::tie(fit.diff_lo, fit.diff_hi) = percentile_interval(bdiff);
    }
    return sweep;
}

Interval q_difference(const ExponentFit& a, const ExponentFit& b, std::size_t bootstrap, std::uint64_t seed) {
    if (a.levels != b.levels) throw std::invalid_argument("q_difference: fits use different levels");
    if (a.xi == 0 || b.xi == 0) throw std::invalid_argument("q_difference: Q is undefined at xi = 0");
    if (bootstrap == 0) throw std::invalid_argument("q_difference: bootstrap must be positive");
    const std::vector<double> x(a.levels.begin(), a.levels.end());
    Stream rng(seed, 2);
    std::vector<double> diffs;
    for (std::size_t r = 0; r < bootstrap; ++r) {
        std::vector<double> ya, yb;
        for (std::size_t l = 0; l < x.size(); ++l) {
            const auto idx = draw_indices(a.distances_pp[l].size(), rng);
            ya.push_back(log2_median(resample(a.distances_pp[l], idx)));
            yb.push_back(log2_median(resample(b.distances_pp[l], idx)));
        }
        diffs.push_back(q_of(fit_slope(x, yb), b.xi) - q_of(fit_slope(x, ya), a.xi));
    }
    const auto [lo, hi] = percentile_interval(std::move(diffs));
    return {lo, hi};
}

namespace {

struct Subsample {
    std::vector<std::size_t> indices;
    std::size_t stride = 1;
};

Subsample subsample(std::size_t length, std::size_t budget) {
    if (budget < 2) throw std::invalid_argument("corridor: max_joint must be at least 2");
    Subsample s;
    if (length > budget) s.stride = (length - 1 + budget - 2) / (budget - 1);
    for (std::size_t i = 0; i + 1 < length; i += s.stride) s.indices.push_back(i);
    s.indices.push_back(length - 1);
    return s;
}

double trapezoid_cost(const std::vector<std::size_t>& idx, std::span<const double> h, double xi, double spacing) {
    double cost = 0;
    for (std::size_t i = 0; i + 1 < idx.size(); ++i) {
        const double steps = static_cast<double>(idx[i + 1] - idx[i]);
        cost += steps * spacing * 0.5 * (std::exp(xi * h[i]) + std::exp(xi * h[i + 1]));
    }
    return cost;
}

CorridorResult corridor_with_table(const CorridorParams& params, const whitenoise::CovarianceTable* table) {
    if (params.path_samples == 0) throw std::invalid_argument("corridor_upper_bound: path_samples must be positive");
    if (params.shared_field && params.path_samples > 20)
        throw std::invalid_argument("corridor_upper_bound: shared-field mode is limited to 20 paths");
    CorridorResult result;
    result.min_cost = std::numeric_limits<double>::infinity();
    const std::size_t budget = params.shared_field ? params.max_joint / params.path_samples : params.max_joint;

    std::vector<paths::Chain> chains;
    std::vector<Subsample> subs;
    for (std::size_t i = 0; i < params.path_samples; ++i) {
        auto chain = paths::sample_refined_chain(params.d, params.M, params.n, PathFamily::zigzag,
                                                 mix(params.seed, i, 0x70617468), params.refinement);
        const Path& fine = chain.levels.back();
        if (i == 0) {
            result.path_length = fine.size();
            result.euclidean_length = static_cast<double>(fine.size() - 1) * fine.spacing();
            result.canonical = chain.canonical;
        }
        subs.push_back(subsample(fine.size(), budget));
        result.stride = std::max(result.stride, subs.back().stride);
        result.subsampled = result.subsampled || subs.back().stride > 1;
        if (params.shared_field) {
            chains.push_back(std::move(chain));
            continue;
        }
        PointSet pts(params.d);
        for (std::size_t k : subs.back().indices) pts.push_back(fine.position(k));
        result.field_points = std::max(result.field_points, pts.size());
        std::vector<double> h(pts.size(), 0.0);
        if (table) {
            const whitenoise::PointFieldSampler sampler(std::move(pts), *table, params.max_joint);
            h = sampler.sample(mix(params.seed, i, 0x6669656c64)).values;
        }
        const double cost = trapezoid_cost(subs.back().indices, h, params.xi, fine.spacing());
        result.costs.push_back(cost);
        result.min_cost = std::min(result.min_cost, cost);
    }
    if (!params.shared_field) return result;

    // One joint field over the union of all sampled vertices; shared vertices get one value.
    std::map<std::vector<std::int64_t>, std::size_t> slot;
    PointSet pts(params.d);
    std::vector<std::vector<std::size_t>> where(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) {
        const Path& fine = chains[i].levels.back();
        for (std::size_t k : subs[i].indices) {
            const auto v = fine.vertex(k);
            const auto [it, inserted] = slot.emplace(std::vector<std::int64_t>(v.begin(), v.end()), pts.size());
            if (inserted) pts.push_back(fine.position(k));
            where[i].push_back(it->second);
        }
    }
    result.field_points = pts.size();
    std::vector<double> values(pts.size(), 0.0);
    if (table) {
        const whitenoise::PointFieldSampler sampler(std::move(pts), *table, params.max_joint);
        values = sampler.sample(mix(params.seed, 0, 0x736861726564)).values;
    }
    for (std::size_t i = 0; i < chains.size(); ++i) {
        std::vector<double> h;
        for (std::size_t s : where[i]) h.push_back(values[s]);
        const double cost = trapezoid_cost(subs[i].indices, h, params.xi, chains[i].levels.back().spacing());
        result.costs.push_back(cost);
        result.min_cost = std::min(result.min_cost, cost);
    }
    return result;
}

int resolved_field_level(const CorridorParams& params) { return params.field_level < 0 ? params.n : params.field_level; }

std::unique_ptr<whitenoise::CovarianceTable> table_for(const CorridorParams& params) {
    const int level = resolved_field_level(params);
    if (level == 0) return nullptr;
    return std::make_unique<whitenoise::CovarianceTable>(whitenoise::CovarianceSpec::level(params.d, level));
}

}  // namespace

CorridorResult corridor_upper_bound(const CorridorParams& params) {
    if (params.n < 0) throw std::invalid_argument("corridor_upper_bound: n must be nonnegative");
    const auto table = table_for(params);
    return corridor_with_table(params, table.get());
}

CorridorSweep corridor_sweep(CorridorParams params, const std::vector<int>& levels, std::size_t repetitions) {
    if (levels.size() < 2) throw std::invalid_argument("corridor_sweep: need at least two levels");
    if (repetitions == 0) throw std::invalid_argument("corridor_sweep: repetitions must be positive");
    CorridorSweep sweep;
    sweep.levels = levels;
    std::vector<std::unique_ptr<whitenoise::CovarianceTable>> tables;
    for (int n : levels) {
        params.n = n;
        tables.push_back(table_for(params));
    }
    const std::uint64_t base = params.seed;
    const std::vector<double> x(levels.begin(), levels.end());
    RunningStats slopes;
    for (std::size_t r = 0; r < repetitions; ++r) {
        std::vector<double> y;
        std::vector<CorridorResult> results;
        for (std::size_t l = 0; l < levels.size(); ++l) {
            params.n = levels[l];
            params.seed = mix(base, r, static_cast<std::uint64_t>(levels[l]));
            results.push_back(corridor_with_table(params, tables[l].get()));
            y.push_back(std::log2(results.back().min_cost));
        }
        sweep.log2_min_cost.push_back(y);
        sweep.slopes.push_back(fit_slope(x, y));
        slopes.add(sweep.slopes.back());
        if (r + 1 == repetitions) sweep.last = std::move(results);
    }
    sweep.mean_slope = slopes.mean();
    sweep.slope_std_error = repetitions > 1 ? slopes.std_error() : 0.0;
    const double half = repetitions > 1 ? student_t_975(repetitions - 1) * sweep.slope_std_error : 0.0;
    sweep.slope_ci_lo = sweep.mean_slope - half;
    sweep.slope_ci_hi = sweep.mean_slope + half;
    return sweep;
}

}  // namespace loglab::metric
