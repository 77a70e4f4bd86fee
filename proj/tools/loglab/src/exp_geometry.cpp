#include <cmath>
#include <limits>

#include "common.hpp"
#include "loglab/geometry.hpp"

namespace loglab::runner::detail {

namespace {

// Largest c in (0, 1] with log r <= log(1/c) - c d u^2 on every row; feasibility is monotone in c.
double fit_gaussian_constant(const std::vector<double>& log_r, const std::vector<double>& du2) {
    auto feasible = [&](double c) {
        for (std::size_t i = 0; i < log_r.size(); ++i)
            if (log_r[i] > -std::log(c) - c * du2[i]) return false;
        return true;
    };
    if (feasible(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (feasible(mid) ? lo : hi) = mid;
    }
    return lo;
}

Outcome run(const Json& params, const Context& context) {
    Outcome out;

    Table zero("zero_distance", {"d", "t", "ratio"});
    for (int d : {1, 2, 3, 7, 64})
        for (double t : {0.5, 1.0, 2.0}) zero.add({std::int64_t{d}, t, geometry::intersection_ratio(0.0, t, d)});
    bool zero_ok = true;
    for (const auto& row : zero.rows) zero_ok = zero_ok && std::get<double>(row[2]) == 1.0;
    out.check("zero_distance_ratio", zero_ok, "intersection_ratio(0, t, d) == 1 on every row");
    out.tables.push_back(std::move(zero));

    if (enabled(params, "monotone")) {
        const Json& p = params.at("monotone");
        const int points = p.at("points").get<int>();
        const double tol = p.at("tolerance").get<double>();
        Table table("monotone", {"d", "t", "u", "ratio"});
        double worst = 0.0;
        for (int d : list<int>(p.at("dims")))
            for (double t : list<double>(p.at("radii"))) {
                double prev = 1.0;
                for (int i = 0; i < points; ++i) {
                    const double u = 2.0 * t * i / (points - 1);
                    const double r = geometry::intersection_ratio(u, t, d);
                    worst = std::max(worst, r - prev);
                    prev = r;
                    table.add({std::int64_t{d}, t, u, r});
                }
            }
        out.results["monotone"] = {{"largest_increase", worst}};
        out.check("monotone_in_u", worst <= tol, strf("largest increase %.3g (tolerance %.1g)", worst, tol));
        out.tables.push_back(std::move(table));
    }

    if (enabled(params, "floor")) {
        const Json& p = params.at("floor");
        const auto dims = list<int>(p.at("dims"));
        const double factor = p.at("factor").get<double>();
        Table table("floor", {"t", "tau", "d", "u", "ratio"});
        double floor = std::numeric_limits<double>::infinity();
        bool stable = true;
        std::string detail;
        for (double t : list<double>(p.at("radii")))
            for (double tau : list<double>(p.at("taus"))) {
                std::vector<double> ratios;
                for (int d : dims) {
                    const double u = t * tau / std::sqrt(static_cast<double>(d));
                    const double r = geometry::intersection_ratio(u, t, d);
                    ratios.push_back(r);
                    floor = std::min(floor, r);
                    table.add({t, tau, std::int64_t{d}, u, r});
                }
                if (ratios.back() < factor * ratios.front()) {
                    stable = false;
                    detail += strf(" t=%g tau=%g: %.4g < %g * %.4g;", t, tau, ratios.back(), factor, ratios.front());
                }
            }
        out.results["floor"] = {{"floor", floor}};
        out.check("positive_floor", floor > 0, strf("smallest ratio at u = t tau / sqrt(d): %.6g", floor));
        out.check("floor_stable_in_d", stable,
                  stable ? strf("ratio at d=%d >= %g x ratio at d=%d for every (t, tau)", dims.back(), factor, dims.front())
                         : detail);
        out.tables.push_back(std::move(table));
    }

    if (enabled(params, "gaussian_bound")) {
        const Json& p = params.at("gaussian_bound");
        const int points = p.at("points").get<int>();
        std::vector<double> log_r, du2;
        Table table("gaussian_bound", {"d", "u", "log_ratio"});
        for (int d : list<int>(p.at("dims")))
            for (int i = 1; i <= points; ++i) {
                const double u = 2.0 * i / (points + 1);
                const double r = geometry::intersection_ratio(u, 1.0, d);
                const double lr = r > 0 ? std::log(r) : -std::numeric_limits<double>::infinity();
                log_r.push_back(lr);
                du2.push_back(d * u * u);
                table.add({std::int64_t{d}, u, lr});
            }
        const double c3 = fit_gaussian_constant(log_r, du2);
        out.results["gaussian_bound"] = {{"c3", c3}};
        out.check("gaussian_upper_bound_constant", c3 > 0 && std::isfinite(c3),
                  strf("largest c3 with log ratio <= log(1/c3) - c3 d u^2 on the grid: %.6g", c3));
        out.tables.push_back(std::move(table));
    }

    if (enabled(params, "surface_ratio")) {
        const Json& p = params.at("surface_ratio");
        const double lo = p.at("lo").get<double>(), hi = p.at("hi").get<double>();
        Table table("surface_ratio", {"d", "ratio", "ratio_over_sqrt_d"});
        bool ok = true;
        for (int d : list<int>(p.at("dims"))) {
            const double r = geometry::surface_to_volume_ratio(d);
            const double s = r / std::sqrt(static_cast<double>(d));
            ok = ok && s >= lo && s <= hi;
            table.add({std::int64_t{d}, r, s});
        }
        out.check("surface_ratio_bracket", ok, strf("ratio / sqrt(d) within [%g, %g]", lo, hi));
        out.tables.push_back(std::move(table));
    }

    if (enabled(params, "union_volume")) {
        const Json& p = params.at("union_volume");
        const auto seeds = p.at("seeds").get<std::size_t>();
        const auto samples = p.at("samples").get<std::size_t>();
        const double allowed = p.at("max_failure_fraction").get<double>();
        Table table("union_volume", {"d", "seed", "estimate", "std_error", "exact"});
        std::size_t failures = 0, total = 0;
        for (int d : list<int>(p.at("dims"))) {
            geometry::BoxRegion region{std::vector<double>(static_cast<std::size_t>(d), 0.0), 0.5};
            const double t = region.half_width / 10;
            PointSet centers(d, std::vector<double>(static_cast<std::size_t>(d), 0.0));
            const double exact = geometry::ball_volume(d, t);
            for (std::size_t s = 0; s < seeds; ++s) {
                const std::uint64_t seed = context.derive("union_volume", s * 1000 + static_cast<std::uint64_t>(d));
                const auto est = geometry::union_ball_region_volume(centers, t, region, samples, seed);
                const bool ok = std::abs(est.estimate - exact) <= 4 * est.std_error + 1e-12 * exact;
                failures += ok ? 0 : 1;
                ++total;
                table.add({std::int64_t{d}, static_cast<std::int64_t>(s), est.estimate, est.std_error, exact});
            }
        }
        const double fraction = total ? static_cast<double>(failures) / static_cast<double>(total) : 0.0;
        out.results["union_volume"] = {{"failures", failures}, {"trials", total}};
        out.check("union_volume_single_ball", fraction <= allowed,
                  strf("%zu of %zu seeds outside 4 stderr (allowed fraction %g)", failures, total, allowed));
        out.tables.push_back(std::move(table));
    }
    return out;
}

}  // namespace

Experiment geometry_checks() {
    Experiment e;
    e.name = "geometry_checks";
    e.summary = "Ball intersection ratios: monotonicity, high-dimensional floor, Gaussian decay constant, volumes";
    e.defaults = {
        {"sections", {"monotone", "floor", "gaussian_bound", "surface_ratio", "union_volume"}},
        {"monotone", {{"dims", {1, 2, 3, 8, 16, 64, 256}}, {"radii", {0.5, 1.0, 2.0, 5.0}}, {"points", 100}, {"tolerance", 1e-9}}},
        {"floor", {{"radii", {1.0, 2.0, 5.0}}, {"taus", {0.5, 1.0}}, {"dims", {16, 64, 256}}, {"factor", 0.5}}},
        {"gaussian_bound", {{"dims", {8, 16, 32, 64, 128, 256}}, {"points", 50}}},
        {"surface_ratio", {{"dims", {2, 3, 10, 100, 400}}, {"lo", 0.3}, {"hi", 0.5}}},
        {"union_volume", {{"dims", {2, 3, 5}}, {"seeds", std::size_t{100}}, {"samples", std::size_t{2000}}, {"max_failure_fraction", 0.01}}},
    };
    e.choices["sections"] = {"monotone", "floor", "gaussian_bound", "surface_ratio", "union_volume"};
    e.run = run;
    return e;
}

}  // namespace loglab::runner::detail
