#include <cmath>

#include "common.hpp"
#include "loglab/metric.hpp"
#include "loglab/random.hpp"

namespace loglab::runner::detail {

namespace {

metric::ExponentFitParams fit_params(const Json& p, std::uint64_t seed) {
    metric::ExponentFitParams f;
    f.d = p.at("d").get<int>();
    f.levels = list<int>(p.at("levels"));
    f.replicas = p.at("replicas").get<std::size_t>();
    f.extent = p.at("extent").get<double>();
    f.time_nodes = p.at("time_nodes").get<int>();
    f.x = list<double>(p.at("x"));
    f.y = list<double>(p.at("y"));
    f.slab_width = p.at("slab_width").get<double>();
    f.bootstrap = p.at("bootstrap").get<std::size_t>();
    f.seed = seed;
    return f;
}

void add_fit_tables(const metric::ExponentSweep& sweep, Outcome& out, const std::string& prefix) {
    Table medians(prefix + "_medians", {"xi", "level", "median_point_to_point", "median_set_to_set", "discretization_error"});
    Table raw(prefix + "_distances", {"xi", "level", "replica", "point_to_point", "set_to_set"});
    Table slopes(prefix + "_slopes", {"xi", "kind", "slope", "slope_lo", "slope_hi", "q_estimate", "q_lo", "q_hi"});
    for (const auto& fit : sweep.fits) {
        for (std::size_t l = 0; l < fit.levels.size(); ++l) {
            medians.add({fit.xi, std::int64_t{fit.levels[l]}, fit.median_pp[l], fit.median_ss[l], sweep.discretization_error[l]});
            for (std::size_t r = 0; r < fit.distances_pp[l].size(); ++r)
                raw.add({fit.xi, std::int64_t{fit.levels[l]}, static_cast<std::int64_t>(r), fit.distances_pp[l][r], fit.distances_ss[l][r]});
        }
        for (auto [kind, s] : {std::pair{"point_to_point", &fit.point_to_point}, std::pair{"set_to_set", &fit.set_to_set}})
            slopes.add({fit.xi, std::string(kind), s->slope, s->slope_lo, s->slope_hi, s->q_estimate, s->q_lo, s->q_hi});
    }
    out.tables.push_back(std::move(medians));
    out.tables.push_back(std::move(raw));
    out.tables.push_back(std::move(slopes));
}

Json fit_json(const metric::ExponentFit& fit) {
    auto slope = [](const metric::SlopeFit& s) {
        return Json{{"slope", s.slope}, {"slope_ci", {s.slope_lo, s.slope_hi}}, {"q_estimate", s.q_estimate}, {"q_ci", {s.q_lo, s.q_hi}}};
    };
    return {{"xi", fit.xi},
            {"median_point_to_point", fit.median_pp},
            {"median_set_to_set", fit.median_ss},
            {"point_to_point", slope(fit.point_to_point)},
            {"set_to_set", slope(fit.set_to_set)},
            {"difference_ci", {fit.diff_lo, fit.diff_hi}}};
}

void zero_slope_section(const Json& p, const Context& context, Outcome& out) {
    auto params = fit_params(p, context.derive("zero_slope"));
    params.xis = {0.0};
    const auto sweep = metric::exponent_fit(params);
    const auto& fit = sweep.fits[0];
    out.results["zero_slope"] = fit_json(fit);
    out.check("xi_zero_slope", fit.point_to_point.slope == 0.0 && fit.set_to_set.slope == 0.0,
              strf("point-to-point slope %.17g, set-to-set slope %.17g", fit.point_to_point.slope, fit.set_to_set.slope));
    add_fit_tables(sweep, out, "zero_slope");
}

void metric_properties_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), n = p.at("n").get<int>();
    const auto fields = p.at("fields").get<std::size_t>();
    const auto triples = p.at("triples").get<std::size_t>();
    const double tol = p.at("tolerance").get<double>();
    const auto xis = list<double>(p.at("xis"));
    const auto shifts = list<double>(p.at("shifts"));
    const whitenoise::GridFieldSampler sampler(whitenoise::CovarianceSpec::level(d, n), 1.0, std::ldexp(1.0, -n));
    Table table("weyl_scaling", {"field", "xi", "shift", "distance", "shifted_distance", "relative_error"});
    double weyl = 0.0, asym = 0.0, triangle = 0.0;
    for (std::size_t f = 0; f < fields; ++f) {
        const auto field = sampler.sample(context.derive("weyl_field", f));
        Stream rng(context.derive("weyl_points", f));
        const std::size_t nodes = field.size();
        for (double xi : xis) {
            const metric::WeightedGrid grid(field, xi);
            const std::size_t s = rng.below(nodes), t = rng.below(nodes);
            const double base = metric::lfpp_distance(grid, s, t);
            for (double c : shifts) {
                const metric::WeightedGrid shifted(field, xi, c);
                const double D = metric::lfpp_distance(shifted, s, t);
                const double err = base > 0 ? std::abs(D / (base * std::exp(xi * c)) - 1) : std::abs(D);
                weyl = std::max(weyl, err);
                table.add({static_cast<std::int64_t>(f), xi, c, base, D, err});
            }
            for (std::size_t i = 0; i < triples; ++i) {
                const std::size_t a = rng.below(nodes), b = rng.below(nodes), c = rng.below(nodes);
                const double ab = metric::lfpp_distance(grid, a, b), ba = metric::lfpp_distance(grid, b, a);
                const double bc = metric::lfpp_distance(grid, b, c), ac = metric::lfpp_distance(grid, a, c);
                if (ab > 0) asym = std::max(asym, std::abs(ab - ba) / ab);
                if (ac > 0) triangle = std::max(triangle, (ac - ab - bc) / ac);
            }
        }
    }
    out.results["metric_properties"] = {{"weyl_max_relative_error", weyl}, {"asymmetry", asym}, {"triangle_excess", triangle}};
    out.check("weyl_scaling", weyl <= tol, strf("max |D(h + c) / (e^{xi c} D(h)) - 1| = %.3g (tolerance %g)", weyl, tol));
    out.check("distance_symmetric", asym <= tol, strf("max relative asymmetry %.3g", asym));
    out.check("triangle_inequality", triangle <= tol, strf("max relative excess %.3g", triangle));
    out.tables.push_back(std::move(table));
}

void fit_section(const Json& p, const Context& context, Outcome& out) {
    auto params = fit_params(p, context.derive("fit"));
    const double compare_xi = p.at("compare_xi").get<double>();
    const auto q_xis = list<double>(p.at("q_xis"));
    params.xis = {compare_xi};
    for (double xi : q_xis)
        if (xi != compare_xi) params.xis.push_back(xi);
    std::sort(params.xis.begin(), params.xis.end());
    const auto sweep = metric::exponent_fit(params);
    auto find = [&](double xi) -> const metric::ExponentFit& {
        for (const auto& f : sweep.fits)
            if (f.xi == xi) return f;
        throw std::logic_error("fit for xi missing");
    };
    for (const auto& f : sweep.fits) out.results["fit"]["fits"].push_back(fit_json(f));
    out.results["fit"]["discretization_error"] = sweep.discretization_error;

    const auto& cmp = find(compare_xi);
    out.check(strf("point_vs_set_slopes_xi%g", compare_xi), cmp.diff_lo <= 0 && 0 <= cmp.diff_hi,
              strf("slopes %.4f vs %.4f; bootstrap interval of the difference [%.4f, %.4f]", cmp.point_to_point.slope,
                   cmp.set_to_set.slope, cmp.diff_lo, cmp.diff_hi));
    const auto boot = p.at("bootstrap").get<std::size_t>();
    for (std::size_t i = 0; i + 1 < q_xis.size(); ++i) {
        const auto& a = find(q_xis[i]);
        const auto& b = find(q_xis[i + 1]);
        const auto iv = metric::q_difference(a, b, boot, context.derive("q_difference", i));
        out.results["fit"]["q_differences"].push_back({{"from", a.xi}, {"to", b.xi}, {"ci", {iv.lo, iv.hi}}});
        out.check(strf("q_nonincreasing_xi%g_to_xi%g", a.xi, b.xi), iv.lo <= 0,
                  strf("Q %.4f -> %.4f; bootstrap interval of the change [%.4f, %.4f]", a.point_to_point.q_estimate,
                       b.point_to_point.q_estimate, iv.lo, iv.hi));
    }
    add_fit_tables(sweep, out, "fit");
}

Outcome run_lfpp(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "zero_slope")) zero_slope_section(params.at("zero_slope"), context, out);
    if (enabled(params, "metric_properties")) metric_properties_section(params.at("metric_properties"), context, out);
    if (enabled(params, "fit")) fit_section(params.at("fit"), context, out);
    return out;
}

metric::CorridorParams corridor_params(const Json& p, std::uint64_t seed) {
    metric::CorridorParams c;
    c.d = p.at("d").get<int>();
    c.M = p.at("M").get<int>();
    c.xi = p.at("xi").get<double>();
    c.path_samples = p.at("path_samples").get<std::size_t>();
    c.max_joint = p.at("max_joint").get<std::size_t>();
    c.shared_field = p.at("shared_field").get<bool>();
    c.field_level = p.at("field_level").get<int>();
    c.refinement = refinement(p);
    c.seed = seed;
    return c;
}

void add_sweep(const std::string& name, const metric::CorridorSweep& sweep, Outcome& out) {
    Table table(name, {"repetition", "level", "log2_min_cost"});
    for (std::size_t r = 0; r < sweep.log2_min_cost.size(); ++r)
        for (std::size_t l = 0; l < sweep.levels.size(); ++l)
            table.add({static_cast<std::int64_t>(r), std::int64_t{sweep.levels[l]}, sweep.log2_min_cost[r][l]});
    Table last(name + "_last", {"level", "min_cost", "path_length", "field_points", "stride", "subsampled", "canonical"});
    for (std::size_t l = 0; l < sweep.last.size(); ++l) {
        const auto& c = sweep.last[l];
        last.add({std::int64_t{sweep.levels[l]}, c.min_cost, static_cast<std::int64_t>(c.path_length),
                  static_cast<std::int64_t>(c.field_points), static_cast<std::int64_t>(c.stride), std::int64_t{c.subsampled},
                  std::int64_t{c.canonical}});
    }
    out.tables.push_back(std::move(table));
    out.tables.push_back(std::move(last));
}

Json sweep_json(const metric::CorridorSweep& s) {
    return {{"levels", s.levels},
            {"slopes", s.slopes},
            {"mean_slope", s.mean_slope},
            {"slope_std_error", s.slope_std_error},
            {"slope_ci", {s.slope_ci_lo, s.slope_ci_hi}},
            {"subsampled", !s.last.empty() && s.last.back().subsampled},
            {"canonical", !s.last.empty() && s.last.back().canonical}};
}

Outcome run_corridor(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "negative_slope")) {
        const Json& p = params.at("negative_slope");
        const auto sweep = metric::corridor_sweep(corridor_params(p, context.derive("corridor")), list<int>(p.at("levels")),
                                                  p.at("repetitions").get<std::size_t>());
        out.results["negative_slope"] = sweep_json(sweep);
        out.check("corridor_slope_negative", sweep.slope_ci_hi < 0,
                  strf("mean slope of log2 min cost %.4f, 95%% interval [%.4f, %.4f] over %zu repetitions", sweep.mean_slope,
                       sweep.slope_ci_lo, sweep.slope_ci_hi, sweep.slopes.size()));
        add_sweep("corridor_sweep", sweep, out);
    }
    if (enabled(params, "deterministic_slope")) {
        const Json& p = params.at("deterministic_slope");
        const double target = p.at("target").get<double>(), tol = p.at("tolerance").get<double>();
        const auto sweep = metric::corridor_sweep(corridor_params(p, context.derive("corridor_xi0")), list<int>(p.at("levels")), 1);
        out.results["deterministic_slope"] = sweep_json(sweep);
        out.results["deterministic_slope"]["target"] = target;
        out.check("corridor_slope_at_zero_xi", std::abs(sweep.mean_slope - target) <= tol,
                  strf("slope %.6f vs target %.6f (tolerance %g)", sweep.mean_slope, target, tol));
        add_sweep("corridor_zero_xi", sweep, out);
    }
    return out;
}

Json corridor_defaults(double xi) {
    return {{"d", 50}, {"M", 10}, {"xi", xi}, {"levels", {1, 2, 3}}, {"path_samples", std::size_t{4}},
            {"max_joint", std::size_t{1500}}, {"shared_field", false}, {"field_level", -1}, {"tube_paths", 0}, {"branching", 1}};
}

}  // namespace

Experiment lfpp_exponent() {
    Experiment e;
    e.name = "lfpp_exponent";
    e.summary = "Exponential-metric distances on d = 2 grids: scaling exponents, Weyl scaling, metric properties";
    const Json fit_base = {{"d", 2},           {"levels", {5, 6, 7, 8}}, {"replicas", std::size_t{100}}, {"extent", 1.0},
                           {"time_nodes", 4},  {"x", {0.25, 0.5}},       {"y", {0.75, 0.5}},             {"slab_width", 0.125},
                           {"bootstrap", std::size_t{1000}}};
    Json zero = fit_base;
    zero["replicas"] = std::size_t{3};
    zero["bootstrap"] = std::size_t{10};
    Json fit = fit_base;
    fit["compare_xi"] = 0.4;
    fit["q_xis"] = {0.2, 0.5, 0.8};
    e.defaults = {
        {"sections", {"zero_slope", "metric_properties", "fit"}},
        {"zero_slope", zero},
        {"metric_properties",
         {{"d", 2}, {"n", 5}, {"fields", std::size_t{3}}, {"triples", std::size_t{100}}, {"xis", {0.4, 1.0}}, {"shifts", {-1.0, 0.5, 2.0}}, {"tolerance", 1e-12}}},
        {"fit", fit},
    };
    e.choices["sections"] = {"zero_slope", "metric_properties", "fit"};
    e.run = run_lfpp;
    return e;
}

Experiment corridor_bound() {
    Experiment e;
    e.name = "corridor_bound";
    e.summary = "Upper bound on high-dimensional distances from the cheapest sampled zigzag corridor";
    Json neg = corridor_defaults(5.0);
    neg["repetitions"] = std::size_t{20};
    Json det = corridor_defaults(0.0);
    det["target"] = std::log2(11.0 / 8.0);
    det["tolerance"] = 0.05;
    e.defaults = {{"sections", {"negative_slope", "deterministic_slope"}}, {"negative_slope", neg}, {"deterministic_slope", det}};
    e.choices["sections"] = {"negative_slope", "deterministic_slope"};
    e.run = run_corridor;
    return e;
}

}  // namespace loglab::runner::detail
