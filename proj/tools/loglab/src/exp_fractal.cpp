#include <cmath>

#include "common.hpp"
#include "loglab/fractal.hpp"
#include "loglab/random.hpp"

namespace loglab::runner::detail {

namespace {

fractal::Connectivity connectivity(const Json& p) {
    return p.at("mode").get<std::string>() == "half_open" ? fractal::Connectivity::half_open : fractal::Connectivity::closed;
}

// Exact depth-1 crossing probability by enumerating all child subsets of a retained root.
double depth_one_exact(int d, double p, fractal::Connectivity mode) {
    const unsigned children = 1u << d;
    double total = 0.0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << children); ++mask) {
        fractal::RetainedTree tree;
        tree.d = d;
        tree.depth = 1;
        tree.window = 1;
        tree.p = p;
        tree.boxes.assign(2, {});
        tree.parent.assign(2, {});
        tree.boxes[0].assign(static_cast<std::size_t>(d), 0);
        tree.parent[0].push_back(0);
        int kept = 0;
        for (unsigned c = 0; c < children; ++c) {
            if (!(mask >> c & 1)) continue;
            ++kept;
            for (int k = 0; k < d; ++k) tree.boxes[1].push_back((c >> k) & 1);
            tree.parent[1].push_back(0);
        }
        if (fractal::has_crossing(tree, 0, mode))
            total += p * std::pow(p, kept) * std::pow(1 - p, static_cast<int>(children) - kept);
    }
    return total;
}

void depth1_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>();
    const double prob = p.at("p").get<double>();
    const auto samples = p.at("samples").get<std::size_t>();
    const double mult = p.at("stderr_multiplier").get<double>();
    const auto mode = connectivity(p);
    const double exact = depth_one_exact(d, prob, mode);
    const auto est = fractal::crossing_probability(d, prob, 1, 1, samples, context.derive("depth1"), mode);
    const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(samples));
    out.results["depth1"] = {{"rate", est.rate}, {"std_error", est.std_error}, {"ci", {est.ci_lo, est.ci_hi}}, {"exact", exact}};
    out.check("depth1_crossing_rate", std::abs(est.rate - exact) <= mult * se,
              strf("rate %.5f vs exact enumeration %.5f (binomial stderr %.5f, %zu samples)", est.rate, exact, se, samples));
}

void survival_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), depth = p.at("depth").get<int>();
    const double prob = p.at("p").get<double>(), tol = p.at("tolerance").get<double>();
    const auto samples = p.at("samples").get<std::size_t>();
    const double exact = fractal::survival_probability(d, prob);
    Table table("survival", {"depth", "rate", "std_error"});
    bool decreasing = true;
    double prev = 1.0;
    fractal::RateEstimate last;
    for (int n = 1; n <= depth; ++n) {
        // One seed for all depths so the truncated survival events are nested.
        last = fractal::truncated_survival(d, prob, n, samples, context.derive("survival"));
        decreasing = decreasing && last.rate <= prev;
        prev = last.rate;
        table.add({std::int64_t{n}, last.rate, last.std_error});
    }
    out.results["survival"] = {{"fixed_point", exact}, {"truncated", last.rate}, {"std_error", last.std_error}};
    out.check("survival_fixed_point", std::abs(last.rate - exact) <= tol,
              strf("depth-%d survival %.5f vs fixed point %.5f (tolerance %g)", depth, last.rate, exact, tol));
    out.check("survival_decreasing_in_depth", decreasing, "truncated survival nonincreasing in depth");
    out.tables.push_back(std::move(table));
}

void trend_section(const Json& p, const Context& context, Outcome& out) {
    const auto dims = list<int>(p.at("dims"));
    const double prob = p.at("p").get<double>(), z = p.at("z").get<double>();
    const int depth = p.at("depth").get<int>();
    const auto samples = p.at("samples").get<std::size_t>();
    const auto mode = connectivity(p);
    Table table("crossing_trend", {"d", "p", "depth", "rate", "std_error", "ci_lo", "ci_hi"});
    std::vector<fractal::RateEstimate> est;
    for (int d : dims) {
        est.push_back(fractal::crossing_probability(d, prob, depth, 1, samples, context.derive("trend", static_cast<std::uint64_t>(d)), mode));
        const auto& e = est.back();
        table.add({std::int64_t{d}, prob, std::int64_t{depth}, e.rate, e.std_error, e.ci_lo, e.ci_hi});
        out.results["trend"].push_back({{"d", d}, {"rate", e.rate}, {"std_error", e.std_error}});
    }
    for (std::size_t i = 0; i + 1 < est.size(); ++i) {
        const double diff = est[i + 1].rate - est[i].rate;
        const double se = std::hypot(est[i].std_error, est[i + 1].std_error);
        out.check(strf("crossing_nondecreasing_d%d_to_d%d", dims[i], dims[i + 1]), diff >= -z * se,
                  strf("rate %.4f -> %.4f; difference %.4f vs -%g x %.4f", est[i].rate, est[i + 1].rate, diff, z, se));
    }
    out.tables.push_back(std::move(table));
}

void coupling_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), depth = p.at("depth").get<int>();
    const auto samples = p.at("samples").get<std::size_t>();
    const auto ps = list<double>(p.at("p_values"));
    std::vector<std::size_t> monotone(samples, 0), mode_order(samples, 0), parent(samples, 0);
    parallel_for(samples, context.threads, [&](std::size_t s) {
        const std::uint64_t seed = context.derive("coupling", s);
        bool prev = false;
        for (double prob : ps) {
            const auto tree = fractal::sample_retained(d, prob, depth, 1, seed);
            const bool closed = fractal::has_crossing(tree, 0, fractal::Connectivity::closed);
            const bool half = fractal::has_crossing(tree, 0, fractal::Connectivity::half_open);
            if (prev && !closed) ++monotone[s];
            if (half && !closed) ++mode_order[s];
            prev = closed;
            for (int j = 1; j <= depth; ++j)
                for (std::size_t i = 0; i < tree.count(j); ++i) {
                    const auto child = tree.box(j, i);
                    const auto par = tree.box(j - 1, tree.parent[j][i]);
                    for (int k = 0; k < d; ++k)
                        if ((child[k] >> 1) != par[k]) {
                            ++parent[s];
                            break;
                        }
                }
        }
    });
    std::size_t m = 0, o = 0, r = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        m += monotone[s];
        o += mode_order[s];
        r += parent[s];
    }
    out.results["coupling"] = {{"monotonicity_violations", m}, {"half_open_without_closed", o}, {"parent_violations", r}};
    out.check("coupled_monotone_in_p", m == 0, strf("%zu samples lose a crossing as p grows", m));
    out.check("half_open_implies_closed", o == 0, strf("%zu samples cross in half_open mode but not in closed mode", o));
    out.check("parent_constraint", r == 0, strf("%zu retained boxes without their parent", r));
}

Outcome run_crossing(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "depth1")) depth1_section(params.at("depth1"), context, out);
    if (enabled(params, "survival")) survival_section(params.at("survival"), context, out);
    if (enabled(params, "trend")) trend_section(params.at("trend"), context, out);
    if (enabled(params, "coupling")) coupling_section(params.at("coupling"), context, out);
    return out;
}

Outcome run_pc(const Json& p, const Context& context) {
    Outcome out;
    const int depth = p.at("depth").get<int>();
    const auto samples = p.at("samples").get<std::size_t>();
    const double tol = p.at("tolerance").get<double>();
    Table table("pc", {"d", "depth", "pc_estimate", "ci_lo", "ci_hi", "samples"});
    Table thresholds("thresholds", {"d", "threshold"});
    for (int d : list<int>(p.at("dims"))) {
        const auto est = fractal::estimate_pc(d, depth, samples, tol, context.derive("pc", static_cast<std::uint64_t>(d)));
        table.add({std::int64_t{d}, std::int64_t{depth}, est.pc_estimate, est.ci_lo, est.ci_hi, static_cast<std::int64_t>(samples)});
        for (double t : est.thresholds) thresholds.add({std::int64_t{d}, t});
        out.results["pc"].push_back({{"d", d}, {"pc_estimate", est.pc_estimate}, {"ci", {est.ci_lo, est.ci_hi}}});
        out.check(strf("pc_interval_d%d", d), est.ci_lo <= est.pc_estimate && est.pc_estimate <= est.ci_hi,
                  strf("p_c proxy %.4f in [%.4f, %.4f]", est.pc_estimate, est.ci_lo, est.ci_hi));
    }
    out.tables.push_back(std::move(table));
    out.tables.push_back(std::move(thresholds));
    return out;
}

}  // namespace

Experiment fractal_crossing() {
    Experiment e;
    e.name = "fractal_crossing";
    e.summary = "Fractal percolation crossing probabilities, survival fixed point and dimension trend";
    e.defaults = {
        {"sections", {"depth1", "survival", "trend", "coupling"}},
        {"depth1", {{"d", 2}, {"p", 0.5}, {"samples", std::size_t{100000}}, {"mode", "closed"}, {"stderr_multiplier", 3.0}}},
        {"survival", {{"d", 2}, {"p", 0.6}, {"depth", 14}, {"samples", std::size_t{100000}}, {"tolerance", 0.005}}},
        {"trend", {{"dims", {2, 3, 4}}, {"p", 0.4}, {"depth", 3}, {"samples", std::size_t{10000}}, {"mode", "closed"}, {"z", 1.96}}},
        {"coupling", {{"d", 2}, {"depth", 4}, {"samples", std::size_t{500}}, {"p_values", {0.3, 0.5, 0.7, 0.9}}}},
    };
    e.choices["sections"] = {"depth1", "survival", "trend", "coupling"};
    e.choices["depth1.mode"] = {"closed", "half_open"};
    e.choices["trend.mode"] = {"closed", "half_open"};
    e.run = run_crossing;
    return e;
}

Experiment fractal_pc() {
    Experiment e;
    e.name = "fractal_pc";
    e.summary = "Depth-n proxy for the critical retention probability";
    e.defaults = {{"dims", {2, 3}}, {"depth", 4}, {"samples", std::size_t{1000}}, {"tolerance", 1e-4}};
    e.run = run_pc;
    return e;
}

}  // namespace loglab::runner::detail
