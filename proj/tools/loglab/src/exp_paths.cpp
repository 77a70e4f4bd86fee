#include <cmath>
#include <map>

#include "common.hpp"
#include "loglab/paths.hpp"
#include "loglab/stats.hpp"

namespace loglab::runner::detail {

namespace {

void audit_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), M = p.at("M").get<int>(), n = p.at("n").get<int>();
    const auto chains = p.at("chains").get<std::size_t>();
    const PathFamily family = path_family_from_string(p.at("family").get<std::string>());
    const auto options = refinement(p);
    std::vector<paths::ChainAudit> audits(chains);
    parallel_for(chains, context.threads, [&](std::size_t c) {
        audits[c] = paths::audit_chain(paths::sample_refined_chain(d, M, n, family, context.derive("audit", c), options));
    });
    paths::ChainAudit total;
    for (const auto& a : audits) {
        total.self_avoidance += a.self_avoidance;
        total.nearest_neighbor += a.nearest_neighbor;
        total.length_law += a.length_law;
        total.containment += a.containment;
        total.box_containment += a.box_containment;
        total.endpoint_sphere += a.endpoint_sphere;
    }
    Table table("chain_audit", {"property", "violations", "chains"});
    const std::pair<const char*, std::size_t> rows[] = {
        {"self_avoidance", total.self_avoidance}, {"nearest_neighbor", total.nearest_neighbor},
        {"length_law", total.length_law},         {"containment", total.containment},
        {"box_containment", total.box_containment}, {"endpoint_sphere", total.endpoint_sphere},
    };
    for (const auto& [name, count] : rows) {
        table.add({std::string(name), static_cast<std::int64_t>(count), static_cast<std::int64_t>(chains)});
        out.results["audit"][name] = count;
        out.check(std::string("chain_") + name, count == 0, strf("%zu violations over %zu chains (d=%d, M=%d, n=%d)", count, chains, d, M, n));
    }
    out.results["audit"]["canonical"] = options.canonical(d);
    out.tables.push_back(std::move(table));
}

void restriction_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), n = p.at("n").get<int>();
    const int m_long = p.at("M_long").get<int>(), m_short = p.at("M_short").get<int>();
    const auto chains = p.at("chains").get<std::size_t>();
    const PathFamily family = path_family_from_string(p.at("family").get<std::string>());
    const auto options = refinement(p);
    std::vector<std::size_t> violations(chains, 0);
    parallel_for(chains, context.threads, [&](std::size_t c) {
        const std::uint64_t seed = context.derive("restriction", c);
        const auto longer = paths::sample_refined_chain(d, m_long, n, family, seed, options);
        const auto shorter = paths::sample_refined_chain(d, m_short, n, family, seed, options);
        for (int j = 0; j <= n; ++j) {
            const auto& a = longer.levels[j].coords;
            const auto& b = shorter.levels[j].coords;
            if (b.size() > a.size() || !std::equal(b.begin(), b.end(), a.begin())) ++violations[c];
        }
    });
    std::size_t total = 0;
    for (auto v : violations) total += v;
    out.results["restriction"] = {{"violations", total}, {"chains", chains}};
    out.check("restriction_property", total == 0,
              strf("%zu level mismatches between M=%d chains and the prefixes of M=%d chains (%zu chains)", total, m_short,
                   m_long, chains));
}

void base_tail_section(const Json& p, const Context& context, Outcome& out) {
    const int M = p.at("M").get<int>();
    const auto pairs = p.at("pairs").get<std::size_t>();
    const auto min_count = p.at("min_count").get<std::size_t>();
    Table table("base_tail", {"d", "k", "count", "tail"});
    Table fits("base_tail_fit", {"d", "fitted_rate", "root_rate", "points"});
    for (int d : list<int>(p.at("dims"))) {
        std::vector<std::size_t> y(pairs);
        const std::string label = "base_tail_d" + std::to_string(d);
        parallel_for(pairs, context.threads, [&](std::size_t i) {
            const auto seq_p = paths::base_sequence(d, M, PathFamily::P, context.derive(label, 2 * i));
            const auto seq_q = paths::base_sequence(d, M, PathFamily::P, context.derive(label, 2 * i + 1));
            y[i] = paths::intersection_count(paths::base_path(d, M, seq_p), paths::base_path(d, M, seq_q));
        });
        std::vector<std::size_t> at_least(static_cast<std::size_t>(M) + 2, 0);
        for (auto v : y)
            for (std::size_t k = 0; k <= v; ++k) ++at_least[k];
        std::vector<double> ks, logs;
        double root_rate = 0.0;
        for (std::size_t k = 1; k < at_least.size(); ++k) {
            const double tail = static_cast<double>(at_least[k]) / static_cast<double>(pairs);
            table.add({std::int64_t{d}, static_cast<std::int64_t>(k), static_cast<std::int64_t>(at_least[k]), tail});
            if (at_least[k] >= min_count) {
                ks.push_back(static_cast<double>(k));
                logs.push_back(std::log(tail));
                root_rate = std::max(root_rate, std::pow(tail, 1.0 / static_cast<double>(k)));
            }
        }
        const double rate = ks.size() >= 2 ? std::exp(least_squares(ks, logs).slope) : std::nan("");
        fits.add({std::int64_t{d}, rate, root_rate, static_cast<std::int64_t>(ks.size())});
        out.results["base_tail"][std::to_string(d)] = {{"fitted_rate", rate}, {"root_rate", root_rate}, {"points", ks.size()}};
        out.check("base_tail_geometric_d" + std::to_string(d), ks.size() >= 2 && rate < 1,
                  strf("fitted geometric rate %.4f from %zu tail points (%zu pairs)", rate, ks.size(), pairs));
    }
    out.tables.push_back(std::move(table));
    out.tables.push_back(std::move(fits));
}

// P[11 Binomial(trials, q) >= m].
double scaled_binomial_tail(std::size_t trials, double q, std::size_t m) {
    const std::size_t need = (m + 10) / 11;
    if (need == 0) return 1.0;
    if (need > trials) return 0.0;
    if (q >= 1) return 1.0;
    double total = 0.0;
    for (std::size_t s = need; s <= trials; ++s) {
        const double n = static_cast<double>(trials), k = static_cast<double>(s);
        total += std::exp(std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1) + k * std::log(q) +
                          (n - k) * std::log1p(-q));
    }
    return std::min(1.0, total);
}

void domination_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), M = p.at("M").get<int>(), n = p.at("n").get<int>();
    const auto pairs = p.at("pairs").get<std::size_t>();
    const double factor = p.at("branching_factor").get<double>();
    const double mult = p.at("stderr_multiplier").get<double>();
    const auto options = refinement(p);
    const int branching = options.resolved_branching(d);
    const double q = std::min(1.0, factor / branching);
    std::vector<std::vector<std::size_t>> y(pairs);
    parallel_for(pairs, context.threads, [&](std::size_t i) {
        const auto a = paths::sample_refined_chain(d, M, n, PathFamily::P, context.derive("domination", 2 * i), options);
        const auto b = paths::sample_refined_chain(d, M, n, PathFamily::P, context.derive("domination", 2 * i + 1), options);
        for (int j = 0; j <= n; ++j) y[i].push_back(paths::intersection_count(a.levels[j], b.levels[j]));
    });
    Table table("conditional_domination", {"level", "y", "m", "samples", "empirical", "bound", "std_error"});
    bool ok = true;
    std::size_t rows = 0;
    std::string detail;
    for (int level = 1; level <= n; ++level) {
        std::map<std::size_t, std::vector<std::size_t>> groups;
        for (const auto& row : y) groups[row[level - 1]].push_back(row[level]);
        for (const auto& [prev, values] : groups) {
            const std::size_t top = *std::max_element(values.begin(), values.end());
            const double N = static_cast<double>(values.size());
            for (std::size_t m = 1; m <= top + 1; ++m) {
                std::size_t hits = 0;
                for (auto v : values) hits += v >= m ? 1 : 0;
                const double emp = static_cast<double>(hits) / N;
                const double se = std::sqrt(emp * (1 - emp) / N);
                const double bound = scaled_binomial_tail(2 * prev, q, m);
                if (emp > bound + mult * se) {
                    ok = false;
                    detail += strf(" level %d y=%zu m=%zu: %.4g > %.4g;", level, prev, m, emp, bound);
                }
                table.add({std::int64_t{level}, static_cast<std::int64_t>(prev), static_cast<std::int64_t>(m),
                           static_cast<std::int64_t>(values.size()), emp, bound, se});
                ++rows;
            }
        }
    }
    std::vector<double> mean(static_cast<std::size_t>(n) + 1, 0.0);
    for (const auto& row : y)
        for (int j = 0; j <= n; ++j) mean[j] += static_cast<double>(row[j]) / static_cast<double>(pairs);
    out.results["conditional_domination"] = {{"pairs", pairs}, {"success_probability", q}, {"mean_intersections", mean},
                                             {"rows", rows}, {"canonical", options.canonical(d)}};
    out.check("conditional_domination", ok,
              ok ? strf("P[Y_i >= m | Y_{i-1} = y] <= P[11 Bin(2y, %.4g) >= m] + %g stderr on all %zu rows", q, mult, rows)
                 : detail);
    out.tables.push_back(std::move(table));
}

Outcome run(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "audit")) audit_section(params.at("audit"), context, out);
    if (enabled(params, "restriction")) restriction_section(params.at("restriction"), context, out);
    if (enabled(params, "base_tail")) base_tail_section(params.at("base_tail"), context, out);
    if (enabled(params, "conditional_domination")) domination_section(params.at("conditional_domination"), context, out);
    return out;
}

}  // namespace

Experiment path_stats() {
    Experiment e;
    e.name = "path_stats";
    e.summary = "Refined path chains: structural audits, restriction property, intersection tails and domination";
    e.defaults = {
        {"sections", {"audit", "restriction", "base_tail", "conditional_domination"}},
        {"audit", {{"d", 110}, {"M", 10}, {"n", 2}, {"chains", std::size_t{10000}}, {"family", "P"}, {"tube_paths", 0}, {"branching", 0}}},
        {"restriction",
         {{"d", 110}, {"M_long", 12}, {"M_short", 10}, {"n", 2}, {"chains", std::size_t{10000}}, {"family", "P"}, {"tube_paths", 0}, {"branching", 0}}},
        {"base_tail", {{"dims", {3, 5, 10}}, {"M", 10}, {"pairs", std::size_t{100000}}, {"min_count", std::size_t{20}}}},
        {"conditional_domination",
         {{"d", 110}, {"M", 10}, {"n", 2}, {"pairs", std::size_t{10000}}, {"branching_factor", 50.0}, {"stderr_multiplier", 3.0},
          {"tube_paths", 0}, {"branching", 0}}},
    };
    e.choices["sections"] = {"audit", "restriction", "base_tail", "conditional_domination"};
    e.choices["audit.family"] = {"P", "S", "zigzag"};
    e.choices["restriction.family"] = {"P", "S", "zigzag"};
    e.run = run;
    return e;
}

}  // namespace loglab::runner::detail
