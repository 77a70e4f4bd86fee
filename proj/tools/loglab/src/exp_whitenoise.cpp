#include <cmath>
#include <limits>

#include "common.hpp"
#include "loglab/random.hpp"
#include "loglab/whitenoise.hpp"

namespace loglab::runner::detail {

namespace {

using whitenoise::CovarianceSpec;

void variance_section(const Json& p, Outcome& out) {
    const double tol = p.at("tolerance").get<double>();
    Table table("variance_identity", {"d", "n", "covariance", "target", "abs_error"});
    double worst = 0.0;
    for (int d : list<int>(p.at("dims")))
        for (int n : list<int>(p.at("levels"))) {
            const double c = whitenoise::cov_hn(0.0, CovarianceSpec::level(d, n));
            const double target = n * std::log(2.0);
            worst = std::max(worst, std::abs(c - target));
            table.add({std::int64_t{d}, std::int64_t{n}, c, target, std::abs(c - target)});
        }
    out.results["variance_identity"] = {{"max_abs_error", worst}};
    out.check("variance_identity", worst <= tol, strf("max |cov_hn(0) - n log 2| = %.3g (tolerance %g)", worst, tol));
    out.tables.push_back(std::move(table));
}

void log_law_section(const Json& p, Outcome& out) {
    const int n = p.at("n").get<int>(), points = p.at("points").get<int>();
    const double u_lo = p.at("u_min").get<double>(), u_hi = p.at("u_max").get<double>();
    const double bound = p.at("bound").get<double>();
    Table table("log_law", {"d", "u", "covariance", "log_inverse_u", "difference"});
    double C = 0.0;
    for (int d : list<int>(p.at("dims"))) {
        const auto spec = CovarianceSpec::level(d, n);
        double Cd = 0.0;
        for (int i = 0; i < points; ++i) {
            // Geometric grid: the law is about log-scales.
            const double u = u_lo * std::pow(u_hi / u_lo, static_cast<double>(i) / (points - 1));
            const double c = whitenoise::cov_hn(u, spec);
            const double diff = c - std::log(1 / u);
            Cd = std::max(Cd, std::abs(diff));
            table.add({std::int64_t{d}, u, c, std::log(1 / u), diff});
        }
        out.results["log_law"]["C_d" + std::to_string(d)] = Cd;
        C = std::max(C, Cd);
    }
    out.results["log_law"]["C"] = C;
    out.check("log_covariance_law", C <= bound, strf("single constant C = %.4f (bound %g)", C, bound));
    out.tables.push_back(std::move(table));
}

void additivity_section(const Json& p, const Context& context, Outcome& out) {
    const auto trials = p.at("trials").get<std::size_t>();
    const double tol = p.at("tolerance").get<double>();
    Stream rng(context.derive("band_additivity"));
    double worst = 0.0;
    for (int d : list<int>(p.at("dims")))
        for (std::size_t i = 0; i < trials; ++i) {
            // Log-uniform band edges in [2^-10, 1].
            double e[3];
            for (double& x : e) x = std::exp2(-10 * rng.uniform());
            std::sort(e, e + 3);
            const double a = e[0], b = e[1], c = e[2];
            const double u = 2 * c * rng.uniform();
            const double lhs = whitenoise::cov_hn(u, {d, a, b}) + whitenoise::cov_hn(u, {d, b, c});
            worst = std::max(worst, std::abs(lhs - whitenoise::cov_hn(u, {d, a, c})));
        }
    out.results["band_additivity"] = {{"max_abs_error", worst}};
    out.check("band_additivity", worst <= tol, strf("max |cov(a,b] + cov(b,c] - cov(a,c]| = %.3g", worst));
}

void nested_section(const Json& p, Outcome& out) {
    const double tol = p.at("tolerance").get<double>();
    const int n = p.at("n").get<int>();
    Table table("nested_agreement", {"d", "u", "single", "nested"});
    double worst = 0.0;
    for (int d : list<int>(p.at("dims"))) {
        const auto spec = CovarianceSpec::level(d, n);
        for (double u : list<double>(p.at("u_values"))) {
            const double a = whitenoise::cov_hn(u, spec), b = whitenoise::cov_hn_nested(u, spec);
            worst = std::max(worst, std::abs(a - b));
            table.add({std::int64_t{d}, u, a, b});
        }
    }
    out.check("single_vs_nested_quadrature", worst <= tol, strf("max difference %.3g", worst));
    out.tables.push_back(std::move(table));
}

void increment_section(const Json& p, Outcome& out) {
    const int k = p.at("k").get<int>(), points = p.at("points").get<int>();
    const double stability = p.at("stability").get<double>();
    Table table("increment_distance", {"d", "j", "u", "second_moment", "scaled"});
    std::vector<double> constants;
    for (int d : list<int>(p.at("dims"))) {
        double C = 0.0;
        for (int j : list<int>(p.at("j_values"))) {
            const auto spec = CovarianceSpec::increment(d, 3 * k, j);
            const double c0 = whitenoise::cov_hn(0.0, spec);
            for (int i = 0; i < points; ++i) {
                const double u = std::ldexp(1.0, -j - 4) * std::pow(64.0, static_cast<double>(i) / (points - 1));
                const double m2 = 2 * (c0 - whitenoise::cov_hn(u, spec));
                const double scaled = m2 / (std::ldexp(1.0, j + 1) * u);
                C = std::max(C, scaled);
                table.add({std::int64_t{d}, std::int64_t{j}, u, m2, scaled});
            }
        }
        constants.push_back(C);
        out.results["increment_distance"]["C_d" + std::to_string(d)] = C;
    }
    const double lo = *std::min_element(constants.begin(), constants.end());
    const double hi = *std::max_element(constants.begin(), constants.end());
    out.check("increment_distance_constant", lo > 0 && hi <= (1 + stability) * lo,
              strf("fitted C in [%.4f, %.4f] across dimensions (allowed spread %g)", lo, hi, stability));
    out.tables.push_back(std::move(table));
}

void table_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), n = p.at("n").get<int>();
    const double tol = p.at("tolerance").get<double>();
    const auto spec = CovarianceSpec::level(d, n);
    const whitenoise::CovarianceTable table(spec, tol);
    Stream rng(context.derive("table_spot"));
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double u = 2.5 * rng.uniform();
        worst = std::max(worst, std::abs(table(u) - whitenoise::cov_hn(u, spec)));
    }
    out.results["table"] = {{"nodes", table.nodes()}, {"max_error", table.max_error()}, {"spot_error", worst}};
    out.check("covariance_table_accuracy", worst <= 10 * tol,
              strf("%zu nodes; random-point error %.3g (build tolerance %g)", table.nodes(), worst, tol));
}

void psd_section(const Json& p, const Context& context, Outcome& out) {
    const auto sets = p.at("sets").get<std::size_t>();
    const auto size = p.at("points").get<std::size_t>();
    const int n = p.at("n").get<int>();
    double max_jitter = 0.0;
    std::size_t fallbacks = 0, total = 0;
    for (int d : list<int>(p.at("dims"))) {
        for (std::size_t s = 0; s < sets; ++s) {
            Stream rng(context.derive("psd", static_cast<std::uint64_t>(d) * 100000 + s));
            PointSet pts(d);
            std::vector<double> x(static_cast<std::size_t>(d));
            for (std::size_t i = 0; i < size; ++i) {
                for (auto& c : x) c = rng.uniform();
                pts.push_back(x);
            }
            const whitenoise::GaussianSampler sampler(whitenoise::covariance_matrix(pts, CovarianceSpec::level(d, n)), size);
            max_jitter = std::max(max_jitter, sampler.jitter());
            fallbacks += sampler.eigen_fallback() ? 1 : 0;
            ++total;
        }
    }
    out.results["psd"] = {{"max_jitter", max_jitter}, {"eigen_fallbacks", fallbacks}, {"sets", total}};
    out.check("gram_matrices_factorize", fallbacks == 0 && max_jitter <= 1e-10,
              strf("%zu sets; largest jitter %.1g; %zu eigen fallbacks", total, max_jitter, fallbacks));
}

Outcome run_covariance(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "variance_identity")) variance_section(params.at("variance_identity"), out);
    if (enabled(params, "log_law")) log_law_section(params.at("log_law"), out);
    if (enabled(params, "band_additivity")) additivity_section(params.at("band_additivity"), context, out);
    if (enabled(params, "nested")) nested_section(params.at("nested"), out);
    if (enabled(params, "increment_distance")) increment_section(params.at("increment_distance"), out);
    if (enabled(params, "table")) table_section(params.at("table"), context, out);
    if (enabled(params, "psd")) psd_section(params.at("psd"), context, out);
    return out;
}

// `count` vertices of the path, evenly spaced along it.
PointSet spaced_vertices(const Path& path, std::size_t count) {
    PointSet out(path.d);
    const std::size_t L = path.size();
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t idx = count == 1 ? 0 : i * (L - 1) / (count - 1);
        out.push_back(path.position(idx));
    }
    return out;
}

Outcome run_good_conditions(const Json& p, const Context& context) {
    Outcome out;
    const int d = p.at("d").get<int>(), M = p.at("M").get<int>();
    whitenoise::GoodConditions conds;
    conds.k = p.at("k").get<int>();
    conds.n = p.at("n").get<int>();
    conds.alpha = p.at("alpha").get<double>();
    conds.beta = p.at("beta").get<double>();
    const auto family = path_family_from_string(p.at("family").get<std::string>());
    const auto replicas = p.at("replicas").get<std::size_t>();
    const auto probes = p.at("probes_per_level").get<std::size_t>();
    const auto mc = p.at("mc_samples").get<std::size_t>();
    const auto max_joint = p.at("max_joint").get<std::size_t>();
    const int time_nodes = p.at("time_nodes").get<int>();
    const auto options = refinement(p);

    std::vector<whitenoise::GoodConditionsResult> results(replicas);
    parallel_for(replicas, context.threads, [&](std::size_t r) {
        const auto chain = paths::sample_refined_chain(d, M, conds.n, family, context.derive("chain", r), options);
        std::vector<PointSet> pts;
        for (int j = conds.k; j <= conds.n; ++j) pts.push_back(spaced_vertices(chain.levels[j], probes));
        results[r] = whitenoise::good_conditions_check(chain, conds, pts, context.derive("field", r), mc, max_joint, time_nodes);
    });
    Table table("good_conditions", {"replica", "level", "probe", "path_average", "path_average_variance", "increment", "cond_a", "cond_b"});
    bool finite = true;
    double a_hits = 0, b_hits = 0, all_good = 0;
    std::size_t rows = 0;
    for (std::size_t r = 0; r < replicas; ++r) {
        const auto& res = results[r];
        bool good = true;
        for (std::size_t i = 0; i < res.cond_a.size(); ++i) {
            const int level = conds.k + static_cast<int>(i / probes);
            finite = finite && std::isfinite(res.path_averages[i]) && res.path_average_variances[i] > 0;
            a_hits += res.cond_a[i];
            b_hits += res.cond_b[i];
            good = good && res.cond_a[i] && res.cond_b[i];
            table.add({static_cast<std::int64_t>(r), std::int64_t{level}, static_cast<std::int64_t>(i % probes), res.path_averages[i],
                       res.path_average_variances[i], res.increments[i], std::int64_t{res.cond_a[i]}, std::int64_t{res.cond_b[i]}});
            ++rows;
        }
        all_good += good;
    }
    out.results["good_conditions"] = {{"replicas", replicas},
                                      {"fraction_a", rows ? a_hits / rows : 0.0},
                                      {"fraction_b", rows ? b_hits / rows : 0.0},
                                      {"fraction_all", replicas ? all_good / replicas : 0.0},
                                      {"joint_size", results.empty() ? 0 : results[0].joint_size},
                                      {"canonical", options.canonical(d)}};
    out.check("path_averages_well_defined", finite, "finite path averages with positive variances at every probe");
    out.tables.push_back(std::move(table));
    return out;
}

Outcome run_g2i(const Json& p, const Context& context) {
    Outcome out;
    const int d = p.at("d").get<int>(), M = p.at("M").get<int>(), n = p.at("n").get<int>(), k = p.at("k").get<int>();
    const auto pairs = p.at("pairs").get<std::size_t>();
    const auto mc = p.at("mc_samples").get<std::size_t>();
    const int time_nodes = p.at("time_nodes").get<int>();
    const auto family = path_family_from_string(p.at("family").get<std::string>());
    const auto options = refinement(p);
    std::vector<whitenoise::G2iAudit> audits(pairs);
    parallel_for(pairs, context.threads, [&](std::size_t i) {
        const auto a = paths::sample_refined_chain(d, M, n, family, context.derive("g2i_chain", 2 * i), options);
        const auto b = paths::sample_refined_chain(d, M, n, family, context.derive("g2i_chain", 2 * i + 1), options);
        audits[i] = whitenoise::g2i_audit(a, b, k, n, mc, context.derive("g2i_mc", i), time_nodes);
    });
    Table table("g2i_audit", {"pair", "lhs", "lhs_std_error", "rhs_sum", "ratio"});
    bool ok = true;
    double max_ratio = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto& a = audits[i];
        ok = ok && std::isfinite(a.lhs) && a.lhs >= 0;
        if (a.rhs_sum > 0) max_ratio = std::max(max_ratio, a.ratio);
        table.add({static_cast<std::int64_t>(i), a.lhs, a.lhs_std_error, static_cast<std::int64_t>(a.rhs_sum), a.ratio});
    }
    out.results["g2i"] = {{"pairs", pairs}, {"max_ratio_nonzero_rhs", max_ratio}, {"canonical", options.canonical(d)}};
    out.check("g2i_lhs_well_defined", ok, strf("finite nonnegative left sides; largest ratio with nonzero right side %.4g", max_ratio));
    out.tables.push_back(std::move(table));
    return out;
}

}  // namespace

Experiment wn_covariance() {
    Experiment e;
    e.name = "wn_covariance";
    e.summary = "White-noise field covariance: variance identity, log-covariance law, quadrature cross-checks";
    e.defaults = {
        {"sections", {"variance_identity", "log_law", "band_additivity", "nested", "increment_distance", "table", "psd"}},
        {"variance_identity", {{"dims", {2, 3, 8, 64}}, {"levels", {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}}, {"tolerance", 1e-8}}},
        {"log_law", {{"dims", {2, 3}}, {"n", 10}, {"u_min", 0.00390625}, {"u_max", 0.25}, {"points", 50}, {"bound", 3.0}}},
        {"band_additivity", {{"dims", {2, 3, 8}}, {"trials", std::size_t{20}}, {"tolerance", 1e-8}}},
        {"nested", {{"dims", {2, 3, 8}}, {"n", 6}, {"u_values", {0.0, 0.01, 0.1, 0.5, 1.0, 1.9}}, {"tolerance", 1e-8}}},
        {"increment_distance", {{"dims", {2, 3}}, {"k", 1}, {"j_values", {4, 5, 6}}, {"points", 20}, {"stability", 0.2}}},
        {"table", {{"d", 2}, {"n", 8}, {"tolerance", 1e-10}}},
        {"psd", {{"dims", {2, 3, 8}}, {"sets", std::size_t{50}}, {"points", std::size_t{100}}, {"n", 6}}},
    };
    e.choices["sections"] = {"variance_identity", "log_law", "band_additivity", "nested", "increment_distance", "table", "psd"};
    e.run = run_covariance;
    return e;
}

Experiment wn_good_conditions() {
    Experiment e;
    e.name = "wn_good_conditions";
    e.summary = "Joint sampling of path averages and field increments along a refined chain";
    e.defaults = {{"d", 110},       {"M", 10},          {"n", 2},
                  {"k", 1},         {"alpha", 0.0},     {"beta", 0.5},
                  {"family", "S"},  {"tube_paths", 0},  {"branching", 0},
                  {"replicas", std::size_t{5}}, {"probes_per_level", std::size_t{4}}, {"mc_samples", std::size_t{2000}},
                  {"max_joint", std::size_t{4000}}, {"time_nodes", 4}};
    e.choices["family"] = {"P", "S", "zigzag"};
    e.run = run_good_conditions;
    return e;
}

Experiment g2i_audit() {
    Experiment e;
    e.name = "g2i_audit";
    e.summary = "Ball-overlap integrals of two chains against their vertex intersection counts";
    e.defaults = {{"d", 110},          {"M", 10},          {"n", 2},          {"k", 1},
                  {"family", "P"},     {"tube_paths", 0},  {"branching", 0},  {"pairs", std::size_t{20}},
                  {"mc_samples", std::size_t{2000}}, {"time_nodes", 6}};
    e.choices["family"] = {"P", "S", "zigzag"};
    e.run = run_g2i;
    return e;
}

}  // namespace loglab::runner::detail
