#include <cmath>

#include "common.hpp"
#include "loglab/brw.hpp"
#include "loglab/gaussian.hpp"
#include "loglab/stats.hpp"

namespace loglab::runner::detail {

namespace {

brw::MomentParams moment_params(const Json& p) {
    brw::MomentParams m;
    m.d = p.at("d").get<int>();
    m.M = p.at("M").get<int>();
    m.n = p.at("n").get<int>();
    m.k = p.at("k").get<int>();
    m.pairs = p.at("pairs").get<std::size_t>();
    m.family = path_family_from_string(p.at("family").get<std::string>());
    m.refinement = refinement(p);
    return m;
}

Outcome run_moments(const Json& p, const Context& context) {
    Outcome out;
    const double mult = p.at("stderr_multiplier").get<double>();
    const double tilt = p.at("tilt").get<double>();
    const bool direct = p.at("direct").get<bool>();
    Table table("moments", {"alpha", "log_p", "box_estimate", "box_std_error", "direct_estimate", "direct_std_error", "z",
                            "max_exponent", "bound_violations", "c1_estimate", "bound_rhs"});
    Table histogram("exponent_histogram", {"alpha", "exponent", "count"});
    std::size_t index = 0;
    for (double alpha : list<double>(p.at("alphas"))) {
        auto params = moment_params(p);
        params.alpha = alpha;
        params.seed = context.derive("box_estimator", index);
        const auto box = brw::weighted_count_moments(params);
        brw::DirectReport dir;
        double z = std::nan("");
        if (direct) {
            params.seed = context.derive("direct_estimator", index);
            dir = brw::direct_moment_estimate(params, tilt);
            z = std::abs(box.ratio_estimate - dir.ratio_estimate) / std::hypot(box.std_error, dir.std_error);
        }
        table.add({alpha, box.log_p, box.ratio_estimate, box.std_error, direct ? dir.ratio_estimate : std::nan(""),
                   direct ? dir.std_error : std::nan(""), z, static_cast<std::int64_t>(box.max_exponent),
                   static_cast<std::int64_t>(box.bound_violations), box.c1_estimate, box.bound_rhs});
        for (std::size_t e = 0; e < box.exponent_histogram.size(); ++e)
            if (box.exponent_histogram[e])
                histogram.add({alpha, static_cast<std::int64_t>(e), static_cast<std::int64_t>(box.exponent_histogram[e])});
        Json r = {{"alpha", alpha},
                  {"log_p", box.log_p},
                  {"ratio_estimate", box.ratio_estimate},
                  {"std_error", box.std_error},
                  {"bound_rhs", box.bound_rhs},
                  {"c1_estimate", box.c1_estimate},
                  {"max_exponent", box.max_exponent},
                  {"bound_violations", box.bound_violations},
                  {"mean_intersections", box.mean_intersections},
                  {"canonical", box.canonical}};
        if (direct) r["direct"] = {{"ratio_estimate", dir.ratio_estimate}, {"std_error", dir.std_error}, {"tilt", dir.tilt}};
        out.results["moments"].push_back(r);
        const std::string tag = strf("alpha=%g", alpha);
        out.check("exponent_bound " + tag, box.bound_violations == 0,
                  strf("%zu pairs with exponent above 100 sum Y_j; largest exponent %zu", box.bound_violations, box.max_exponent));
        if (direct)
            out.check("estimators_agree " + tag, z <= mult,
                      strf("box %.5f +- %.5f vs direct %.5f +- %.5f: %.2f combined stderr (limit %g)", box.ratio_estimate,
                           box.std_error, dir.ratio_estimate, dir.std_error, z, mult));
        ++index;
    }
    out.tables.push_back(std::move(table));
    out.tables.push_back(std::move(histogram));
    return out;
}

void search_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), M = p.at("M").get<int>(), n = p.at("n").get<int>(), k = p.at("k").get<int>();
    const double alpha = p.at("alpha").get<double>();
    const auto attempts = p.at("attempts").get<std::size_t>();
    const auto family = path_family_from_string(p.at("family").get<std::string>());
    const auto result = brw::good_path_search(d, M, n, k, alpha, attempts, context.derive("search"), refinement(p), family);
    bool verified = true;
    if (result.exemplar) {
        const brw::BoxNoise noise(result.noise_seed);
        verified = brw::is_k_good(*result.exemplar, alpha, k, n, noise).is_good;
    }
    out.results["search"] = {{"found", result.found}, {"tried", result.tried}, {"attempts", attempts}};
    if (result.exemplar) out.results["search"]["exemplar_sequence"] = result.exemplar->sequence;
    out.check("exemplar_reverified", verified,
              result.found ? strf("k-good chain found after %zu attempts and re-verified", result.tried)
                           : strf("no k-good chain in %zu attempts", result.tried));
}

void single_level_section(const Json& p, const Context& context, Outcome& out) {
    const int d = p.at("d").get<int>(), M = p.at("M").get<int>(), n = p.at("n").get<int>();
    const auto attempts = p.at("attempts").get<std::size_t>();
    const double mult = p.at("stderr_multiplier").get<double>();
    const auto options = refinement(p);
    std::vector<double> prob(attempts);
    std::vector<char> good(attempts);
    parallel_for(attempts, context.threads, [&](std::size_t i) {
        const auto chain = paths::sample_refined_chain(d, M, n, PathFamily::P, context.derive("single_level_chain", i), options);
        const brw::BoxNoise noise(context.derive("single_level_noise", i));
        const Path& fine = chain.levels.back();
        prob[i] = std::ldexp(1.0, -static_cast<int>(paths::boxes_touching(fine, n).size()));
        good[i] = brw::check_good(fine, 0.0, n, n, noise).is_good;
    });
    double expected = 0, var = 0, hits = 0;
    for (std::size_t i = 0; i < attempts; ++i) {
        expected += prob[i];
        var += prob[i] * (1 - prob[i]);
        hits += good[i];
    }
    const double N = static_cast<double>(attempts);
    const double rate = hits / N, se = std::sqrt(var) / N;
    expected /= N;
    out.results["single_level"] = {{"rate", rate}, {"expected", expected}, {"std_error", se}};
    out.check("single_level_rate", std::abs(rate - expected) <= mult * se + 1e-15,
              strf("success rate %.5f vs mean 2^-|B_n(P_n)| = %.5f (stderr %.5f, %zu attempts)", rate, expected, se, attempts));
}

void variance_section(const Json& p, const Context& context, Outcome& out) {
    const int n = p.at("n").get<int>();
    const auto seeds = p.at("seeds").get<std::size_t>();
    const double mult = p.at("stderr_multiplier").get<double>();
    const auto x = list<double>(p.at("x"));
    std::vector<double> v(seeds);
    parallel_for(seeds, context.threads, [&](std::size_t s) {
        v[s] = brw::brw_value(x, n, brw::BoxNoise(context.derive("variance", s)));
    });
    RunningStats stats;
    for (double a : v) stats.add(a);
    double m4 = 0;
    for (double a : v) m4 += std::pow(a - stats.mean(), 4);
    m4 /= static_cast<double>(seeds);
    const double s2 = stats.variance();
    const double se = std::sqrt(std::max(0.0, m4 - s2 * s2) / static_cast<double>(seeds));
    const double target = (n + 1) * std::log(2.0);
    out.results["value_variance"] = {{"variance", s2}, {"std_error", se}, {"target", target}};
    out.check("value_variance", std::abs(s2 - target) <= mult * se,
              strf("Var R_%d = %.5f vs %.5f (stderr %.5f, %zu seeds)", n, s2, target, se, seeds));
}

void independence_section(const Json& p, const Context& context, Outcome& out) {
    const auto keys = p.at("keys").get<std::size_t>();
    const auto samples = p.at("samples").get<std::size_t>();
    const int level = p.at("level").get<int>();
    std::vector<std::vector<double>> values(samples, std::vector<double>(keys));
    parallel_for(samples, context.threads, [&](std::size_t s) {
        const brw::BoxNoise noise(context.derive("independence", s));
        std::vector<std::int64_t> box(3, 0);
        for (std::size_t k = 0; k < keys; ++k) {
            box[0] = static_cast<std::int64_t>(k);
            values[s][k] = noise(level, box);
        }
    });
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < keys; ++k) {
        RunningStats a, b;
        double sab = 0;
        for (std::size_t s = 0; s < samples; ++s) {
            a.add(values[s][k]);
            b.add(values[s][k + 1]);
        }
        for (std::size_t s = 0; s < samples; ++s) sab += (values[s][k] - a.mean()) * (values[s][k + 1] - b.mean());
        const double corr = sab / (static_cast<double>(samples - 1) * std::sqrt(a.variance() * b.variance()));
        worst = std::max(worst, std::abs(corr));
    }
    const double bound = 4.0 / std::sqrt(static_cast<double>(samples));
    out.results["independence"] = {{"max_abs_correlation", worst}, {"bound", bound}};
    out.check("box_noise_independence", worst <= bound,
              strf("largest |corr| between adjacent keys %.4f (bound %.4f, %zu keys, %zu seeds)", worst, bound, keys, samples));
}

Outcome run_good_paths(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "search")) search_section(params.at("search"), context, out);
    if (enabled(params, "single_level")) single_level_section(params.at("single_level"), context, out);
    if (enabled(params, "value_variance")) variance_section(params.at("value_variance"), context, out);
    if (enabled(params, "independence")) independence_section(params.at("independence"), context, out);
    return out;
}

}  // namespace

Experiment brw_moments() {
    Experiment e;
    e.name = "brw_moments";
    e.summary = "Second moment of the good-path count: box-intersection identity vs direct weighted indicators";
    e.defaults = {{"d", 110},
                  {"M", 10},
                  {"n", 1},
                  {"k", 1},
                  {"alphas", {0.0, 0.5}},
                  {"pairs", std::size_t{100000}},
                  {"family", "P"},
                  {"tube_paths", 0},
                  {"branching", 0},
                  {"direct", true},
                  {"tilt", 0.95},
                  {"stderr_multiplier", 4.0}};
    e.choices["family"] = {"P", "S", "zigzag"};
    e.run = run_moments;
    return e;
}

Experiment brw_good_paths() {
    Experiment e;
    e.name = "brw_good_paths";
    e.summary = "Branching random walk field values and k-good path search";
    e.defaults = {
        {"sections", {"search", "single_level", "value_variance", "independence"}},
        {"search", {{"d", 110}, {"M", 10}, {"n", 1}, {"k", 1}, {"alpha", -1e6}, {"attempts", std::size_t{100}}, {"family", "P"}, {"tube_paths", 0}, {"branching", 0}}},
        {"single_level", {{"d", 110}, {"M", 3}, {"n", 0}, {"attempts", std::size_t{10000}}, {"stderr_multiplier", 3.0}, {"tube_paths", 0}, {"branching", 0}}},
        {"value_variance", {{"n", 9}, {"seeds", std::size_t{100000}}, {"x", {0.3, 0.7}}, {"stderr_multiplier", 3.0}}},
        {"independence", {{"keys", std::size_t{1000}}, {"samples", std::size_t{2000}}, {"level", 3}}},
    };
    e.choices["sections"] = {"search", "single_level", "value_variance", "independence"};
    e.choices["search.family"] = {"P", "S", "zigzag"};
    e.run = run_good_paths;
    return e;
}

}  // namespace loglab::runner::detail
