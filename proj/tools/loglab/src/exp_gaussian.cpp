#include <cmath>
#include <limits>

#include "common.hpp"
#include "loglab/gaussian.hpp"
#include "loglab/random.hpp"

namespace loglab::runner::detail {

namespace {

void tail_section(const Json& p, Outcome& out) {
    const double lo = p.at("x_min").get<double>(), hi = p.at("x_max").get<double>();
    const int points = p.at("points").get<int>();
    const double c = gaussian::kTailConstant;
    Table table("normal_tail", {"x", "tail", "scaled_tail"});
    bool ok = true;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        const double tail = gaussian::normal_tail(x);
        const double g = std::exp(-0.5 * x * x) / x;
        const double s = tail / g;
        ok = ok && c * g <= tail && tail <= g / c;
        best = std::min({best, s, 1 / s});
        table.add({x, tail, s});
    }
    out.results["tail"] = {{"constant", c}, {"largest_valid_constant", best}};
    out.check("tail_two_sided_bound", ok,
              strf("c x^-1 e^{-x^2/2} <= tail <= c^-1 x^-1 e^{-x^2/2} with c = %g on [%g, %g]; largest valid c %.6f", c, lo,
                   hi, best));
    out.tables.push_back(std::move(table));
}

void correlation_section(const Json& p, const Context& context, Outcome& out) {
    const auto specs = p.at("specs").get<std::size_t>();
    const double t_lo = p.at("t_min").get<double>(), t_hi = p.at("t_max").get<double>();
    Stream rng(context.derive("correlation_specs"));
    Table table("orthant_ratio", {"var_x", "var_y", "cov_xy", "t", "ratio", "scaled_log_ratio"});
    bool ge_one = true;
    double c1 = 0.0, min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < specs; ++i) {
        gaussian::BivariateSpec s;
        s.var_x = 1.0 - rng.uniform();  // (0, 1]
        s.var_y = 1.0 - rng.uniform();
        s.cov_xy = rng.uniform() * std::sqrt(s.var_x * s.var_y);
        s.t = t_lo + (t_hi - t_lo) * rng.uniform();
        const double lr = gaussian::log_orthant_ratio(s);
        const double scale = s.t * s.t * s.cov_xy / (s.var_x * s.var_y);
        const double scaled = scale > 0 ? lr / scale : 0.0;
        ge_one = ge_one && lr >= -1e-6;
        min_ratio = std::min(min_ratio, std::exp(lr));
        c1 = std::max(c1, scaled);
        table.add({s.var_x, s.var_y, s.cov_xy, s.t, std::exp(lr), scaled});
    }
    out.results["correlation"] = {{"specs", specs}, {"min_ratio", min_ratio}, {"fitted_c1", c1}};
    out.check("orthant_ratio_at_least_one", ge_one, strf("smallest ratio %.9f over %zu specs", min_ratio, specs));
    out.check("correlation_constant_fit", std::isfinite(c1) && c1 > 0,
              strf("fitted C1 = max log ratio / (t^2 cov / (var_x var_y)) = %.6g", c1));
    out.tables.push_back(std::move(table));

    const auto spots = p.at("mc_spot_checks").get<std::size_t>();
    const auto samples = p.at("mc_samples").get<std::size_t>();
    const double st_lo = p.at("spot_t_min").get<double>(), st_hi = p.at("spot_t_max").get<double>();
    const double v_lo = p.at("spot_var_min").get<double>();
    const double k = p.at("mc_stderr_multiplier").get<double>();
    Stream spot_rng(context.derive("correlation_spots"));
    std::vector<gaussian::BivariateSpec> spot_specs(spots);
    for (auto& s : spot_specs) {
        s.var_x = v_lo + (1 - v_lo) * (1.0 - spot_rng.uniform());
        s.var_y = v_lo + (1 - v_lo) * (1.0 - spot_rng.uniform());
        s.cov_xy = spot_rng.uniform() * std::sqrt(s.var_x * s.var_y);
        s.t = st_lo + (st_hi - st_lo) * spot_rng.uniform();
    }
    std::vector<gaussian::MonteCarloRatio> mc(spots);
    parallel_for(spots, context.threads, [&](std::size_t i) {
        mc[i] = gaussian::orthant_ratio_mc(spot_specs[i], samples, context.derive("correlation_mc", i));
    });
    Table spot_table("orthant_ratio_mc", {"var_x", "var_y", "cov_xy", "t", "quadrature", "monte_carlo", "std_error", "z"});
    double worst = 0.0;
    for (std::size_t i = 0; i < spots; ++i) {
        const auto& s = spot_specs[i];
        const double q = gaussian::orthant_ratio(s);
        const double z = std::abs(q - mc[i].ratio) / mc[i].std_error;
        worst = std::max(worst, z);
        spot_table.add({s.var_x, s.var_y, s.cov_xy, s.t, q, mc[i].ratio, mc[i].std_error, z});
    }
    out.results["correlation"]["mc_worst_z"] = worst;
    out.check("orthant_ratio_vs_monte_carlo", worst <= k,
              strf("largest |quadrature - MC| / stderr = %.3f over %zu specs of %zu samples", worst, spots, samples));
    out.tables.push_back(std::move(spot_table));
}

void repulsion_section(const Json& p, Outcome& out) {
    const double sigma2 = p.at("sigma2").get<double>(), theta = p.at("theta").get<double>(), m = p.at("m").get<double>();
    const double bound = p.at("bound").get<double>();
    Table table("repulsion", {"t", "ratio"});
    double worst = 0.0;
    for (double t : list<double>(p.at("t_values"))) {
        const double r = gaussian::repulsion_ratio(sigma2, m, theta, t);
        worst = std::max(worst, r);
        table.add({t, r});
    }
    out.results["repulsion"] = {{"max_ratio", worst}};
    out.check("repulsion_ratio_bound", worst <= bound, strf("largest ratio %.6f (bound %g) at m = %g", worst, bound, m));
    out.tables.push_back(std::move(table));
}

void sequence_section(const Json& p, Outcome& out) {
    const double a = p.at("a").get<double>();
    const auto terms_a = p.at("terms_a").get<std::size_t>();
    const auto terms_b = p.at("terms_b").get<std::size_t>();
    Table table("sequence", {"kind", "b", "i", "term", "excess"});
    bool sup_ok = true, monotone = true, b_ok = true;
    double sup = 0.0;
    std::string detail_b;
    for (double b : list<double>(p.at("b_values"))) {
        const auto A = gaussian::sequence_iterate(gaussian::SequenceKind::A, a, b, terms_a);
        sup_ok = sup_ok && !A.overflow;
        for (std::size_t i = 0; i < A.terms.size(); ++i) {
            sup = std::max(sup, A.terms[i]);
            sup_ok = sup_ok && A.terms[i] <= 2 * a;
            if (i > 0) monotone = monotone && A.terms[i] >= A.terms[i - 1];
        }
        for (std::size_t i = 0; i < std::min<std::size_t>(A.terms.size(), 50); ++i)
            table.add({std::string("A"), b, static_cast<std::int64_t>(i + 1), A.terms[i], A.terms[i] - 1});

        const auto B = gaussian::sequence_iterate(gaussian::SequenceKind::B, a, b, terms_b);
        b_ok = b_ok && !B.overflow;
        for (std::size_t i = 0; i < B.terms.size(); ++i) {
            const int index = static_cast<int>(i) + 1;
            if (index >= 2 && !(B.excess[i] <= std::ldexp(1.0, -index))) {
                b_ok = false;
                detail_b += strf(" b=%g i=%d excess %.3g;", b, index, B.excess[i]);
            }
            table.add({std::string("B"), b, static_cast<std::int64_t>(index), B.terms[i], B.excess[i]});
        }
    }
    out.results["sequence"] = {{"sup_a", sup}};
    out.check("sequence_a_supremum", sup_ok, strf("sup a_i = %.9f <= 2a = %g over %zu terms", sup, 2 * a, terms_a));
    out.check("sequence_a_monotone", monotone, "a_i nondecreasing in i");
    out.check("sequence_b_decay", b_ok, b_ok ? strf("b_i - 1 <= 2^-i for 2 <= i <= %zu", terms_b) : detail_b);
    out.tables.push_back(std::move(table));
}

void domination_section(const Json& p, Outcome& out) {
    Table table("domination_theta", {"p", "delta", "theta", "slack"});
    bool ok = true;
    for (double prob : list<double>(p.at("p_values")))
        for (int delta : list<int>(p.at("deltas"))) {
            const auto theta = gaussian::domination_theta(prob, static_cast<unsigned>(delta));
            if (!theta) {
                table.add({prob, std::int64_t{delta}, std::nan(""), std::nan("")});
                continue;
            }
            const double slack = (1 - *theta) * std::pow(*theta, delta) - (1 - prob);
            ok = ok && slack >= -1e-9;
            table.add({prob, std::int64_t{delta}, *theta, slack});
        }
    out.check("domination_theta_feasible", ok, "(1 - theta) theta^delta >= 1 - p at every returned theta");
    out.tables.push_back(std::move(table));
}

Outcome run(const Json& params, const Context& context) {
    Outcome out;
    if (enabled(params, "tail")) tail_section(params.at("tail"), out);
    if (enabled(params, "correlation")) correlation_section(params.at("correlation"), context, out);
    if (enabled(params, "repulsion")) repulsion_section(params.at("repulsion"), out);
    if (enabled(params, "sequence")) sequence_section(params.at("sequence"), out);
    if (enabled(params, "domination")) domination_section(params.at("domination"), out);
    return out;
}

}  // namespace

Experiment gaussian_checks() {
    Experiment e;
    e.name = "gaussian_checks";
    e.summary = "Normal tails, bivariate orthant correlation, entropic repulsion, domination threshold, scalar recursions";
    e.defaults = {
        {"sections", {"tail", "correlation", "repulsion", "sequence", "domination"}},
        {"tail", {{"x_min", 0.5}, {"x_max", 8.0}, {"points", 50}}},
        {"correlation",
         {{"specs", std::size_t{200}},
          {"t_min", 1.0},
          {"t_max", 4.0},
          {"mc_spot_checks", std::size_t{10}},
          {"mc_samples", std::size_t{10000000}},
          {"mc_stderr_multiplier", 4.0},
          {"spot_t_min", 1.0},
          {"spot_t_max", 1.5},
          {"spot_var_min", 0.5}}},
        {"repulsion", {{"sigma2", 1.0}, {"theta", 1.0}, {"m", 1e6}, {"t_values", {-5.0, -4.0, -3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0}}, {"bound", 1.02}}},
        {"sequence", {{"a", 2.0}, {"b_values", {1e6, 1e7, 1e9}}, {"terms_a", std::size_t{10000}}, {"terms_b", std::size_t{50}}}},
        {"domination", {{"p_values", {0.5, 0.9, 0.96, 0.99, 1.0}}, {"deltas", {0, 1, 2, 5}}}},
    };
    e.choices["sections"] = {"tail", "correlation", "repulsion", "sequence", "domination"};
    e.run = run;
    return e;
}

}  // namespace loglab::runner::detail
