#include <boost/math/tools/roots.hpp>
#include <cmath>

#include "doctest.h"
#include "loglab/fractal.hpp"

using namespace loglab::fractal;

namespace {

double extinction_oracle(int d, double p) {
    const double children = std::ldexp(1.0, d);
    auto f = [&](double q) { return q - std::pow(1 - p + p * q, children); };
    boost::uintmax_t iters = 200;
    const auto r = boost::math::tools::toms748_solve(f, 0.0, 0.5, boost::math::tools::eps_tolerance<double>(50), iters);
    return (r.first + r.second) / 2;
}

void check_rate(const RateEstimate& e, double exact, double z) {
    const double se = std::sqrt(exact * (1 - exact) / static_cast<double>(e.samples));
    CAPTURE(e.rate);
    CAPTURE(exact);
    CHECK(std::abs(e.rate - exact) <= z * se);
}

}  // namespace

TEST_CASE("retained trees at p = 0 and p = 1") {
    for (int window : {1, 2}) {
        const auto full = sample_retained(2, 1.0, 3, window, 1);
        CHECK(full.count(3) == static_cast<std::size_t>(std::pow(window * 8, 2)));
        CHECK(has_crossing(full, 0, Connectivity::closed));
        CHECK(has_crossing(full, 1, Connectivity::half_open));
    }
    const auto empty = sample_retained(2, 0.0, 3, 1, 1);
    CHECK(empty.count(0) == 0);
    CHECK_FALSE(has_crossing(empty, 0, Connectivity::closed));
}

TEST_CASE("survival probability") {
    CHECK(survival_probability(2, 1.0) == 1.0);
    CHECK(survival_probability(2, 0.25) == 0.0);
    CHECK(survival_probability(3, 0.1) == 0.0);
    CHECK(1 - survival_probability(2, 0.5) == doctest::Approx(extinction_oracle(2, 0.5)).epsilon(1e-10));
    CHECK(1 - survival_probability(2, 0.5) == doctest::Approx(0.0875).epsilon(2e-3));
    CHECK(1 - survival_probability(3, 0.3) == doctest::Approx(extinction_oracle(3, 0.3)).epsilon(1e-10));
}

TEST_CASE("depth-1 crossing against exact enumeration") {
    // Closed mode: all four children touch, so a crossing needs one retained child per column.
    // Half-open mode: a crossing needs a fully retained row.
    for (double p : {0.5, 0.7}) {
        const double closed = p * std::pow(1 - (1 - p) * (1 - p), 2);
        const double half = p * (1 - std::pow(1 - p * p, 2));
        check_rate(crossing_probability(2, p, 1, 1, 40000, 5, Connectivity::closed), closed, 3);
        check_rate(crossing_probability(2, p, 1, 1, 40000, 6, Connectivity::half_open), half, 3);
    }
    CHECK(0.5 * std::pow(1 - 0.25, 2) == 0.28125);
}

TEST_CASE("truncated survival at depth 1") {
    const double p = 0.5;
    check_rate(truncated_survival(2, p, 1, 40000, 9), 1 - std::pow(1 - p, 4), 3);
}

TEST_CASE("coupled samples are monotone in p") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        bool prev = false;
        for (double p : {0.3, 0.5, 0.7, 0.9, 1.0}) {
            const auto tree = sample_retained(2, p, 3, 1, seed);
            const bool c = has_crossing(tree, 0, Connectivity::closed);
            CHECK((!prev || c));
            CHECK((!has_crossing(tree, 0, Connectivity::half_open) || c));
            prev = c;
        }
        const double th = crossing_threshold(2, 3, 1, seed);
        CHECK(has_crossing(sample_retained(2, std::min(1.0, th + 1e-12), 3, 1, seed), 0, Connectivity::closed));
        if (th > 1e-9) CHECK_FALSE(has_crossing(sample_retained(2, th - 1e-9, 3, 1, seed), 0, Connectivity::closed));
    }
}

TEST_CASE("p_c proxy") {
    const auto zero = estimate_pc(2, 0, 4000, 1e-6, 3);
    CHECK(zero.ci_lo <= 0.5);
    CHECK(0.5 <= zero.ci_hi);
    const auto d2 = estimate_pc(2, 3, 400, 1e-4, 4);
    const auto d3 = estimate_pc(3, 3, 400, 1e-4, 5);
    CHECK(d3.pc_estimate <= d2.pc_estimate + (d2.ci_hi - d2.ci_lo));
    CHECK(d2.ci_lo <= d2.pc_estimate);
    CHECK(d2.pc_estimate <= d2.ci_hi);
}
