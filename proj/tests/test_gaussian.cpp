#include <boost/math/special_functions/owens_t.hpp>
#include <cmath>

#include "doctest.h"
#include "loglab/gaussian.hpp"

using namespace loglab::gaussian;

namespace {

double upper_tail(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// P[X >= h, Y >= h] for unit-variance correlation rho via Owen's T.
double equal_threshold_orthant(double h, double rho) {
    const double a = std::sqrt((1 - rho) / (1 + rho));
    return upper_tail(h) - 2 * boost::math::owens_t(h, a);
}

}  // namespace

TEST_CASE("normal tail") {
    CHECK(normal_tail(0) == 0.5);
    CHECK(normal_tail(1) == doctest::Approx(0.1586553).epsilon(1e-7));
    CHECK(normal_tail(1) == doctest::Approx(upper_tail(1)).epsilon(1e-14));
    CHECK(std::abs(normal_tail(-40) - 1) <= 1e-15);
    for (double x : {-3.0, 0.5, 2.0, 7.0, 20.0}) CHECK(normal_tail(x) == doctest::Approx(upper_tail(x)).epsilon(1e-13));
    CHECK(log_normal_tail(25) == doctest::Approx(std::log(upper_tail(25))).epsilon(1e-12));
    CHECK(std::isfinite(log_normal_tail(40)));
}

TEST_CASE("tail constant brackets the tail on [1/2, 8]") {
    const double c = kTailConstant;
    for (int i = 0; i <= 300; ++i) {
        const double x = 0.5 + 7.5 * i / 300.0;
        const double g = std::exp(-x * x / 2) / x;
        CHECK(c * g <= normal_tail(x));
        CHECK(normal_tail(x) <= g / c);
    }
}

TEST_CASE("orthant ratio examples") {
    CHECK(orthant_ratio({0.8, 0.5, 0.0, 1.0}) == doctest::Approx(1.0).epsilon(1e-12));
    const double perfect = orthant_ratio({1.0, 1.0, 1.0, 1.0});
    CHECK(perfect == doctest::Approx(1 / upper_tail(1)).epsilon(1e-10));
    CHECK(perfect == doctest::Approx(6.3030).epsilon(1e-4));
    const double half = orthant_ratio({1.0, 1.0, 0.5, 1.0});
    CHECK(half > 1.0);
    CHECK(half < perfect);
}

TEST_CASE("orthant ratio matches Owen's T") {
    for (double rho : {0.1, 0.3, 0.5, 0.8, 0.95})
        for (double t : {1.0, 1.7, 2.5, 4.0}) {
            const double oracle = equal_threshold_orthant(t, rho) / (upper_tail(t) * upper_tail(t));
            CAPTURE(rho);
            CAPTURE(t);
            CHECK(orthant_ratio({1.0, 1.0, rho, t}) == doctest::Approx(oracle).epsilon(1e-9));
        }
}

TEST_CASE("orthant ratio agrees with Monte Carlo") {
    const BivariateSpec spec{1.0, 1.0, 0.5, 1.0};
    const auto mc = orthant_ratio_mc(spec, 10000000, 17);
    CHECK(std::abs(mc.ratio - orthant_ratio(spec)) <= 3 * mc.std_error);
}

TEST_CASE("entropic repulsion") {
    CHECK(std::abs(repulsion_ratio(1, 1e6, 1, 1) - 1) <= 1e-2);
    CHECK(repulsion_ratio(1, 1e6, 1, -5) <= 1 + 1e-2);
    // Conditional density of X given X + Y >= c against N(sigma2 theta, sigma2), by erfc.
    const double s2 = 0.7, m = 100, theta = 1.0;
    const double c = (m + 1) * s2 * theta;
    for (double t : {-2.0, 0.0, 0.7, 2.0, 3.0}) {
        const double num = std::exp(-t * t / (2 * s2)) * upper_tail((c - t) / std::sqrt(m * s2));
        const double den = upper_tail(c / std::sqrt((m + 1) * s2)) * std::exp(-(t - s2 * theta) * (t - s2 * theta) / (2 * s2));
        CHECK(repulsion_ratio(s2, m, theta, t) == doctest::Approx(num / den).epsilon(1e-9));
    }
}

TEST_CASE("domination theta") {
    CHECK(*domination_theta(1.0, 5) == 1.0);
    for (double p : {0.2, 0.5, 0.9}) CHECK(*domination_theta(p, 0) == doctest::Approx(p).epsilon(1e-12));
    CHECK(*domination_theta(0.96, 1) == doctest::Approx((1 + std::sqrt(0.84)) / 2).epsilon(1e-12));
    for (double p : {0.7, 0.9, 0.99})
        for (unsigned delta : {1u, 2u, 5u}) {
            const auto th = domination_theta(p, delta);
            if (!th) continue;
            CHECK((1 - *th) * std::pow(*th, delta) >= 1 - p - 1e-12);
        }
}

TEST_CASE("sequence iterates") {
    const auto a2 = sequence_iterate(SequenceKind::A, 2, 1e6, 2);
    REQUIRE(a2.terms.size() == 2);
    CHECK(a2.terms[0] == 2.0);
    CHECK(a2.terms[1] == doctest::Approx(2 * std::pow(1 + 2048 / 1e6, 2)).epsilon(1e-15));
    const auto a50 = sequence_iterate(SequenceKind::A, 2, 1e6, 50);
    for (double x : a50.terms) CHECK(x <= 4.0);
    const auto b5 = sequence_iterate(SequenceKind::B, 2, 1e6, 5);
    for (std::size_t i = 2; i <= 5; ++i) CHECK(b5.excess[i - 1] <= std::ldexp(1.0, -static_cast<int>(i)));
}
