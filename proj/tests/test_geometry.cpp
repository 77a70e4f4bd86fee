#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "loglab/geometry.hpp"

using namespace loglab;
using namespace loglab::geometry;

namespace {

// Each cap is a regularized incomplete beta function of the cap height.
double ratio_oracle(double u, double t, int d) {
    if (u >= 2 * t) return 0.0;
    const double x = 1 - (u / (2 * t)) * (u / (2 * t));
    return boost::math::ibeta((d + 1) / 2.0, 0.5, x);
}

}  // namespace

TEST_CASE("ball volume") {
    CHECK(ball_volume(2, 1) == doctest::Approx(std::numbers::pi).epsilon(1e-14));
    CHECK(ball_volume(1, 1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(ball_volume(3, 2) == doctest::Approx(4.0 / 3.0 * std::numbers::pi * 8).epsilon(1e-14));
    const double v100 = std::exp(50 * std::log(std::numbers::pi) - std::lgamma(51.0));
    CHECK(ball_volume(100, 1) > 0);
    CHECK(ball_volume(100, 1) == doctest::Approx(v100).epsilon(1e-12));
}

TEST_CASE("intersection ratio examples") {
    CHECK(intersection_ratio(0, 1, 7) == 1.0);
    CHECK(intersection_ratio(2.5, 1, 3) == 0.0);
    const double lens = 2 * std::acos(0.5) - 0.5 * std::sqrt(3.0);
    CHECK(std::abs(intersection_ratio(1, 1, 2) - lens / std::numbers::pi) <= 1e-10);
    CHECK(intersection_ratio(1, 1, 2) == doctest::Approx(0.391002).epsilon(1e-6));
}

TEST_CASE("intersection ratio matches the incomplete beta oracle") {
    for (int d : {1, 2, 3, 5, 16, 64, 256})
        for (double t : {0.25, 1.0, 3.0})
            for (int i = 0; i <= 40; ++i) {
                const double u = 2 * t * i / 40.0;
                CAPTURE(d);
                CAPTURE(u);
                CHECK(intersection_ratio(u, t, d) == doctest::Approx(ratio_oracle(u, t, d)).epsilon(1e-10));
            }
}

TEST_CASE("intersection ratio is monotone, bounded and scale invariant") {
    for (int d : {1, 2, 8, 100}) {
        double prev = 1.0;
        for (int i = 0; i <= 200; ++i) {
            const double u = 2.2 * i / 200.0;
            const double r = intersection_ratio(u, 1.0, d);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            CHECK(r <= prev + 1e-15);
            CHECK(intersection_ratio(3 * u, 3.0, d) == doctest::Approx(r).epsilon(1e-12));
            prev = r;
        }
    }
}

TEST_CASE("surface to volume ratio") {
    CHECK(surface_to_volume_ratio(2) == doctest::Approx(2 / std::numbers::pi).epsilon(1e-13));
    CHECK(surface_to_volume_ratio(3) == doctest::Approx(0.75).epsilon(1e-13));
    const double r400 = surface_to_volume_ratio(400) / 20.0;
    CHECK(r400 >= 0.3);
    CHECK(r400 <= 0.5);
    for (int d : {4, 10, 50}) {
        const double oracle = std::exp(std::lgamma(d / 2.0 + 1) - std::lgamma(d / 2.0 + 0.5)) / std::sqrt(std::numbers::pi);
        CHECK(surface_to_volume_ratio(d) == doctest::Approx(oracle).epsilon(1e-12));
    }
}

TEST_CASE("union ball region volume") {
    const int d = 3;
    BoxRegion region{{0.0, 0.0, 0.0}, 0.5};
    SUBCASE("single ball inside the region") {
        PointSet c(d, {0.0, 0.0, 0.0});
        const auto est = union_ball_region_volume(c, 0.05, region, 20000, 3);
        CHECK(std::abs(est.estimate - ball_volume(d, 0.05)) <= 4 * est.std_error + 1e-12 * ball_volume(d, 0.05));
    }
    SUBCASE("ball disjoint from the region") {
        PointSet c(d, {5.0, 0.0, 0.0});
        CHECK(union_ball_region_volume(c, 0.1, region, 1000, 3).estimate == 0.0);
    }
    SUBCASE("duplicate centers do not double count") {
        PointSet one(d, {0.4, 0.0, 0.0});
        PointSet two(d, {0.4, 0.0, 0.0, 0.4, 0.0, 0.0});
        const auto a = union_ball_region_volume(one, 0.2, region, 5000, 9);
        const auto b = union_ball_region_volume(two, 0.2, region, 5000, 9);
        CHECK(a.estimate == doctest::Approx(b.estimate).epsilon(1e-12));
    }
    SUBCASE("half ball at a face") {
        PointSet c(d, {0.5, 0.0, 0.0});
        const auto est = union_ball_region_volume(c, 0.1, region, 40000, 11);
        CHECK(std::abs(est.estimate - 0.5 * ball_volume(d, 0.1)) <= 4 * est.std_error);
    }
}

TEST_CASE("ball union multiplicity with the cell index") {
    Stream rng(5);
    PointSet centers(2);
    for (int i = 0; i < 200; ++i) {
        const double p[2] = {rng.uniform(), rng.uniform()};
        centers.push_back(p);
    }
    BallUnion fast(centers, 0.1, 10), brute(centers, 0.1);
    for (int i = 0; i < 500; ++i) {
        const double q[2] = {rng.uniform(), rng.uniform()};
        CHECK(fast.multiplicity(q) == brute.multiplicity(q));
    }
}
