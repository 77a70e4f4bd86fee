#include <cmath>

#include "doctest.h"
#include "loglab/metric.hpp"
#include "loglab/random.hpp"

using namespace loglab;
using namespace loglab::metric;

namespace {

whitenoise::GridField flat_field(std::size_t side, double step) {
    whitenoise::GridField f;
    f.d = 2;
    f.step = step;
    f.extent = step * static_cast<double>(side - 1);
    f.side = side;
    f.values.assign(side * side, 0.0);
    return f;
}

}  // namespace

TEST_CASE("lfpp distance at xi = 0 is the l1 graph distance") {
    const auto field = flat_field(10, 0.1);
    const WeightedGrid grid(field, 0.0);
    const std::size_t origin = 0, target = 3 + 10 * 4;
    CHECK(lfpp_distance(grid, origin, target) == doctest::Approx(0.7).epsilon(1e-14));
    const std::size_t src[] = {5, 17}, dst[] = {17, 99};
    CHECK(lfpp_distance(grid, src, dst) == 0.0);
}

TEST_CASE("Weyl scaling and metric axioms") {
    auto field = flat_field(12, 1.0 / 11);
    Stream rng(4);
    for (double& v : field.values) v = rng.normal();
    for (double xi : {0.3, 1.0}) {
        const WeightedGrid base(field, xi);
        for (double c : {-1.5, 0.25, 2.0}) {
            const WeightedGrid shifted(field, xi, c);
            for (int i = 0; i < 10; ++i) {
                const std::size_t a = rng.below(base.size()), b = rng.below(base.size());
                const double d0 = lfpp_distance(base, a, b);
                CHECK(lfpp_distance(shifted, a, b) == doctest::Approx(std::exp(xi * c) * d0).epsilon(1e-12));
            }
        }
        for (int i = 0; i < 20; ++i) {
            const std::size_t a = rng.below(base.size()), b = rng.below(base.size()), c = rng.below(base.size());
            CHECK(lfpp_distance(base, a, b) == doctest::Approx(lfpp_distance(base, b, a)).epsilon(1e-12));
            CHECK(lfpp_distance(base, a, c) <= lfpp_distance(base, a, b) + lfpp_distance(base, b, c) + 1e-12);
        }
    }
}

TEST_CASE("slab nodes") {
    const auto field = flat_field(9, 0.125);
    const WeightedGrid grid(field, 0.0);
    const auto left = slab_nodes(grid, 0.0, 0.125);
    CHECK(left.size() == 2 * 9);
    for (std::size_t i : left) CHECK(grid.coordinates(i)[0] <= 1);
    const auto left_nodes = slab_nodes(grid, 0.0, 0.0);
    const auto right_nodes = slab_nodes(grid, 1.0, 1.0);
    CHECK(lfpp_distance(grid, left_nodes, right_nodes) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("exponent fit at xi = 0 has zero slope") {
    ExponentFitParams params;
    params.xis = {0.0};
    params.levels = {3, 4, 5};
    params.replicas = 3;
    params.bootstrap = 20;
    const auto sweep = exponent_fit(params);
    REQUIRE(sweep.fits.size() == 1);
    CHECK(sweep.fits[0].point_to_point.slope == 0.0);
    CHECK(sweep.fits[0].set_to_set.slope == 0.0);
}

TEST_CASE("corridor cost at xi = 0 is the path length") {
    CorridorParams params;
    params.d = 50;
    params.M = 10;
    params.xi = 0.0;
    params.n = 1;
    params.path_samples = 2;
    params.refinement.branching = 1;
    const auto r = corridor_upper_bound(params);
    const std::int64_t base = (4 * 10 - 2) * 7 + 1;
    CHECK(r.path_length == static_cast<std::size_t>(paths::refined_length(base, 1)));
    CHECK(r.min_cost == doctest::Approx(static_cast<double>(r.path_length - 1) / (7.0 * 8.0)).epsilon(1e-12));
    CHECK(r.min_cost == doctest::Approx(r.euclidean_length).epsilon(1e-12));
    CHECK_FALSE(r.canonical);
}
