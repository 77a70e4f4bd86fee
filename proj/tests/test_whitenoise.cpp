#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "doctest.h"
#include "loglab/geometry.hpp"
#include "loglab/grid_field.hpp"
#include "loglab/stats.hpp"
#include "loglab/whitenoise.hpp"

using namespace loglab;
using namespace loglab::whitenoise;

namespace {

// Band integral of t^{-1} f(t) on (lo, hi] by adaptive Gauss-Kronrod in log t.
template <class F>
double band_oracle(double lo, double hi, F f) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double s) { return f(std::exp(s)); }, std::log(lo), std::log(hi), 15, 1e-13);
}

}  // namespace

TEST_CASE("variance identity and support") {
    for (int d : {2, 3, 8, 64})
        for (int n = 1; n <= 12; ++n) CHECK(std::abs(cov_hn(0, CovarianceSpec::level(d, n)) - n * std::log(2.0)) <= 1e-8);
    CHECK(cov_hn(2.0, CovarianceSpec::level(3, 5)) == 0.0);
    CHECK(cov_hn(7.5, CovarianceSpec::level(2, 5)) == 0.0);
}

TEST_CASE("covariance against the defining integral") {
    for (int d : {2, 3, 10})
        for (double u : {0.01, 0.1, 0.3, 0.9, 1.7}) {
            const auto spec = CovarianceSpec::level(d, 6);
            const double oracle =
                band_oracle(spec.t_lo, spec.t_hi, [&](double t) { return geometry::intersection_ratio(u, t, d); });
            CAPTURE(d);
            CAPTURE(u);
            CHECK(cov_hn(u, spec) == doctest::Approx(oracle).epsilon(1e-9));
            CHECK(cov_hn_nested(u, spec) == doctest::Approx(oracle).epsilon(1e-9));
        }
}

TEST_CASE("covariance is nonincreasing and additive over bands") {
    const auto spec = CovarianceSpec::level(2, 8);
    double prev = cov_hn(0, spec);
    for (int i = 1; i <= 100; ++i) {
        const double c = cov_hn(2.0 * i / 100, spec);
        CHECK(c <= prev + 1e-12);
        prev = c;
    }
    for (double u : {0.0, 0.05, 0.4}) {
        const double whole = cov_hn(u, CovarianceSpec::level(3, 6));
        const double parts = cov_hn(u, CovarianceSpec::increment(3, 0, 2)) + cov_hn(u, CovarianceSpec::increment(3, 2, 6));
        CHECK(whole == doctest::Approx(parts).epsilon(1e-10));
    }
}

TEST_CASE("covariance table") {
    const auto spec = CovarianceSpec::level(2, 8);
    const CovarianceTable table(spec, 1e-10);
    CHECK(table.max_error() <= 1e-10);
    Stream rng(3);
    for (int i = 0; i < 200; ++i) {
        const double u = 2.2 * rng.uniform();
        CHECK(std::abs(table(u) - cov_hn(u, spec)) <= 1e-9);
    }
}

TEST_CASE("point sampler") {
    SUBCASE("single point variance") {
        const PointFieldSampler sampler(PointSet(2, {0.3, 0.4}), CovarianceSpec::level(2, 5));
        std::vector<double> v;
        RunningStats s;
        for (std::uint64_t i = 0; i < 100000; ++i) {
            v.push_back(sampler.sample(i).values[0]);
            s.add(v.back());
        }
        double m4 = 0;
        for (double a : v) m4 += std::pow(a - s.mean(), 4) / v.size();
        const double se = std::sqrt((m4 - s.variance() * s.variance()) / v.size());
        CHECK(std::abs(s.variance() - 5 * std::log(2.0)) <= 3 * se);
    }
    SUBCASE("far points are uncorrelated") {
        const PointSet pts(2, {0.0, 0.0, 2.0, 0.5});
        const auto c = covariance_matrix(pts, CovarianceSpec::level(2, 4));
        CHECK(c[1] == 0.0);
        CHECK(c[2] == 0.0);
    }
    SUBCASE("n = 0 gives the zero field") {
        const auto s = sample_field_points(PointSet(2, {0.1, 0.2, 0.5, 0.5}), 0, 4);
        for (double x : s.values) CHECK(x == 0.0);
    }
    SUBCASE("covariance matrices are positive definite") {
        Stream rng(8);
        PointSet pts(3);
        for (int i = 0; i < 100; ++i) {
            const double p[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
            pts.push_back(p);
        }
        const GaussianSampler g(covariance_matrix(pts, CovarianceSpec::level(3, 6)), 100);
        CHECK_FALSE(g.eigen_fallback());
        CHECK(g.jitter() <= 1e-10);
    }
}

TEST_CASE("grid sampler") {
    const GridFieldSampler sampler(CovarianceSpec::level(2, 4), 1.0, 1.0 / 16);
    const auto a = sampler.sample(5), b = sampler.sample(5);
    CHECK(a.values == b.values);
    CHECK(a.side == 17);
    CHECK(sampler.discretization_error() < 0.2);
    const auto& axis = sampler.axis_covariance();
    CHECK(axis[0] == doctest::Approx(4 * std::log(2.0)).epsilon(1e-9));
}

TEST_CASE("path average variance") {
    const int d = 2, j = 1;
    const double lo = 0.125, hi = 0.25;
    Path p;
    p.d = d;
    p.scale = 1;
    p.push_back(std::vector<std::int64_t>{4, 4});
    const geometry::BoxRegion box{{0.5, 0.5}, 2.0};
    SUBCASE("single interior vertex") {
        const auto v = path_average_variance(p, box, j, 2000, 1);
        CHECK(v.estimate == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    }
    SUBCASE("path far outside the box") {
        const geometry::BoxRegion far{{5.0, 5.0}, 0.5};
        CHECK(path_average_variance(p, far, j, 2000, 1).estimate == 0.0);
    }
    SUBCASE("two vertices against inclusion-exclusion") {
        p.push_back(std::vector<std::int64_t>{6, 4});
        const double u = 0.25;
        const double oracle = band_oracle(lo, hi, [&](double t) { return 2 - geometry::intersection_ratio(u, t, d); });
        const auto v = path_average_variance(p, box, j, 20000, 2);
        CHECK(v.estimate >= std::log(2.0));
        CHECK(v.estimate <= 2 * std::log(2.0));
        CHECK(std::abs(v.estimate - oracle) <= 4 * v.std_error + 1e-6);
    }
}

TEST_CASE("g2i audit degenerate pairs") {
    paths::RefinementOptions options;
    options.tube_paths = 3;
    options.branching = 1;
    const auto p = paths::sample_refined_chain(20, 3, 2, PathFamily::S, 1, options);
    auto q = p;
    for (auto& level : q.levels)
        for (std::size_t i = 0; i < level.coords.size(); i += 20) level.coords[i] += 64 * level.denominator * (std::int64_t{1} << (3 * level.scale));
    const auto disjoint = g2i_audit(p, q, 1, 2, 200, 3);
    CHECK(disjoint.lhs == 0.0);
    CHECK(disjoint.rhs_sum == 0);
    const auto same = g2i_audit(p, p, 1, 2, 200, 3);
    CHECK(same.rhs_sum == p.levels[0].size() + p.levels[1].size() + p.levels[2].size());
    CHECK(std::isfinite(same.ratio));
    CHECK(same.lhs > 0);
}

TEST_CASE("good conditions degenerate thresholds") {
    paths::RefinementOptions options;
    options.tube_paths = 3;
    options.branching = 1;
    const auto chain = paths::sample_refined_chain(20, 3, 2, PathFamily::S, 2, options);
    std::vector<PointSet> probes;
    for (int j = 1; j <= 2; ++j) {
        PointSet s(20);
        s.push_back(chain.levels[j].position(0));
        s.push_back(chain.levels[j].position(chain.levels[j].size() - 1));
        probes.push_back(s);
    }
    const auto a = good_conditions_check(chain, {0.0, -1e6, 1, 2}, probes, 5, 200);
    for (char c : a.cond_a) CHECK(c);
    const auto b = good_conditions_check(chain, {-1e6, 0.0, 1, 2}, probes, 5, 200);
    for (char c : b.cond_b) CHECK(c);
    CHECK(a.path_averages == b.path_averages);
}
