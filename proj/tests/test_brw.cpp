#include <cmath>

#include "doctest.h"
#include "loglab/brw.hpp"
#include "loglab/gaussian.hpp"
#include "loglab/stats.hpp"

using namespace loglab;
using namespace loglab::brw;

TEST_CASE("brw value") {
    const BoxNoise noise(11);
    const std::vector<double> x{0.3, 0.7};
    CHECK(brw_value(x, 0, noise) == noise(0, box_of_point(x, 0)));
    const std::vector<double> y{0.3 + 1e-4, 0.7 - 1e-4};
    REQUIRE(box_of_point(x, 6) == box_of_point(y, 6));
    CHECK(brw_value(x, 6, noise) == brw_value(y, 6, noise));
    double sum = 0;
    for (int j = 0; j <= 4; ++j) sum += noise(j, box_of_point(x, j));
    CHECK(brw_value(x, 4, noise) == doctest::Approx(sum).epsilon(1e-15));
}

TEST_CASE("brw value variance") {
    const int n = 3, seeds = 20000;
    const std::vector<double> x{0.41, 0.12};
    RunningStats s;
    std::vector<double> v;
    for (int i = 0; i < seeds; ++i) v.push_back(brw_value(x, n, BoxNoise(1000 + i)));
    for (double a : v) s.add(a);
    double m4 = 0;
    for (double a : v) m4 += std::pow(a - s.mean(), 4) / seeds;
    const double se = std::sqrt((m4 - s.variance() * s.variance()) / seeds);
    CHECK(std::abs(s.variance() - (n + 1) * std::log(2.0)) <= 4 * se);
}

TEST_CASE("good path verdicts") {
    const paths::Chain chain = paths::sample_refined_chain(110, 10, 1, PathFamily::P, 8);
    for (std::uint64_t s = 0; s < 20; ++s) CHECK(is_k_good(chain, -1e6, 0, 1, BoxNoise(s)).is_good);
    for (std::uint64_t s = 0; s < 1000; ++s) CHECK_FALSE(is_k_good(chain, 1e6, 0, 1, BoxNoise(s)).is_good);

    Path single;
    single.d = 2;
    single.push_back(std::vector<std::int64_t>{3, 5});
    const double alpha = 0.5;
    const int samples = 100000;
    int good = 0;
    for (int s = 0; s < samples; ++s) {
        const BoxNoise noise(static_cast<std::uint64_t>(s) + 77);
        good += check_good(single, alpha, 2, 2, noise).is_good ? 1 : 0;
    }
    const double p = gaussian::normal_tail(alpha / std::sqrt(std::log(2.0)));
    CHECK(std::abs(good / double(samples) - p) <= 3 * std::sqrt(p * (1 - p) / samples));
}

TEST_CASE("second moment estimator identities") {
    MomentParams params;
    params.d = 110;
    params.M = 4;
    params.n = 1;
    params.k = 1;
    params.pairs = 200;
    SUBCASE("p = 1 gives ratio exactly 1") {
        params.alpha = -1e6;
        const auto r = weighted_count_moments(params);
        CHECK(r.ratio_estimate == 1.0);
    }
    SUBCASE("estimate is the histogram average of p^-exponent") {
        params.alpha = 0.0;
        for (bool identical : {false, true}) {
            params.identical_pairs = identical;
            const auto r = weighted_count_moments(params);
            double total = 0;
            std::size_t count = 0;
            for (std::size_t e = 0; e < r.exponent_histogram.size(); ++e) {
                total += r.exponent_histogram[e] * std::exp(-r.log_p * static_cast<double>(e));
                count += r.exponent_histogram[e];
            }
            CHECK(count == params.pairs);
            CHECK(r.ratio_estimate == doctest::Approx(total / count).epsilon(1e-12));
            CHECK(r.bound_violations == 0);
        }
    }
    SUBCASE("identical pairs use the full box count") {
        params.alpha = 0.0;
        params.identical_pairs = true;
        params.pairs = 1;
        const auto r = weighted_count_moments(params);
        std::size_t e = 0;
        while (r.exponent_histogram[e] == 0) ++e;
        CHECK(e >= 2);
        CHECK(r.ratio_estimate == doctest::Approx(std::exp(-r.log_p * static_cast<double>(e))).epsilon(1e-12));
    }
}

TEST_CASE("good path search") {
    const auto r = good_path_search(110, 10, 1, 1, -1e6, 5, 3);
    CHECK(r.found);
    CHECK(r.tried == 1);
    REQUIRE(r.exemplar);
    CHECK(is_k_good(*r.exemplar, -1e6, 1, 1, BoxNoise(r.noise_seed)).is_good);
}

TEST_CASE("tilted noise likelihood ratio") {
    TiltedBoxNoise noise(5, 0.0, 0.95);
    const std::vector<std::int64_t> box{1, 2};
    const double v = noise(3, box);
    CHECK(noise(3, box) == v);
    CHECK(noise.distinct_queries() == 1);
    const double expected = v >= 0 ? std::log(0.5 / 0.95) : std::log(0.5 / 0.05);
    CHECK(noise.log_likelihood_ratio() == doctest::Approx(expected).epsilon(1e-12));
}
