#include <cmath>
#include <set>

#include "doctest.h"
#include "loglab/random.hpp"
#include "loglab/stats.hpp"

using namespace loglab;

TEST_CASE("philox4x32-10 known-answer vectors") {
    CHECK(philox4x32_10({0, 0, 0, 0}, {0, 0}) == PhiloxCounter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          PhiloxCounter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          PhiloxCounter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("stream is deterministic and children differ") {
    Stream a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    Stream parent(42);
    Stream c0 = parent.child(0), c1 = parent.child(1);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 1000; ++i) {
        seen.insert(c0());
        seen.insert(c1());
    }
    CHECK(seen.size() == 2000);
}

TEST_CASE("uniforms lie in the open unit interval") {
    CHECK(bits_to_unit(0) > 0.0);
    CHECK(bits_to_unit(~std::uint64_t{0}) < 1.0);
    CHECK(std::isfinite(normal_quantile(bits_to_unit(0))));
    CHECK(std::isfinite(normal_quantile(bits_to_unit(~std::uint64_t{0}))));
}

TEST_CASE("normal quantile matches erfc inversion") {
    for (double p : {1e-300, 1e-12, 0.001, 0.1, 0.3, 0.5, 0.77, 0.975, 1 - 1e-12}) {
        const double x = normal_quantile(p);
        const double back = 0.5 * std::erfc(-x / std::sqrt(2.0));
        CHECK(back == doctest::Approx(p).epsilon(1e-12));
    }
    CHECK(normal_quantile(0.5) == 0.0);
}

TEST_CASE("below is unbiased over a small range") {
    Stream rng(7);
    std::vector<int> counts(5, 0);
    const int n = 50000;
    for (int i = 0; i < n; ++i) ++counts[rng.below(5)];
    for (int c : counts) CHECK(std::abs(c - n / 5) < 4 * std::sqrt(n * 0.2 * 0.8));
}

TEST_CASE("keyed draws are pure functions of their key") {
    CHECK(keyed_bits(1, DrawDomain::box_noise, 3, 99) == keyed_bits(1, DrawDomain::box_noise, 3, 99));
    CHECK(keyed_bits(1, DrawDomain::box_noise, 3, 99) != keyed_bits(1, DrawDomain::fractal, 3, 99));
    CHECK(keyed_bits(1, DrawDomain::box_noise, 3, 99) != keyed_bits(2, DrawDomain::box_noise, 3, 99));
}

TEST_CASE("stats helpers") {
    RunningStats s;
    for (double x : {1.0, 2.0, 3.0, 4.0}) s.add(x);
    CHECK(s.mean() == doctest::Approx(2.5));
    CHECK(s.variance() == doctest::Approx(5.0 / 3.0));
    const std::vector<double> x{0, 1, 2, 3}, y{1, 3, 5, 7};
    const auto fit = least_squares(x, y);
    CHECK(fit.slope == doctest::Approx(2.0));
    CHECK(fit.intercept == doctest::Approx(1.0));
    CHECK(lower_median({5, 1, 3, 2}) == 2);
    CHECK(student_t_975(1000000) == doctest::Approx(1.959964).epsilon(1e-4));
    const std::vector<double> iso_in{1, 3, 2, 4}, w{1, 1, 1, 1};
    const auto iso = isotonic_increasing(iso_in, w);
    CHECK(iso[1] == doctest::Approx(2.5));
    CHECK(iso[2] == doctest::Approx(2.5));
}
