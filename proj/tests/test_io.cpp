#include <sstream>

#include "doctest.h"
#include "loglab/field_io.hpp"
#include "loglab/grid_field.hpp"
#include "loglab/path_io.hpp"
#include "loglab/paths.hpp"

using namespace loglab;

TEST_CASE("path JSON lines round trip") {
    const auto chain = paths::sample_refined_chain(110, 4, 1, PathFamily::P, 12);
    std::stringstream ss;
    for (const Path& p : chain.levels) write_path_jsonl(ss, p);
    const auto back = read_paths_jsonl(ss);
    REQUIRE(back.size() == chain.levels.size());
    for (std::size_t j = 0; j < back.size(); ++j) {
        CHECK(back[j].coords == chain.levels[j].coords);
        CHECK(back[j].scale == chain.levels[j].scale);
        CHECK(back[j].denominator == chain.levels[j].denominator);
        CHECK(back[j].family == chain.levels[j].family);
    }
}

TEST_CASE("field snapshots round trip bit-exactly") {
    SUBCASE("points") {
        const auto s = whitenoise::sample_field_points(PointSet(2, {0.1, 0.2, 0.3, 0.9}), 4, 7);
        std::stringstream ss;
        write_field_snapshot(ss, s);
        const auto snap = read_field_snapshot(ss);
        CHECK(snap.layout == "points");
        CHECK(snap.values == s.values);
        CHECK(snap.points == s.points.flat());
        CHECK(snap.n == 4);
    }
    SUBCASE("grid") {
        const whitenoise::GridFieldSampler sampler(whitenoise::CovarianceSpec::level(2, 3), 1.0, 0.125);
        const auto g = sampler.sample(2);
        std::stringstream ss;
        write_field_snapshot(ss, g);
        const auto snap = read_field_snapshot(ss);
        CHECK(snap.layout == "grid");
        CHECK(snap.side == g.side);
        CHECK(snap.values == g.values);
    }
    SUBCASE("truncated input") {
        std::stringstream ss("{\"d\":2}\n");
        CHECK_THROWS(read_field_snapshot(ss));
    }
}
