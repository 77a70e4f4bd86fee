#include <algorithm>
#include <set>

#include "doctest.h"
#include "loglab/paths.hpp"

using namespace loglab;
using namespace loglab::paths;

namespace {

std::vector<std::int64_t> unit(int d, std::initializer_list<std::pair<int, int>> terms) {
    std::vector<std::int64_t> v(static_cast<std::size_t>(d), 0);
    for (auto [axis, c] : terms) v[static_cast<std::size_t>(axis)] += c;
    return v;
}

std::vector<std::int64_t> vertex(const Path& p, std::size_t i) { return {p.vertex(i).begin(), p.vertex(i).end()}; }

std::set<std::vector<std::int64_t>> vertex_set(const Path& p) {
    std::set<std::vector<std::int64_t>> s;
    for (std::size_t i = 0; i < p.size(); ++i) s.insert(vertex(p, i));
    return s;
}

}  // namespace

TEST_CASE("base path examples") {
    const int seq[] = {1, 2};
    const Path p = base_path(3, 2, seq);
    REQUIRE(p.size() == 2);
    CHECK(vertex(p, 0) == unit(3, {{0, 1}}));
    CHECK(vertex(p, 1) == unit(3, {{0, 1}, {1, 1}}));

    std::set<std::vector<std::int64_t>> all;
    for (int a = 1; a <= 3; ++a)
        for (int b = 1; b <= 3; ++b) {
            const int s[] = {a, b};
            all.insert(base_path(3, 2, s).coords);
        }
    CHECK(all.size() == 9);

    const int straight[] = {1, 1, 1};
    const Path line = base_path(2, 3, straight);
    CHECK(vertex(line, 2) == unit(2, {{0, 3}}));
    CHECK(is_self_avoiding(line));
    CHECK(is_nearest_neighbor(line));
}

TEST_CASE("zigzag base path") {
    const int seq[] = {3, 2, 4, 2, 3};
    const Path z = zigzag_base_path(4, 5, seq);
    CHECK(z.size() == 4 * 5 - 1);
    CHECK(vertex(z, z.size() - 1) == unit(4, {{0, 10}, {2, 1}}));
    CHECK(is_self_avoiding(z));
    CHECK(is_nearest_neighbor(z));
}

TEST_CASE("interpolation") {
    const int seq[] = {1, 2};
    const Path p = base_path(3, 2, seq);
    const Path q = interpolate_base(p, 3);
    REQUIRE(q.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        const auto x = q.position(i);
        CHECK(x[0] == doctest::Approx(1.0));
        CHECK(x[1] == doctest::Approx(i / 3.0));
    }
    const Path same = interpolate_base(p, 1);
    CHECK(same.coords == p.coords);
    std::vector<int> ten(9, 1);
    const Path len10 = base_path(2, 9, ten);
    CHECK(len10.size() == 9);
    std::vector<int> nine(10, 2);
    nine[0] = 1;
    CHECK(interpolate_base(base_path(3, 10, nine), 5).size() == 46);
}

TEST_CASE("tube paths") {
    const int d = 23;
    const std::vector<std::int64_t> x(d, 0);
    const auto free = tube_paths(x, 0, 1, std::nullopt, 11);
    REQUIRE(!free.empty());
    std::vector<std::vector<std::int64_t>> expected;
    for (int k = 0; k <= 8; ++k) expected.push_back(unit(d, {{0, k}, {1, 1}}));
    expected.push_back(unit(d, {{0, 8}, {1, 1}, {2, 1}}));
    expected.push_back(unit(d, {{0, 8}, {2, 1}}));
    bool found = false;
    for (const Path& p : free) {
        CHECK(p.size() == 11);
        CHECK(is_self_avoiding(p));
        CHECK(is_nearest_neighbor(p));
        std::vector<std::vector<std::int64_t>> verts;
        for (std::size_t i = 0; i < p.size(); ++i) verts.push_back(vertex(p, i));
        found = found || verts == expected;
        const Tube tube{x, 0, 1};
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(tube.contains(p.vertex(i)));
    }
    CHECK(found);
    for (std::size_t a = 0; a < free.size(); ++a)
        for (std::size_t b = a + 1; b < free.size(); ++b) CHECK(intersection_count(free[a], free[b]) == 0);

    const auto z = unit(d, {{1, -1}});
    const auto fixed = tube_paths(x, 0, 1, z, 11);
    for (std::size_t a = 0; a < fixed.size(); ++a) {
        CHECK(vertex(fixed[a], 0) == z);
        for (std::size_t b = a + 1; b < fixed.size(); ++b) {
            const auto sa = vertex_set(fixed[a]), sb = vertex_set(fixed[b]);
            std::vector<std::vector<std::int64_t>> common;
            std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(common));
            CHECK(common == std::vector<std::vector<std::int64_t>>{z});
        }
    }
}

TEST_CASE("refinement length law and determinism") {
    std::vector<int> seq(9, 1);
    for (std::size_t i = 0; i < seq.size(); i += 2) seq[i] = 2;
    const Path base = base_path(110, 9, seq);
    REQUIRE(base.size() == 9);
    std::vector<int> ten(10, 1);
    const Path p10 = base_path(110, 10, ten);
    CHECK(refine_path_keyed(p10, 5).size() == 91);
    CHECK(refined_length(10, 1) == 91);
    CHECK(refined_length(10, 2) == 901);

    const Chain a = sample_refined_chain(110, 10, 2, PathFamily::P, 99);
    const Chain b = sample_refined_chain(110, 10, 2, PathFamily::P, 99);
    REQUIRE(a.levels.size() == 3);
    for (int j = 0; j <= 2; ++j) CHECK(a.levels[j].coords == b.levels[j].coords);
    CHECK(a.levels[2].size() == static_cast<std::size_t>(refined_length(10, 2)));
    CHECK(audit_chain(a).total() == 0);
}

TEST_CASE("non-canonical branching at small d") {
    RefinementOptions options;
    options.tube_paths = 3;
    options.branching = 1;
    CHECK_FALSE(options.canonical(20));
    const Chain c = sample_refined_chain(20, 4, 2, PathFamily::P, 3, options);
    CHECK(audit_chain(c).total() == 0);
    RefinementOptions defaults;
    CHECK_THROWS_AS(sample_refined_chain(20, 4, 1, PathFamily::P, 3, defaults), std::invalid_argument);
}

TEST_CASE("intersections, boxes and Hausdorff distance") {
    const Chain c = sample_refined_chain(110, 10, 1, PathFamily::P, 4);
    const Path& p = c.levels[1];
    CHECK(intersection_count(p, p) == p.size());
    const int s1[] = {1, 1};
    const int s2[] = {2, 2};
    CHECK(intersection_count(base_path(3, 2, s1), base_path(3, 2, s2)) == 0);

    Path single;
    single.d = 3;
    single.push_back(std::vector<std::int64_t>{1, 0, 0});
    for (int m = 0; m < 6; ++m) CHECK(boxes_touching(single, m).size() == 1);

    const auto pts = p.points();
    CHECK(local_hausdorff(pts, pts, 5) == 0.0);
    CHECK(hausdorff(pts, pts) == 0.0);
}
