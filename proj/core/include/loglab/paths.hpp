#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loglab/geometry.hpp"

namespace loglab {

enum class PathFamily { P, S, zigzag, tube };

const char* to_string(PathFamily family);
PathFamily path_family_from_string(const std::string& name);

// Nearest-neighbor lattice path with exact integer coordinates. Vertex i sits at
// coords[i] / (denominator * 8^scale), where denominator is 1 for the P family and
// floor(sqrt(d)) for the S and zigzag families.
struct Path {
    PathFamily family = PathFamily::P;
    int d = 0;
    int M = 0;
    int scale = 0;
    std::int64_t denominator = 1;
    std::vector<std::int64_t> coords;

    std::size_t size() const { return d > 0 ? coords.size() / static_cast<std::size_t>(d) : 0; }
    std::span<const std::int64_t> vertex(std::size_t i) const {
        return {coords.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
    void push_back(std::span<const std::int64_t> v) { coords.insert(coords.end(), v.begin(), v.end()); }

    // Lattice spacing as a real number.
    double spacing() const;
    std::vector<double> position(std::size_t i) const;
    PointSet points() const;

    // "P_base", "S_refined", ...
    std::string tag() const;
};

namespace paths {

// floor(d / 10) and floor(sqrt(d)).
int tube_count(int d);
int lattice_denominator(int d);

// Length after n refinements starting from length L0.
std::int64_t refined_length(std::int64_t L0, int n);

// Oriented path (e_{i1}, e_{i1} + e_{i2}, ...); indices are 1-based in [1, d].
Path base_path(int d, int M, std::span<const int> seq);

// Zigzag path of length 4M - 1 from e_{i1} to 2M e_1 + e_{i1}; indices in [2, d].
Path zigzag_base_path(int d, int M, std::span<const int> seq);

// Replaces each unit edge by r collinear steps on the (1/r)-lattice.
Path interpolate_base(const Path& path, int r);

bool is_nearest_neighbor(const Path& path);
bool is_self_avoiding(const Path& path);

// The radius-2 l1 tube around the segment from x to x + 8 sign e_axis.
struct Tube {
    std::vector<std::int64_t> x;
    int axis = 0;
    int sign = 1;

    bool contains(std::span<const std::int64_t> z) const;
};

// The length-11 paths inside the tube from x to y = x + 8 sign e_axis. Without z the
// paths are pairwise disjoint and start next to x; with z (|z - x|_1 = 1) they all start
// at z and meet only there. x must lie in 8Z^d. Returned in construction order.
std::vector<Path> tube_paths(std::span<const std::int64_t> x, int axis, int sign,
                             std::optional<std::vector<std::int64_t>> z, int count);

struct RefinementOptions {
    // Number of tube paths offered per edge; 0 means floor(d / 10).
    int tube_paths = 0;
    // Size of the admissible subset per edge; 0 means tube_paths - 10.
    int branching = 0;

    int resolved_tube_paths(int d) const;
    int resolved_branching(int d) const;
    bool canonical(int d) const;
};

// Refines with explicit per-edge indices into the admissible subsets.
Path refine_path(const Path& path, std::span<const int> choices, const RefinementOptions& options = {});

// Refines with per-edge indices drawn from keyed bits of (seed, scale, edge position).
Path refine_path_keyed(const Path& path, std::uint64_t seed, const RefinementOptions& options = {});

struct Chain {
    std::vector<Path> levels;  // P_0 ... P_n
    std::vector<int> sequence;
    bool canonical = true;
    int branching = 0;
};

// Base sequence drawn from keyed bits of (seed, position), so prefixes agree across M.
std::vector<int> base_sequence(int d, int M, PathFamily family, std::uint64_t seed);

Chain sample_refined_chain(int d, int M, int n, PathFamily family, std::uint64_t seed,
                           const RefinementOptions& options = {});

// Number of vertices shared by two paths on the same lattice.
std::size_t intersection_count(const Path& a, const Path& b);

// Exact set of level-m dyadic boxes (side 2^{-m}) meeting the path, as sorted unique rows.
struct BoxSet {
    int d = 0;
    std::vector<std::int64_t> rows;

    std::size_t size() const { return d > 0 ? rows.size() / static_cast<std::size_t>(d) : 0; }
    std::span<const std::int64_t> operator[](std::size_t i) const {
        return {rows.data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
};
// Box corner of a single vertex: floor(coords * 2^m / (denominator * 8^scale)).
void box_of_vertex(std::span<const std::int64_t> v, int scale, std::int64_t denominator, int m,
                   std::span<std::int64_t> out);
BoxSet boxes_touching(const Path& path, int m);
std::size_t box_intersection_count(const BoxSet& a, const BoxSet& b);

// sum_{n=1}^{levels} 2^{-n} min{1, d_H(A ∩ B_{2^n}(0), B ∩ B_{2^n}(0))}.
double local_hausdorff(const PointSet& a, const PointSet& b, int levels);
double hausdorff(const PointSet& a, const PointSet& b);

// Structural audits of a sampled chain; each returns the number of violations.
struct ChainAudit {
    std::size_t self_avoidance = 0;
    std::size_t nearest_neighbor = 0;
    std::size_t length_law = 0;
    std::size_t containment = 0;      // vertex of P_n farther than (2/7) 8^{-j} from its P_j edge
    std::size_t box_containment = 0;  // P_n not inside P_j + [0, 8^{-j})^d or some P_j box missed
    std::size_t endpoint_sphere = 0;

    std::size_t total() const {
        return self_avoidance + nearest_neighbor + length_law + containment + box_containment + endpoint_sphere;
    }
};
ChainAudit audit_chain(const Chain& chain);

}  // namespace paths
}  // namespace loglab
