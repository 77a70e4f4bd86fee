#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace loglab::fractal {

enum class Connectivity { closed, half_open };

// Retained boxes per level; level j boxes have side 2^{-j} and integer corners in
// [0, window 2^j)^d. parent[j][i] indexes the level j-1 box containing box i of level j.
struct RetainedTree {
    int d = 0;
    int depth = 0;
    int window = 1;
    double p = 0.0;
    std::vector<std::vector<std::int64_t>> boxes;  // flat rows per level
    std::vector<std::vector<std::uint32_t>> parent;

    std::size_t count(int level) const { return boxes[level].size() / static_cast<std::size_t>(d); }
    std::span<const std::int64_t> box(int level, std::size_t i) const {
        return {boxes[level].data() + i * static_cast<std::size_t>(d), static_cast<std::size_t>(d)};
    }
};

// The uniform attached to a box; a box is retained at p iff this and all its ancestors' uniforms are < p,
// so samples at different p with one seed are coupled.
double box_uniform(std::uint64_t seed, int level, std::span<const std::int64_t> box);

RetainedTree sample_retained(int d, double p, int depth, int window, std::uint64_t seed,
                             std::size_t max_boxes = std::size_t{1} << 26);

// 1 - q with q the minimal fixed point of q = (1 - p + p q)^{2^d}.
double survival_probability(int d, double p);

bool has_crossing(const RetainedTree& tree, int axis, Connectivity mode);

// Smallest p at which the coupled sample crosses along `axis`: boxes enter in order of
// their threshold max(ancestor uniforms) until a crossing cluster forms.
double crossing_threshold(int d, int depth, int window, std::uint64_t seed, int axis = 0,
                          Connectivity mode = Connectivity::closed);

struct RateEstimate {
    double rate = 0.0;
    double std_error = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t successes = 0;
    std::size_t samples = 0;
};

RateEstimate crossing_probability(int d, double p, int depth, int window, std::size_t samples, std::uint64_t seed,
                                  Connectivity mode = Connectivity::closed, int axis = 0);

// Fraction of single retained roots whose depth-n descendants are nonempty (Galton-Watson counts).
RateEstimate truncated_survival(int d, double p, int depth, std::size_t samples, std::uint64_t seed);

struct PcEstimate {
    double pc_estimate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::vector<double> thresholds;  // sorted per-sample crossing thresholds
};

// Depth-n proxy for p_c: the p at which the crossing probability reaches 1/2. Per-sample
// thresholds give the coupled empirical crossing curve, which is already nondecreasing in p;
// the 1/2 level is found by bisection and bracketed by an order-statistic confidence interval.
PcEstimate estimate_pc(int d, int depth, std::size_t samples, double tol, std::uint64_t seed, int window = 1);

}  // namespace loglab::fractal
