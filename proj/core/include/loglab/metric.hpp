#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "loglab/grid_field.hpp"
#include "loglab/paths.hpp"

namespace loglab::metric {

// Grid graph with edge weight spacing * (e^{xi h(u)} + e^{xi h(v)}) / 2 between axis neighbors.
class WeightedGrid {
public:
    // `shift` is added to every field value before weighting.
    WeightedGrid(const whitenoise::GridField& field, double xi, double shift = 0.0);

    int dim() const { return d_; }
    std::size_t side() const { return side_; }
    std::size_t size() const { return weights_.size(); }
    double spacing() const { return spacing_; }
    double xi() const { return xi_; }
    double node_weight(std::size_t i) const { return weights_[i]; }

    // Nearest node to a point of [0, extent]^d.
    std::size_t snap(std::span<const double> x) const;
    std::vector<std::size_t> coordinates(std::size_t index) const;

    template <class Visit>
    void for_neighbors(std::size_t i, Visit&& visit) const {
        std::size_t stride = 1;
        std::size_t rest = i;
        for (int k = 0; k < d_; ++k) {
            const std::size_t c = rest % side_;
            rest /= side_;
            if (c > 0) visit(i - stride);
            if (c + 1 < side_) visit(i + stride);
            stride *= side_;
        }
    }

private:
    int d_;
    std::size_t side_;
    double spacing_;
    double xi_;
    std::vector<double> weights_;  // e^{xi (h + shift)}
};

// Multi-source Dijkstra; returns 0 when the sets meet.
double lfpp_distance(const WeightedGrid& grid, std::span<const std::size_t> sources, std::span<const std::size_t> targets);
double lfpp_distance(const WeightedGrid& grid, std::size_t source, std::size_t target);

// Nodes whose axis-0 coordinate lies in [lo, hi].
std::vector<std::size_t> slab_nodes(const WeightedGrid& grid, double lo, double hi);

struct ExponentFitParams {
    int d = 2;
    std::vector<double> xis{0.4};
    std::vector<int> levels{5, 6, 7, 8};
    std::size_t replicas = 100;
    double extent = 1.0;
    int time_nodes = 4;
    std::vector<double> x{0.25, 0.5};
    std::vector<double> y{0.75, 0.5};
    double slab_width = 0.125;
    std::size_t bootstrap = 1000;
    std::uint64_t seed = 1;
};

struct SlopeFit {
    double slope = 0.0;
    double slope_lo = 0.0;  // 95% percentile bootstrap interval
    double slope_hi = 0.0;
    double q_estimate = 0.0;  // (1 + slope) / xi
    double q_lo = 0.0;
    double q_hi = 0.0;
};

struct ExponentFit {
    double xi = 0.0;
    std::vector<int> levels;
    std::vector<double> median_pp;  // lower medians per level
    std::vector<double> median_ss;
    std::vector<std::vector<double>> distances_pp;  // [level][replica]
    std::vector<std::vector<double>> distances_ss;
    SlopeFit point_to_point;
    SlopeFit set_to_set;
    double diff_lo = 0.0;  // bootstrap interval of slope_pp - slope_ss
    double diff_hi = 0.0;
};

struct ExponentSweep {
    std::vector<ExponentFit> fits;           // one per xi; replicas share fields across xi
    std::vector<double> discretization_error;  // per level
    std::uint64_t bootstrap_seed = 0;
};

// Median point-to-point and slab-to-slab distances per level and their log2-slope fits.
ExponentSweep exponent_fit(const ExponentFitParams& params);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

// Bootstrap interval of Q(b) - Q(a) from point-to-point fits resampled with shared replica indices.
Interval q_difference(const ExponentFit& a, const ExponentFit& b, std::size_t bootstrap, std::uint64_t seed);

struct CorridorParams {
    int d = 50;
    int M = 10;
    double xi = 5.0;
    int n = 1;
    std::size_t path_samples = 4;
    std::uint64_t seed = 1;
    std::size_t max_joint = 1500;
    bool shared_field = false;
    int field_level = -1;  // level of h sampled on the path; -1 means n
    paths::RefinementOptions refinement{};
};

struct CorridorResult {
    double min_cost = 0.0;
    std::vector<double> costs;
    std::size_t path_length = 0;
    std::size_t field_points = 0;
    std::size_t stride = 1;
    bool subsampled = false;
    bool canonical = true;
    double euclidean_length = 0.0;  // (length - 1) * spacing
};

// Minimum over sampled zigzag chains of the trapezoid cost sum of step * (e^{xi h_i} + e^{xi h_{i+1}}) / 2
// along the finest path, with h jointly sampled at the path vertices (every `stride`-th vertex and
// the last one when the path exceeds max_joint).
CorridorResult corridor_upper_bound(const CorridorParams& params);

struct CorridorSweep {
    std::vector<int> levels;
    std::vector<std::vector<double>> log2_min_cost;  // [repetition][level]
    std::vector<double> slopes;                      // per repetition
    double mean_slope = 0.0;
    double slope_std_error = 0.0;
    double slope_ci_lo = 0.0;  // Student t, 95%
    double slope_ci_hi = 0.0;
    std::vector<CorridorResult> last;  // results of the final repetition, per level
};

CorridorSweep corridor_sweep(CorridorParams params, const std::vector<int>& levels, std::size_t repetitions);

}  // namespace loglab::metric
