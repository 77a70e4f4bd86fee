#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "loglab/whitenoise.hpp"

namespace loglab::whitenoise {

// Field values at the nodes i * step, 0 <= i < side, of [0, extent]^d; axis 0 varies fastest.
struct GridField {
    int d = 2;
    CovarianceSpec spec;
    double extent = 1.0;
    double step = 0.0;
    std::size_t side = 0;
    std::uint64_t seed = 0;
    double discretization_error = 0.0;  // max |discrete covariance - cov_hn| over the checked lags
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    std::size_t index(std::span<const std::size_t> node) const;
    std::vector<std::size_t> node(std::size_t index) const;
};

// Spectral synthesis on a periodic grid padded by 2 t_hi, so window covariances never wrap.
// Each dyadic sub-band contributes `time_nodes` Gauss-Legendre nodes in log t; at node t the
// indicator kernel of radius t is discretized on the grid and normalized to unit variance.
class GridFieldSampler {
public:
    GridFieldSampler(const CovarianceSpec& spec, double extent, double step, int time_nodes = 4);
    ~GridFieldSampler();
    GridFieldSampler(GridFieldSampler&&) noexcept;
    GridFieldSampler& operator=(GridFieldSampler&&) noexcept;

    GridField sample(std::uint64_t seed) const;

    std::size_t side() const { return side_; }
    std::size_t torus_side() const { return torus_; }
    double discretization_error() const { return discretization_error_; }
    // Covariance of the discrete field at lag k * step along axis 0, k = 0 .. torus_side / 2.
    const std::vector<double>& axis_covariance() const { return axis_covariance_; }

private:
    struct Plan;
    CovarianceSpec spec_;
    double extent_;
    double step_;
    std::size_t side_;
    std::size_t torus_;
    std::vector<double> amplitude_;  // sqrt of the spectral density on the half-spectrum
    std::vector<double> axis_covariance_;
    double discretization_error_ = 0.0;
    std::unique_ptr<Plan> plan_;
};

// One draw of h_n on a d-dimensional grid (d = 2 or 3). Rejects steps coarser than 2^{-n}.
GridField sample_field_grid_2d(int n, double extent, double resolution, std::uint64_t seed, int d = 2);

}  // namespace loglab::whitenoise
