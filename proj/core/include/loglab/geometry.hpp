#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "loglab/random.hpp"

namespace loglab {

// Row-major set of points in R^d.
class PointSet {
public:
    PointSet() = default;
    explicit PointSet(int d) : d_(d) {}
    PointSet(int d, std::vector<double> flat);

    int dim() const { return d_; }
    std::size_t size() const { return d_ > 0 ? coords_.size() / static_cast<std::size_t>(d_) : 0; }
    bool empty() const { return coords_.empty(); }

    std::span<const double> operator[](std::size_t i) const { return {coords_.data() + i * d_, static_cast<std::size_t>(d_)}; }
    std::span<double> operator[](std::size_t i) { return {coords_.data() + i * d_, static_cast<std::size_t>(d_)}; }

    void push_back(std::span<const double> p);
    const std::vector<double>& flat() const { return coords_; }

private:
    int d_ = 0;
    std::vector<double> coords_;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

}  // namespace loglab

namespace loglab::geometry {

double log_gamma(double x);

double log_ball_volume(int d, double t);
double ball_volume(int d, double t);

// vol(B_t(x) ∩ B_t(y)) / vol(B_t(0)) for |x - y| = u.
double intersection_ratio(double u, double t, int d);

// vol_{d-1}(unit ball) / vol_d(unit ball).
double surface_to_volume_ratio(int d);

struct BoxRegion {
    std::vector<double> center;
    double half_width = 0.5;

    bool contains(std::span<const double> p) const;
};

struct VolumeEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
};

// Union of equal-radius balls with multiplicity queries. Brute force up to
// `brute_force_limit` centers; above that a cell index over the (at most three)
// coordinates with the largest spread prunes candidates.
class BallUnion {
public:
    BallUnion(PointSet centers, double t, std::size_t brute_force_limit = 10000);

    std::size_t size() const { return centers_.size(); }
    double radius() const { return t_; }
    const PointSet& centers() const { return centers_; }

    std::size_t multiplicity(std::span<const double> p) const;
    bool covers(std::span<const double> p) const;

private:
    template <class Visit>
    void for_candidates(std::span<const double> p, Visit&& visit) const;

    PointSet centers_;
    double t_;
    std::vector<int> index_axes_;
    std::vector<std::vector<std::uint32_t>> cells_;
    std::vector<std::int64_t> cell_lo_;
    std::vector<std::int64_t> cell_extent_;
};

// Uniform point in the open ball B_t(center).
void sample_in_ball(std::span<const double> center, double t, Stream& rng, std::span<double> out);

// Estimates vol(union of B_t(c) ∩ region) / vol(B_t(0)); free of large-d underflow.
VolumeEstimate union_ball_region_fraction(const BallUnion& balls, const BoxRegion& region, std::size_t samples,
                                          Stream& rng);

// Estimates vol(union of B_t(c) ∩ region) in absolute units.
VolumeEstimate union_ball_region_volume(const PointSet& centers, double t, const BoxRegion& region,
                                        std::size_t samples, std::uint64_t seed);

}  // namespace loglab::geometry
