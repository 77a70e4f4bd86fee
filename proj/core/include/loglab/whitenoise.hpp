#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "loglab/geometry.hpp"
#include "loglab/paths.hpp"

namespace loglab::whitenoise {

// Time band (t_lo, t_hi] of the white-noise field in dimension d.
struct CovarianceSpec {
    int d = 2;
    double t_lo = 0.5;
    double t_hi = 1.0;

    void validate() const;

    // (2^{-n}, 1], the band of h_n.
    static CovarianceSpec level(int d, int n);
    // (2^{-b}, 2^{-a}], the band of h_b - h_a for a < b.
    static CovarianceSpec increment(int d, int a, int b);
};

// int_{t_lo}^{t_hi} t^{-1} intersection_ratio(u, t, d) dt, evaluated as a single integral over
// the slice coordinate after exchanging the order of integration.
double cov_hn(double u, const CovarianceSpec& spec);
// Same quantity by nested quadrature: outer in log t, inner intersection_ratio.
double cov_hn_nested(double u, const CovarianceSpec& spec);
// d/du of cov_hn.
double cov_hn_derivative(double u, const CovarianceSpec& spec);

// Piecewise cubic Hermite table of cov_hn in s = log(u + t_lo/4), refined until the midpoint
// error against cov_hn is below the tolerance (or 2^16 nodes).
class CovarianceTable {
public:
    explicit CovarianceTable(const CovarianceSpec& spec, double tol = 1e-10);

    double operator()(double u) const;
    const CovarianceSpec& spec() const { return spec_; }
    std::size_t nodes() const { return values_.size(); }
    double max_error() const { return max_error_; }

private:
    CovarianceSpec spec_;
    double offset_;
    double s0_;
    double ds_;
    std::vector<double> values_;
    std::vector<double> slopes_;  // d value / ds
    double max_error_ = 0.0;
};

// Row-major m x m covariance of the band values at the points.
std::vector<double> covariance_matrix(const PointSet& points, const CovarianceSpec& spec);
std::vector<double> covariance_matrix(const PointSet& points, const CovarianceTable& table);

// Draws N(0, C) vectors. Cholesky with diagonal jitter up to `max_jitter`; if that fails, a
// symmetric square root with negative eigenvalues clipped, provided they are tiny.
class GaussianSampler {
public:
    GaussianSampler(std::vector<double> covariance, std::size_t m, double max_jitter = 1e-10);
    ~GaussianSampler();
    GaussianSampler(GaussianSampler&&) noexcept;
    GaussianSampler& operator=(GaussianSampler&&) noexcept;

    std::size_t size() const { return m_; }
    double jitter() const { return jitter_; }
    bool eigen_fallback() const { return eigen_fallback_; }
    double min_eigenvalue() const { return min_eigenvalue_; }

    std::vector<double> sample(Stream& rng) const;
    // out = L z for a given standard normal vector z.
    void transform(std::span<const double> z, std::span<double> out) const;

private:
    struct Factor;
    std::size_t m_;
    double jitter_ = 0.0;
    bool eigen_fallback_ = false;
    double min_eigenvalue_ = 0.0;
    std::unique_ptr<Factor> factor_;
};

struct FieldSample {
    PointSet points;
    std::vector<double> values;
    CovarianceSpec spec;
    std::uint64_t seed = 0;
    double jitter = 0.0;
    bool eigen_fallback = false;
};

// Exact joint law of the band values at distinct points, factorized once.
class PointFieldSampler {
public:
    PointFieldSampler(PointSet points, const CovarianceSpec& spec, std::size_t max_points = 4000);
    // Gram matrix from a prebuilt table of the same band.
    PointFieldSampler(PointSet points, const CovarianceTable& table, std::size_t max_points = 4000);

    FieldSample sample(std::uint64_t seed) const;
    const std::vector<double>& covariance() const { return covariance_; }
    const GaussianSampler& sampler() const { return sampler_; }

private:
    PointSet points_;
    CovarianceSpec spec_;
    std::vector<double> covariance_;
    GaussianSampler sampler_;
};

// One draw of h_n at the points.
FieldSample sample_field_points(const PointSet& points, int n, std::uint64_t seed, std::size_t max_points = 4000);

struct MonteCarloValue {
    double estimate = 0.0;
    double std_error = 0.0;
};

// E[W_j(x, P_j)^2] = int over (2^{-3j}, 2^{-3j+1}] of t^{-1} vol(B_t(P_j) ∩ box) / vol(B_t(0)) dt.
MonteCarloValue path_average_variance(const Path& path, const geometry::BoxRegion& box, int j,
                                      std::size_t mc_samples, std::uint64_t seed, int time_nodes = 6);

struct G2iAudit {
    double lhs = 0.0;
    double lhs_std_error = 0.0;
    std::vector<double> lhs_per_level;  // j = k..n
    std::size_t rhs_sum = 0;            // sum_{j=floor(k/2)}^n |P_j ∩ Q_j|
    double ratio = 0.0;                 // lhs / rhs_sum, 0 when both vanish, inf when only rhs does
};

// Compares sum_{j=k}^n int_{band_j} t^{-1} vol(B_t(P_j) ∩ B_t(Q_j)) / vol(B_t(0)) dt with
// sum_{j=floor(k/2)}^n |P_j ∩ Q_j|.
G2iAudit g2i_audit(const paths::Chain& p, const paths::Chain& q, int k, int n, std::size_t mc_samples,
                   std::uint64_t seed, int time_nodes = 6);

struct GoodConditions {
    double alpha = 0.0;
    double beta = 0.0;
    int k = 0;
    int n = 1;
};

struct GoodConditionsResult {
    // Indexed like the flattened probe list: level k first.
    std::vector<char> cond_a;
    std::vector<char> cond_b;
    std::vector<double> path_averages;  // W_j(x, P_j)
    std::vector<double> path_average_variances;
    std::vector<double> increments;  // h_{3j}(y) - h_{3k}(y)
    std::size_t joint_size = 0;
    bool eigen_fallback = false;
};

// Joint sample of the path averages W_j(x, P_j) (condition (a): W_j >= beta E[W_j^2]) and the
// increments h_{3j}(y) - h_{3k}(y) (condition (b): >= 3 alpha (j - k)) at the probe points of
// each path level j = k..n, with all cross-covariances of the shared white noise.
// probe_points[j - k] lists the probes of level j.
GoodConditionsResult good_conditions_check(const paths::Chain& chain, const GoodConditions& conds,
                                           const std::vector<PointSet>& probe_points, std::uint64_t seed,
                                           std::size_t mc_samples = 20000, std::size_t max_joint = 4000,
                                           int time_nodes = 4);

}  // namespace loglab::whitenoise
