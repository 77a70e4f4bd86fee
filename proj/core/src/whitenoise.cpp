#include "loglab/whitenoise.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "loglab/quadrature.hpp"
#include "loglab/random.hpp"
#include "loglab/stats.hpp"

namespace loglab::whitenoise {

namespace {

double slice_ratio(int d) { return d == 1 ? 0.5 : geometry::surface_to_volume_ratio(d); }

auto slice_density(int d) {
    const double power = 0.5 * (d - 1);
    return [power](double r) { return r >= 1.0 ? 0.0 : std::exp(power * std::log1p(-r * r)); };
}

QuadratureOptions tight_options(int d) {
    QuadratureOptions opts;
    opts.abs_tol = 1e-12 / (2 * slice_ratio(d));
    opts.rel_tol = 1e-13;
    opts.max_intervals = 4000;
    return opts;
}

struct TimeNode {
    double t;
    double weight;  // in d(log t)
};

// Gauss-Legendre nodes in log t over (t_lo, t_hi].
std::vector<TimeNode> log_time_rule(double t_lo, double t_hi, int points) {
    std::vector<TimeNode> out;
    if (!(t_hi > t_lo)) return out;
    const auto rule = gauss_legendre(points);
    const double a = std::log(t_lo), b = std::log(t_hi);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        out.push_back({std::exp(mid + half * rule.nodes[i]), half * rule.weights[i]});
    return out;
}

// Band of the path average W_j, clipped to the field's range t <= 1.
std::pair<double, double> path_average_band(int j) {
    return {std::ldexp(1.0, -3 * j), std::min(1.0, std::ldexp(1.0, -3 * j + 1))};
}

double box_distance(std::span<const double> c, std::span<const double> lo, std::span<const double> hi) {
    double s = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double e = c[k] < lo[k] ? lo[k] - c[k] : (c[k] > hi[k] ? c[k] - hi[k] : 0.0);
        s += e * e;
    }
    return std::sqrt(s);
}

struct Rect {
    std::vector<double> lo, hi;

    bool contains(std::span<const double> p) const {
        for (std::size_t k = 0; k < p.size(); ++k)
            if (p[k] < lo[k] || p[k] > hi[k]) return false;
        return true;
    }
};

Rect unit_box_at(std::span<const double> x) {
    Rect r{std::vector<double>(x.begin(), x.end()), std::vector<double>(x.begin(), x.end())};
    for (std::size_t k = 0; k < x.size(); ++k) {
        r.lo[k] -= 0.5;
        r.hi[k] += 0.5;
    }
    return r;
}

std::optional<Rect> intersect(const Rect& a, const Rect& b) {
    Rect r = a;
    for (std::size_t k = 0; k < a.lo.size(); ++k) {
        r.lo[k] = std::max(a.lo[k], b.lo[k]);
        r.hi[k] = std::min(a.hi[k], b.hi[k]);
        if (r.lo[k] > r.hi[k]) return std::nullopt;
    }
    return r;
}

// Centers whose t-ball can meet the rectangle.
PointSet centers_near(const PointSet& centers, const Rect& rect, double t) {
    PointSet out(centers.dim());
    for (std::size_t i = 0; i < centers.size(); ++i)
        if (box_distance(centers[i], rect.lo, rect.hi) < t) out.push_back(centers[i]);
    return out;
}

// vol(union of B_t(c) ∩ R) / vol(B_t(0)) by sampling the union with 1/multiplicity weights.
// Every ball that can contain a point of R must be among `centers`.
template <class Region>
MonteCarloValue union_fraction(const PointSet& centers, double t, const Region& region, std::size_t samples,
                               Stream& rng) {
    if (centers.empty()) return {};
    const geometry::BallUnion balls(centers, t);
    const std::size_t n = centers.size();
    std::vector<double> point(static_cast<std::size_t>(centers.dim()));
    RunningStats stats;
    for (std::size_t s = 0; s < samples; ++s) {
        geometry::sample_in_ball(centers[rng.below(n)], t, rng, point);
        double w = 0;
        if (region(point)) w = static_cast<double>(n) / static_cast<double>(std::max<std::size_t>(1, balls.multiplicity(point)));
        stats.add(w);
    }
    return {stats.mean(), stats.std_error()};
}

// vol(B_t(y) ∩ R) / vol(B_t(0)) by sampling the ball.
template <class Region>
MonteCarloValue ball_fraction(std::span<const double> y, double t, const Region& region, std::size_t samples,
                              Stream& rng) {
    std::vector<double> point(y.size());
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        geometry::sample_in_ball(y, t, rng, point);
        if (region(point)) ++hits;
    }
    const double n = static_cast<double>(samples);
    const double f = static_cast<double>(hits) / n;
    return {f, std::sqrt(f * (1 - f) / n)};
}

// int over the band of t^{-1} F(t) dt, with F evaluated at log-t Gauss-Legendre nodes.
template <class F>
MonteCarloValue band_integral(double t_lo, double t_hi, int time_nodes, F&& fraction) {
    MonteCarloValue total;
    double var = 0;
    for (const auto& node : log_time_rule(t_lo, t_hi, time_nodes)) {
        const MonteCarloValue f = fraction(node.t);
        total.estimate += node.weight * f.estimate;
        var += node.weight * node.weight * f.std_error * f.std_error;
    }
    total.std_error = std::sqrt(var);
    return total;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (a + 1))) + b);
}

}  // namespace

void CovarianceSpec::validate() const {
    if (d < 1) throw std::invalid_argument("CovarianceSpec: d must be positive");
    if (!(t_lo > 0 && t_lo <= t_hi && t_hi <= 1))
        throw std::invalid_argument("CovarianceSpec: band must satisfy 0 < t_lo <= t_hi <= 1");
}

CovarianceSpec CovarianceSpec::level(int d, int n) {
    if (n < 0) throw std::invalid_argument("CovarianceSpec::level: n must be nonnegative");
    return {d, std::ldexp(1.0, -n), 1.0};
}

CovarianceSpec CovarianceSpec::increment(int d, int a, int b) {
    if (a < 0 || b < a) throw std::invalid_argument("CovarianceSpec::increment: need 0 <= a <= b");
    return {d, std::ldexp(1.0, -b), std::ldexp(1.0, -a)};
}

double cov_hn(double u, const CovarianceSpec& spec) {
    spec.validate();
    if (!(u >= 0)) throw std::domain_error("cov_hn: distance must be nonnegative");
    if (u >= 2 * spec.t_hi || spec.t_lo == spec.t_hi) return 0.0;
    const double s = slice_ratio(spec.d);
    const auto f = slice_density(spec.d);
    const auto opts = tight_options(spec.d);
    const double full_log = std::log(spec.t_hi / spec.t_lo);
    const double ra = 0.5 * u / spec.t_hi;
    const double rb = 0.5 * u / spec.t_lo;
    double total = 0;
    if (u > 0) {
        const double upper = std::min(1.0, rb);
        const double scale = 2 * spec.t_hi / u;
        total += integrate([&](double r) { return f(r) * std::log(scale * r); }, ra, upper, opts, "cov_hn");
    }
    if (rb < 1) total += full_log * integrate(f, std::max(ra, rb), 1.0, opts, "cov_hn");
    return 2 * s * total;
}

double cov_hn_nested(double u, const CovarianceSpec& spec) {
    spec.validate();
    if (!(u >= 0)) throw std::domain_error("cov_hn_nested: distance must be nonnegative");
    if (u >= 2 * spec.t_hi || spec.t_lo == spec.t_hi) return 0.0;
    const double lo = std::log(std::max(spec.t_lo, 0.5 * u));
    const double hi = std::log(spec.t_hi);
    QuadratureOptions opts;
    opts.abs_tol = 1e-10;
    opts.rel_tol = 1e-11;
    opts.max_intervals = 2000;
    const int d = spec.d;
    return integrate([&](double s) { return geometry::intersection_ratio(u, std::exp(s), d); }, lo, hi, opts,
                     "cov_hn_nested");
}

double cov_hn_derivative(double u, const CovarianceSpec& spec) {
    spec.validate();
    if (!(u >= 0)) throw std::domain_error("cov_hn_derivative: distance must be nonnegative");
    if (u >= 2 * spec.t_hi || spec.t_lo == spec.t_hi) return 0.0;
    const double s = slice_ratio(spec.d);
    if (u == 0) return -s * (1 / spec.t_lo - 1 / spec.t_hi);
    const double ra = 0.5 * u / spec.t_hi;
    const double rb = std::min(1.0, 0.5 * u / spec.t_lo);
    return -(2 * s / u) * integrate(slice_density(spec.d), ra, rb, tight_options(spec.d), "cov_hn_derivative");
}

CovarianceTable::CovarianceTable(const CovarianceSpec& spec, double tol) : spec_(spec) {
    spec_.validate();
    offset_ = 0.25 * spec_.t_lo;
    s0_ = std::log(offset_);
    const double s1 = std::log(2 * spec_.t_hi + offset_);
    std::size_t intervals = 256;
    ds_ = (s1 - s0_) / static_cast<double>(intervals);
    auto node = [&](double s, double& value, double& slope) {
        const double u = std::max(0.0, std::exp(s) - offset_);
        value = cov_hn(u, spec_);
        slope = cov_hn_derivative(u, spec_) * (u + offset_);
    };
    values_.resize(intervals + 1);
    slopes_.resize(intervals + 1);
    for (std::size_t i = 0; i <= intervals; ++i) node(s0_ + ds_ * static_cast<double>(i), values_[i], slopes_[i]);
    values_.back() = 0.0;
    slopes_.back() = 0.0;

    while (true) {
        std::vector<double> mid_values(intervals), mid_slopes(intervals);
        double err = 0;
        for (std::size_t i = 0; i < intervals; ++i) {
            node(s0_ + ds_ * (static_cast<double>(i) + 0.5), mid_values[i], mid_slopes[i]);
            const double interp = 0.5 * (values_[i] + values_[i + 1]) + 0.125 * ds_ * (slopes_[i] - slopes_[i + 1]);
            err = std::max(err, std::abs(interp - mid_values[i]));
        }
        // Merging the midpoints leaves a finer table whose error is bounded by the coarse check.
        std::vector<double> v(2 * intervals + 1), sl(2 * intervals + 1);
        for (std::size_t i = 0; i < intervals; ++i) {
            v[2 * i] = values_[i];
            sl[2 * i] = slopes_[i];
            v[2 * i + 1] = mid_values[i];
            sl[2 * i + 1] = mid_slopes[i];
        }
        v.back() = values_.back();
        sl.back() = slopes_.back();
        values_ = std::move(v);
        slopes_ = std::move(sl);
        intervals *= 2;
        ds_ *= 0.5;
        max_error_ = err;
        if (err <= tol || intervals >= (std::size_t{1} << 16)) break;
    }
}

double CovarianceTable::operator()(double u) const {
    if (!(u >= 0)) throw std::domain_error("CovarianceTable: distance must be nonnegative");
    if (u >= 2 * spec_.t_hi) return 0.0;
    const double x = (std::log(u + offset_) - s0_) / ds_;
    const std::size_t last = values_.size() - 2;
    const std::size_t i = std::min(last, static_cast<std::size_t>(std::max(0.0, std::floor(x))));
    const double h = std::clamp(x - static_cast<double>(i), 0.0, 1.0);
    const double h2 = h * h, h3 = h2 * h;
    return (2 * h3 - 3 * h2 + 1) * values_[i] + (h3 - 2 * h2 + h) * ds_ * slopes_[i] + (-2 * h3 + 3 * h2) * values_[i + 1] +
           (h3 - h2) * ds_ * slopes_[i + 1];
}

namespace {

template <class Cov>
std::vector<double> gram(const PointSet& points, Cov&& cov) {
    const std::size_t m = points.size();
    std::vector<double> c(m * m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double u = std::sqrt(squared_distance(points[i], points[j]));
            if (i != j && u == 0) {
                std::ostringstream msg;
                msg << "covariance_matrix: points " << j << " and " << i << " coincide";
                throw std::invalid_argument(msg.str());
            }
            c[i * m + j] = c[j * m + i] = cov(u);
        }
    }
    return c;
}

}  // namespace

std::vector<double> covariance_matrix(const PointSet& points, const CovarianceSpec& spec) {
    std::unordered_map<double, double> memo;
    return gram(points, [&](double u) {
        auto it = memo.find(u);
        if (it != memo.end()) return it->second;
        const double v = cov_hn(u, spec);
        memo.emplace(u, v);
        return v;
    });
}

std::vector<double> covariance_matrix(const PointSet& points, const CovarianceTable& table) {
    return gram(points, [&](double u) { return u == 0 ? table(0) : table(u); });
}

struct GaussianSampler::Factor {
    Eigen::MatrixXd L;
    bool lower = true;
};

GaussianSampler::GaussianSampler(std::vector<double> covariance, std::size_t m, double max_jitter)
    : m_(m), factor_(std::make_unique<Factor>()) {
    if (covariance.size() != m * m) throw std::invalid_argument("GaussianSampler: covariance must be m x m");
    Eigen::Map<const Eigen::MatrixXd> c(covariance.data(), static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    if (m == 0) return;
    const Eigen::MatrixXd cs = 0.5 * (c + c.transpose());
    for (double jitter : {0.0, 1e-14, 1e-13, 1e-12, 1e-11, max_jitter}) {
        if (jitter > max_jitter) break;
        Eigen::MatrixXd a = cs;
        a.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(a);
        if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0) {
            factor_->L = llt.matrixL();
            jitter_ = jitter;
            return;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cs);
    if (eig.info() != Eigen::Success) throw std::runtime_error("GaussianSampler: eigendecomposition failed");
    const auto& lambda = eig.eigenvalues();
    min_eigenvalue_ = lambda.minCoeff();
    const double scale = std::max(1.0, lambda.maxCoeff());
    if (min_eigenvalue_ < -1e-8 * scale) {
        std::size_t bi = 0, bj = 0;
        double best = -1;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < i; ++j) {
                const double denom = std::sqrt(cs(i, i) * cs(j, j));
                const double rho = denom > 0 ? std::abs(cs(i, j)) / denom : 0.0;
                if (rho > best) {
                    best = rho;
                    bi = i;
                    bj = j;
                }
            }
        std::ostringstream msg;
        msg << "GaussianSampler: covariance is not positive semidefinite (min eigenvalue " << min_eigenvalue_
            << "); most correlated pair (" << bj << ", " << bi << ") with correlation " << best;
        throw std::runtime_error(msg.str());
    }
    factor_->L = eig.eigenvectors() * lambda.cwiseMax(0.0).cwiseSqrt().asDiagonal();
    factor_->lower = false;
    eigen_fallback_ = true;
}

GaussianSampler::~GaussianSampler() = default;
GaussianSampler::GaussianSampler(GaussianSampler&&) noexcept = default;
GaussianSampler& GaussianSampler::operator=(GaussianSampler&&) noexcept = default;

void GaussianSampler::transform(std::span<const double> z, std::span<double> out) const {
    if (z.size() != m_ || out.size() != m_) throw std::invalid_argument("GaussianSampler: size mismatch");
    if (m_ == 0) return;
    Eigen::Map<const Eigen::VectorXd> zv(z.data(), static_cast<Eigen::Index>(m_));
    Eigen::Map<Eigen::VectorXd> ov(out.data(), static_cast<Eigen::Index>(m_));
    if (factor_->lower)
        ov.noalias() = factor_->L.triangularView<Eigen::Lower>() * zv;
    else
        ov.noalias() = factor_->L * zv;
}

std::vector<double> GaussianSampler::sample(Stream& rng) const {
    std::vector<double> z(m_), out(m_);
    for (auto& v : z) v = rng.normal();
    transform(z, out);
    return out;
}

namespace {

constexpr std::size_t kTableThreshold = 64;

std::vector<double> field_covariance(const PointSet& points, const CovarianceSpec& spec, std::size_t max_points) {
    if (points.size() > max_points) throw std::length_error("PointFieldSampler: joint sample size exceeds the guard");
    if (points.size() < kTableThreshold) return covariance_matrix(points, spec);
    return covariance_matrix(points, CovarianceTable(spec));
}

}  // namespace

PointFieldSampler::PointFieldSampler(PointSet points, const CovarianceSpec& spec, std::size_t max_points)
    : points_(std::move(points)),
      spec_(spec),
      covariance_(field_covariance(points_, spec_, max_points)),
      sampler_(covariance_, points_.size()) {}

PointFieldSampler::PointFieldSampler(PointSet points, const CovarianceTable& table, std::size_t max_points)
    : points_(std::move(points)),
      spec_(table.spec()),
      covariance_(points_.size() > max_points
                      ? throw std::length_error("PointFieldSampler: joint sample size exceeds the guard")
                      : covariance_matrix(points_, table)),
      sampler_(covariance_, points_.size()) {}

FieldSample PointFieldSampler::sample(std::uint64_t seed) const {
    Stream rng(seed, 0x6669656c64ULL);
    FieldSample out;
    out.points = points_;
    out.spec = spec_;
    out.seed = seed;
    out.values = sampler_.sample(rng);
    out.jitter = sampler_.jitter();
    out.eigen_fallback = sampler_.eigen_fallback();
    return out;
}

FieldSample sample_field_points(const PointSet& points, int n, std::uint64_t seed, std::size_t max_points) {
    if (n == 0) {
        FieldSample out;
        out.points = points;
        out.spec = CovarianceSpec::level(points.dim(), 0);
        out.seed = seed;
        out.values.assign(points.size(), 0.0);
        return out;
    }
    return PointFieldSampler(points, CovarianceSpec::level(points.dim(), n), max_points).sample(seed);
}

MonteCarloValue path_average_variance(const Path& path, const geometry::BoxRegion& box, int j,
                                      std::size_t mc_samples, std::uint64_t seed, int time_nodes) {
    if (j < 1) throw std::invalid_argument("path_average_variance: j must be at least 1");
    if (mc_samples == 0) throw std::invalid_argument("path_average_variance: mc_samples must be positive");
    const PointSet centers = path.points();
    Rect rect{box.center, box.center};
    for (std::size_t k = 0; k < rect.lo.size(); ++k) {
        rect.lo[k] -= box.half_width;
        rect.hi[k] += box.half_width;
    }
    Stream rng(seed, 0x7061766172ULL);
    const auto [lo, hi] = path_average_band(j);
    return band_integral(lo, hi, time_nodes, [&](double t) {
        const PointSet near = centers_near(centers, rect, t);
        return union_fraction(near, t, [&](std::span<const double> x) { return rect.contains(x); }, mc_samples, rng);
    });
}

G2iAudit g2i_audit(const paths::Chain& p, const paths::Chain& q, int k, int n, std::size_t mc_samples,
                   std::uint64_t seed, int time_nodes) {
    if (k < 1 || n < k) throw std::invalid_argument("g2i_audit: need 1 <= k <= n");
    if (p.levels.size() <= static_cast<std::size_t>(n) || q.levels.size() <= static_cast<std::size_t>(n))
        throw std::invalid_argument("g2i_audit: chains shorter than n");
    G2iAudit audit;
    Stream rng(seed, 0x673269ULL);
    double var = 0;
    for (int j = k; j <= n; ++j) {
        const PointSet pc = p.levels[j].points();
        const PointSet qc = q.levels[j].points();
        const auto [lo, hi] = path_average_band(j);
        const MonteCarloValue level = band_integral(lo, hi, time_nodes, [&](double t) {
            const geometry::BallUnion reach(qc, 2 * t);
            PointSet near(pc.dim());
            for (std::size_t i = 0; i < pc.size(); ++i)
                if (reach.covers(pc[i])) near.push_back(pc[i]);
            if (near.empty()) return MonteCarloValue{};
            const geometry::BallUnion target(qc, t);
            return union_fraction(near, t, [&](std::span<const double> x) { return target.covers(x); }, mc_samples, rng);
        });
        audit.lhs_per_level.push_back(level.estimate);
        audit.lhs += level.estimate;
        var += level.std_error * level.std_error;
    }
    audit.lhs_std_error = std::sqrt(var);
    for (int j = k / 2; j <= n; ++j) audit.rhs_sum += paths::intersection_count(p.levels[j], q.levels[j]);
    if (audit.rhs_sum > 0)
        audit.ratio = audit.lhs / static_cast<double>(audit.rhs_sum);
    else
        audit.ratio = audit.lhs > 0 ? std::numeric_limits<double>::infinity() : 0.0;
    return audit;
}

GoodConditionsResult good_conditions_check(const paths::Chain& chain, const GoodConditions& conds,
                                           const std::vector<PointSet>& probe_points, std::uint64_t seed,
                                           std::size_t mc_samples, std::size_t max_joint, int time_nodes) {
    if (conds.k < 1 || conds.n < conds.k) throw std::invalid_argument("good_conditions_check: need 1 <= k <= n");
    if (chain.levels.size() <= static_cast<std::size_t>(conds.n))
        throw std::invalid_argument("good_conditions_check: chain shorter than n");
    if (probe_points.size() != static_cast<std::size_t>(conds.n - conds.k + 1))
        throw std::invalid_argument("good_conditions_check: need one probe list per level k..n");

    struct Probe {
        int level;
        std::vector<double> x;
    };
    std::vector<Probe> probes;
    for (int j = conds.k; j <= conds.n; ++j) {
        const PointSet& list = probe_points[static_cast<std::size_t>(j - conds.k)];
        for (std::size_t i = 0; i < list.size(); ++i) probes.push_back({j, {list[i].begin(), list[i].end()}});
    }
    const std::size_t np = probes.size();
    // Observables: path averages 0..np-1, then increments with a nonempty band.
    std::vector<std::size_t> inc_slot(np, SIZE_MAX);
    std::size_t m = np;
    for (std::size_t i = 0; i < np; ++i)
        if (probes[i].level > conds.k) inc_slot[i] = m++;
    if (m > max_joint) throw std::length_error("good_conditions_check: joint sample size exceeds the guard");

    const int d = chain.levels.front().d;
    std::vector<PointSet> centers;
    for (int j = conds.k; j <= conds.n; ++j) centers.push_back(chain.levels[j].points());
    auto centers_of = [&](int j) -> const PointSet& { return centers[static_cast<std::size_t>(j - conds.k)]; };

    std::vector<double> cov(m * m, 0.0);
    auto set = [&](std::size_t a, std::size_t b, double v) { cov[a * m + b] = cov[b * m + a] = v; };

    std::vector<Rect> boxes;
    for (const auto& pr : probes) boxes.push_back(unit_box_at(pr.x));
    for (std::size_t a = 0; a < np; ++a) {
        for (std::size_t b = 0; b <= a; ++b) {
            if (probes[a].level != probes[b].level) continue;
            const auto region = intersect(boxes[a], boxes[b]);
            if (!region) continue;
            const int j = probes[a].level;
            Stream rng(mix(seed, a, b), 1);
            const auto [lo, hi] = path_average_band(j);
            const MonteCarloValue v = band_integral(lo, hi, time_nodes, [&](double t) {
                const PointSet near = centers_near(centers_of(j), *region, t);
                return union_fraction(near, t, [&](std::span<const double> x) { return region->contains(x); },
                                      mc_samples, rng);
            });
            set(a, b, v.estimate);
        }
    }
    for (std::size_t a = 0; a < np; ++a) {
        if (inc_slot[a] == SIZE_MAX) continue;
        for (std::size_t b = 0; b <= a; ++b) {
            if (inc_slot[b] == SIZE_MAX) continue;
            const int lvl = std::min(probes[a].level, probes[b].level);
            const double u = std::sqrt(squared_distance(probes[a].x, probes[b].x));
            set(inc_slot[a], inc_slot[b], cov_hn(u, CovarianceSpec::increment(d, 3 * conds.k, 3 * lvl)));
        }
    }
    // Path average at level j against an increment over (2^{-3j'}, 2^{-3k}]: the bands overlap
    // exactly when k < j <= j', and then the whole band of W_j lies inside.
    for (std::size_t a = 0; a < np; ++a) {
        const int j = probes[a].level;
        if (j <= conds.k) continue;
        for (std::size_t b = 0; b < np; ++b) {
            if (inc_slot[b] == SIZE_MAX || probes[b].level < j) continue;
            Stream rng(mix(seed, a, np + b), 2);
            const Rect& box = boxes[a];
            const auto [lo, hi] = path_average_band(j);
            const MonteCarloValue v = band_integral(lo, hi, time_nodes, [&](double t) {
                if (box_distance(probes[b].x, box.lo, box.hi) >= t) return MonteCarloValue{};
                const PointSet near = centers_near(centers_of(j), box, t);
                if (near.empty()) return MonteCarloValue{};
                const geometry::BallUnion path_balls(near, t);
                return ball_fraction(probes[b].x, t,
                                     [&](std::span<const double> x) { return box.contains(x) && path_balls.covers(x); },
                                     mc_samples, rng);
            });
            set(a, inc_slot[b], v.estimate);
        }
    }

    const GaussianSampler sampler(cov, m);
    Stream rng(seed, 0x676f6f64ULL);
    const std::vector<double> values = sampler.sample(rng);

    GoodConditionsResult result;
    result.joint_size = m;
    result.eigen_fallback = sampler.eigen_fallback();
    for (std::size_t a = 0; a < np; ++a) {
        const double var = cov[a * m + a];
        result.path_averages.push_back(values[a]);
        result.path_average_variances.push_back(var);
        result.cond_a.push_back(values[a] >= conds.beta * var);
        const double inc = inc_slot[a] == SIZE_MAX ? 0.0 : values[inc_slot[a]];
        result.increments.push_back(inc);
        result.cond_b.push_back(inc >= 3 * conds.alpha * (probes[a].level - conds.k));
    }
    return result;
}

}  // namespace loglab::whitenoise
