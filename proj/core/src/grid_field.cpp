#include "loglab/grid_field.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <stdexcept>

#include "loglab/quadrature.hpp"
#include "loglab/random.hpp"

namespace loglab::whitenoise {

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

template <class T>
struct FftwBuffer {
    explicit FftwBuffer(std::size_t n) : data(static_cast<T*>(fftw_malloc(sizeof(T) * std::max<std::size_t>(n, 1)))), size(n) {
        if (!data) throw std::bad_alloc();
    }
    ~FftwBuffer() { fftw_free(data); }
    FftwBuffer(const FftwBuffer&) = delete;
    FftwBuffer& operator=(const FftwBuffer&) = delete;
    T* data;
    std::size_t size;
};

// Smallest 2^a 3^b 5^c 7^e >= n, so FFTW stays on its fast codelets.
std::size_t smooth_size(std::size_t n) {
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2, 3, 5, 7})
            while (r % f == 0) r /= f;
        if (r == 1) return m;
    }
}

std::vector<double> band_edges(double t_lo, double t_hi) {
    std::vector<double> edges{t_lo};
    double b = std::exp2(std::floor(std::log2(t_lo)) + 1);
    while (b < t_hi * (1 - 1e-15)) {
        if (b > t_lo * (1 + 1e-15)) edges.push_back(b);
        b *= 2;
    }
    edges.push_back(t_hi);
    return edges;
}

}  // namespace

std::size_t GridField::index(std::span<const std::size_t> node) const {
    std::size_t idx = 0;
    for (std::size_t k = node.size(); k-- > 0;) idx = idx * side + node[k];
    return idx;
}

std::vector<std::size_t> GridField::node(std::size_t index) const {
    std::vector<std::size_t> out(static_cast<std::size_t>(d));
    for (auto& c : out) {
        c = index % side;
        index /= side;
    }
    return out;
}

struct GridFieldSampler::Plan {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::size_t real_size = 0;
    std::size_t complex_size = 0;

    ~Plan() {
        std::lock_guard<std::mutex> lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

GridFieldSampler::GridFieldSampler(const CovarianceSpec& spec, double extent, double step, int time_nodes)
    : spec_(spec), extent_(extent), step_(step), plan_(std::make_unique<Plan>()) {
    spec_.validate();
    if (spec_.d != 2 && spec_.d != 3) throw std::invalid_argument("GridFieldSampler: only d = 2 or 3 grids are supported");
    if (!(extent > 0)) throw std::invalid_argument("GridFieldSampler: extent must be positive");
    if (!(step > 0)) throw std::invalid_argument("GridFieldSampler: step must be positive");
    if (spec_.t_lo < spec_.t_hi && step > spec_.t_lo * (1 + 1e-12))
        throw std::invalid_argument("GridFieldSampler: resolution coarser than the smallest kernel radius");
    if (time_nodes < 1) throw std::invalid_argument("GridFieldSampler: time_nodes must be positive");
    const int d = spec_.d;
    side_ = static_cast<std::size_t>(std::floor(extent / step + 1e-9)) + 1;
    torus_ = smooth_size(side_ + static_cast<std::size_t>(std::ceil(2 * spec_.t_hi / step - 1e-9)));
    const double window_points = std::pow(static_cast<double>(side_), d);
    const double torus_points = std::pow(static_cast<double>(torus_), d);
    if (window_points > std::ldexp(1.0, 22)) throw std::length_error("GridFieldSampler: more than 2^22 grid points");
    if (torus_points > std::ldexp(1.0, 26)) throw std::length_error("GridFieldSampler: padded grid too large");

    const std::size_t T = torus_;
    const std::size_t real_size = static_cast<std::size_t>(torus_points);
    const std::size_t half = T / 2 + 1;
    const std::size_t complex_size = real_size / T * half;
    plan_->real_size = real_size;
    plan_->complex_size = complex_size;
    std::vector<int> dims(static_cast<std::size_t>(d), static_cast<int>(T));

    FftwBuffer<double> real(real_size);
    FftwBuffer<fftw_complex> spectrum(complex_size);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan_->forward = fftw_plan_dft_r2c(d, dims.data(), real.data, spectrum.data, FFTW_ESTIMATE);
        plan_->backward = fftw_plan_dft_c2r(d, dims.data(), spectrum.data, real.data, FFTW_ESTIMATE);
    }
    if (!plan_->forward || !plan_->backward) throw std::runtime_error("GridFieldSampler: FFTW planning failed");

    std::vector<double> density(complex_size, 0.0);
    if (spec_.t_lo < spec_.t_hi) {
        const auto rule = gauss_legendre(time_nodes);
        const auto edges = band_edges(spec_.t_lo, spec_.t_hi);
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            const double a = std::log(edges[b]), c = std::log(edges[b + 1]);
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double t = std::exp(0.5 * (a + c) + 0.5 * (c - a) * rule.nodes[q]);
                const double w = 0.5 * (c - a) * rule.weights[q];
                std::fill(real.data, real.data + real_size, 0.0);
                const auto R = static_cast<long>(std::floor(t / step));
                const double r2 = (t / step) * (t / step);
                double count = 0;
                std::vector<long> o(static_cast<std::size_t>(d), -R);
                while (true) {
                    double s = 0;
                    for (long v : o) s += static_cast<double>(v) * static_cast<double>(v);
                    if (s < r2) {
                        std::size_t idx = 0;
                        for (std::size_t k = o.size(); k-- > 0;)
                            idx = idx * T + static_cast<std::size_t>((o[k] % static_cast<long>(T) + static_cast<long>(T)) % static_cast<long>(T));
                        real.data[idx] += 1.0;
                        count += 1;
                    }
                    std::size_t k = 0;
                    while (k < o.size() && o[k] == R) o[k++] = -R;
                    if (k == o.size()) break;
                    ++o[k];
                }
                fftw_execute_dft_r2c(plan_->forward, real.data, spectrum.data);
                for (std::size_t i = 0; i < complex_size; ++i) {
                    const double re = spectrum.data[i][0], im = spectrum.data[i][1];
                    density[i] += w * (re * re + im * im) / count;
                }
            }
        }
    }
    amplitude_.resize(complex_size);
    for (std::size_t i = 0; i < complex_size; ++i) amplitude_[i] = std::sqrt(std::max(0.0, density[i]));

    // Discrete covariance = inverse transform of the density.
    for (std::size_t i = 0; i < complex_size; ++i) {
        spectrum.data[i][0] = density[i];
        spectrum.data[i][1] = 0.0;
    }
    fftw_execute_dft_c2r(plan_->backward, spectrum.data, real.data);
    const double norm = 1.0 / static_cast<double>(real_size);
    const std::size_t max_lag = T / 2;
    axis_covariance_.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) axis_covariance_[k] = real.data[k] * norm;
    // Compare against the exact covariance along an axis and along the main diagonal.
    std::size_t diag_stride = 0;
    for (int k = 0; k < d; ++k) diag_stride = diag_stride * T + 1;
    for (std::size_t k = 0; k <= max_lag; ++k) {
        const double u = static_cast<double>(k) * step;
        discretization_error_ = std::max(discretization_error_, std::abs(axis_covariance_[k] - cov_hn(u, spec_)));
        const double ud = u * std::sqrt(static_cast<double>(d));
        const double diag = real.data[k * diag_stride] * norm;
        discretization_error_ = std::max(discretization_error_, std::abs(diag - cov_hn(ud, spec_)));
    }
}

GridFieldSampler::~GridFieldSampler() = default;
GridFieldSampler::GridFieldSampler(GridFieldSampler&&) noexcept = default;
GridFieldSampler& GridFieldSampler::operator=(GridFieldSampler&&) noexcept = default;

GridField GridFieldSampler::sample(std::uint64_t seed) const {
    const int d = spec_.d;
    GridField out;
    out.d = d;
    out.spec = spec_;
    out.extent = extent_;
    out.step = step_;
    out.side = side_;
    out.seed = seed;
    out.discretization_error = discretization_error_;
    std::size_t window = 1;
    for (int k = 0; k < d; ++k) window *= side_;
    out.values.assign(window, 0.0);
    if (spec_.t_lo == spec_.t_hi) return out;

    FftwBuffer<double> real(plan_->real_size);
    FftwBuffer<fftw_complex> spectrum(plan_->complex_size);
    Stream rng(seed, 0x67726964ULL);
    for (std::size_t i = 0; i < plan_->real_size; ++i) real.data[i] = rng.normal();
    fftw_execute_dft_r2c(plan_->forward, real.data, spectrum.data);
    for (std::size_t i = 0; i < plan_->complex_size; ++i) {
        spectrum.data[i][0] *= amplitude_[i];
        spectrum.data[i][1] *= amplitude_[i];
    }
    fftw_execute_dft_c2r(plan_->backward, spectrum.data, real.data);
    const double norm = 1.0 / static_cast<double>(plan_->real_size);
    const std::size_t T = torus_;
    std::vector<std::size_t> node(static_cast<std::size_t>(d), 0);
    for (std::size_t i = 0; i < window; ++i) {
        std::size_t idx = 0;
        for (std::size_t k = node.size(); k-- > 0;) idx = idx * T + node[k];
        out.values[i] = real.data[idx] * norm;
        std::size_t k = 0;
        while (k < node.size() && ++node[k] == side_) node[k++] = 0;
    }
    return out;
}

GridField sample_field_grid_2d(int n, double extent, double resolution, std::uint64_t seed, int d) {
    if (n < 0) throw std::invalid_argument("sample_field_grid_2d: n must be nonnegative");
    if (resolution > std::ldexp(1.0, -n) * (1 + 1e-12))
        throw std::invalid_argument("sample_field_grid_2d: resolution coarser than 2^{-n} leaves the kernel under-resolved");
    return GridFieldSampler(CovarianceSpec::level(d, n), extent, resolution).sample(seed);
}

}  // namespace loglab::whitenoise
