#include "loglab/random.hpp"

#include <cmath>

namespace loglab {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

// Separates keyed draws from sequential stream draws made with the same seed.
constexpr std::uint64_t kKeyedSalt = 0x6a09e667f3bcc909ull;

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            k[0] += kPhiloxW0;
            k[1] += kPhiloxW1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kPhiloxM0, c[0], hi0, lo0);
        mulhilo(kPhiloxM1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
    return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t hash_coords(std::span<const std::int64_t> coords, std::uint64_t salt) {
    std::uint64_t h = splitmix64(salt ^ (0x243f6a8885a308d3ull + coords.size()));
    for (std::int64_t c : coords) h = splitmix64(h ^ static_cast<std::uint64_t>(c));
    return h;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (p > 0.5) return -normal_quantile(1.0 - p);

    // Acklam's rational approximation on the lower half, then one Halley step.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    double x;
    if (p < 0.02425) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    return x - u / (1.0 + 0.5 * x * u);
}

std::uint64_t keyed_bits(std::uint64_t seed, DrawDomain domain, std::uint32_t a, std::uint64_t b) {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(domain), a, static_cast<std::uint32_t>(b),
                            static_cast<std::uint32_t>(b >> 32)};
    const PhiloxCounter out = philox4x32_10(ctr, key_from_seed(seed ^ kKeyedSalt));
    return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), id_(stream_id) {}

Stream::result_type Stream::operator()() {
    if (buffered_ == 0) {
        const PhiloxCounter ctr{static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                                static_cast<std::uint32_t>(id_), static_cast<std::uint32_t>(id_ >> 32)};
        const PhiloxCounter out = philox4x32_10(ctr, key_from_seed(seed_));
        ++counter_;
        buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
        buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
        buffered_ = 2;
    }
    return buffer_[2 - buffered_--];
}

std::uint64_t Stream::below(std::uint64_t bound) {
    const unsigned __int128 wide = static_cast<unsigned __int128>((*this)()) * bound;
    return static_cast<std::uint64_t>(wide >> 64);
}

Stream Stream::child(std::uint64_t id) const {
    return Stream(seed_, splitmix64(id_ ^ splitmix64(id + 0x13198a2e03707344ull)));
}

}  // namespace loglab
