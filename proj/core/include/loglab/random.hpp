#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <span>

namespace loglab {

// Philox4x32 with 10 rounds (Salmon et al. counter-based generator).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

inline PhiloxKey key_from_seed(std::uint64_t seed) {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t hash_coords(std::span<const std::int64_t> coords, std::uint64_t salt = 0);

// Maps 64 random bits to the open interval (0, 1) with 52-bit resolution; the endpoints
// 2^-53 and 1 - 2^-53 are exactly representable.
inline double bits_to_unit(std::uint64_t x) {
    return (static_cast<double>(x >> 12) + 0.5) * 0x1.0p-52;
}

// Standard normal quantile, accurate to a few ulps over (0,1).
double normal_quantile(double p);

// Domain tags separate the keyed draws made by different modules from one seed.
enum class DrawDomain : std::uint32_t {
    stream = 0,
    box_noise = 1,
    refinement = 2,
    fractal = 3,
    base_sequence = 4,
};

// One 64-bit word that is a pure function of (seed, domain, a, b).
std::uint64_t keyed_bits(std::uint64_t seed, DrawDomain domain, std::uint32_t a, std::uint64_t b);

inline double keyed_uniform(std::uint64_t seed, DrawDomain domain, std::uint32_t a, std::uint64_t b) {
    return bits_to_unit(keyed_bits(seed, domain, a, b));
}

// Sequential stream over the Philox counter space. Satisfies UniformRandomBitGenerator.
class Stream {
public:
    using result_type = std::uint64_t;

    explicit Stream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()();

    double uniform() { return bits_to_unit((*this)()); }
    double normal() { return normal_quantile(uniform()); }
    std::uint64_t below(std::uint64_t bound);

    // Independent child stream; children of distinct ids never overlap.
    Stream child(std::uint64_t id) const;

    std::uint64_t seed() const { return seed_; }
    std::uint64_t id() const { return id_; }

private:
    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t counter_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
};

}  // namespace loglab
