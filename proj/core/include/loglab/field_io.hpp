#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "loglab/grid_field.hpp"
#include "loglab/whitenoise.hpp"

namespace loglab {

// Snapshot file: one JSON header line {d, n, t_lo, t_hi, layout, seed, count, points | grid},
// then `count` little-endian float64 values.
struct FieldSnapshot {
    int d = 0;
    int n = 0;
    double t_lo = 0.0;
    double t_hi = 0.0;
    std::string layout;  // "points" or "grid"
    std::uint64_t seed = 0;
    std::vector<double> points;  // flat, points layout only
    double extent = 0.0;         // grid layout only
    double step = 0.0;
    std::size_t side = 0;
    std::vector<double> values;
};

void write_field_snapshot(std::ostream& out, const whitenoise::FieldSample& sample);
void write_field_snapshot(std::ostream& out, const whitenoise::GridField& field);
FieldSnapshot read_field_snapshot(std::istream& in);

}  // namespace loglab
