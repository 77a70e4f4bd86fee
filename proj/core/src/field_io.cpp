#include "loglab/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace loglab {

namespace {

int level_of(double t_lo, double t_hi) {
    return static_cast<int>(std::lround(std::log2(t_hi / t_lo)));
}

void write_values(std::ostream& out, const std::vector<double>& values) {
    for (double v : values) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        char bytes[8];
        std::memcpy(bytes, &bits, sizeof bits);
        out.write(bytes, 8);
    }
}

void write_header(std::ostream& out, nlohmann::json header, const whitenoise::CovarianceSpec& spec, std::uint64_t seed,
                  std::size_t count) {
    header["d"] = spec.d;
    header["n"] = level_of(spec.t_lo, spec.t_hi);
    header["t_lo"] = spec.t_lo;
    header["t_hi"] = spec.t_hi;
    header["seed"] = seed;
    header["count"] = count;
    out << header.dump() << '\n';
}

}  // namespace

void write_field_snapshot(std::ostream& out, const whitenoise::FieldSample& sample) {
    nlohmann::json header;
    header["layout"] = "points";
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < sample.points.size(); ++i) {
        auto p = sample.points[i];
        pts.push_back(std::vector<double>(p.begin(), p.end()));
    }
    header["points"] = std::move(pts);
    write_header(out, std::move(header), sample.spec, sample.seed, sample.values.size());
    write_values(out, sample.values);
}

void write_field_snapshot(std::ostream& out, const whitenoise::GridField& field) {
    nlohmann::json header;
    header["layout"] = "grid";
    header["grid"] = {{"extent", field.extent}, {"step", field.step}, {"side", field.side}};
    write_header(out, std::move(header), field.spec, field.seed, field.values.size());
    write_values(out, field.values);
}

FieldSnapshot read_field_snapshot(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("field snapshot: missing header");
    const auto header = nlohmann::json::parse(line);
    FieldSnapshot snap;
    snap.d = header.at("d").get<int>();
    snap.n = header.at("n").get<int>();
    snap.t_lo = header.at("t_lo").get<double>();
    snap.t_hi = header.at("t_hi").get<double>();
    snap.layout = header.at("layout").get<std::string>();
    snap.seed = header.at("seed").get<std::uint64_t>();
    const auto count = header.at("count").get<std::size_t>();
    if (snap.layout == "points") {
        for (const auto& p : header.at("points")) {
            if (static_cast<int>(p.size()) != snap.d) throw std::runtime_error("field snapshot: point dimension mismatch");
            for (const auto& c : p) snap.points.push_back(c.get<double>());
        }
    } else if (snap.layout == "grid") {
        const auto& g = header.at("grid");
        snap.extent = g.at("extent").get<double>();
        snap.step = g.at("step").get<double>();
        snap.side = g.at("side").get<std::size_t>();
    } else {
        throw std::runtime_error("field snapshot: unknown layout '" + snap.layout + "'");
    }
    snap.values.resize(count);
    for (auto& v : snap.values) {
        char bytes[8];
        if (!in.read(bytes, 8)) throw std::runtime_error("field snapshot: truncated value block");
        std::uint64_t bits;
        std::memcpy(&bits, bytes, sizeof bits);
        if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap64(bits);
        std::memcpy(&v, &bits, sizeof v);
    }
    return snap;
}

}  // namespace loglab
