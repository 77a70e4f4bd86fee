#include "loglab/path_io.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace loglab {

void write_path_jsonl(std::ostream& out, const Path& path) {
    nlohmann::json rec;
    rec["family"] = path.tag();
    rec["d"] = path.d;
    rec["M"] = path.M;
    rec["j"] = path.scale;
    rec["denominator"] = path.denominator;
    nlohmann::json vertices = nlohmann::json::array();
    for (std::size_t i = 0; i < path.size(); ++i) {
        auto v = path.vertex(i);
        vertices.push_back(std::vector<std::int64_t>(v.begin(), v.end()));
    }
    rec["vertices"] = std::move(vertices);
    out << rec.dump() << '\n';
}

std::vector<Path> read_paths_jsonl(std::istream& in) {
    std::vector<Path> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto rec = nlohmann::json::parse(line);
            Path p;
            std::string tag = rec.at("family").get<std::string>();
            const auto cut = tag.find('_');
            p.family = path_family_from_string(tag.substr(0, cut));
            p.d = rec.at("d").get<int>();
            p.M = rec.at("M").get<int>();
            p.scale = rec.at("j").get<int>();
            p.denominator = rec.value("denominator", std::int64_t{1});
            for (const auto& v : rec.at("vertices")) {
                if (static_cast<int>(v.size()) != p.d) throw std::runtime_error("vertex dimension mismatch");
                for (const auto& c : v) p.coords.push_back(c.get<std::int64_t>());
            }
            out.push_back(std::move(p));
        } catch (const std::exception& e) {
            throw std::runtime_error("path JSONL line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace loglab
