#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "loglab/random.hpp"
#include "loglab/runner/runner.hpp"

namespace loglab::runner {

namespace fs = std::filesystem;

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size())
        throw std::logic_error("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(columns.size()));
    rows.push_back(std::move(row));
}

void Outcome::check(std::string name, bool passed, std::string detail) {
    checks.push_back({std::move(name), passed, std::move(detail)});
}

bool Outcome::passed() const {
    for (const auto& c : checks)
        if (!c.passed) return false;
    return true;
}

std::uint64_t Context::derive(std::string_view label, std::uint64_t index) const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) h = (h ^ c) * 0x100000001b3ULL;
    return splitmix64(splitmix64(seed ^ h) + splitmix64(index + 0x9e3779b97f4a7c15ULL));
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("LOGLAB_THREADS")) {
        char* end = nullptr;
        const unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return 1;
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string render(const Cell& cell) {
    if (const auto* d = std::get_if<double>(&cell)) return format_double(*d);
    if (const auto* i = std::get_if<std::int64_t>(&cell)) return std::to_string(*i);
    return csv_field(std::get<std::string>(cell));
}

std::string utc_now(const std::chrono::system_clock::time_point& t, const char* format) {
    const std::time_t tt = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[64];
    std::strftime(buf, sizeof buf, format, &tm);
    return buf;
}

// Fresh directory under `root`; never reuses an existing one.
fs::path create_run_directory(const fs::path& root, const std::string& stamp, const std::string& experiment) {
    fs::create_directories(root);
    const std::string base = stamp + "-" + experiment;
    for (int k = 1;; ++k) {
        fs::path dir = root / (k == 1 ? base : base + "-" + std::to_string(k));
        if (fs::create_directory(dir)) return dir;
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RunError("cannot write " + path.string());
    out << text;
}

}  // namespace

void write_csv(std::ostream& out, const Table& table) {
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << csv_field(table.columns[i]);
    out << "\r\n";
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << render(row[i]);
        out << "\r\n";
    }
}

Json RunReport::to_json() const {
    Json j;
    j["config"] = config.to_json();
    j["version"] = version;
    j["algorithm"] = kAlgorithmVersion;
    j["started_utc"] = started_utc;
    j["wall_seconds"] = wall_seconds;
    j["threads"] = threads;
    j["passed"] = outcome.passed();
    Json checks = Json::array();
    for (const auto& c : outcome.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = checks;
    j["results"] = outcome.results;
    Json tables = Json::array();
    for (const auto& t : outcome.tables) tables.push_back(t.name + ".csv");
    j["tables"] = tables;
    return j;
}

RunReport run(ExperimentConfig config, const RunOptions& options) {
    const Experiment* experiment = find_experiment(config.experiment);
    if (!experiment) throw RunError("unknown experiment '" + config.experiment + "'");
    if (options.seed) config.seed = *options.seed;
    if (options.output) config.output = *options.output;

    RunReport report;
    report.version = LOGLAB_VERSION_STRING;
    report.threads = resolve_threads(options.threads);
    const auto now = std::chrono::system_clock::now();
    report.started_utc = utc_now(now, "%Y-%m-%dT%H:%M:%SZ");

    const Context context{config.seed, report.threads};
    const auto t0 = std::chrono::steady_clock::now();
    try {
        report.outcome = experiment->run(config.params, context);
    } catch (const std::exception& e) {
        throw RunError(config.experiment + ": " + e.what());
    }
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report.config = std::move(config);

    if (options.write) {
        const fs::path dir = create_run_directory(report.config.output, utc_now(now, "%Y%m%dT%H%M%SZ"),
                                                  report.config.experiment);
        report.directory = dir.string();
        write_text(dir / "config.json", report.config.to_json().dump(2) + "\n");
        for (const auto& table : report.outcome.tables) {
            std::ofstream out(dir / (table.name + ".csv"), std::ios::binary);
            if (!out) throw RunError("cannot write " + (dir / (table.name + ".csv")).string());
            write_csv(out, table);
        }
        write_text(dir / "report.json", report.to_json().dump(2) + "\n");
    }
    return report;
}

}  // namespace loglab::runner
