#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"

namespace loglab::runner {

using Json = nlohmann::ordered_json;

struct Check {
    std::string name;
    bool passed = false;
    std::string detail;
};

using Cell = std::variant<double, std::int64_t, std::string>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    Table(std::string name_, std::vector<std::string> columns_) : name(std::move(name_)), columns(std::move(columns_)) {}
    void add(std::vector<Cell> row);
};

struct Outcome {
    Json results = Json::object();
    std::vector<Check> checks;
    std::vector<Table> tables;

    void check(std::string name, bool passed, std::string detail);
    bool passed() const;
};

struct Context {
    std::uint64_t seed = 1;
    unsigned threads = 1;

    // Independent seed for a named sub-computation.
    std::uint64_t derive(std::string_view label, std::uint64_t index = 0) const;
};

struct Experiment {
    std::string name;
    std::string summary;
    Json defaults;
    // Allowed values of string parameters, keyed by dotted path ("depth1.mode").
    std::map<std::string, std::vector<std::string>> choices;
    std::function<Outcome(const Json& params, const Context& context)> run;
};

const std::vector<Experiment>& experiments();
const Experiment* find_experiment(std::string_view name);

struct ExperimentConfig {
    std::string experiment;
    std::uint64_t seed = 1;
    std::string output = "runs";
    std::string description;
    Json params;  // fully resolved against the experiment defaults

    Json to_json() const;
};

struct Validation {
    std::optional<ExperimentConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return errors.empty(); }
};

// Schema check without execution. Errors name the offending field path.
Validation validate_config(std::string_view text);
Validation load_config(const std::string& path);

class RunError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> output;
    unsigned threads = 0;  // 0: LOGLAB_THREADS, else 1
    bool write = true;
};

struct RunReport {
    ExperimentConfig config;
    Outcome outcome;
    double wall_seconds = 0.0;
    std::string version;
    std::string started_utc;
    std::string directory;  // empty when nothing was written
    unsigned threads = 1;

    Json to_json() const;
};

RunReport run(ExperimentConfig config, const RunOptions& options = {});

unsigned resolve_threads(unsigned requested);

// Shortest round-trip-safe rendering: %.17g, with nan / inf / -inf.
std::string format_double(double x);
// RFC 4180: CRLF records, fields quoted when they contain a comma, quote or line break.
void write_csv(std::ostream& out, const Table& table);

inline constexpr const char* kAlgorithmVersion = "philox4x32-10/keyed-v1";

}  // namespace loglab::runner
