#include <cstdio>
#include <filesystem>
#include <map>

#include "CLI11.hpp"
#include "loglab/runner/runner.hpp"

namespace fs = std::filesystem;
namespace runner = loglab::runner;

namespace {

// Criterion number -> config file, from the NN_ prefix of each file name.
std::map<int, fs::path> acceptance_configs(const fs::path& dir) {
    std::map<int, fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (entry.path().extension() != ".json" || name.size() < 3 || name[2] != '_') continue;
        out[std::stoi(name.substr(0, 2))] = entry.path();
    }
    return out;
}

bool run_criterion(int n, const fs::path& config, unsigned threads) {
    const auto v = runner::load_config(config.string());
    if (!v.ok()) {
        for (const auto& e : v.errors) std::printf("  %s: %s\n", config.filename().c_str(), e.c_str());
        std::printf("criterion %2d: FAIL (invalid config %s)\n", n, config.filename().c_str());
        return false;
    }
    runner::RunOptions options;
    options.write = false;
    options.threads = threads;
    try {
        const auto report = runner::run(*v.config, options);
        for (const auto& c : report.outcome.checks)
            std::printf("  %s %s: %s\n", c.passed ? "ok  " : "FAIL", c.name.c_str(), c.detail.c_str());
        const bool passed = report.outcome.passed();
        std::printf("criterion %2d: %s (%s, %.1f s)\n", n, passed ? "PASS" : "FAIL", config.filename().c_str(),
                    report.wall_seconds);
        return passed;
    } catch (const std::exception& e) {
        std::printf("  error: %s\n", e.what());
        std::printf("criterion %2d: FAIL (%s)\n", n, config.filename().c_str());
        return false;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Runs the acceptance criteria and prints one PASS/FAIL line per criterion"};
    std::vector<int> criteria;
    std::string dir = LOGLAB_ACCEPTANCE_DIR;
    unsigned threads = 0;
    app.add_option("--criterion", criteria, "Criterion numbers to run (default: all)");
    app.add_option("--configs", dir, "Directory of NN_*.json acceptance configs");
    app.add_option("--threads", threads, "Worker threads (default: LOGLAB_THREADS, else 1)");
    CLI11_PARSE(app, argc, argv);

    const auto configs = acceptance_configs(dir);
    if (criteria.empty())
        for (const auto& [n, path] : configs) criteria.push_back(n);
    int failures = 0;
    for (int n : criteria) {
        const auto it = configs.find(n);
        if (it == configs.end()) {
            std::printf("criterion %2d: FAIL (no config in %s)\n", n, dir.c_str());
            ++failures;
            continue;
        }
        if (!run_criterion(n, it->second, threads)) ++failures;
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
