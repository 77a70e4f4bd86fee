#include <cstdio>
#include <exception>
#include <iostream>

#include "CLI11.hpp"
#include "loglab/runner/runner.hpp"

namespace runner = loglab::runner;

namespace {

int print_errors(const std::string& path, const runner::Validation& v) {
    for (const auto& e : v.errors) std::cerr << path << ": " << e << '\n';
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"loglab: simulations for thick points of log-correlated fields", "loglab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", LOGLAB_VERSION_STRING);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 0;

    auto* run = app.add_subcommand("run", "Run an experiment from a JSON config");
    run->add_option("config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out, "Output directory root (a fresh timestamped subdirectory is created)");
    run->add_option("--threads", threads, "Worker threads (default: LOGLAB_THREADS, else 1)");

    auto* validate = app.add_subcommand("validate", "Check a config without running it");
    validate->add_option("config", config_path, "Config file")->required();

    auto* list = app.add_subcommand("list-experiments", "List experiments and their default parameters");
    bool verbose = false;
    list->add_flag("--defaults", verbose, "Print default parameters as JSON");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*list) {
            for (const auto& e : runner::experiments()) {
                std::cout << e.name << "\t" << e.summary << '\n';
                if (verbose) std::cout << e.defaults.dump(2) << '\n';
            }
            return 0;
        }
        const auto v = runner::load_config(config_path);
        if (!v.ok()) return print_errors(config_path, v);
        if (*validate) {
            std::cout << config_path << ": ok (" << v.config->experiment << ")\n";
            return 0;
        }
        runner::RunOptions options;
        options.seed = seed;
        options.output = out;
        options.threads = threads;
        const auto report = runner::run(*v.config, options);
        for (const auto& c : report.outcome.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        std::printf("%s: %s in %.1f s -> %s\n", report.config.experiment.c_str(), report.outcome.passed() ? "passed" : "failed",
                    report.wall_seconds, report.directory.c_str());
        return report.outcome.passed() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
