#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "loglab/runner/runner.hpp"

using namespace loglab::runner;
namespace fs = std::filesystem;

namespace {

bool has_error(const Validation& v, const std::string& needle) {
    for (const auto& e : v.errors)
        if (e.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_CASE("config validation") {
    CHECK(has_error(validate_config(""), "missing experiment"));
    CHECK(has_error(validate_config("{}"), "missing experiment"));
    const auto unknown = validate_config(R"({"experiment": "nope"})");
    CHECK(has_error(unknown, "experiment"));
    CHECK(has_error(unknown, "nope"));
    const auto ok = validate_config(R"({"experiment": "geometry_checks"})");
    CHECK(ok.ok());
    REQUIRE(ok.config);
    CHECK(ok.config->seed == 1);
    CHECK(ok.config->params == find_experiment("geometry_checks")->defaults);

    CHECK(has_error(validate_config(R"({"experiment": "geometry_checks", "colour": 1})"), "colour"));
    CHECK(has_error(validate_config(R"({"experiment": "fractal_crossing", "params": {"depth1": {"pp": 0.5}}})"),
                    "params.depth1.pp"));
    CHECK(has_error(validate_config(R"({"experiment": "fractal_crossing", "params": {"depth1": {"p": "x"}}})"),
                    "params.depth1.p"));
    CHECK(has_error(validate_config(R"({"experiment": "fractal_crossing", "params": {"depth1": {"samples": -3}}})"),
                    "params.depth1.samples"));
    CHECK(has_error(validate_config(R"({"experiment": "fractal_crossing", "params": {"depth1": {"mode": "open"}}})"),
                    "params.depth1.mode"));
    CHECK(has_error(validate_config(R"({"experiment": "fractal_crossing", "params": {"sections": ["depth1", "x"]}})"),
                    "params.sections"));
    CHECK(has_error(validate_config(R"({"experiment": "geometry_checks", "seed": -1})"), "seed"));
    CHECK(has_error(validate_config("{ not json"), ""));
    const auto with_comment = validate_config("// note\n{\"experiment\": \"fractal_pc\", \"params\": {\"depth\": 2}}");
    CHECK(with_comment.ok());
    const auto coerced = validate_config(R"({"experiment": "fractal_crossing", "params": {"depth1": {"p": 1}}})");
    REQUIRE(coerced.ok());
    CHECK(coerced.config->params["depth1"]["p"].is_number_float());
}

TEST_CASE("every experiment validates with its defaults") {
    for (const auto& e : experiments()) {
        CAPTURE(e.name);
        CHECK(validate_config(Json{{"experiment", e.name}}.dump()).ok());
        CHECK(find_experiment(e.name) == &e);
    }
    CHECK(experiments().size() == 12);
}

TEST_CASE("number and CSV formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(format_double(-HUGE_VAL) == "-inf");
    Table t("t", {"name", "value"});
    t.add({std::string("a,b"), 1.5});
    t.add({std::string("say \"hi\""), std::int64_t{3}});
    CHECK_THROWS(t.add({1.0}));
    std::ostringstream out;
    write_csv(out, t);
    CHECK(out.str() == "name,value\r\n\"a,b\",1.5\r\n\"say \"\"hi\"\"\",3\r\n");
}

TEST_CASE("geometry report contains the zero-distance row") {
    auto v = validate_config(R"({"experiment": "geometry_checks", "params": {"sections": []}})");
    REQUIRE(v.ok());
    RunOptions options;
    options.write = false;
    const auto report = run(*v.config, options);
    CHECK(report.outcome.passed());
    bool found = false;
    for (const auto& t : report.outcome.tables)
        if (t.name == "zero_distance") found = !t.rows.empty();
    CHECK(found);
    CHECK(report.directory.empty());
    const Json j = report.to_json();
    CHECK(j["config"] == v.config->to_json());
    CHECK(j.contains("version"));
    CHECK(j.contains("wall_seconds"));
}

TEST_CASE("fractal crossing example and determinism") {
    auto v = validate_config(R"({"experiment": "fractal_crossing", "seed": 3,
        "params": {"sections": ["depth1"], "depth1": {"d": 2, "p": 0.5, "samples": 100000}}})");
    REQUIRE(v.ok());
    RunOptions options;
    options.write = false;
    const auto a = run(*v.config, options);
    CHECK(a.outcome.passed());
    const double rate = a.outcome.results["depth1"]["rate"].get<double>();
    CHECK(std::abs(rate - 0.28125) <= 3 * std::sqrt(0.28125 * 0.71875 / 1e5));
    const auto b = run(*v.config, options);
    CHECK(a.outcome.results == b.outcome.results);
    options.seed = 4;
    const auto c = run(*v.config, options);
    CHECK(c.config.seed == 4);
    CHECK(c.outcome.results != a.outcome.results);
    options.threads = 3;
    options.seed = 3;
    const auto d = run(*v.config, options);
    CHECK(d.outcome.results == a.outcome.results);
}

TEST_CASE("runs write fresh directories and never overwrite") {
    const fs::path root = fs::temp_directory_path() / "loglab_runner_test";
    fs::remove_all(root);
    auto v = validate_config(R"({"experiment": "gaussian_checks", "params": {"sections": ["sequence"]}})");
    REQUIRE(v.ok());
    RunOptions options;
    options.output = root.string();
    const auto a = run(*v.config, options);
    const auto b = run(*v.config, options);
    CHECK(a.directory != b.directory);
    for (const auto& r : {a, b}) {
        CHECK(fs::exists(fs::path(r.directory) / "config.json"));
        CHECK(fs::exists(fs::path(r.directory) / "report.json"));
        std::ifstream in(fs::path(r.directory) / "report.json");
        const Json j = Json::parse(in);
        CHECK(j["config"]["experiment"] == "gaussian_checks");
        CHECK(j["passed"] == true);
    }
    fs::remove_all(root);
}

TEST_CASE("module errors carry the experiment name") {
    auto v = validate_config(R"({"experiment": "path_stats", "params": {"sections": ["audit"], "audit": {"d": 20, "chains": 1}}})");
    REQUIRE(v.ok());
    RunOptions options;
    options.write = false;
    try {
        run(*v.config, options);
        FAIL("expected an error");
    } catch (const RunError& e) {
        CHECK(std::string(e.what()).rfind("path_stats: ", 0) == 0);
    }
}
