#include <fstream>
#include <regex>
#include <sstream>

#include "loglab/runner/runner.hpp"

namespace loglab::runner {

namespace {

const char* type_name(const Json& v) {
    if (v.is_boolean()) return "a boolean";
    if (v.is_number_unsigned()) return "a nonnegative integer";
    if (v.is_number_integer()) return "an integer";
    if (v.is_number()) return "a number";
    if (v.is_string()) return "a string";
    if (v.is_array()) return "an array";
    if (v.is_object()) return "an object";
    return "null";
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

struct Merger {
    const Experiment& experiment;
    std::vector<std::string>& errors;

    void error(const std::string& path, const std::string& message) { errors.push_back("params." + path + ": " + message); }

    // Returns the value to store, or null after recording an error.
    Json coerce(const Json& def, const Json& value, const std::string& path) {
        if (def.is_null()) return value;
        if (def.is_boolean()) {
            if (value.is_boolean()) return value;
        } else if (def.is_number_unsigned()) {
            if (value.is_number_unsigned()) return value;
            if (value.is_number_integer()) {
                error(path, "expected a nonnegative integer");
                return Json();
            }
        } else if (def.is_number_integer()) {
            if (value.is_number_integer()) return value;
        } else if (def.is_number()) {
            if (value.is_number()) return Json(value.get<double>());
        } else if (def.is_string()) {
            if (value.is_string()) {
                auto it = experiment.choices.find(std::regex_replace(path, std::regex(R"(\[[0-9]+\])"), ""));
                if (it != experiment.choices.end()) {
                    const auto s = value.get<std::string>();
                    bool found = false;
                    std::string allowed;
                    for (const auto& c : it->second) {
                        found = found || c == s;
                        allowed += (allowed.empty() ? "" : ", ") + c;
                    }
                    if (!found) {
                        error(path, "'" + s + "' is not one of {" + allowed + "}");
                        return Json();
                    }
                }
                return value;
            }
        } else if (def.is_array()) {
            if (value.is_array()) {
                if (def.empty()) return value;
                Json out = Json::array();
                for (std::size_t i = 0; i < value.size(); ++i)
                    out.push_back(coerce(def[0], value[i], path + "[" + std::to_string(i) + "]"));
                return out;
            }
        } else if (def.is_object()) {
            if (value.is_object()) return merge(def, value, path);
        }
        error(path, std::string("expected ") + type_name(def) + ", got " + type_name(value));
        return Json();
    }

    Json merge(const Json& defaults, const Json& user, const std::string& path) {
        Json out = defaults;
        for (const auto& [key, value] : user.items()) {
            const std::string p = join(path, key);
            if (!defaults.contains(key)) {
                error(p, "unknown key");
                continue;
            }
            out[key] = coerce(defaults[key], value, p);
        }
        return out;
    }
};

}  // namespace

Json ExperimentConfig::to_json() const {
    Json j;
    j["experiment"] = experiment;
    j["seed"] = seed;
    j["output"] = output;
    if (!description.empty()) j["description"] = description;
    j["params"] = params;
    return j;
}

Validation validate_config(std::string_view text) {
    Validation v;
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        v.errors.push_back("missing experiment");
        return v;
    }
    Json root;
    try {
        root = Json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const Json::parse_error& e) {
        v.errors.push_back(std::string("config: ") + e.what());
        return v;
    }
    if (!root.is_object()) {
        v.errors.push_back("config: expected an object at the top level");
        return v;
    }
    for (const auto& [key, value] : root.items())
        if (key != "experiment" && key != "seed" && key != "output" && key != "description" && key != "params")
            v.errors.push_back(key + ": unknown key");

    ExperimentConfig config;
    const Experiment* experiment = nullptr;
    if (!root.contains("experiment")) {
        v.errors.push_back("missing experiment");
    } else if (!root["experiment"].is_string()) {
        v.errors.push_back("experiment: expected a string");
    } else {
        config.experiment = root["experiment"].get<std::string>();
        experiment = find_experiment(config.experiment);
        if (!experiment) v.errors.push_back("experiment: unknown experiment '" + config.experiment + "'");
    }
    if (root.contains("seed")) {
        if (root["seed"].is_number_unsigned())
            config.seed = root["seed"].get<std::uint64_t>();
        else
            v.errors.push_back("seed: expected a nonnegative integer");
    }
    if (root.contains("output")) {
        if (root["output"].is_string())
            config.output = root["output"].get<std::string>();
        else
            v.errors.push_back("output: expected a string");
    }
    if (root.contains("description")) {
        if (root["description"].is_string())
            config.description = root["description"].get<std::string>();
        else
            v.errors.push_back("description: expected a string");
    }
    Json params = Json::object();
    if (root.contains("params")) {
        if (root["params"].is_object())
            params = root["params"];
        else
            v.errors.push_back("params: expected an object");
    }
    if (experiment) {
        Merger merger{*experiment, v.errors};
        config.params = merger.merge(experiment->defaults, params, "");
    }
    if (v.errors.empty()) v.config = std::move(config);
    return v;
}

Validation load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        Validation v;
        v.errors.push_back(path + ": cannot open file");
        return v;
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return validate_config(buffer.str());
}

}  // namespace loglab::runner
