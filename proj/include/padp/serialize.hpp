#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "padp/basis.hpp"
#include "padp/evaluation.hpp"
#include "padp/scenario.hpp"
#include "padp/version.hpp"

namespace padp {

using json = nlohmann::json;

// Configurations embed in manifests as the saved text form: one
// serialization, identical semantics in both file kinds.
inline json config_to_json(const ScenarioConfig& cfg) {
    json j;
    j["text"] = save_config_text(cfg);
    j["name"] = cfg.name;
    return j;
}

inline ScenarioConfig config_from_json(const json& j) {
    return load_config_text(j.at("text").get<std::string>());
}

inline json approx_to_json(const ValueApprox& approx) {
    json j;
    j["choice"] = approx.spec.choice;
    j["m"] = approx.spec.m;
    j["period"] = approx.period;
    j["feature_names"] = approx.spec.feature_names();
    j["beta"] = approx.beta;
    json v1;
    v1["s_cap"] = approx.v1->s_cap;
    v1["period"] = approx.v1->period;
    v1["values"] = approx.v1->v;
    j["nonperishable_value"] = v1;
    return j;
}

inline ValueApprox approx_from_json(const json& j) {
    ValueApprox a;
    a.spec.choice = j.at("choice").get<int>();
    a.spec.m = j.at("m").get<int>();
    a.spec.validate();
    a.period = j.at("period").get<int>();
    a.beta = j.at("beta").get<std::vector<std::vector<double>>>();
    auto v1 = std::make_shared<ScalarValueTable>();
    v1->s_cap = j.at("nonperishable_value").at("s_cap").get<int>();
    v1->period = j.at("nonperishable_value").at("period").get<int>();
    v1->v = j.at("nonperishable_value").at("values").get<std::vector<std::vector<double>>>();
    a.v1 = std::move(v1);
    if (static_cast<int>(a.beta.size()) != a.period)
        throw std::runtime_error("approximation file: beta rows do not match the period");
    for (const auto& row : a.beta)
        if (static_cast<int>(row.size()) != a.spec.feature_count())
            throw std::runtime_error("approximation file: wrong coefficient count");
    return a;
}

// Run manifest: everything needed to reproduce the outputs bit for bit.
inline json make_manifest(const std::string& command, const ScenarioConfig& cfg,
                          const std::vector<std::string>& outputs) {
    json j;
    j["version"] = version_string();
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["scale"] = cfg.scale;
    j["config"] = config_to_json(cfg);
    j["outputs"] = outputs;
    return j;
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
    write_text_file(path, j.dump(2) + "\n");
}

inline json read_json_file(const std::filesystem::path& path) {
    return json::parse(read_text_file(path));
}

}  // namespace padp
