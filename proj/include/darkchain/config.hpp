#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "darkchain/experiments.hpp"

namespace darkchain {

const std::vector<std::string>& known_commands();

struct RunConfig {
    std::string command;
    SweepSpec sweep;
    std::filesystem::path out_dir = "out";
};

// Command-specific grids on top of the physical defaults.
RunConfig default_config(const std::string& command);

// Flat JSON object; unknown keys are rejected with ConfigError.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

nlohmann::json config_to_json(const RunConfig& cfg);

// Single-point view used by eigen / steady.
PointSpec point_of(const RunConfig& cfg);

std::vector<int> parse_int_list(const std::string& s);        // "5", "2,5,10", "2:40", "2:40:2"
std::vector<double> parse_double_list(const std::string& s);  // "1", "0.1,1,10", "0:10:0.5"
std::vector<UnitCellKind> parse_geometries(const std::string& s);

ExperimentOutput run_experiment(const RunConfig& cfg);

}  // namespace darkchain
