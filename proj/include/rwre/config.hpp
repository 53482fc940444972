#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rwre/environment.hpp"

namespace rwre {

inline constexpr int kConfigVersion = 1;

// Environment document plus the optional "experiment" object, validated
// against a closed key set.
struct ExperimentConfig {
  int version = kConfigVersion;
  EnvironmentSpec spec;
  nlohmann::json experiment = nlohmann::json::object();
};

// Throws ConfigError; syntax errors carry "source:line:column".
ExperimentConfig parse_config(std::string_view text, const std::string& source = "<config>");
ExperimentConfig load_config(const std::string& path);

EnvironmentSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const EnvironmentSpec& spec);

// Typed lookups into the experiment object; ConfigError on a type mismatch.
double experiment_number(const nlohmann::json& ex, const char* key, double fallback);
std::int64_t experiment_integer(const nlohmann::json& ex, const char* key, std::int64_t fallback);
bool experiment_bool(const nlohmann::json& ex, const char* key, bool fallback);
std::string experiment_string(const nlohmann::json& ex, const char* key, const std::string& fallback);
std::vector<double> experiment_numbers(const nlohmann::json& ex, const char* key, std::vector<double> fallback);
std::optional<std::vector<std::vector<int>>> experiment_int_matrix(const nlohmann::json& ex, const char* key);

const std::vector<std::string>& experiment_keys();

}  // namespace rwre
