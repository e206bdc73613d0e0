#pragma once

// JSON experiment configuration (schema_version 1). Every object is read
// strictly: unknown keys, wrong types and inconsistent values raise
// ConfigError with the offending path.

#include <string>

#include "json.hpp"

#include "csprop/experiments.hpp"

namespace csprop::cli {

inline constexpr int kSchemaVersion = 1;

struct Config {
  ExperimentSetup setup;
  // Extra K2 sums reported by `compare`, e.g. {"f1", "f2"}.
  std::vector<std::vector<std::string>> combinations;
  std::string output_dir = "out";
};

Config parse_config(const nlohmann::ordered_json& j);
Config load_config(const std::string& path);

// Fully resolved configuration; parse_config(to_json(c)) reproduces c.
nlohmann::ordered_json to_json(const Config& c);

// Bundled configurations matching the library presets.
Config preset_config(const std::string& name);  // quartic, nelson, nelson_smoke, harmonic

}  // namespace csprop::cli
