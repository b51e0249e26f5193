#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "davar/twin.hpp"

namespace davar {

struct OutputConfig {
  std::string directory = ".";
  std::string prefix = "experiment";
};

/// The file-backed experiment description. Defaults follow the reference
/// parameter choices; unknown keys are rejected.
struct ExperimentConfig {
  TwinConfig twin;
  OutputConfig output;
};

/// Parses a config object. Also accepts a metadata file (an object with a
/// "config" key) so any run can be replayed from its own metadata.
ExperimentConfig parse_config(const nlohmann::json& root);

/// Loads and parses a config file; ConfigError messages carry the file
/// position (parse errors) or the offending key path.
ExperimentConfig load_config(const std::string& path);

/// The fully resolved config (all defaults materialized). Parsing this
/// value again yields the identical experiment.
nlohmann::json resolved_config_json(const ExperimentConfig& config);

/// Run metadata: resolved config plus the seed-derivation and
/// evaluation-counting conventions and the code version.
nlohmann::json run_metadata_json(const ExperimentConfig& config);

}  // namespace davar
