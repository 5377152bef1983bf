#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "homax/noswirl.hpp"
#include "homax/swirl.hpp"

namespace homax {

/// Settings shared by every command. Keys missing from a JSON file keep their
/// defaults; unknown keys are rejected.
struct RunConfig {
  int mesh_n = 1025;
  double mesh_grading = 4.0;
  RiccatiOptions riccati;
  SolveOptions solve;
  NewtonOptions newton;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  /// Worker threads for sweeps; 0 picks the hardware default.
  int threads = 0;
};

/// Throws ParameterError unless every tolerance is positive and the mesh is buildable.
void validate(const RunConfig& cfg);

nlohmann::json to_json(const RunConfig& cfg);

/// Overlays the keys of `j` on `base` and validates the result.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base = {});

/// Reads a JSON config file; IoError if unreadable, ParameterError if malformed.
RunConfig load_config(const std::string& path);

/// Value of HOMAX_CONFIG when set and nonempty.
std::optional<std::string> config_path_from_env();

}  // namespace homax
