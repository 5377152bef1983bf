#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homax/config.hpp"
#include "homax/noswirl.hpp"
#include "homax/swirl.hpp"

namespace homax {

/// Cartesian grid of sweep points. Lists default to {0} except c1, c2, c3 and gamma.
struct GridSpec {
  std::vector<double> c1, c2, c3;
  /// Absolute gamma values, or fractions t of [gamma^-, gamma^+] when gamma_is_fraction.
  std::vector<double> gamma;
  bool gamma_is_fraction = false;
  std::vector<double> beta1{0.0}, beta2{0.0}, beta3{0.0}, beta4{0.0};
  /// Run the swirl solver on points that carry a variant.
  bool solve = true;
};

/// Keys: c1, c2, c3, and exactly one of gamma or gamma_fraction; optional
/// beta1..beta4 and solve.
GridSpec grid_from_json(const nlohmann::json& j);

struct SolveSummary {
  bool converged = false;
  double residual_y = 0.0;
  int iterations = 0;
  /// Solver failure message; empty on success.
  std::string error;
};

struct AtlasRecord {
  CTriple c;
  double gamma = 0.0;
  Beta beta{};
  std::optional<GammaBounds> bounds;
  std::optional<RegionLabel> label;
  std::optional<EndpointData> endpoints;
  std::optional<SolveSummary> solution;
  /// Set when the point failed before classification.
  std::string error;
};

nlohmann::json to_json(const AtlasRecord& r);
AtlasRecord atlas_record_from_json(const nlohmann::json& j);
bool operator==(const AtlasRecord& a, const AtlasRecord& b);

/// Solves every grid point in a work-stealing pool and writes
/// point_NNNNN.json files plus index.csv into `out_dir`. Records come back in
/// grid order (c1 slowest, beta4 fastest).
std::vector<AtlasRecord> sweep(const GridSpec& grid, const RunConfig& cfg, const std::string& out_dir);

/// Index columns: c1,c2,c3,gamma,beta1,beta2,beta3,beta4,converged,residual,iterations.
void write_index(const std::vector<AtlasRecord>& records, std::ostream& os);

struct AtlasLoad {
  std::vector<AtlasRecord> records;
  /// Indices whose label was recomputed.
  std::vector<std::size_t> checked;
  std::vector<std::size_t> mismatched;
};

/// Reads the point files of an atlas in index order and recomputes the
/// classification of every 1/spot_fraction-th record (at least one).
AtlasLoad load_atlas(const std::string& dir, const RiccatiOptions& opt = {}, double spot_fraction = 0.01);

}  // namespace homax
