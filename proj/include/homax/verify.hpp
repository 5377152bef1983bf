#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "homax/config.hpp"
#include "homax/operators.hpp"

namespace homax {

struct CheckResult {
  /// "C1".."C11" for acceptance criteria, "I-..." for module invariants.
  std::string key;
  std::string title;
  bool passed = false;
  /// Measured quantity and threshold, formatted deterministically.
  std::string detail;
};

/// One parameter point per implemented stratum family.
struct StratumPoint {
  std::string name;
  CTriple c;
  double gamma = 0.0;
};

/// I_{1,1}, I_{1,2}, I_{1,3}, I_{2,1}, I_{2,3}, I_{3,1}, I_{4,1} and I_{5,.}.
std::vector<StratumPoint> stratum_points(const RiccatiOptions& opt = {});

/// beta of norm `size` spread evenly over the active basis.
Beta even_beta(const OperatorContext& ctx, double size);

/// Acceptance criteria 1..11; random draws derive from cfg.seed and the id.
CheckResult run_criterion(int id, const RunConfig& cfg);

/// Property checks of the individual modules beyond the criteria.
std::vector<CheckResult> run_invariants(const RunConfig& cfg);

/// Criteria 1..11 followed by the invariants.
std::vector<CheckResult> run_verify(const RunConfig& cfg);

/// Header, one line per check, and a summary line. Contains no timings.
void write_report(const std::vector<CheckResult>& results, const RunConfig& cfg, std::ostream& os);

}  // namespace homax
