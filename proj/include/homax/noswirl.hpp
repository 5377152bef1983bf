#pragma once

#include <optional>
#include <string>
#include <variant>

#include <nlohmann/json.hpp>

#include "homax/mesh.hpp"

namespace homax {

/// Coefficients of P_c(x) = c1 (1-x) + c2 (1+x) + c3 (1-x^2).
struct CTriple {
  double c1 = 0.0;
  double c2 = 0.0;
  double c3 = 0.0;

  double p(double one_minus, double one_plus) const noexcept {
    return c1 * one_minus + c2 * one_plus + c3 * one_minus * one_plus;
  }
  /// x -> -x exchanges c1 and c2.
  CTriple mirrored() const noexcept { return {c2, c1, c3}; }
};

/// Lower bound of c3 over the admissible set J.
double cbar3(double c1, double c2);

/// Closed-form profile value at x = 0 when c3 = cbar3(c1, c2).
double cbar3_gamma(double c1, double c2);

struct RiccatiOptions {
  double rtol = 1e-13;
  double atol = 1e-14;
  /// |U| above this counts as blow-up.
  double blowup_guard = 1e6;
  /// Integration continues to |u| = u_stop (u = artanh x) past the mesh.
  double u_stop = 40.0;
  /// gamma within this distance of gamma^+- is treated as the boundary value.
  double gamma_snap = 1e-9;
  /// |c1 + 1|, |c2 + 1| below this count as c1 = -1, c2 = -1.
  double c_snap = 1e-12;
  /// |c3 - cbar3| below this counts as c3 = cbar3.
  double cbar3_snap = 1e-8;
  /// Bisection tolerance for gamma^+-.
  double bisection_tol = 1e-12;
  int bisection_max_iter = 60;
};

struct GammaBounds {
  double minus = 0.0;
  double plus = 0.0;
};

/// Profile U-bar on the mesh.
struct NoSwirlProfile {
  CTriple c;
  double gamma = 0.0;
  GridFunction ubar;
  /// dU/du = P - 2 x U - U^2/2 from the equation; U' = dU/du / (1-x^2).
  GridFunction ubar_u;
  /// U'(0) and U''(0) from the equation.
  double d1_at_0 = 0.0;
  double d2_at_0 = 0.0;
  /// Left half integrated from the upper root at x = -1 (gamma = gamma^+).
  bool anchored_left = false;
  /// Right half integrated from the lower root at x = 1 (gamma = gamma^-).
  bool anchored_right = false;

  const MeshPtr& mesh() const noexcept { return ubar.mesh(); }
};

struct BlowUp {
  double x_star = 0.0;
  Side side = Side::left;
};

using RiccatiResult = std::variant<NoSwirlProfile, BlowUp>;

/// Checks c in J; throws RegionError otherwise. Returns c with c3 snapped to cbar3
/// and c1, c2 snapped to -1 within tolerance.
CTriple admissible_c(const CTriple& c, const RiccatiOptions& opt = {});

/// Integrates the Riccati equation from U(0) = gamma on the mesh.
///
/// gamma at (or within gamma_snap of) gamma^+ or gamma^- is integrated from the
/// endpoint root inward. `bounds` skips recomputing gamma^+-.
RiccatiResult solve_riccati(const MeshPtr& mesh, const CTriple& c, double gamma,
                            const RiccatiOptions& opt = {}, const GammaBounds* bounds = nullptr);

/// Like solve_riccati but throws RegionError on blow-up.
NoSwirlProfile solve_profile(const MeshPtr& mesh, const CTriple& c, double gamma,
                             const RiccatiOptions& opt = {}, const GammaBounds* bounds = nullptr);

/// Bisection on blow-up: [gamma^-, gamma^+] is the admissible interval.
GammaBounds gamma_bounds(const CTriple& c, const RiccatiOptions& opt = {});

/// Raw extrapolated endpoint value and the snapped branch value.
struct EndpointValue {
  double raw = 0.0;
  double error = 0.0;
  double value = 0.0;
  bool snapped = false;
};

struct EndpointData {
  EndpointValue left;
  EndpointValue right;
  /// lim (U - 2) ln(1+x), only when c1 = -1.
  std::optional<EndpointValue> eta1;
  /// lim (U + 2) ln(1-x), only when c2 = -1.
  std::optional<EndpointValue> eta2;
};

EndpointData endpoint_data(const NoSwirlProfile& p, const RiccatiOptions& opt = {});

/// Exact endpoint values implied by the branch: U(-1) and U(1).
double branch_left_value(const CTriple& c, bool on_upper_root);
double branch_right_value(const CTriple& c, bool on_lower_root);

enum class CaseTag { case1, case2, case2_prime, case3, case4, unassigned };

/// Right inverse family used on a stratum.
enum class Variant { w1, w2a, w2b, w3 };

std::string to_string(CaseTag t);
std::string to_string(Variant v);

struct RegionLabel {
  /// 1..8: which of c1 = -1, c2 = -1, c3 = cbar3 hold.
  int j_stratum = 1;
  /// (k, l) when the point lies in I_{k,l}; l = 1 stands for all three when k >= 5.
  std::optional<std::pair<int, int>> i_stratum;
  bool in_hat_i = false;
  CaseTag case_tag = CaseTag::unassigned;
  std::optional<Variant> variant;
  double gamma_minus = 0.0;
  double gamma_plus = 0.0;
  bool at_gamma_plus = false;
  bool at_gamma_minus = false;
};

RegionLabel classify(const CTriple& c, double gamma, const RiccatiOptions& opt = {},
                     const GammaBounds* bounds = nullptr);

nlohmann::json to_json(const RegionLabel& l);
nlohmann::json to_json(const EndpointData& e);
RegionLabel label_from_json(const nlohmann::json& j);
EndpointData endpoint_data_from_json(const nlohmann::json& j);

}  // namespace homax
