#pragma once

#include <optional>
#include <string>
#include <vector>

#include "homax/mesh.hpp"
#include "homax/noswirl.hpp"

namespace homax {

/// A perturbation (U_theta, U_phi) on a common mesh.
struct ProfilePair {
  GridFunction theta;
  GridFunction phi;

  static ProfilePair zero(const MeshPtr& mesh) { return {GridFunction(mesh), GridFunction(mesh)}; }

  ProfilePair& operator+=(const ProfilePair& o);
  ProfilePair& operator-=(const ProfilePair& o);
  ProfilePair& operator*=(double s);
};

ProfilePair operator+(const ProfilePair& a, const ProfilePair& b);
ProfilePair operator-(const ProfilePair& a, const ProfilePair& b);
ProfilePair operator*(double s, const ProfilePair& a);

/// Kernel vectors of the linearised operator.
enum class KernelId { v1, v2, v2a, v2b, v3, v4 };

std::string to_string(KernelId id);

/// Values of the functionals l1..l4, l2a, l2b on a pair.
struct Functionals {
  double l1 = 0.0;  // V_theta(0)
  double l2 = 0.0;  // V_theta'(0)
  double l3 = 0.0;  // V_phi'(0)
  double l4 = 0.0;  // V_phi(0)
  std::optional<double> l2a;  // V_theta'(-1), absent when divergent
  std::optional<double> l2b;  // V_theta'(1), absent when divergent
};

struct NormTerm {
  std::string name;
  double value = 0.0;
};

struct NormReport {
  std::vector<NormTerm> terms;
  double total = 0.0;
  bool infinite = false;
};

/// psi[U, V] = int_0^x int_0^l int_0^t 2 U V' / (1 - s^2), with endpoint-relative forms.
struct PsiResult {
  GridFunction psi;
  /// psi - psi(-1) and psi - psi(1), accurate near the respective endpoint.
  GridFunction from_left;
  GridFunction from_right;
  double at_left = 0.0;
  double at_right = 0.0;
};

PsiResult psi(const GridFunction& u_phi, const GridFunction& v_phi);

struct AB {
  GridFunction a;
  GridFunction b;
};

/// a = int_0^x (2s + U)/(1 - s^2), b = int_0^x U/(1 - s^2).
AB compute_ab(const NoSwirlProfile& p);

/// Lower bound on epsilon for the case, or nullopt when the case admits none.
std::optional<double> epsilon_lower_bound(CaseTag tag, double u_left, double u_right);

/// epsilon = lower bound + margin, kept below 1/2 - margin; midpoint when squeezed.
double choose_epsilon(CaseTag tag, double u_left, double u_right, double margin = 0.02);

struct OperatorOptions {
  double epsilon_margin = 0.02;
  /// Forced epsilon; otherwise chosen from the case bounds.
  std::optional<double> epsilon;
  /// Build a context at points outside every I_{k,l} (used by rigidity probes).
  bool allow_unassigned = false;
};

/// Profile-dependent data shared by the operators on one (c, gamma) point.
class OperatorContext {
 public:
  OperatorContext(NoSwirlProfile profile, RegionLabel label, OperatorOptions opt = {});

  const NoSwirlProfile& profile() const noexcept { return profile_; }
  const RegionLabel& label() const noexcept { return label_; }
  const MeshPtr& mesh() const noexcept { return profile_.mesh(); }
  CaseTag case_tag() const noexcept { return tag_; }
  Variant variant() const noexcept { return variant_; }
  double epsilon() const noexcept { return epsilon_; }

  const GridFunction& a() const noexcept { return a_; }
  const GridFunction& b() const noexcept { return b_; }
  const GridFunction& exp_a() const noexcept { return exp_a_; }
  const GridFunction& exp_minus_a() const noexcept { return exp_ma_; }
  const GridFunction& exp_b() const noexcept { return exp_b_; }
  const GridFunction& exp_minus_b() const noexcept { return exp_mb_; }

  const ProfilePair& kernel(KernelId id) const;
  /// Basis of the kernel complement used by the active variant.
  const std::vector<KernelId>& basis_ids() const noexcept { return basis_; }
  std::vector<ProfilePair> basis() const;

  /// Endpoint model for U_theta-type functions on each side.
  LimitModel left_model() const noexcept { return left_model_; }
  LimitModel right_model() const noexcept { return right_model_; }

  /// Weight arrays for the norms, in term order.
  const std::vector<std::vector<double>>& x_weights() const noexcept { return xw_; }
  const std::vector<std::vector<double>>& y_weights() const noexcept { return yw_; }

 private:
  NoSwirlProfile profile_;
  RegionLabel label_;
  CaseTag tag_;
  Variant variant_;
  double epsilon_ = 0.0;
  LimitModel left_model_ = LimitModel::power;
  LimitModel right_model_ = LimitModel::power;
  GridFunction a_, b_, exp_a_, exp_ma_, exp_b_, exp_mb_;
  ProfilePair kernels_[6];
  std::vector<KernelId> basis_;
  std::vector<std::vector<double>> xw_, yw_;
};

/// Solves the profile at (c, gamma), classifies it and builds the context.
OperatorContext make_context(const MeshPtr& mesh, const CTriple& c, double gamma,
                             const OperatorOptions& opt = {}, const RiccatiOptions& ropt = {},
                             const GammaBounds* bounds = nullptr);

/// Second derivative at 0 of l[U] = (1-x^2) U' + (2x + U-bar) U.
double l_ddot0(const OperatorContext& ctx, const GridFunction& u_theta);

/// varphi''(0) where varphi = l[U] + U^2 / 2.
double varphi_ddot0(const OperatorContext& ctx, const GridFunction& u_theta);

ProfilePair op_A(const OperatorContext& ctx, const ProfilePair& u);
ProfilePair op_Q(const OperatorContext& ctx, const ProfilePair& u, const ProfilePair& v);
/// G(U) = A(U) + Q(U, U).
ProfilePair op_G(const OperatorContext& ctx, const ProfilePair& u);
/// Frechet derivative of G at `base` applied to `dir`.
ProfilePair op_L(const OperatorContext& ctx, const ProfilePair& base, const ProfilePair& dir);

/// Right inverse of A for the given variant.
ProfilePair right_inverse(const OperatorContext& ctx, const ProfilePair& xi, Variant v);
inline ProfilePair right_inverse(const OperatorContext& ctx, const ProfilePair& xi) {
  return right_inverse(ctx, xi, ctx.variant());
}

Functionals functionals(const OperatorContext& ctx, const ProfilePair& v);

/// Projection onto the kernel complement of the variant.
ProfilePair project(const OperatorContext& ctx, const ProfilePair& v, Variant variant);
inline ProfilePair project(const OperatorContext& ctx, const ProfilePair& v) {
  return project(ctx, v, ctx.variant());
}

NormReport norm_X(const OperatorContext& ctx, const ProfilePair& v);
NormReport norm_Y(const OperatorContext& ctx, const ProfilePair& xi);

struct YMembership {
  double left = 0.0;   // xi_theta(-1)
  double right = 0.0;  // xi_theta(1)
  double ddot0 = 0.0;  // xi_theta''(0)
  bool corrected = false;
  bool violated = false;
};

/// Zeroes xi_theta(+-1) and xi_theta''(0) exactly when all are below tol.
YMembership enforce_y(const OperatorContext& ctx, ProfilePair& xi, double tol = 1e-8);

/// Adjusted constants: P_chat is the forcing of the full equations.
CTriple chat(const OperatorContext& ctx, const ProfilePair& u);

}  // namespace homax
