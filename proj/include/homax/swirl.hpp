#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homax/operators.hpp"

namespace homax {

/// Coefficients of V1, V2 (or V2a/V2b), V3, V4. Components outside the
/// variant's basis must be zero.
using Beta = std::array<double, 4>;

struct SolveOptions {
  /// Stop when ||V_{k+1} - V_k||_X < tol.
  double tol = 1e-8;
  int max_iter = 200;
  /// Largest accepted |beta|.
  double beta_guard = 0.1;
  /// Consecutive steps with norm ratio >= 1 before giving up.
  int stall_limit = 3;
  /// Y-membership defects of Q(U, U) below this are removed.
  double y_tol = 1e-8;
};

struct SwirlSolution {
  CTriple c;
  double gamma = 0.0;
  Variant variant = Variant::w1;
  Beta beta{};
  /// Total perturbation U-tilde = sum beta_i V^i + V.
  ProfilePair pair;
  /// V, in the complement of the kernel.
  ProfilePair correction;
  CTriple chat;
  double residual_y = 0.0;
  int iterations = 0;
  bool converged = false;
  /// ||V_{k+1} - V_k||_X per iteration.
  std::vector<double> trace;
};

/// sum_i beta_i V^i over the active basis.
ProfilePair kernel_combination(const OperatorContext& ctx, const Beta& beta);

/// Contraction V <- -P W Q(U, U), U = sum beta_i V^i + V, from V = 0.
/// A step that fails to shrink while below 1e-8 ||U||_X counts as convergence
/// (roundoff floor). Throws DivergenceError when the step norm fails to shrink stall_limit times
/// in a row, ParameterError when |beta| exceeds the guard.
SwirlSolution picard_solve(const OperatorContext& ctx, const Beta& beta, const SolveOptions& opt = {});

struct NewtonOptions {
  int max_steps = 4;
  /// Neumann terms per linear solve.
  int inner_max = 60;
  double inner_tol = 1e-14;
  /// Stop when the fixed-point defect drops below this.
  double tol = 1e-13;
  double y_tol = 1e-8;
};

/// Newton on F(V) = V + P W Q(U, U). Each step solves (I + K) d = -F with
/// K = P W (Q(U, .) + Q(., U)) by Neumann series, since ||K|| ~ |beta|.
/// Returns the input unchanged (with a note in the trace) if a step fails to
/// reduce the defect.
SwirlSolution newton_refine(const OperatorContext& ctx, const SwirlSolution& sol,
                            const NewtonOptions& opt = {});

/// ||G(pair)||_Y.
double residual_y(const OperatorContext& ctx, const ProfilePair& pair);

struct DerivativeCheck {
  KernelId direction = KernelId::v3;
  std::vector<double> h;
  /// ||(U(h e_i) - U(-h e_i)) / 2h - V^i||_X per h.
  std::vector<double> error;
  /// log2 of successive error ratios (h halves each step); empty when the
  /// error is at roundoff, as for exact families.
  std::vector<double> order;
  /// Error of the Richardson-extrapolated quotient.
  double limit_error = 0.0;
  bool exact_family = false;
};

/// Central differences in beta_3 and beta_4 against V^3 and V^4.
std::vector<DerivativeCheck> beta_derivative_check(const OperatorContext& ctx,
                                                   std::vector<double> h = {0.02, 0.01, 0.005});

struct RigidityReport {
  Beta beta{};
  bool contracted = false;
  bool collapsed = false;
  /// sup |U_phi - U_phi(0)| of the converged swirl.
  double phi_variation = 0.0;
  double residual_y = 0.0;
  std::vector<double> trace;
  std::string note;
};

/// Attempts a swirl solve at a point outside every I_{k,l}; never throws.
RigidityReport rigidity_probe(const OperatorContext& ctx, const Beta& beta,
                              const SolveOptions& opt = {});

/// x -> -x, U_theta -> -U_theta, U_phi -> U_phi(-x).
ProfilePair mirror(const ProfilePair& p);

nlohmann::json to_json(const SwirlSolution& s, bool with_profiles = false);
nlohmann::json to_json(const DerivativeCheck& d);
nlohmann::json to_json(const RigidityReport& r);
nlohmann::json to_json(const NormReport& r);

}  // namespace homax
