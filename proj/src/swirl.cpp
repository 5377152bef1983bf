#include "homax/swirl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "homax/errors.hpp"

namespace homax {

namespace {

constexpr double kRoundoffFloor = 1e-8;

KernelId slot_kernel(Variant v, int slot) {
  switch (slot) {
    case 0: return KernelId::v1;
    case 1: return v == Variant::w2a ? KernelId::v2a : v == Variant::w2b ? KernelId::v2b : KernelId::v2;
    case 2: return KernelId::v3;
    default: return KernelId::v4;
  }
}

double beta_norm(const Beta& b) {
  double s = 0.0;
  for (double v : b) s += v * v;
  return std::sqrt(s);
}

/// Q(U, U) with the Y corrections applied when they are within tolerance.
ProfilePair forcing(const OperatorContext& ctx, const ProfilePair& u, double y_tol) {
  ProfilePair xi = op_Q(ctx, u, u);
  enforce_y(ctx, xi, y_tol);
  return xi;
}

ProfilePair picard_map(const OperatorContext& ctx, const ProfilePair& base, const ProfilePair& v, double y_tol) {
  ProfilePair next = project(ctx, right_inverse(ctx, forcing(ctx, base + v, y_tol)));
  next *= -1.0;
  return next;
}

std::string trace_text(const std::vector<double>& trace) {
  std::ostringstream os;
  os.precision(3);
  for (std::size_t i = 0; i < trace.size(); ++i) os << (i ? ", " : "") << trace[i];
  return os.str();
}

void finish(const OperatorContext& ctx, SwirlSolution& s) {
  s.residual_y = residual_y(ctx, s.pair);
  s.chat = chat(ctx, s.pair);
}

}  // namespace

ProfilePair kernel_combination(const OperatorContext& ctx, const Beta& beta) {
  ProfilePair out = ProfilePair::zero(ctx.mesh());
  const auto& ids = ctx.basis_ids();
  for (int slot = 0; slot < 4; ++slot) {
    if (beta[slot] == 0.0) continue;
    const KernelId id = slot_kernel(ctx.variant(), slot);
    if (std::find(ids.begin(), ids.end(), id) == ids.end())
      throw ParameterError("beta" + std::to_string(slot + 1) + " has no kernel vector for variant " +
                           to_string(ctx.variant()));
    out += beta[slot] * ctx.kernel(id);
  }
  return out;
}

double residual_y(const OperatorContext& ctx, const ProfilePair& pair) {
  return norm_Y(ctx, op_G(ctx, pair)).total;
}

SwirlSolution picard_solve(const OperatorContext& ctx, const Beta& beta, const SolveOptions& opt) {
  if (!(beta_norm(beta) <= opt.beta_guard))
    throw ParameterError("|beta| = " + std::to_string(beta_norm(beta)) + " exceeds the guard " +
                         std::to_string(opt.beta_guard));
  SwirlSolution s;
  s.c = ctx.profile().c;
  s.gamma = ctx.profile().gamma;
  s.variant = ctx.variant();
  s.beta = beta;
  const ProfilePair base = kernel_combination(ctx, beta);
  ProfilePair v = ProfilePair::zero(ctx.mesh());
  int stalls = 0;
  for (int k = 1; k <= opt.max_iter; ++k) {
    ProfilePair next = picard_map(ctx, base, v, opt.y_tol);
    const double d = norm_X(ctx, next - v).total;
    s.trace.push_back(d);
    v = std::move(next);
    s.iterations = k;
    if (d < opt.tol) {
      s.converged = true;
      break;
    }
    if (s.trace.size() >= 2 && !(d < s.trace[s.trace.size() - 2])) {
      // Steps stop shrinking at the roundoff floor of the X norm.
      if (d < kRoundoffFloor * norm_X(ctx, base + v).total) {
        s.converged = true;
        break;
      }
      if (++stalls >= opt.stall_limit)
        throw DivergenceError("Picard iteration is not contracting; step norms: " + trace_text(s.trace));
    } else {
      stalls = 0;
    }
  }
  s.correction = v;
  s.pair = base + v;
  finish(ctx, s);
  return s;
}

SwirlSolution newton_refine(const OperatorContext& ctx, const SwirlSolution& sol, const NewtonOptions& opt) {
  const ProfilePair base = kernel_combination(ctx, sol.beta);
  auto defect = [&](const ProfilePair& v) {
    ProfilePair f = project(ctx, right_inverse(ctx, forcing(ctx, base + v, opt.y_tol)));
    f += v;
    return f;
  };
  auto apply_k = [&](const ProfilePair& u, const ProfilePair& d) {
    ProfilePair xi = op_Q(ctx, u, d) + op_Q(ctx, d, u);
    enforce_y(ctx, xi, opt.y_tol);
    return project(ctx, right_inverse(ctx, xi));
  };

  SwirlSolution s = sol;
  ProfilePair v = sol.correction;
  ProfilePair f = defect(v);
  double fn = norm_X(ctx, f).total;
  for (int step = 0; step < opt.max_steps && fn > opt.tol; ++step) {
    const ProfilePair u = base + v;
    ProfilePair rhs = f;
    rhs *= -1.0;
    ProfilePair d = rhs;
    for (int j = 0; j < opt.inner_max; ++j) {
      ProfilePair next = rhs - apply_k(u, d);
      const double change = norm_X(ctx, next - d).total;
      d = std::move(next);
      if (change < opt.inner_tol) break;
    }
    ProfilePair trial = v + d;
    ProfilePair ft = defect(trial);
    const double ftn = norm_X(ctx, ft).total;
    if (!(ftn < fn)) break;
    v = std::move(trial);
    f = std::move(ft);
    fn = ftn;
    s.trace.push_back(fn);
    ++s.iterations;
  }
  s.correction = v;
  s.pair = base + v;
  s.converged = sol.converged || fn <= opt.tol;
  finish(ctx, s);
  return s;
}

ProfilePair mirror(const ProfilePair& p) {
  ProfilePair out = p;
  const int n = p.theta.size();
  for (int i = 0; i < n; ++i) {
    out.theta[i] = -p.theta[n - 1 - i];
    out.phi[i] = p.phi[n - 1 - i];
  }
  auto neg = [](const std::optional<double>& v) { return v ? std::optional<double>(-*v) : std::nullopt; };
  out.theta.left_limit = neg(p.theta.right_limit);
  out.theta.right_limit = neg(p.theta.left_limit);
  out.phi.left_limit = p.phi.right_limit;
  out.phi.right_limit = p.phi.left_limit;
  return out;
}

std::vector<DerivativeCheck> beta_derivative_check(const OperatorContext& ctx, std::vector<double> h) {
  SolveOptions opt;
  opt.tol = 1e-12;
  opt.stall_limit = 6;
  std::vector<DerivativeCheck> out;
  for (int slot : {2, 3}) {
    DerivativeCheck dc;
    dc.direction = slot_kernel(ctx.variant(), slot);
    dc.h = h;
    const ProfilePair& target = ctx.kernel(dc.direction);
    std::vector<ProfilePair> quotients;
    for (double step : h) {
      Beta plus{}, minus{};
      plus[slot] = step;
      minus[slot] = -step;
      ProfilePair q = picard_solve(ctx, plus, opt).pair - picard_solve(ctx, minus, opt).pair;
      q *= 0.5 / step;
      dc.error.push_back(norm_X(ctx, q - target).total);
      quotients.push_back(std::move(q));
    }
    dc.exact_family = std::all_of(dc.error.begin(), dc.error.end(), [](double e) { return e < 1e-12; });
    if (!dc.exact_family) {
      for (std::size_t i = 1; i < dc.error.size(); ++i)
        dc.order.push_back(std::log2(dc.error[i - 1] / dc.error[i]) / std::log2(h[i - 1] / h[i]));
    }
    if (quotients.size() >= 2) {
      const std::size_t m = quotients.size();
      const double r = h[m - 2] / h[m - 1];
      const double w = r * r;
      ProfilePair lim = (w / (w - 1.0)) * quotients[m - 1] - (1.0 / (w - 1.0)) * quotients[m - 2];
      dc.limit_error = norm_X(ctx, lim - target).total;
    } else if (!dc.error.empty()) {
      dc.limit_error = dc.error.back();
    }
    out.push_back(std::move(dc));
  }
  return out;
}

RigidityReport rigidity_probe(const OperatorContext& ctx, const Beta& beta, const SolveOptions& opt) {
  RigidityReport r;
  r.beta = beta;
  try {
    const SwirlSolution s = picard_solve(ctx, beta, opt);
    r.trace = s.trace;
    r.contracted = s.converged;
    r.residual_y = s.residual_y;
    const double c = s.pair.phi.at_center();
    for (int i = 0; i < s.pair.phi.size(); ++i)
      r.phi_variation = std::max(r.phi_variation, std::fabs(s.pair.phi[i] - c));
    r.collapsed = r.contracted && r.phi_variation < 1e-8;
    r.note = !r.contracted ? "iteration limit reached" : r.collapsed ? "swirl collapsed to a constant" : "converged with nonconstant swirl";
  } catch (const Error& e) {
    r.note = e.what();
  }
  return r;
}

nlohmann::json to_json(const SwirlSolution& s, bool with_profiles) {
  nlohmann::json j{{"c", {s.c.c1, s.c.c2, s.c.c3}},
                   {"gamma", s.gamma},
                   {"variant", to_string(s.variant)},
                   {"beta", s.beta},
                   {"chat", {s.chat.c1, s.chat.c2, s.chat.c3}},
                   {"residual_Y", s.residual_y},
                   {"iterations", s.iterations},
                   {"converged", s.converged},
                   {"trace", s.trace}};
  if (with_profiles) {
    const Mesh& m = *s.pair.theta.mesh();
    j["x"] = m.x();
    j["u_theta"] = s.pair.theta.values();
    j["u_phi"] = s.pair.phi.values();
    j["v_theta"] = s.correction.theta.values();
    j["v_phi"] = s.correction.phi.values();
  }
  return j;
}

nlohmann::json to_json(const DerivativeCheck& d) {
  return {{"direction", to_string(d.direction)}, {"h", d.h},           {"error", d.error},
          {"order", d.order},                   {"limit_error", d.limit_error},
          {"exact_family", d.exact_family}};
}

nlohmann::json to_json(const RigidityReport& r) {
  return {{"beta", r.beta},           {"contracted", r.contracted}, {"collapsed", r.collapsed},
          {"phi_variation", r.phi_variation}, {"residual_Y", r.residual_y}, {"trace", r.trace},
          {"note", r.note}};
}

nlohmann::json to_json(const NormReport& r) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : r.terms) terms.push_back({{"name", t.name}, {"value", t.value}});
  return {{"terms", terms}, {"total", r.total}, {"infinite", r.infinite}};
}

}  // namespace homax
