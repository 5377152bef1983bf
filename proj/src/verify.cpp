#include "homax/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <functional>
#include <ostream>
#include <random>
#include <sstream>

#include "homax/atlas.hpp"
#include "homax/errors.hpp"
#include "homax/fields.hpp"
#include "homax/simd/kernels.hpp"
#include "homax/swirl.hpp"

namespace homax {

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

class Rng {
 public:
  Rng(std::uint64_t seed, int stream) : e_(seed * 1000003ULL + static_cast<std::uint64_t>(stream)) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(e_); }

 private:
  std::mt19937_64 e_;
};

struct Env {
  const RunConfig& cfg;
  MeshPtr mesh;
  explicit Env(const RunConfig& c) : cfg(c), mesh(Mesh::build(c.mesh_n, c.mesh_grading)) {}
  OperatorContext context(const CTriple& c, double gamma, const OperatorOptions& oo = {}) const {
    const GammaBounds b = gamma_bounds(c, cfg.riccati);
    return make_context(mesh, c, gamma, oo, cfg.riccati, &b);
  }
};

CheckResult result(std::string key, std::string title, bool ok, std::string detail) {
  return {std::move(key), std::move(title), ok, std::move(detail)};
}

double sup_abs(const GridFunction& f) {
  double e = 0.0;
  for (int i = 0; i < f.size(); ++i) e = std::max(e, std::fabs(f[i]));
  return e;
}

int slot_of(KernelId id) {
  switch (id) {
    case KernelId::v1: return 0;
    case KernelId::v2:
    case KernelId::v2a:
    case KernelId::v2b: return 1;
    case KernelId::v3: return 2;
    case KernelId::v4: return 3;
  }
  return 0;
}

/// Smooth xi with xi_theta(+-1) = xi_theta''(0) = 0.
ProfilePair random_xi(const MeshPtr& mesh, Rng& g) {
  const double a0 = g.uniform(-1, 1), a1 = g.uniform(-1, 1), a3 = g.uniform(-1, 1);
  const double b0 = g.uniform(-1, 1), b1 = g.uniform(-1, 1), b2 = g.uniform(-1, 1);
  ProfilePair xi;
  xi.theta = GridFunction::sample(mesh, [&](const Node& q) {
    const double x = q.x;
    return q.one_minus_sq * (a0 + a1 * x + a0 * x * x + a3 * x * x * x);
  });
  xi.phi = GridFunction::sample(mesh, [&](const Node& q) { return b0 + b1 * q.x + b2 * q.x * q.x; });
  return xi;
}

ProfilePair random_pair(const MeshPtr& mesh, Rng& g) {
  const double a0 = g.uniform(-1, 1), a1 = g.uniform(-1, 1), a2 = g.uniform(-1, 1);
  const double b0 = g.uniform(-1, 1), b1 = g.uniform(-1, 1), b2 = g.uniform(-1, 1);
  ProfilePair v;
  v.theta = GridFunction::sample(mesh, [&](const Node& q) { return q.one_minus_sq * (a0 + a1 * q.x + a2 * q.x * q.x); });
  v.phi = GridFunction::sample(mesh, [&](const Node& q) { return b0 + b1 * q.x + b2 * q.one_minus_sq * q.x; });
  return v;
}

/// Contexts for the right-inverse variants W1, W2a, W2b, W3.
std::vector<OperatorContext> variant_contexts(const Env& env) {
  std::vector<OperatorContext> out;
  out.push_back(env.context({0, 0, 0}, -1.0));
  const GammaBounds ba = gamma_bounds({-0.9, 0, 0}, env.cfg.riccati);
  out.push_back(env.context({-0.9, 0, 0}, ba.plus));
  const GammaBounds bb = gamma_bounds({0, -0.9, 0}, env.cfg.riccati);
  out.push_back(env.context({0, -0.9, 0}, bb.minus));
  out.push_back(env.context({-0.9, -0.9, cbar3(-0.9, -0.9)}, cbar3_gamma(-0.9, -0.9)));
  return out;
}

std::vector<OperatorContext> stratum_contexts(const Env& env) {
  std::vector<OperatorContext> out;
  for (const auto& p : stratum_points(env.cfg.riccati)) out.push_back(env.context(p.c, p.gamma));
  return out;
}

// Criterion 1: c3 = cbar3 profiles are linear.
CheckResult criterion1(const Env& env) {
  Rng g(env.cfg.seed, 1);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double c1 = g.uniform(-1, 4), c2 = g.uniform(-1, 4);
    const CTriple c{c1, c2, cbar3(c1, c2)};
    const auto r = solve_riccati(env.mesh, c, cbar3_gamma(c1, c2), env.cfg.riccati);
    if (!std::holds_alternative<NoSwirlProfile>(r)) return result("C1", "closed-form boundary solution", false, fmt("blow-up at c = (%.6g, %.6g)", c1, c2));
    const auto& p = std::get<NoSwirlProfile>(r);
    const double a = 1 + std::sqrt(1 + c1), b = -1 - std::sqrt(1 + c2);
    for (int i = 0; i < p.ubar.size(); ++i) {
      const Node q = env.mesh->node(i);
      worst = std::max(worst, std::fabs(p.ubar[i] - (a * q.one_minus + b * q.one_plus)));
    }
  }
  return result("C1", "closed-form boundary solution", worst <= 1e-6,
                fmt("sup error %.3e over 10 random (c1, c2), tol 1e-6", worst));
}

// Criterion 2: Landau family.
CheckResult criterion2(const Env& env) {
  double res = 0.0, ends = 0.0, shape = 0.0;
  for (double a : {1.5, -1.5, 2.0, -2.0, 5.0, -5.0}) {
    const auto p = solve_profile(env.mesh, {0, 0, 0}, -2.0 / a, env.cfg.riccati);
    const GridFunction d = differentiate(p.ubar, 1);
    for (int i = 0; i < p.ubar.size(); ++i) {
      const Node q = env.mesh->node(i);
      const double u = p.ubar[i];
      res = std::max(res, std::fabs(q.one_minus_sq * d[i] + 2 * q.x * u + 0.5 * u * u));
      shape = std::max(shape, std::fabs(u - 2.0 * q.one_minus_sq / (q.x - a)));
    }
    const auto e = endpoint_data(p, env.cfg.riccati);
    ends = std::max({ends, std::fabs(e.left.raw), std::fabs(e.right.raw)});
  }
  return result("C2", "Landau family", res <= 1e-8 && ends <= 1e-4,
                fmt("Riccati residual %.3e (tol 1e-8), |U(+-1)| %.3e (tol 1e-4), closed-form error %.3e", res, ends, shape));
}

// Criterion 3: endpoint root identities and branch selection.
CheckResult criterion3(const Env& env) {
  Rng g(env.cfg.seed, 3);
  double ident = 0.0;
  int interior = 0, branch_ok = 0;
  for (int k = 0; k < 50; ++k) {
    const double c1 = g.uniform(-0.99, 3), c2 = g.uniform(-0.99, 3);
    const CTriple c{c1, c2, cbar3(c1, c2) + g.uniform(0.1, 3)};
    const auto b = gamma_bounds(c, env.cfg.riccati);
    const double gamma = b.minus + g.uniform(0.05, 0.95) * (b.plus - b.minus);
    const RegionLabel l = classify(c, gamma, env.cfg.riccati, &b);
    if (l.i_stratum && *l.i_stratum == std::make_pair(1, 1)) ++interior;
    const auto e = endpoint_data(solve_profile(env.mesh, c, gamma, env.cfg.riccati, &b), env.cfg.riccati);
    const double lv = e.left.raw, rv = e.right.raw;
    ident = std::max({ident, std::fabs(lv * lv - 4 * lv - 4 * c1), std::fabs(rv * rv + 4 * rv - 4 * c2)});
  }
  for (int k = 0; k < 10; ++k) {
    const double c1 = g.uniform(-0.9, 3), c2 = g.uniform(-0.9, 3);
    const CTriple c{c1, c2, cbar3(c1, c2) + g.uniform(0.2, 3)};
    const auto b = gamma_bounds(c, env.cfg.riccati);
    const bool plus = k % 2 == 0;
    const double gamma = plus ? b.plus : b.minus;
    const auto e = endpoint_data(solve_profile(env.mesh, c, gamma, env.cfg.riccati, &b), env.cfg.riccati);
    // gamma^+ puts the left end on the upper root; gamma^- the right end on the lower root.
    const double want_l = branch_left_value(c, plus), want_r = branch_right_value(c, !plus);
    const bool ok = e.left.value == want_l && e.right.value == want_r && std::fabs(e.left.raw - want_l) <= 1e-4 &&
                    std::fabs(e.right.raw - want_r) <= 1e-4;
    branch_ok += ok;
  }
  return result("C3", "endpoint root identities", ident <= 1e-4 && interior == 50 && branch_ok == 10,
                fmt("identity defect %.3e over 50 points in I_{1,1} (%d classified), tol 1e-4; branch %d/10", ident,
                    interior, branch_ok));
}

// Criterion 4: eta limits at c1 = -1.
CheckResult criterion4(const Env& env) {
  Rng g(env.cfg.seed, 4);
  double worst = 0.0;
  int selected = 0;
  const double fractions[5] = {0.25, 0.5, 0.75, 1.0, 1.0};
  for (double t : fractions) {
    const double c2 = g.uniform(-0.9, 2);
    const CTriple c{-1, c2, cbar3(-1, c2) + g.uniform(0.2, 2)};
    const auto b = gamma_bounds(c, env.cfg.riccati);
    const double gamma = t == 1.0 ? b.plus : b.minus + t * (b.plus - b.minus);
    const auto e = endpoint_data(solve_profile(env.mesh, c, gamma, env.cfg.riccati, &b), env.cfg.riccati);
    if (!e.eta1) return result("C4", "eta limits", false, "eta1 missing at c1 = -1");
    const double want = t == 1.0 ? 0.0 : 4.0;
    worst = std::max(worst, std::fabs(e.eta1->raw - want));
    selected += e.eta1->value == want;
  }
  return result("C4", "eta limits", worst <= 0.1 && selected == 5,
                fmt("max |eta1 - target| %.3e (tol 0.1), branch selected %d/5", worst, selected));
}

// Criterion 5: right inverse, kernel, functional matrix.
CheckResult criterion5(const Env& env) {
  Rng g(env.cfg.seed, 5);
  double inv = 0.0, ker = 0.0, tri = 0.0;
  bool finite = true;
  for (const auto& ctx : variant_contexts(env)) {
    for (int k = 0; k < 20; ++k) {
      const ProfilePair xi = random_xi(env.mesh, g);
      const ProfilePair w = right_inverse(ctx, xi);
      const NormReport r = norm_Y(ctx, op_L(ctx, ProfilePair::zero(env.mesh), w) - xi);
      finite = finite && !r.infinite;
      inv = std::max(inv, r.total / norm_Y(ctx, xi).total);
    }
    for (KernelId id : ctx.basis_ids()) {
      const NormReport r = norm_Y(ctx, op_A(ctx, ctx.kernel(id)));
      finite = finite && !r.infinite;
      ker = std::max(ker, r.total);
    }
    const auto ids = ctx.basis_ids();
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const Functionals f = functionals(ctx, ctx.kernel(ids[j]));
      std::vector<double> col;
      switch (ctx.variant()) {
        case Variant::w1: col = {f.l1, f.l2, f.l3, f.l4}; break;
        case Variant::w2a:
        case Variant::w2b: col = {f.l1, f.l3, f.l4}; break;
        case Variant::w3: col = {f.l3, f.l4}; break;
      }
      if (ids[j] == KernelId::v2a || ids[j] == KernelId::v2b) {
        const double s = col[0];
        for (double& v : col) v /= s;
      }
      for (std::size_t i = 0; i < col.size(); ++i) {
        if (i == j) tri = std::max(tri, std::fabs(col[i] - 1.0));
        if (i < j) tri = std::max(tri, std::fabs(col[i]));
      }
    }
  }
  return result("C5", "operator identities", finite && inv <= 1e-5 && ker <= 1e-6 && tri <= 1e-8,
                fmt("right inverse %.3e (tol 1e-5 rel), kernel %.3e (tol 1e-6), triangular defect %.3e (tol 1e-8)", inv,
                    ker, tri));
}

// Criterion 6: finite-difference linearisation slope.
CheckResult criterion6(const Env& env) {
  Rng g(env.cfg.seed, 6);
  const OperatorContext ctx = env.context({0, 0, 0}, -1.0);
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k < 5; ++k) {
    const ProfilePair u = random_pair(env.mesh, g), v = random_pair(env.mesh, g);
    const ProfilePair gu = op_G(ctx, u);
    std::vector<double> errs;
    for (double h : {1e-3, 1e-4, 1e-5}) {
      const ProfilePair uh = u + h * v;
      // Direction actually realised in floating point.
      ProfilePair vh = uh - u;
      vh *= 1.0 / h;
      ProfilePair fd = op_G(ctx, uh) - gu;
      fd *= 1.0 / h;
      errs.push_back(norm_Y(ctx, fd - op_L(ctx, u, vh)).total);
    }
    const double slope = std::log10(errs[0] / errs[2]) / 2.0;
    lo = std::min(lo, slope);
    hi = std::max(hi, slope);
  }
  return result("C6", "linearisation consistency", lo >= 0.8 && hi <= 1.2,
                fmt("slopes in [%.4f, %.4f] over 5 pairs, required 1.0 +- 0.2", lo, hi));
}

// Criterion 7: swirl existence at the stratum points.
CheckResult criterion7(const Env& env) {
  const auto pts = stratum_points(env.cfg.riccati);
  const auto ctxs = stratum_contexts(env);
  double res = 0.0, swirl = 1e300;
  int iters = 0, ok = 0;
  std::string failures;
  for (std::size_t k = 0; k < ctxs.size(); ++k) {
    try {
      const SwirlSolution s = picard_solve(ctxs[k], even_beta(ctxs[k], 1e-2), env.cfg.solve);
      const double phi = sup_abs(s.pair.phi);
      res = std::max(res, s.residual_y);
      iters = std::max(iters, s.iterations);
      swirl = std::min(swirl, phi);
      const bool good = s.converged && s.iterations <= 50 && s.residual_y <= 1e-7 && phi > 0.0;
      ok += good;
      if (!good) failures += " " + pts[k].name;
    } catch (const Error& e) {
      failures += " " + pts[k].name;
    }
  }
  return result("C7", "swirl existence", ok == static_cast<int>(ctxs.size()),
                fmt("%d/%zu converged; max iterations %d (limit 50), max residual %.3e (tol 1e-7), min sup|U_phi| %.3e%s%s",
                    ok, ctxs.size(), iters, res, swirl, failures.empty() ? "" : "; failed:", failures.c_str()));
}

// Criterion 8: tangency to V3 and V4.
CheckResult criterion8(const Env& env) {
  double order = 1e9, limit = 0.0;
  bool exact4 = true;
  for (const auto& ctx : stratum_contexts(env)) {
    for (const auto& d : beta_derivative_check(ctx)) {
      limit = std::max(limit, d.limit_error);
      if (d.direction == KernelId::v3) {
        if (d.exact_family) continue;
        for (double o : d.order) order = std::min(order, o);
      } else {
        exact4 = exact4 && (d.exact_family || std::all_of(d.order.begin(), d.order.end(), [](double o) { return o >= 1.8; }));
      }
    }
  }
  return result("C8", "tangency", order >= 1.8 && limit <= 1e-4 && exact4,
                fmt("min V3 order %.3f (>= 1.8), max limit error %.3e (tol 1e-4), V4 %s", order, limit,
                    exact4 ? "exact family" : "order below 1.8"));
}

// Criterion 9: quadratic correction.
CheckResult criterion9(const Env& env) {
  const std::vector<double> betas{1e-3, std::pow(10.0, -2.5), 1e-2, std::pow(10.0, -1.5)};
  double worst = 1e9;
  for (const auto& ctx : stratum_contexts(env)) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double b : betas) {
      const SwirlSolution s = picard_solve(ctx, {0, 0, b, 0}, env.cfg.solve);
      const double x = std::log(b), y = std::log(norm_X(ctx, s.correction).total);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(betas.size());
    worst = std::min(worst, (n * sxy - sx * sy) / (n * sxx - sx * sx));
  }
  return result("C9", "quadratic correction", worst >= 1.9,
                fmt("min log-log slope %.4f over 8 stratum points, beta3 in [1e-3, 10^-1.5] (>= 1.9)", worst));
}

// Criterion 10: symmetry transport.
CheckResult criterion10(const Env& env) {
  Rng g(env.cfg.seed, 10);
  constexpr double floor = 1e-12;
  std::vector<std::pair<CTriple, double>> pts;
  for (const auto& p : stratum_points(env.cfg.riccati)) pts.push_back({p.c, p.gamma});
  for (int k = 0; k < 5; ++k) {
    const CTriple c{g.uniform(-0.8, 1.0), g.uniform(-0.8, 1.0), g.uniform(0.0, 1.0)};
    const auto b = gamma_bounds(c, env.cfg.riccati);
    pts.push_back({c, b.minus + g.uniform(0.2, 0.8) * (b.plus - b.minus)});
  }
  double ratio = 0.0;
  for (const auto& [c, gamma] : pts) {
    const OperatorContext a = env.context(c, gamma);
    const OperatorContext m = env.context(c.mirrored(), -gamma);
    const double b3 = g.uniform(-0.01, 0.01);
    const SwirlSolution s = picard_solve(a, {0, 0, b3, 0}, env.cfg.solve);
    const double mapped = residual_y(m, mirror(s.pair));
    ratio = std::max(ratio, std::max(mapped, floor) / std::max(s.residual_y, floor));
  }
  return result("C10", "symmetry transport", ratio <= 10.0,
                fmt("max residual ratio %.3f over %zu points (<= 10, residuals floored at 1e-12)", ratio, pts.size()));
}

// Criterion 11: constant swirl family.
CheckResult criterion11(const Env& env) {
  double res = 0.0;
  std::vector<OperatorContext> ctxs = stratum_contexts(env);
  const GammaBounds b = gamma_bounds({0, 0, 0}, env.cfg.riccati);
  OperatorOptions oo;
  oo.allow_unassigned = true;
  ctxs.push_back(make_context(env.mesh, {0, 0, 0}, b.plus, oo, env.cfg.riccati, &b));
  for (const auto& ctx : ctxs)
    for (double b4 : {0.01, 0.05, -0.08}) res = std::max(res, picard_solve(ctx, {0, 0, 0, b4}, env.cfg.solve).residual_y);
  return result("C11", "rigidity form", res <= 1e-10,
                fmt("max residual %.3e over %zu points x 3 constants (tol 1e-10)", res, ctxs.size()));
}

CheckResult invariant_simd(const Env& env) {
  Rng g(env.cfg.seed, 101);
  const auto& ref = simd::scalar_kernels();
  int mismatches = 0;
  std::string names;
  for (simd::Isa isa : simd::available_isas()) {
    names += std::string(names.empty() ? "" : ",") + std::string(simd::isa_name(isa));
    const auto& k = simd::kernels_for(isa);
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t n = 100 + static_cast<std::size_t>(rep) * 17;
      const int width = 9;
      std::vector<double> f(n + width), w(n * width), a(n), b(n);
      for (auto& v : f) v = g.uniform(-1, 1);
      for (auto& v : w) v = g.uniform(-1, 1);
      std::vector<int> start(n);
      for (std::size_t i = 0; i < n; ++i) start[i] = static_cast<int>(i);
      ref.banded_apply(n, width, w.data(), start.data(), f.data(), a.data());
      k.banded_apply(n, width, w.data(), start.data(), f.data(), b.data());
      for (std::size_t i = 0; i < n; ++i) mismatches += a[i] != b[i];
    }
  }
  return result("I-simd", "SIMD variants match scalar", mismatches == 0,
                fmt("%d mismatching outputs across %s", mismatches, names.c_str()));
}

CheckResult invariant_mirror_profiles(const Env& env) {
  Rng g(env.cfg.seed, 102);
  double worst = 0.0;
  const int n = env.mesh->size();
  for (int k = 0; k < 5; ++k) {
    const CTriple c{g.uniform(-0.9, 2), g.uniform(-0.9, 2), 0};
    const CTriple cc{c.c1, c.c2, std::max(0.0, cbar3(c.c1, c.c2) + 0.5)};
    const auto b = gamma_bounds(cc, env.cfg.riccati);
    const double gamma = 0.5 * (b.minus + b.plus) + 0.2 * (b.plus - b.minus) * g.uniform(-1, 1);
    const auto p = solve_profile(env.mesh, cc, gamma, env.cfg.riccati, &b);
    const auto q = solve_profile(env.mesh, cc.mirrored(), -gamma, env.cfg.riccati);
    for (int i = 0; i < n; ++i) worst = std::max(worst, std::fabs(p.ubar[i] + q.ubar[n - 1 - i]));
  }
  return result("I-mirror", "no-swirl mirror symmetry", worst <= 1e-10, fmt("max defect %.3e (tol 1e-10)", worst));
}

CheckResult invariant_reduced(const Env& env) {
  const OperatorContext ctx = env.context({0, 0, 0}, -1.0);
  SolveOptions opt = env.cfg.solve;
  opt.tol = std::min(opt.tol, 1e-12);
  const SwirlSolution s = picard_solve(ctx, {0, 0, 0.02, 0.01}, opt);
  const ReducedResidual r = reduced_residual(total_profile(ctx.profile(), s.pair), s.chat);
  const double worst = std::max(r.theta, r.phi);
  return result("I-reduced", "solution satisfies the reduced system", worst <= 1e-6,
                fmt("theta %.3e, phi %.3e (tol 1e-6 = 10x Y tolerance)", r.theta, r.phi));
}

CheckResult invariant_pressure(const Env& env) {
  const OperatorContext ctx = env.context({0, 0, 0}, -1.0);
  const SwirlSolution s = picard_solve(ctx, {0, 0, 0.02, 0.01}, env.cfg.solve);
  const ProfilePair u = total_profile(ctx.profile(), s.pair);
  const SphericalField f = reconstruct(u);
  const std::vector<double> q = pressure_angular(u);
  double d = 0.0;
  for (std::size_t k = 0; k < f.theta.size(); ++k)
    if (std::fabs(std::cos(f.theta[k])) < 0.5) d = std::max(d, std::fabs(f.p[k] - q[k]));
  return result("I-pressure", "pressure gauge", d < 1e-8, fmt("max change %.3e for |cos theta| < 1/2 (tol 1e-8)", d));
}

CheckResult invariant_homogeneity(const Env& env) {
  const OperatorContext ctx = env.context({0, 0, 0}, -1.0);
  const SphericalField f = reconstruct(total_profile(ctx.profile(), ctx.kernel(KernelId::v3)));
  std::ostringstream os;
  write_point_cloud(f, {0.75, 1.5}, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(std::move(row));
  }
  const std::size_t n = f.theta.size();
  int bad = rows.size() == 2 * n ? 0 : 1;
  for (std::size_t k = 0; bad == 0 && k < n; ++k) {
    const auto& a = rows[k];
    const auto& b = rows[n + k];
    bad += b[2] != a[2] / 2 || b[3] != a[3] / 2 || b[4] != a[4] / 2 || b[5] != a[5] / 4;
  }
  return result("I-homogeneity", "point cloud scaling", bad == 0, fmt("%d rows off exact scaling", bad));
}

CheckResult invariant_roundtrip(const Env& env) {
  const nlohmann::json cj = to_json(env.cfg);
  const bool cfg_ok = to_json(config_from_json(nlohmann::json::parse(cj.dump()))) == cj;
  AtlasRecord r;
  r.c = {-0.3, 0.7, 1.0 / 3.0};
  const GammaBounds b = gamma_bounds(r.c, env.cfg.riccati);
  r.bounds = b;
  r.gamma = b.minus + (b.plus - b.minus) / 7.0;
  r.beta = {0, 0, 0.1 / 3.0, -1e-3 / 7.0};
  r.label = classify(r.c, r.gamma, env.cfg.riccati, &b);
  r.endpoints = endpoint_data(solve_profile(env.mesh, r.c, r.gamma, env.cfg.riccati, &b), env.cfg.riccati);
  r.solution = SolveSummary{true, 1.0 / 3.0 * 1e-13, 4, ""};
  const bool atlas_ok = atlas_record_from_json(nlohmann::json::parse(to_json(r).dump())) == r;
  return result("I-roundtrip", "config and atlas round-trip", cfg_ok && atlas_ok,
                fmt("config %s, atlas record %s", cfg_ok ? "exact" : "differs", atlas_ok ? "exact" : "differs"));
}

}  // namespace

std::vector<StratumPoint> stratum_points(const RiccatiOptions& opt) {
  auto mid = [&](const CTriple& c) {
    const auto b = gamma_bounds(c, opt);
    return 0.5 * (b.minus + b.plus);
  };
  const CTriple c12{-0.9, 0, 0}, c13{0, -0.9, 0}, c23{-1, -0.9, 0};
  return {
      {"I_{1,1}", {0, 0, 0}, -1.0},
      {"I_{1,2}", c12, gamma_bounds(c12, opt).plus},
      {"I_{1,3}", c13, gamma_bounds(c13, opt).minus},
      {"I_{2,1}", {-1, 0, 0}, mid({-1, 0, 0})},
      {"I_{2,3}", c23, gamma_bounds(c23, opt).minus},
      {"I_{3,1}", {0, -1, 0}, mid({0, -1, 0})},
      {"I_{4,1}", {-1, -1, 1}, mid({-1, -1, 1})},
      {"I_{5,.}", {-0.9, -0.9, cbar3(-0.9, -0.9)}, cbar3_gamma(-0.9, -0.9)},
  };
}

Beta even_beta(const OperatorContext& ctx, double size) {
  Beta b{};
  const auto& ids = ctx.basis_ids();
  const double each = size / std::sqrt(static_cast<double>(ids.size()));
  for (KernelId id : ids) b[slot_of(id)] = each;
  return b;
}

CheckResult run_criterion(int id, const RunConfig& cfg) {
  validate(cfg);
  const Env env(cfg);
  static const char* titles[] = {"",
                                 "closed-form boundary solution",
                                 "Landau family",
                                 "endpoint root identities",
                                 "eta limits",
                                 "operator identities",
                                 "linearisation consistency",
                                 "swirl existence",
                                 "tangency",
                                 "quadratic correction",
                                 "symmetry transport",
                                 "rigidity form"};
  if (id < 1 || id > 11) throw ParameterError("criterion id must lie in 1..11");
  using Fn = CheckResult (*)(const Env&);
  static const Fn fns[] = {nullptr,     criterion1, criterion2, criterion3, criterion4,  criterion5,
                           criterion6,  criterion7, criterion8, criterion9, criterion10, criterion11};
  try {
    return fns[id](env);
  } catch (const Error& e) {
    return result("C" + std::to_string(id), titles[id], false, std::string("error: ") + e.what());
  }
}

std::vector<CheckResult> run_invariants(const RunConfig& cfg) {
  validate(cfg);
  const Env env(cfg);
  std::vector<CheckResult> out;
  using Fn = CheckResult (*)(const Env&);
  const std::pair<const char*, Fn> checks[] = {{"I-simd", invariant_simd},
                                               {"I-mirror", invariant_mirror_profiles},
                                               {"I-reduced", invariant_reduced},
                                               {"I-pressure", invariant_pressure},
                                               {"I-homogeneity", invariant_homogeneity},
                                               {"I-roundtrip", invariant_roundtrip}};
  for (const auto& [key, fn] : checks) {
    try {
      out.push_back(fn(env));
    } catch (const Error& e) {
      out.push_back(result(key, key, false, std::string("error: ") + e.what()));
    }
  }
  return out;
}

std::vector<CheckResult> run_verify(const RunConfig& cfg) {
  std::vector<CheckResult> out;
  for (int id = 1; id <= 11; ++id) out.push_back(run_criterion(id, cfg));
  for (auto& r : run_invariants(cfg)) out.push_back(std::move(r));
  return out;
}

void write_report(const std::vector<CheckResult>& results, const RunConfig& cfg, std::ostream& os) {
  os << fmt("homax verify: seed %llu, mesh n = %d, grading %g, kernels %s\n",
            static_cast<unsigned long long>(cfg.seed), cfg.mesh_n, cfg.mesh_grading,
            std::string(simd::isa_name(simd::active_kernels().isa)).c_str());
  int passed = 0;
  for (const auto& r : results) {
    passed += r.passed;
    os << fmt("%-4s  %-13s %-40s %s\n", r.passed ? "PASS" : "FAIL", r.key.c_str(), r.title.c_str(), r.detail.c_str());
  }
  os << fmt("%d/%zu checks passed\n", passed, results.size());
}

}  // namespace homax
