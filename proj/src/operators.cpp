#include "homax/operators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "homax/errors.hpp"
#include "homax/simd/kernels.hpp"

namespace homax {

ProfilePair& ProfilePair::operator+=(const ProfilePair& o) {
  theta += o.theta;
  phi += o.phi;
  return *this;
}

ProfilePair& ProfilePair::operator-=(const ProfilePair& o) {
  theta -= o.theta;
  phi -= o.phi;
  return *this;
}

ProfilePair& ProfilePair::operator*=(double s) {
  theta *= s;
  phi *= s;
  return *this;
}

ProfilePair operator+(const ProfilePair& a, const ProfilePair& b) {
  return {a.theta + b.theta, a.phi + b.phi};
}

ProfilePair operator-(const ProfilePair& a, const ProfilePair& b) {
  return {a.theta - b.theta, a.phi - b.phi};
}

ProfilePair operator*(double s, const ProfilePair& a) { return {s * a.theta, s * a.phi}; }

std::string to_string(KernelId id) {
  switch (id) {
    case KernelId::v1: return "V1";
    case KernelId::v2: return "V2";
    case KernelId::v2a: return "V2a";
    case KernelId::v2b: return "V2b";
    case KernelId::v3: return "V3";
    case KernelId::v4: return "V4";
  }
  return "V?";
}

namespace {

GridFunction map(const GridFunction& f, double (*fn)(double)) {
  GridFunction out = f;
  for (double& v : out.values()) v = fn(v);
  out.left_limit.reset();
  out.right_limit.reset();
  return out;
}

double stencil_at(const GridFunction& f, int order, int i) {
  const Band& b = f.mesh()->diff(order);
  return simd::dot2(b.width, b.rows, b.w.data() + i, f.values().data() + b.start[i]);
}

double d_at0(const GridFunction& f, int order) { return stencil_at(f, order, f.mesh()->center()); }

// (U V)''(0) by the product rule.
double product_ddot0(const GridFunction& u, const GridFunction& v) {
  const double u0 = u.at_center(), v0 = v.at_center();
  return d_at0(u, 2) * v0 + 2.0 * d_at0(u, 1) * d_at0(v, 1) + u0 * d_at0(v, 2);
}

bool log_left(const NoSwirlProfile& p) { return p.c.c1 == -1.0 && !p.anchored_left; }
bool log_right(const NoSwirlProfile& p) { return p.c.c2 == -1.0 && !p.anchored_right; }

}  // namespace

PsiResult psi(const GridFunction& u_phi, const GridFunction& v_phi) {
  const GridFunction dv = differentiate(v_phi, 1);
  GridFunction integrand = u_phi * dv;
  integrand *= 2.0;
  const GridFunction p2 = cumulative_log_singular(integrand, 0.0);
  const GridFunction p1 = cumulative_integral(p2, 0.0);
  PsiResult r;
  r.psi = cumulative_integral(p1, 0.0);
  r.from_left = cumulative_integral(p1, -1.0);
  r.from_right = cumulative_integral(p1, 1.0);
  r.at_left = -r.from_left.at_center();
  r.at_right = -r.from_right.at_center();
  r.psi.left_limit = r.at_left;
  r.psi.right_limit = r.at_right;
  return r;
}

AB compute_ab(const NoSwirlProfile& p) {
  const MeshPtr& mesh = p.mesh();
  AB r;
  r.b = cumulative_log_singular(p.ubar, 0.0);
  r.a = r.b;
  for (int i = 0; i < mesh->size(); ++i) r.a[i] -= std::log(mesh->one_minus_sq()[i]);
  return r;
}

std::optional<double> epsilon_lower_bound(CaseTag tag, double u_left, double u_right) {
  const double left = (u_left < 2.0) ? u_left / 4.0 : u_left / 2.0 - 1.0;
  const double right = (u_right > -2.0) ? -u_right / 4.0 : -u_right / 2.0 - 1.0;
  double lb = 0.0;
  switch (tag) {
    case CaseTag::case1: lb = std::max({0.0, left, right}); break;
    case CaseTag::case2: lb = std::max(0.0, right); break;
    case CaseTag::case2_prime: lb = std::max(0.0, left); break;
    case CaseTag::case3: lb = 0.0; break;
    default: return std::nullopt;
  }
  if (lb >= 0.5) return std::nullopt;
  return lb;
}

double choose_epsilon(CaseTag tag, double u_left, double u_right, double margin) {
  const auto lb = epsilon_lower_bound(tag, u_left, u_right);
  if (!lb) throw RegionError("no admissible epsilon for " + to_string(tag));
  if (*lb + margin <= 0.5 - margin) return *lb + margin;
  return 0.5 * (*lb + 0.5);
}

OperatorContext::OperatorContext(NoSwirlProfile profile, RegionLabel label, OperatorOptions opt)
    : profile_(std::move(profile)), label_(std::move(label)) {
  const MeshPtr& mesh = profile_.mesh();
  const Mesh& m = *mesh;
  const int n = m.size();
  tag_ = label_.case_tag;
  CaseTag norm_tag = tag_;
  if (label_.variant) {
    variant_ = *label_.variant;
  } else if (opt.allow_unassigned) {
    variant_ = label_.at_gamma_plus ? Variant::w2a : label_.at_gamma_minus ? Variant::w2b : Variant::w1;
    norm_tag = CaseTag::case1;
  } else {
    throw RegionError("point lies outside every I_{k,l}; operators are not defined (" +
                      to_string(tag_) + ")");
  }
  const double ul = branch_left_value(profile_.c, profile_.anchored_left);
  const double ur = branch_right_value(profile_.c, profile_.anchored_right);
  if (opt.epsilon) {
    epsilon_ = *opt.epsilon;
  } else if (norm_tag == tag_) {
    epsilon_ = choose_epsilon(norm_tag, ul, ur, opt.epsilon_margin);
  } else {
    const auto lb = epsilon_lower_bound(norm_tag, ul, ur);
    epsilon_ = lb ? choose_epsilon(norm_tag, ul, ur, opt.epsilon_margin) : 0.5 - opt.epsilon_margin;
  }
  left_model_ = log_left(profile_) ? LimitModel::log : LimitModel::power;
  right_model_ = log_right(profile_) ? LimitModel::log : LimitModel::power;

  AB ab = compute_ab(profile_);
  a_ = std::move(ab.a);
  b_ = std::move(ab.b);
  exp_a_ = map(a_, [](double v) { return std::exp(v); });
  exp_ma_ = map(a_, [](double v) { return std::exp(-v); });
  exp_b_ = map(b_, [](double v) { return std::exp(v); });
  exp_mb_ = map(b_, [](double v) { return std::exp(-v); });

  const GridFunction zero(mesh);
  auto one = GridFunction::sample(mesh, [](const Node&) { return 1.0; });
  one.left_limit = one.right_limit = 1.0;
  kernels_[0] = {exp_ma_, zero};
  kernels_[1] = {exp_ma_ * cumulative_integral(exp_a_, 0.0), zero};
  try {
    kernels_[2] = {exp_ma_ * cumulative_integral(exp_a_, -1.0), zero};
  } catch (const DivergenceError&) {
  }
  try {
    kernels_[3] = {exp_ma_ * cumulative_integral(exp_a_, 1.0), zero};
  } catch (const DivergenceError&) {
  }
  kernels_[4] = {zero, cumulative_integral(exp_mb_, 0.0)};
  kernels_[5] = {zero, one};

  switch (variant_) {
    case Variant::w1: basis_ = {KernelId::v1, KernelId::v2, KernelId::v3, KernelId::v4}; break;
    case Variant::w2a: basis_ = {KernelId::v2a, KernelId::v3, KernelId::v4}; break;
    case Variant::w2b: basis_ = {KernelId::v2b, KernelId::v3, KernelId::v4}; break;
    case Variant::w3: basis_ = {KernelId::v3, KernelId::v4}; break;
  }
  for (KernelId id : basis_) (void)kernel(id);

  // Norm weights. L+- = |ln((1 +- x)/3)|.
  const double e = epsilon_;
  xw_.assign(7, std::vector<double>(n));
  yw_.assign(4, std::vector<double>(n));
  for (int i = 0; i < n; ++i) {
    const double sp = m.one_plus()[i], sm = m.one_minus()[i], w = m.one_minus_sq()[i];
    const double lp = std::fabs(std::log(sp / 3.0)), lm = std::fabs(std::log(sm / 3.0));
    const double central = std::fabs(m.x()[i]) <= 0.5 ? 1.0 : 0.0;
    double w0 = 0, w1 = 0, y0 = 0;
    switch (norm_tag) {
      case CaseTag::case2:
        w0 = lp * std::pow(sm, -1.0 + 2.0 * e);
        w1 = sp * lp * lp * std::pow(sm, 2.0 * e);
        y0 = lp * lp * std::pow(sm, -1.0 + 2.0 * e);
        break;
      case CaseTag::case2_prime:
        w0 = lm * std::pow(sp, -1.0 + 2.0 * e);
        w1 = sm * lm * lm * std::pow(sp, 2.0 * e);
        y0 = lm * lm * std::pow(sp, -1.0 + 2.0 * e);
        break;
      case CaseTag::case3:
        w0 = lp * lm;
        w1 = w * lp * lp * lm * lm;
        y0 = lp * lp * lm * lm;
        break;
      default:
        w0 = std::pow(w, -1.0 + 2.0 * e);
        w1 = std::pow(w, 2.0 * e);
        y0 = w0;
        break;
    }
    xw_[0][i] = w0;
    xw_[1][i] = w1;
    xw_[2][i] = central;
    xw_[3][i] = central;
    xw_[4][i] = std::pow(w, e);
    xw_[5][i] = std::pow(w, 1.0 + e);
    xw_[6][i] = std::pow(w, 2.0 + e);
    yw_[0][i] = y0;
    yw_[1][i] = central;
    yw_[2][i] = central;
    yw_[3][i] = std::pow(w, 1.0 + e);
  }
}

OperatorContext make_context(const MeshPtr& mesh, const CTriple& c, double gamma,
                             const OperatorOptions& opt, const RiccatiOptions& ropt,
                             const GammaBounds* bounds) {
  const GammaBounds b = bounds ? *bounds : gamma_bounds(c, ropt);
  NoSwirlProfile p = solve_profile(mesh, c, gamma, ropt, &b);
  RegionLabel l = classify(c, gamma, ropt, &b);
  return OperatorContext(std::move(p), std::move(l), opt);
}

const ProfilePair& OperatorContext::kernel(KernelId id) const {
  const ProfilePair& k = kernels_[static_cast<int>(id)];
  if (k.theta.size() == 0)
    throw DivergenceError(to_string(id) + " is not defined here: its defining integral diverges");
  return k;
}

std::vector<ProfilePair> OperatorContext::basis() const {
  std::vector<ProfilePair> out;
  for (KernelId id : basis_) out.push_back(kernel(id));
  return out;
}

double l_ddot0(const OperatorContext& ctx, const GridFunction& u) {
  const NoSwirlProfile& p = ctx.profile();
  return d_at0(u, 3) + p.gamma * d_at0(u, 2) + 2.0 * (p.d1_at_0 + 1.0) * d_at0(u, 1) +
         p.d2_at_0 * u.at_center();
}

double varphi_ddot0(const OperatorContext& ctx, const GridFunction& u) {
  const double d1 = d_at0(u, 1);
  return l_ddot0(ctx, u) + d1 * d1 + u.at_center() * d_at0(u, 2);
}

ProfilePair op_A(const OperatorContext& ctx, const ProfilePair& u) {
  const Mesh& m = *ctx.mesh();
  const GridFunction& ubar = ctx.profile().ubar;
  const GridFunction dt = differentiate(u.theta, 1);
  const GridFunction dp = differentiate(u.phi, 1);
  const GridFunction dpp = differentiate(u.phi, 2);
  const double half_l2 = 0.5 * l_ddot0(ctx, u.theta);
  ProfilePair out = ProfilePair::zero(ctx.mesh());
  for (int i = 0; i < m.size(); ++i) {
    const double w = m.one_minus_sq()[i];
    out.theta[i] = w * dt[i] + (2.0 * m.x()[i] + ubar[i]) * u.theta[i] + half_l2 * w;
    out.phi[i] = w * dpp[i] + ubar[i] * dp[i];
  }
  return out;
}

ProfilePair op_Q(const OperatorContext& ctx, const ProfilePair& u, const ProfilePair& v) {
  const Mesh& m = *ctx.mesh();
  const PsiResult ps = psi(u.phi, v.phi);
  const double quarter = 0.25 * product_ddot0(u.theta, v.theta);
  const GridFunction dvp = differentiate(v.phi, 1);
  ProfilePair out = ProfilePair::zero(ctx.mesh());
  for (int i = 0; i < m.size(); ++i) {
    out.theta[i] = 0.5 * u.theta[i] * v.theta[i] + 0.5 * m.one_minus()[i] * ps.from_left[i] +
                   0.5 * m.one_plus()[i] * ps.from_right[i] + quarter * m.one_minus_sq()[i];
    out.phi[i] = u.theta[i] * dvp[i];
  }
  return out;
}

ProfilePair op_G(const OperatorContext& ctx, const ProfilePair& u) {
  return op_A(ctx, u) + op_Q(ctx, u, u);
}

ProfilePair op_L(const OperatorContext& ctx, const ProfilePair& base, const ProfilePair& dir) {
  return op_A(ctx, dir) + op_Q(ctx, base, dir) + op_Q(ctx, dir, base);
}

ProfilePair right_inverse(const OperatorContext& ctx, const ProfilePair& xi, Variant v) {
  const MeshPtr& mesh = ctx.mesh();
  const GridFunction ea_xi = ctx.exp_a() * xi.theta;
  ProfilePair out = ProfilePair::zero(mesh);
  switch (v) {
    case Variant::w1:
      out.theta = ctx.exp_minus_a() * cumulative_log_singular(ea_xi, 0.0);
      break;
    case Variant::w2a:
      out.theta = ctx.exp_minus_a() * cumulative_log_singular(ea_xi, -1.0);
      break;
    case Variant::w2b:
      out.theta = ctx.exp_minus_a() * cumulative_log_singular(ea_xi, 1.0);
      break;
    case Variant::w3: {
      const Limit num = log_singular_integral(ea_xi);
      const Limit den = integral(ctx.exp_a());
      if (num.divergent || den.divergent)
        throw DivergenceError("right inverse W3: weighted mean diverges");
      const double cw = num.value / den.value;
      const GridFunction f = cumulative_log_singular(ea_xi, -1.0);
      const GridFunction g = cumulative_integral(ctx.exp_a(), -1.0);
      out.theta = ctx.exp_minus_a() * combine(1.0, f, -cw, g);
      break;
    }
  }
  out.theta.left_limit.reset();
  out.theta.right_limit.reset();
  const GridFunction inner = cumulative_log_singular(ctx.exp_b() * xi.phi, 0.0);
  out.phi = cumulative_integral(ctx.exp_minus_b() * inner, 0.0);
  return out;
}

Functionals functionals(const OperatorContext& ctx, const ProfilePair& v) {
  Functionals f;
  f.l1 = v.theta.at_center();
  f.l2 = d_at0(v.theta, 1);
  f.l3 = d_at0(v.phi, 1);
  f.l4 = v.phi.at_center();
  const GridFunction d = differentiate(v.theta, 1);
  const Limit a = endpoint_limit(d, Side::left, ctx.left_model());
  const Limit b = endpoint_limit(d, Side::right, ctx.right_model());
  if (!a.divergent && std::isfinite(a.value)) f.l2a = a.value;
  if (!b.divergent && std::isfinite(b.value)) f.l2b = b.value;
  return f;
}

ProfilePair project(const OperatorContext& ctx, const ProfilePair& v, Variant variant) {
  const Functionals fv = functionals(ctx, v);
  const ProfilePair& v3 = ctx.kernel(KernelId::v3);
  const ProfilePair& v4 = ctx.kernel(KernelId::v4);
  ProfilePair out = v;
  out -= (fv.l3 / d_at0(v3.phi, 1)) * v3;
  out -= fv.l4 * v4;
  switch (variant) {
    case Variant::w1: {
      const ProfilePair& v1 = ctx.kernel(KernelId::v1);
      const ProfilePair& v2 = ctx.kernel(KernelId::v2);
      const double l1v1 = v1.theta.at_center();
      const double l2v1 = d_at0(v1.theta, 1);
      const double l2v2 = d_at0(v2.theta, 1);
      const double c1 = fv.l1 / l1v1;
      out -= c1 * v1;
      out -= ((fv.l2 - c1 * l2v1) / l2v2) * v2;
      break;
    }
    case Variant::w2a:
    case Variant::w2b: {
      const ProfilePair& k = ctx.kernel(variant == Variant::w2a ? KernelId::v2a : KernelId::v2b);
      out -= (fv.l1 / k.theta.at_center()) * k;
      break;
    }
    case Variant::w3: break;
  }
  return out;
}

namespace {

// Weighted sup with a growth test on the tail samples at both ends.
double weighted_sup(const std::vector<double>& w, const GridFunction& f, bool& infinite) {
  const std::size_t n = w.size();
  const double sup = simd::active_kernels().weighted_abs_max(n, w.data(), f.values().data());
  const Mesh& m = *f.mesh();
  const int stride = m.tail_stride();
  for (int side = 0; side < 2; ++side) {
    double prev = -1.0, prev_inc = 0.0;
    bool growing = true;
    int count = 0;
    for (int k = 6; k >= 0; --k) {
      const int i = side == 0 ? k * stride : m.size() - 1 - k * stride;
      const double v = std::fabs(w[i] * f[i]);
      if (prev >= 0.0) {
        const double inc = v - prev;
        if (!(inc > 0.0) || (count > 0 && inc < 0.999 * prev_inc)) growing = false;
        prev_inc = inc;
        ++count;
      }
      prev = v;
    }
    if (growing && prev > 1e-12 * std::max(1.0, sup)) infinite = true;
  }
  if (!std::isfinite(sup)) infinite = true;
  return sup;
}

NormReport assemble(const std::vector<std::vector<double>>& weights,
                    const std::vector<const GridFunction*>& fs, const std::vector<std::string>& names) {
  NormReport r;
  for (std::size_t k = 0; k < fs.size(); ++k) {
    bool inf = false;
    const double v = weighted_sup(weights[k], *fs[k], inf);
    r.terms.push_back({names[k], inf ? std::numeric_limits<double>::infinity() : v});
    r.infinite = r.infinite || inf;
    r.total += r.terms.back().value;
  }
  return r;
}

}  // namespace

NormReport norm_X(const OperatorContext& ctx, const ProfilePair& v) {
  const GridFunction t1 = differentiate(v.theta, 1);
  const GridFunction t2 = differentiate(v.theta, 2);
  const GridFunction t3 = differentiate(v.theta, 3);
  const GridFunction p1 = differentiate(v.phi, 1);
  const GridFunction p2 = differentiate(v.phi, 2);
  return assemble(ctx.x_weights(), {&v.theta, &t1, &t2, &t3, &v.phi, &p1, &p2},
                  {"theta", "theta'", "theta''(central)", "theta'''(central)", "phi", "phi'", "phi''"});
}

NormReport norm_Y(const OperatorContext& ctx, const ProfilePair& xi) {
  const GridFunction t1 = differentiate(xi.theta, 1);
  const GridFunction t2 = differentiate(xi.theta, 2);
  return assemble(ctx.y_weights(), {&xi.theta, &t1, &t2, &xi.phi},
                  {"theta", "theta'(central)", "theta''(central)", "phi"});
}

YMembership enforce_y(const OperatorContext& ctx, ProfilePair& xi, double tol) {
  YMembership r;
  const Limit l = endpoint_limit(xi.theta, Side::left, ctx.left_model());
  const Limit rr = endpoint_limit(xi.theta, Side::right, ctx.right_model());
  r.left = l.divergent ? std::numeric_limits<double>::infinity() : l.value;
  r.right = rr.divergent ? std::numeric_limits<double>::infinity() : rr.value;
  r.ddot0 = d_at0(xi.theta, 2);
  if (!(std::fabs(r.left) <= tol && std::fabs(r.right) <= tol && std::fabs(r.ddot0) <= tol)) {
    r.violated = true;
    return r;
  }
  const Mesh& m = *ctx.mesh();
  for (int i = 0; i < m.size(); ++i) {
    xi.theta[i] += -0.5 * r.left * m.one_minus()[i] - 0.5 * r.right * m.one_plus()[i] +
                   0.5 * r.ddot0 * m.one_minus_sq()[i];
  }
  xi.theta.left_limit = 0.0;
  xi.theta.right_limit = 0.0;
  r.corrected = true;
  return r;
}

CTriple chat(const OperatorContext& ctx, const ProfilePair& u) {
  const PsiResult ps = psi(u.phi, u.phi);
  const CTriple& c = ctx.profile().c;
  return {c.c1 + 0.5 * ps.at_left, c.c2 + 0.5 * ps.at_right, c.c3 - 0.5 * varphi_ddot0(ctx, u.theta)};
}

}  // namespace homax
