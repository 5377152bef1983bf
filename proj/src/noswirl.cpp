#include "homax/noswirl.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/numeric/odeint.hpp>

#include "homax/errors.hpp"

namespace homax {

namespace odeint = boost::numeric::odeint;

double cbar3(double c1, double c2) {
  const double a = std::sqrt(std::max(0.0, 1.0 + c1));
  const double b = std::sqrt(std::max(0.0, 1.0 + c2));
  return -0.5 * (a + b) * (a + b + 2.0);
}

double cbar3_gamma(double c1, double c2) {
  return std::sqrt(std::max(0.0, 1.0 + c1)) - std::sqrt(std::max(0.0, 1.0 + c2));
}

double branch_left_value(const CTriple& c, bool on_upper_root) {
  const double r = 2.0 * std::sqrt(std::max(0.0, 1.0 + c.c1));
  return on_upper_root ? 2.0 + r : 2.0 - r;
}

double branch_right_value(const CTriple& c, bool on_lower_root) {
  const double r = 2.0 * std::sqrt(std::max(0.0, 1.0 + c.c2));
  return on_lower_root ? -2.0 - r : -2.0 + r;
}

CTriple admissible_c(const CTriple& c, const RiccatiOptions& opt) {
  if (!std::isfinite(c.c1) || !std::isfinite(c.c2) || !std::isfinite(c.c3))
    throw ParameterError("c must be finite");
  CTriple out = c;
  if (out.c1 < -1.0 - opt.c_snap || out.c2 < -1.0 - opt.c_snap)
    throw RegionError("c1 and c2 must be >= -1");
  if (std::fabs(out.c1 + 1.0) <= opt.c_snap) out.c1 = -1.0;
  if (std::fabs(out.c2 + 1.0) <= opt.c_snap) out.c2 = -1.0;
  const double lb = cbar3(out.c1, out.c2);
  if (out.c3 < lb - opt.cbar3_snap) throw RegionError("c3 must be >= cbar3(c1, c2)");
  if (std::fabs(out.c3 - lb) <= opt.cbar3_snap) out.c3 = lb;
  return out;
}

namespace {

using State = std::array<double, 1>;

struct BlowUpSignal {
  double u;
};

struct Rhs {
  CTriple c;
  double guard;
  void operator()(const State& y, State& dy, double u) const {
    if (!(std::fabs(y[0]) <= guard)) throw BlowUpSignal{u};
    const double e = std::exp(2.0 * u);
    const double sm = 2.0 / (1.0 + e);
    const double sp = 2.0 / (1.0 + 1.0 / e);
    const double x = std::tanh(u);
    dy[0] = c.p(sm, sp) - 2.0 * x * y[0] - 0.5 * y[0] * y[0];
  }
};

struct RunResult {
  bool blew_up = false;
  double u_blow = 0.0;
  double final_value = 0.0;
};

// Integrates through `times` (times[0] is the start); out[k] receives U(times[k]).
RunResult run(const CTriple& c, double y0, const std::vector<double>& times,
              std::vector<double>* out, const RiccatiOptions& opt) {
  RunResult r;
  State y{y0};
  if (out) out->assign(times.size(), std::numeric_limits<double>::quiet_NaN());
  std::size_t k = 0;
  auto observer = [&](const State& s, double) {
    if (out && k < out->size()) (*out)[k] = s[0];
    ++k;
  };
  const double dt = (times.back() > times.front()) ? 1e-3 : -1e-3;
  auto stepper = odeint::make_controlled(opt.atol, opt.rtol,
                                         odeint::runge_kutta_fehlberg78<State>());
  try {
    odeint::integrate_times(stepper, Rhs{c, opt.blowup_guard}, y, times.begin(), times.end(), dt,
                            observer);
  } catch (const BlowUpSignal& b) {
    r.blew_up = true;
    r.u_blow = b.u;
    return r;
  }
  r.final_value = y[0];
  return r;
}

std::vector<double> probe_times(double from, double to) {
  std::vector<double> t{from};
  const double step = (to > from) ? 1.0 : -1.0;
  for (double u = from + step; (to - u) * step > 0; u += step) t.push_back(u);
  t.push_back(to);
  return t;
}

double upper_root_left(const CTriple& c) { return branch_left_value(c, true); }

// Left half x <= 0 integrated from U(0) = gamma; checks the terminal state past the mesh.
RunResult left_generic(const CTriple& c, double gamma, const Mesh* mesh, std::vector<double>* vals,
                       const RiccatiOptions& opt) {
  std::vector<double> times;
  if (mesh) {
    for (int i = mesh->center(); i >= 0; --i) times.push_back(mesh->u()[i]);
    const double last = times.back();
    for (double u = std::ceil(last) - 1.0; u > -opt.u_stop; u -= 1.0) times.push_back(u);
    times.push_back(-opt.u_stop);
  } else {
    times = probe_times(0.0, -opt.u_stop);
  }
  std::vector<double> all;
  RunResult r = run(c, gamma, times, vals ? &all : nullptr, opt);
  if (!r.blew_up && r.final_value > upper_root_left(c)) {
    r.blew_up = true;
    r.u_blow = -opt.u_stop;
  }
  if (vals && mesh) {
    vals->assign(mesh->center() + 1, 0.0);
    for (int i = mesh->center(), k = 0; i >= 0; --i, ++k) (*vals)[i] = all[k];
  }
  return r;
}

// Left half integrated from the upper root at x = -1 toward x = 0.
void left_anchored(const CTriple& c, const Mesh& mesh, std::vector<double>& vals,
                   const RiccatiOptions& opt) {
  const double r = upper_root_left(c);
  const double k = (-c.c1 + c.c2 + 2.0 * c.c3) / r - 2.0;
  const double m = (-c.c3 - k - 0.5 * k * k) / (2.0 + r);
  const double s0 = mesh.one_plus()[0] / 16.0;
  const double u0 = 0.5 * std::log(s0 / (2.0 - s0));
  std::vector<double> times{u0};
  for (int i = 0; i <= mesh.center(); ++i) times.push_back(mesh.u()[i]);
  std::vector<double> all;
  const RunResult res = run(c, r + k * s0 + m * s0 * s0, times, &all, opt);
  if (res.blew_up) throw DivergenceError("anchored integration from x = -1 blew up");
  vals.assign(mesh.center() + 1, 0.0);
  for (int i = 0; i <= mesh.center(); ++i) vals[i] = all[i + 1];
}

bool left_bounded(const CTriple& c, double gamma, const RiccatiOptions& opt) {
  return !left_generic(c, gamma, nullptr, nullptr, opt).blew_up;
}

double gamma_plus_bisect(const CTriple& c, const RiccatiOptions& opt) {
  double lo, hi, step = 1.0;
  if (left_bounded(c, 0.0, opt)) {
    lo = 0.0;
    hi = step;
    for (int it = 0; left_bounded(c, hi, opt); ++it) {
      if (it > 60) throw DivergenceError("gamma^+ search did not bracket");
      lo = hi;
      step *= 2.0;
      hi = lo + step;
    }
  } else {
    hi = 0.0;
    lo = -step;
    for (int it = 0; !left_bounded(c, lo, opt); ++it) {
      if (it > 60) throw DivergenceError("gamma^+ search did not bracket");
      hi = lo;
      step *= 2.0;
      lo = hi - step;
    }
  }
  for (int it = 0; it < opt.bisection_max_iter; ++it) {
    if (hi - lo <= opt.bisection_tol * std::max(1.0, std::fabs(lo))) break;
    const double mid = 0.5 * (lo + hi);
    (left_bounded(c, mid, opt) ? lo : hi) = mid;
  }
  return lo;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(1.0, std::fabs(b)); }

}  // namespace

GammaBounds gamma_bounds(const CTriple& c_in, const RiccatiOptions& opt) {
  const CTriple c = admissible_c(c_in, opt);
  if (c.c3 == cbar3(c.c1, c.c2)) {
    const double g = cbar3_gamma(c.c1, c.c2);
    return {g, g};
  }
  GammaBounds b;
  b.plus = gamma_plus_bisect(c, opt);
  b.minus = -gamma_plus_bisect(c.mirrored(), opt);
  if (b.minus > b.plus) b.minus = b.plus = 0.5 * (b.minus + b.plus);
  return b;
}

RiccatiResult solve_riccati(const MeshPtr& mesh, const CTriple& c_in, double gamma,
                            const RiccatiOptions& opt, const GammaBounds* bounds) {
  if (!std::isfinite(gamma)) throw ParameterError("gamma must be finite");
  const CTriple c = admissible_c(c_in, opt);
  GammaBounds gb = bounds ? *bounds : gamma_bounds(c, opt);
  const bool on_cbar = c.c3 == cbar3(c.c1, c.c2);
  if (on_cbar) gb.minus = gb.plus = cbar3_gamma(c.c1, c.c2);
  const bool at_plus = near(gamma, gb.plus, opt.gamma_snap);
  const bool at_minus = near(gamma, gb.minus, opt.gamma_snap);

  const Mesh& m = *mesh;
  const int n = m.size();
  const int ctr = m.center();
  std::vector<double> left, right_m;
  NoSwirlProfile p;
  p.c = c;
  p.anchored_left = at_plus;
  p.anchored_right = at_minus;

  double g_left = gamma;
  if (at_plus) {
    left_anchored(c, m, left, opt);
    g_left = left[ctr];
  }
  double g_right = gamma;
  if (at_minus) {
    left_anchored(c.mirrored(), m, right_m, opt);
    g_right = -right_m[ctr];
  }
  if (at_plus && !at_minus) g_right = g_left;
  if (at_minus && !at_plus) g_left = g_right;
  if (!at_plus) {
    const RunResult r = left_generic(c, g_left, &m, &left, opt);
    if (r.blew_up) return BlowUp{std::tanh(r.u_blow), Side::left};
  }
  if (!at_minus) {
    const RunResult r = left_generic(c.mirrored(), -g_right, &m, &right_m, opt);
    if (r.blew_up) return BlowUp{-std::tanh(r.u_blow), Side::right};
  }

  std::vector<double> vals(n);
  for (int i = 0; i < ctr; ++i) vals[i] = left[i];
  for (int i = ctr + 1; i < n; ++i) vals[i] = -right_m[n - 1 - i];
  vals[ctr] = 0.5 * (g_left + g_right);
  p.gamma = vals[ctr];
  p.ubar = GridFunction(mesh, std::move(vals));
  p.ubar.left_limit = branch_left_value(c, at_plus);
  p.ubar.right_limit = branch_right_value(c, at_minus);
  p.ubar_u = GridFunction(mesh);
  for (int i = 0; i < n; ++i) {
    const double u = p.ubar[i];
    p.ubar_u[i] = c.p(m.one_minus()[i], m.one_plus()[i]) - 2.0 * m.x()[i] * u - 0.5 * u * u;
  }
  const double g = p.gamma;
  p.d1_at_0 = c.c1 + c.c2 + c.c3 - 0.5 * g * g;
  p.d2_at_0 = c.c2 - c.c1 - 2.0 * g - g * p.d1_at_0;
  return p;
}

NoSwirlProfile solve_profile(const MeshPtr& mesh, const CTriple& c, double gamma,
                             const RiccatiOptions& opt, const GammaBounds* bounds) {
  RiccatiResult r = solve_riccati(mesh, c, gamma, opt, bounds);
  if (auto* b = std::get_if<BlowUp>(&r)) {
    throw RegionError("profile blows up at x = " + std::to_string(b->x_star) +
                      "; gamma lies outside [gamma^-, gamma^+]");
  }
  return std::get<NoSwirlProfile>(std::move(r));
}

namespace {

// Slope of 1/v against ln(1 - sign*x) over the tail nodes, fitted by least
// squares; v ~ eta / ln(.) makes 1/slope the limit of v ln(.).
double inverse_log_slope(const GridFunction& v, Side side, int first, int count) {
  const Mesh& m = *v.mesh();
  const int n = m.size();
  double st = 0, sy = 0, stt = 0, sty = 0;
  int k = 0;
  for (int j = first; j < first + count; ++j) {
    const int i = side == Side::left ? j : n - 1 - j;
    const double s = side == Side::left ? m.one_plus()[i] : m.one_minus()[i];
    if (!(s > 0.0) || v[i] == 0.0) continue;
    const double t = std::log(s), y = 1.0 / v[i];
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++k;
  }
  if (k < 2) return std::numeric_limits<double>::infinity();
  return (k * sty - st * sy) / (k * stt - st * st);
}

EndpointValue log_rate_limit(const GridFunction& v, Side side) {
  constexpr int kBlock = 8;
  const double s0 = inverse_log_slope(v, side, 1, kBlock);
  const double s1 = inverse_log_slope(v, side, 1 + kBlock, kBlock);
  const double e0 = std::isfinite(s0) ? 1.0 / s0 : 0.0;
  const double e1 = std::isfinite(s1) ? 1.0 / s1 : 0.0;
  return {e0, std::fabs(e0 - e1), e0, false};
}

}  // namespace

EndpointData endpoint_data(const NoSwirlProfile& p, const RiccatiOptions& opt) {
  (void)opt;
  EndpointData d;
  const bool c1_crit = p.c.c1 == -1.0;
  const bool c2_crit = p.c.c2 == -1.0;

  auto snap = [](EndpointValue& e, double target, double floor) {
    if (std::fabs(e.raw - target) <= std::max(3.0 * e.error, floor)) {
      e.value = target;
      e.snapped = true;
    } else {
      e.value = e.raw;
    }
  };

  const LimitModel lm = (c1_crit && !p.anchored_left) ? LimitModel::log : LimitModel::power;
  const LimitModel rm = (c2_crit && !p.anchored_right) ? LimitModel::log : LimitModel::power;
  const Limit l = endpoint_limit(p.ubar, Side::left, lm);
  const Limit r = endpoint_limit(p.ubar, Side::right, rm);
  d.left = {l.value, l.error, l.value, false};
  d.right = {r.value, r.error, r.value, false};
  snap(d.left, branch_left_value(p.c, p.anchored_left), lm == LimitModel::log ? 1e-2 : 1e-7);
  snap(d.right, branch_right_value(p.c, p.anchored_right), rm == LimitModel::log ? 1e-2 : 1e-7);

  if (c1_crit) {
    GridFunction w = p.ubar;
    for (double& v : w.values()) v -= 2.0;
    EndpointValue ev = log_rate_limit(w, Side::left);
    snap(ev, std::fabs(ev.raw) < 2.0 ? 0.0 : 4.0, 1e-3);
    // A finite nonzero eta forces U - 2 ~ eta / ln(1+x) -> 0.
    if (lm == LimitModel::log && ev.value != 0.0) d.left = {2.0, std::fabs(w[1]), 2.0, true};
    d.eta1 = ev;
  }
  if (c2_crit) {
    GridFunction w = p.ubar;
    for (double& v : w.values()) v += 2.0;
    EndpointValue ev = log_rate_limit(w, Side::right);
    snap(ev, std::fabs(ev.raw) < 2.0 ? 0.0 : -4.0, 1e-3);
    if (rm == LimitModel::log && ev.value != 0.0) d.right = {-2.0, std::fabs(w[w.size() - 2]), -2.0, true};
    d.eta2 = ev;
  }
  return d;
}

std::string to_string(CaseTag t) {
  switch (t) {
    case CaseTag::case1: return "case1";
    case CaseTag::case2: return "case2";
    case CaseTag::case2_prime: return "case2_prime";
    case CaseTag::case3: return "case3";
    case CaseTag::case4: return "case4";
    case CaseTag::unassigned: return "unassigned";
  }
  return "unassigned";
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::w1: return "W1";
    case Variant::w2a: return "W2a";
    case Variant::w2b: return "W2b";
    case Variant::w3: return "W3";
  }
  return "W1";
}

RegionLabel classify(const CTriple& c_in, double gamma, const RiccatiOptions& opt,
                     const GammaBounds* bounds) {
  if (!std::isfinite(gamma)) throw ParameterError("gamma must be finite");
  const CTriple c = admissible_c(c_in, opt);
  const GammaBounds gb = bounds ? *bounds : gamma_bounds(c, opt);
  RegionLabel out;
  out.gamma_minus = gb.minus;
  out.gamma_plus = gb.plus;
  const bool on_c1 = c.c1 == -1.0;
  const bool on_c2 = c.c2 == -1.0;
  const bool on_cbar = c.c3 == cbar3(c.c1, c.c2);
  out.j_stratum = 1 + (on_c1 ? 1 : 0) + (on_c2 ? 2 : 0) + (on_cbar ? 4 : 0);

  out.at_gamma_plus = near(gamma, gb.plus, opt.gamma_snap);
  out.at_gamma_minus = near(gamma, gb.minus, opt.gamma_snap);
  if (!out.at_gamma_plus && !out.at_gamma_minus && (gamma > gb.plus || gamma < gb.minus))
    throw RegionError("gamma lies outside [gamma^-, gamma^+]");

  const int k = out.j_stratum;
  int l = 0;
  if (k <= 4) {
    if (!out.at_gamma_plus && !out.at_gamma_minus) l = 1;
    else if (out.at_gamma_plus && c.c1 < -0.75) l = 2;
    else if (out.at_gamma_minus && c.c2 < -0.75) l = 3;
  } else if (c.c1 < -0.75 && c.c2 < -0.75) {
    l = 1;
  }

  if (l > 0) {
    out.i_stratum = std::make_pair(k, l);
    if (k >= 5) out.variant = Variant::w3;
    else if (l == 1) out.variant = Variant::w1;
    else if (l == 2) out.variant = Variant::w2a;
    else out.variant = Variant::w2b;

    auto is = [&](int kk, int ll) { return k == kk && l == ll; };
    if (k == 1 || k >= 5 || is(2, 2) || is(3, 3)) out.case_tag = CaseTag::case1;
    else if (is(2, 1) || is(2, 3) || is(4, 3)) out.case_tag = CaseTag::case2;
    else if (is(3, 1) || is(3, 2) || is(4, 2)) out.case_tag = CaseTag::case2_prime;
    else if (is(4, 1)) out.case_tag = CaseTag::case3;
    return out;
  }

  out.in_hat_i = c.c1 > -0.75 || c.c2 > -0.75;
  const double left = branch_left_value(c, out.at_gamma_plus);
  const double right = branch_right_value(c, out.at_gamma_minus);
  if (left >= 3.0 || right <= -3.0) out.case_tag = CaseTag::case4;
  return out;
}

nlohmann::json to_json(const RegionLabel& l) {
  nlohmann::json j;
  j["j_stratum"] = l.j_stratum;
  j["i_stratum"] = l.i_stratum ? nlohmann::json::array({l.i_stratum->first, l.i_stratum->second})
                               : nlohmann::json(nullptr);
  j["in_hat_I"] = l.in_hat_i;
  j["case"] = to_string(l.case_tag);
  j["variant"] = l.variant ? nlohmann::json(to_string(*l.variant)) : nlohmann::json(nullptr);
  j["gamma_minus"] = l.gamma_minus;
  j["gamma_plus"] = l.gamma_plus;
  j["at_gamma_minus"] = l.at_gamma_minus;
  j["at_gamma_plus"] = l.at_gamma_plus;
  return j;
}

RegionLabel label_from_json(const nlohmann::json& j) {
  try {
    RegionLabel l;
    l.j_stratum = j.at("j_stratum").get<int>();
    if (!j.at("i_stratum").is_null())
      l.i_stratum = std::make_pair(j.at("i_stratum").at(0).get<int>(), j.at("i_stratum").at(1).get<int>());
    l.in_hat_i = j.at("in_hat_I").get<bool>();
    const std::string tag = j.at("case").get<std::string>();
    bool found = false;
    for (CaseTag t : {CaseTag::case1, CaseTag::case2, CaseTag::case2_prime, CaseTag::case3, CaseTag::case4,
                      CaseTag::unassigned})
      if (to_string(t) == tag) {
        l.case_tag = t;
        found = true;
      }
    if (!found) throw ParameterError("unknown case tag " + tag);
    if (!j.at("variant").is_null()) {
      const std::string v = j.at("variant").get<std::string>();
      for (Variant w : {Variant::w1, Variant::w2a, Variant::w2b, Variant::w3})
        if (to_string(w) == v) l.variant = w;
      if (!l.variant) throw ParameterError("unknown variant " + v);
    }
    l.gamma_minus = j.at("gamma_minus").get<double>();
    l.gamma_plus = j.at("gamma_plus").get<double>();
    l.at_gamma_minus = j.at("at_gamma_minus").get<bool>();
    l.at_gamma_plus = j.at("at_gamma_plus").get<bool>();
    return l;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed region label: ") + e.what());
  }
}

nlohmann::json to_json(const EndpointData& e) {
  auto ev = [](const EndpointValue& v) {
    return nlohmann::json{{"raw", v.raw}, {"error", v.error}, {"value", v.value}, {"snapped", v.snapped}};
  };
  nlohmann::json j;
  j["left"] = ev(e.left);
  j["right"] = ev(e.right);
  j["eta1"] = e.eta1 ? ev(*e.eta1) : nlohmann::json(nullptr);
  j["eta2"] = e.eta2 ? ev(*e.eta2) : nlohmann::json(nullptr);
  return j;
}

EndpointData endpoint_data_from_json(const nlohmann::json& j) {
  auto ev = [](const nlohmann::json& v) {
    return EndpointValue{v.at("raw").get<double>(), v.at("error").get<double>(), v.at("value").get<double>(),
                         v.at("snapped").get<bool>()};
  };
  try {
    EndpointData e;
    e.left = ev(j.at("left"));
    e.right = ev(j.at("right"));
    if (!j.at("eta1").is_null()) e.eta1 = ev(j.at("eta1"));
    if (!j.at("eta2").is_null()) e.eta2 = ev(j.at("eta2"));
    return e;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed endpoint data: ") + e.what());
  }
}

}  // namespace homax
