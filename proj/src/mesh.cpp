#include "homax/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include <Eigen/Dense>

#include "homax/errors.hpp"
#include "homax/simd/kernels.hpp"

namespace homax {

namespace {

using Real = long double;

// Fornberg's recursion: weights for derivatives 0..max_order at z = 0.
std::vector<std::vector<Real>> fornberg(const std::vector<Real>& z, int max_order) {
  const int n = static_cast<int>(z.size());
  std::vector<std::vector<Real>> c(n, std::vector<Real>(max_order + 1, 0.0L));
  Real c1 = 1.0L;
  Real c4 = z[0];
  c[0][0] = 1.0L;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, max_order);
    Real c2 = 1.0L;
    const Real c5 = c4;
    c4 = z[i];
    for (int j = 0; j < i; ++j) {
      const Real c3 = z[i] - z[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  return c;
}

// Weights w_k with sum_k w_k p(z_k) = int_0^1 p for all polynomials of degree < z.size().
std::vector<Real> unit_interval_weights(const std::vector<Real>& z) {
  const int n = static_cast<int>(z.size());
  using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
  Mat a(n, n);
  Vec rhs(n);
  for (int m = 0; m < n; ++m) {
    for (int k = 0; k < n; ++k) a(m, k) = std::pow(z[k], static_cast<Real>(m));
    rhs(m) = 1.0L / (m + 1);
  }
  Vec w = a.fullPivLu().solve(rhs);
  return {w.data(), w.data() + n};
}

Band make_band(std::size_t rows, int width) {
  Band b;
  b.width = width;
  b.rows = rows;
  b.start.assign(rows, 0);
  b.w.assign(rows * width, 0.0);
  return b;
}

constexpr double kCenterRatio = 2.5;
constexpr double kBlendCenter = 0.5;
constexpr double kBlendWidth = 0.08;
// Beyond |x| = kTailSwitch stencils are built in u rather than x.
constexpr double kTailSwitch = 0.5;

int clamp_start(int i, int width, int n) {
  return std::clamp(i - (width - 1) / 2, 0, n - width);
}

}  // namespace

void Band::apply(const double* f, double* out) const {
  simd::active_kernels().banded_apply(rows, width, w.data(), start.data(), f, out);
}

std::shared_ptr<const Mesh> Mesh::build(int n, double grading) {
  if (n < 64) throw ParameterError("mesh needs at least 64 nodes");
  if (n % 2 == 0) throw ParameterError("mesh node count must be odd so that x = 0 is a node");
  if (!(grading > 0.0) || grading > 10.0)
    throw ParameterError("grading exponent must lie in (0, 10]");

  std::shared_ptr<Mesh> m(new Mesh());
  m->n_ = n;
  m->grading_ = grading;
  const int half = n / 2;
  const double gap = std::pow(10.0, -3.0 * grading);
  m->kappa_ = 0.5 * std::log((2.0 - gap) / gap);
  // du/dtau blends from a near x = 0 to g in the tails; u(1) = (a + g) / 2 = kappa.
  const double a = m->kappa_ / kCenterRatio;
  const double g = 2.0 * m->kappa_ - a;
  auto log_cosh = [](double z) {
    z = std::fabs(z);
    return z + std::log1p(std::exp(-2.0 * z)) - std::log(2.0);
  };
  auto u_of = [&](double t) {
    return a * t + 0.5 * (g - a) *
                       (t + kBlendWidth * (log_cosh((t - kBlendCenter) / kBlendWidth) -
                                           log_cosh(kBlendCenter / kBlendWidth)));
  };
  m->du_ = g / half;
  m->tail_stride_ = std::clamp(static_cast<int>(std::lround(0.35 / m->du_)), 1,
                               std::max(1, (half - 16) / 8));

  m->u_.resize(n);
  m->x_.resize(n);
  m->sp_.resize(n);
  m->sm_.resize(n);
  m->w_.resize(n);
  for (int j = 0; j <= half; ++j) {
    const double u = (j == half) ? m->kappa_ : u_of(static_cast<double>(j) / half);
    const double e = std::exp(-2.0 * u);
    const double sm = 2.0 * e / (1.0 + e);
    const double sp = 2.0 / (1.0 + e);
    const double x = std::tanh(u);
    const int r = half + j, l = half - j;
    m->u_[r] = u;
    m->x_[r] = x;
    m->sp_[r] = sp;
    m->sm_[r] = sm;
    m->w_[r] = sp * sm;
    m->u_[l] = -u;
    m->x_[l] = -x;
    m->sp_[l] = sm;
    m->sm_[l] = sp;
    m->w_[l] = sp * sm;
  }
  m->x_[half] = 0.0;

  // Offsets x_k - x_i, taken from whichever of 1+x, 1-x is small near node i.
  auto offset = [&](int i, int k) -> Real {
    if (i <= half) return static_cast<Real>(m->sp_[k]) - static_cast<Real>(m->sp_[i]);
    return static_cast<Real>(m->sm_[i]) - static_cast<Real>(m->sm_[k]);
  };

  for (int order = 1; order <= 3; ++order) m->diff_[order - 1] = make_band(n, kDiffWidth);
  for (int i = 0; i < n; ++i) {
    const int s = clamp_start(i, kDiffWidth, n);
    std::vector<Real> z(kDiffWidth);
    for (int k = 0; k < kDiffWidth; ++k) z[k] = offset(i, s + k);
    auto c = fornberg(z, 3);
    if (std::fabs(m->x_[i]) > kTailSwitch) {
      // Power laws in 1 -+ x are exponentials in u: differentiate in u, then
      // d/dx = (1/w) d/du with w = 1 - x^2.
      for (int k = 0; k < kDiffWidth; ++k) z[k] = static_cast<Real>(m->u_[s + k]) - m->u_[i];
      const auto cu = fornberg(z, 3);
      const Real w = static_cast<Real>(m->sp_[i]) * m->sm_[i];
      const Real x = m->x_[i];
      for (int k = 0; k < kDiffWidth; ++k) {
        c[k][1] = cu[k][1] / w;
        c[k][2] = (cu[k][2] + 2 * x * cu[k][1]) / (w * w);
        c[k][3] = (cu[k][3] + 6 * x * cu[k][2] + (2 * w + 8 * x * x) * cu[k][1]) / (w * w * w);
      }
    }
    for (int order = 1; order <= 3; ++order) {
      Band& b = m->diff_[order - 1];
      b.start[i] = s;
      for (int k = 0; k < kDiffWidth; ++k) b.w[k * n + i] = static_cast<double>(c[k][order]);
    }
  }

  m->quad_x_ = make_band(n - 1, kQuadWidth);
  m->quad_u_ = make_band(n - 1, kQuadWidth);
  for (int i = 0; i + 1 < n; ++i) {
    const int s = std::clamp(i - (kQuadWidth / 2 - 1), 0, n - kQuadWidth);
    const int anchor = (i < half) ? i : i + 1;
    const Real h = (i < half) ? offset(anchor, i + 1) : -offset(anchor, i);
    const Real hu = static_cast<Real>(m->u_[i + 1]) - m->u_[i];
    std::vector<Real> zx(kQuadWidth), zu(kQuadWidth);
    for (int k = 0; k < kQuadWidth; ++k) {
      zx[k] = (offset(anchor, s + k) + (i < half ? 0.0L : h)) / h;
      zu[k] = (static_cast<Real>(m->u_[s + k]) - m->u_[i]) / hu;
    }
    const auto wx = unit_interval_weights(zx);
    const auto wu = unit_interval_weights(zu);
    const bool tail = std::min(std::fabs(m->x_[i]), std::fabs(m->x_[i + 1])) > kTailSwitch;
    m->quad_x_.start[i] = s;
    m->quad_u_.start[i] = s;
    for (int k = 0; k < kQuadWidth; ++k) {
      // In the tails int f dx is taken as int f (1 - x^2) du.
      const Real wk = tail ? wu[k] * hu * m->w_[s + k] : wx[k] * h;
      m->quad_x_.w[k * (n - 1) + i] = static_cast<double>(wk);
      m->quad_u_.w[k * (n - 1) + i] = static_cast<double>(wu[k] * hu);
    }
  }
  return m;
}

const Band& Mesh::diff(int order) const {
  if (order < 1 || order > 3) throw ParameterError("unsupported derivative order");
  return diff_[order - 1];
}

int Mesh::find_node(double x) const noexcept {
  auto it = std::lower_bound(x_.begin(), x_.end(), x - 1e-14);
  if (it == x_.end() || std::fabs(*it - x) > 1e-14) return -1;
  return static_cast<int>(it - x_.begin());
}

// ---------------------------------------------------------------------------

GridFunction::GridFunction(MeshPtr mesh) : mesh_(std::move(mesh)), v_(mesh_->size(), 0.0) {}

GridFunction::GridFunction(MeshPtr mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), v_(std::move(values)) {
  if (static_cast<int>(v_.size()) != mesh_->size())
    throw ParameterError("grid function size does not match mesh");
}

namespace {

void check_same(const GridFunction& a, const GridFunction& b) {
  if (a.mesh() != b.mesh() && a.mesh()->size() != b.mesh()->size())
    throw ParameterError("grid functions live on different meshes");
}

std::optional<double> add_limits(double alpha, const std::optional<double>& a, double beta,
                                 const std::optional<double>& b) {
  if (a && b) return alpha * *a + beta * *b;
  return std::nullopt;
}

}  // namespace

GridFunction& GridFunction::operator+=(const GridFunction& o) {
  *this = combine(1.0, *this, 1.0, o);
  return *this;
}

GridFunction& GridFunction::operator-=(const GridFunction& o) {
  *this = combine(1.0, *this, -1.0, o);
  return *this;
}

GridFunction& GridFunction::operator*=(double s) {
  for (double& v : v_) v *= s;
  if (left_limit) *left_limit *= s;
  if (right_limit) *right_limit *= s;
  return *this;
}

GridFunction combine(double alpha, const GridFunction& a, double beta, const GridFunction& b) {
  check_same(a, b);
  GridFunction out(a.mesh());
  simd::active_kernels().axpby(a.values().size(), alpha, a.values().data(), beta,
                               b.values().data(), out.values().data());
  out.left_limit = add_limits(alpha, a.left_limit, beta, b.left_limit);
  out.right_limit = add_limits(alpha, a.right_limit, beta, b.right_limit);
  return out;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  return combine(1.0, a, 1.0, b);
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  return combine(1.0, a, -1.0, b);
}

GridFunction operator*(const GridFunction& a, const GridFunction& b) {
  check_same(a, b);
  GridFunction out(a.mesh());
  simd::active_kernels().multiply(a.values().size(), a.values().data(), b.values().data(),
                                  out.values().data());
  if (a.left_limit && b.left_limit) out.left_limit = *a.left_limit * *b.left_limit;
  if (a.right_limit && b.right_limit) out.right_limit = *a.right_limit * *b.right_limit;
  return out;
}

GridFunction operator*(double s, const GridFunction& a) {
  GridFunction out = a;
  out *= s;
  return out;
}

// ---------------------------------------------------------------------------

Limit wynn_epsilon(const std::vector<double>& seq) {
  const int n = static_cast<int>(seq.size());
  if (n == 0) return {0.0, 0.0, false};
  if (n < 3) return {seq.back(), n == 2 ? std::fabs(seq[1] - seq[0]) : 0.0, false};
  // e[k] holds column k of the epsilon table for the current tail.
  std::vector<std::vector<double>> e(n + 1);
  e[0].assign(n, 0.0);
  e[1] = seq;
  for (int k = 2; k <= n; ++k) {
    const auto& prev = e[k - 1];
    const auto& prev2 = e[k - 2];
    e[k].resize(prev.size() - 1);
    for (std::size_t j = 0; j + 1 < prev.size(); ++j) {
      const double d = prev[j + 1] - prev[j];
      const double second = (k == 2) ? 0.0 : prev2[j + 1];
      e[k][j] = (d == 0.0) ? std::numeric_limits<double>::infinity() : second + 1.0 / d;
    }
  }
  // Odd columns (1, 3, 5, ...) hold the accelerated estimates.
  double best = seq.back();
  double prev_best = seq[n - 2];
  for (int k = 1; k <= n; k += 2) {
    if (e[k].empty()) break;
    const double v = e[k].back();
    if (!std::isfinite(v)) break;
    prev_best = best;
    best = v;
    if (k == 1) prev_best = seq[n - 2];
  }
  return {best, std::fabs(best - prev_best), false};
}

namespace {

constexpr int kTailSamples = 7;

// Node indices used as tail samples, ordered from the interior toward the endpoint.
std::vector<int> tail_nodes(const Mesh& m, Side side) {
  const int stride = m.tail_stride();
  std::vector<int> idx(kTailSamples);
  for (int k = 0; k < kTailSamples; ++k) {
    const int off = (kTailSamples - 1 - k) * stride;
    idx[k] = side == Side::left ? off : m.size() - 1 - off;
  }
  return idx;
}

bool increments_diverge(const std::vector<double>& seq) {
  const int n = static_cast<int>(seq.size());
  const double d1 = seq[n - 1] - seq[n - 2];
  const double d0 = seq[n - 2] - seq[n - 3];
  double scale = 0.0;
  for (double v : seq) scale = std::max(scale, std::fabs(v));
  if (std::fabs(d1) <= 1e-14 * scale || d1 == 0.0) return false;
  return std::fabs(d1) >= 0.999 * std::fabs(d0);
}

// Accelerated limit of partial sums; the returned value is the remaining tail.
Limit tail_from_partials(const std::vector<double>& partial) {
  Limit out;
  if (increments_diverge(partial)) {
    out.divergent = true;
    out.value = std::numeric_limits<double>::infinity();
    out.error = std::numeric_limits<double>::infinity();
    return out;
  }
  const Limit acc = wynn_epsilon(partial);
  out.value = acc.value - partial.back();
  out.error = acc.error;
  return out;
}

// int from the endpoint to the outermost node, given per-interval integrals.
Limit endpoint_tail(const Mesh& m, const std::vector<double>& interval, Side side) {
  const auto idx = tail_nodes(m, side);
  std::vector<double> partial(kTailSamples, 0.0);
  if (side == Side::left) {
    // partial[k] = int_{x_idx[k]}^{x_idx[0]}
    double acc = 0.0;
    int k = 1;
    for (int i = idx[0] - 1; i >= 0 && k < kTailSamples; --i) {
      acc += interval[i];
      if (i == idx[k]) partial[k++] = acc;
    }
  } else {
    double acc = 0.0;
    int k = 1;
    for (int i = idx[0]; i + 1 < m.size() && k < kTailSamples; ++i) {
      acc += interval[i];
      if (i + 1 == idx[k]) partial[k++] = acc;
    }
  }
  return tail_from_partials(partial);
}

GridFunction cumulative_from_intervals(const GridFunction& f, const std::vector<double>& iv,
                                       double base, const char* what) {
  const Mesh& m = *f.mesh();
  const int n = m.size();
  GridFunction F(f.mesh());
  auto& v = F.values();
  if (base == -1.0) {
    const Limit tail = endpoint_tail(m, iv, Side::left);
    if (tail.divergent) throw DivergenceError(std::string(what) + ": integral diverges at x = -1");
    v[0] = tail.value;
    for (int i = 1; i < n; ++i) v[i] = v[i - 1] + iv[i - 1];
    F.left_limit = 0.0;
    return F;
  }
  if (base == 1.0) {
    const Limit tail = endpoint_tail(m, iv, Side::right);
    if (tail.divergent) throw DivergenceError(std::string(what) + ": integral diverges at x = 1");
    v[n - 1] = -tail.value;
    for (int i = n - 2; i >= 0; --i) v[i] = v[i + 1] - iv[i];
    F.right_limit = 0.0;
    return F;
  }
  const int b = m.find_node(base);
  if (b < 0) throw ParameterError(std::string(what) + ": base point must be -1, 1 or a mesh node");
  v[b] = 0.0;
  for (int i = b + 1; i < n; ++i) v[i] = v[i - 1] + iv[i - 1];
  for (int i = b - 1; i >= 0; --i) v[i] = v[i + 1] - iv[i];
  return F;
}

std::vector<double> intervals(const Band& band, const GridFunction& f) {
  std::vector<double> iv(band.rows);
  band.apply(f.values().data(), iv.data());
  return iv;
}

Limit full_integral(const Mesh& m, const std::vector<double>& iv) {
  const Limit l = endpoint_tail(m, iv, Side::left);
  const Limit r = endpoint_tail(m, iv, Side::right);
  Limit out;
  if (l.divergent || r.divergent) {
    out.divergent = true;
    out.value = std::numeric_limits<double>::infinity();
    out.error = out.value;
    return out;
  }
  double s = l.value;
  for (double v : iv) s += v;
  out.value = s + r.value;
  out.error = l.error + r.error + 1e-15 * std::fabs(out.value);
  return out;
}

double log_coordinate(const Mesh& m, int i, Side side) {
  const double s = side == Side::left ? m.one_plus()[i] : m.one_minus()[i];
  return std::log(s / 3.0);
}

Limit fit_log_model(const Mesh& m, const std::vector<double>& f, Side side) {
  const int n = m.size();
  const int half = n / 2;
  std::vector<int> idx;
  for (int k = 0; k < half; ++k) {
    const int i = side == Side::left ? k : n - 1 - k;
    const double s = side == Side::left ? m.one_plus()[i] : m.one_minus()[i];
    if (s > 1e-3) break;
    idx.push_back(i);
  }
  if (idx.size() < 12) {
    idx.clear();
    for (int k = 0; k < std::max(12, half / 5); ++k)
      idx.push_back(side == Side::left ? k : n - 1 - k);
  }
  auto solve = [&](int terms) {
    Eigen::MatrixXd a(idx.size(), terms);
    Eigen::VectorXd rhs(idx.size());
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const double inv = 1.0 / log_coordinate(m, idx[r], side);
      double p = 1.0;
      for (int c = 0; c < terms; ++c) {
        a(r, c) = p;
        p *= inv;
      }
      rhs(r) = f[idx[r]];
    }
    return Eigen::VectorXd(a.colPivHouseholderQr().solve(rhs));
  };
  const Eigen::VectorXd c3 = solve(3);
  const Eigen::VectorXd c4 = solve(4);
  Limit out;
  out.value = c3(0);
  out.error = std::fabs(c3(0) - c4(0));
  out.divergent = !std::isfinite(out.value);
  return out;
}

}  // namespace

double interpolate(const GridFunction& f, double x) {
  if (!(x > -1.0 && x < 1.0)) throw ParameterError("interpolation point must lie in (-1, 1)");
  const Mesh& m = *f.mesh();
  const auto& u = m.u();
  const int n = m.size();
  const double t = std::atanh(x);
  const int j = static_cast<int>(std::lower_bound(u.begin(), u.end(), t) - u.begin());
  if (j < n && u[j] == t) return f[j];
  const int s = std::clamp(j - Mesh::kQuadWidth / 2, 0, n - Mesh::kQuadWidth);
  double acc = 0.0;
  for (int k = s; k < s + Mesh::kQuadWidth; ++k) {
    double l = 1.0;
    for (int q = s; q < s + Mesh::kQuadWidth; ++q)
      if (q != k) l *= (t - u[q]) / (u[k] - u[q]);
    acc += l * f[k];
  }
  return acc;
}

GridFunction differentiate(const GridFunction& f, int order) {
  const Band& band = f.mesh()->diff(order);
  GridFunction out(f.mesh());
  band.apply(f.values().data(), out.values().data());
  return out;
}

GridFunction cumulative_integral(const GridFunction& f, double base) {
  return cumulative_from_intervals(f, intervals(f.mesh()->interval_x(), f), base,
                                   "cumulative_integral");
}

GridFunction cumulative_log_singular(const GridFunction& g, double base) {
  return cumulative_from_intervals(g, intervals(g.mesh()->interval_u(), g), base,
                                   "cumulative_log_singular");
}

Limit log_singular_integral(const GridFunction& g) {
  return full_integral(*g.mesh(), intervals(g.mesh()->interval_u(), g));
}

Limit integral(const GridFunction& f) {
  return full_integral(*f.mesh(), intervals(f.mesh()->interval_x(), f));
}

Limit endpoint_limit(const GridFunction& f, Side side, LimitModel model,
                     const GridFunction* weight) {
  const Mesh& m = *f.mesh();
  std::vector<double> vals = f.values();
  if (weight) {
    for (std::size_t i = 0; i < vals.size(); ++i) vals[i] *= (*weight)[static_cast<int>(i)];
  }
  if (model == LimitModel::log) return fit_log_model(m, vals, side);
  const auto idx = tail_nodes(m, side);
  std::vector<double> seq(kTailSamples);
  for (int k = 0; k < kTailSamples; ++k) seq[k] = vals[idx[k]];
  if (increments_diverge(seq)) {
    return {std::copysign(std::numeric_limits<double>::infinity(), seq.back()),
            std::numeric_limits<double>::infinity(), true};
  }
  return wynn_epsilon(seq);
}

// ---------------------------------------------------------------------------

void write_csv(const GridFunction& f, std::ostream& os) {
  char buf[80];
  os << "x,value\n";
  const auto& x = f.mesh()->x();
  for (int i = 0; i < f.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", x[i], f[i]);
    os << buf;
  }
}

nlohmann::json to_json(const GridFunction& f) {
  nlohmann::json j;
  j["mesh"] = {{"n", f.mesh()->size()}, {"grading", f.mesh()->grading()}};
  j["values"] = f.values();
  nlohmann::json ends = nlohmann::json::object();
  ends["left"] = f.left_limit ? nlohmann::json(*f.left_limit) : nlohmann::json(nullptr);
  ends["right"] = f.right_limit ? nlohmann::json(*f.right_limit) : nlohmann::json(nullptr);
  j["endpoints"] = ends;
  return j;
}

GridFunction grid_function_from_json(const nlohmann::json& j) {
  try {
    auto mesh = Mesh::build(j.at("mesh").at("n").get<int>(), j.at("mesh").at("grading").get<double>());
    GridFunction g(mesh, j.at("values").get<std::vector<double>>());
    if (j.contains("endpoints")) {
      const auto& e = j["endpoints"];
      if (e.contains("left") && !e["left"].is_null()) g.left_limit = e["left"].get<double>();
      if (e.contains("right") && !e["right"].is_null()) g.right_limit = e["right"].get<double>();
    }
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed grid function JSON: ") + e.what());
  }
}

}  // namespace homax
