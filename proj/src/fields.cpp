#include "homax/fields.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "homax/errors.hpp"

namespace homax {

ProfilePair total_profile(const NoSwirlProfile& base, const ProfilePair& perturbation) {
  ProfilePair u = perturbation;
  u.theta += base.ubar;
  return u;
}

namespace {

/// Below this 1 - x^2, S'' is extended linearly from the nearest resolved nodes.
constexpr double kPressureTail = 1e-4;

/// (1-x^2) U''' - 2x U'' + U U'' + U'^2 = S'' - 2U' with S = (1-x^2) U' + 2x U + U^2/2.
struct PressureTerms {
  GridFunction d1, s2;
};

PressureTerms pressure_terms(const GridFunction& u) {
  const Mesh& m = *u.mesh();
  const int n = m.size();
  PressureTerms t{differentiate(u, 1), {}};
  GridFunction s = u;
  for (int i = 0; i < n; ++i)
    s[i] = m.one_minus_sq()[i] * t.d1[i] + 2.0 * m.x()[i] * u[i] + 0.5 * u[i] * u[i];
  t.s2 = differentiate(s, 2);
  int lo = 0, hi = n - 1;
  while (lo < n - 2 && m.one_minus_sq()[lo] < kPressureTail) ++lo;
  while (hi > 1 && m.one_minus_sq()[hi] < kPressureTail) --hi;
  auto extend = [&](int from, int next, int i) {
    const double slope = (t.s2[next] - t.s2[from]) / (m.x()[next] - m.x()[from]);
    t.s2[i] = t.s2[from] + slope * (m.x()[i] - m.x()[from]);
  };
  for (int i = 0; i < lo; ++i) extend(lo, lo + 1, i);
  for (int i = hi + 1; i < n; ++i) extend(hi, hi - 1, i);
  return t;
}

double pressure(double w, double u, double d1, double s2, double phi) {
  return -0.5 * (s2 - 2.0 * d1 + (u * u + phi * phi) / w);
}

}  // namespace

SphericalField reconstruct(const ProfilePair& u, std::string source) {
  const Mesh& m = *u.theta.mesh();
  const int n = m.size();
  const PressureTerms d = pressure_terms(u.theta);
  SphericalField f;
  f.source = std::move(source);
  f.theta.resize(n);
  f.u_r.resize(n);
  f.u_theta.resize(n);
  f.u_phi.resize(n);
  f.p.resize(n);
  // theta increases as x decreases; store in increasing theta.
  for (int k = 0; k < n; ++k) {
    const int i = n - 1 - k;
    const double x = m.x()[i], w = m.one_minus_sq()[i];
    const double sin_t = std::sqrt(w);
    f.theta[k] = std::atan2(sin_t, x);
    f.u_r[k] = d.d1[i];
    f.u_theta[k] = u.theta[i] / sin_t;
    f.u_phi[k] = u.phi[i] / sin_t;
    f.p[k] = pressure(w, u.theta[i], d.d1[i], d.s2[i], u.phi[i]);
  }
  return f;
}

SphericalField reconstruct_at(const ProfilePair& u, const std::vector<double>& theta, std::string source) {
  const PressureTerms d = pressure_terms(u.theta);
  SphericalField f;
  f.source = std::move(source);
  for (double t : theta) {
    if (!(t > 0.0 && t < M_PI)) throw ParameterError("field evaluation at the poles theta = 0, pi is undefined");
    const double x = std::cos(t), sin_t = std::sin(t), w = sin_t * sin_t;
    const double ut = interpolate(u.theta, x), up = interpolate(u.phi, x);
    const double d1 = interpolate(d.d1, x);
    f.theta.push_back(t);
    f.u_r.push_back(d1);
    f.u_theta.push_back(ut / sin_t);
    f.u_phi.push_back(up / sin_t);
    f.p.push_back(pressure(w, ut, d1, interpolate(d.s2, x), up));
  }
  return f;
}

std::vector<double> pressure_angular(const ProfilePair& u) {
  const MeshPtr& mesh = u.theta.mesh();
  const Mesh& m = *mesh;
  const int n = m.size();
  const GridFunction ur = differentiate(u.theta, 1);
  // d/dtheta = -sin(theta) d/dx.
  GridFunction ur_t = differentiate(ur, 1);
  for (int i = 0; i < n; ++i) ur_t[i] *= -std::sqrt(m.one_minus_sq()[i]);
  const GridFunction ur_tx = differentiate(ur_t, 1);
  std::vector<double> p(n);
  for (int k = 0; k < n; ++k) {
    const int i = n - 1 - k;
    const double x = m.x()[i], sin_t = std::sqrt(m.one_minus_sq()[i]);
    const double ur_tt = -sin_t * ur_tx[i];
    const double ut = u.theta[i] / sin_t, up = u.phi[i] / sin_t;
    p[k] = -0.5 * (ur_tt + (x / sin_t - ut) * ur_t[i] + ur[i] * ur[i] + ut * ut + up * up);
  }
  return p;
}

ReducedResidual reduced_residual(const ProfilePair& u, const CTriple& chat, double edge) {
  const Mesh& m = *u.theta.mesh();
  const GridFunction d1 = differentiate(u.theta, 1);
  const GridFunction p1 = differentiate(u.phi, 1);
  const GridFunction p2 = differentiate(u.phi, 2);
  const PsiResult ps = psi(u.phi, u.phi);
  ReducedResidual r;
  for (int i = 0; i < m.size(); ++i) {
    if (std::min(m.one_plus()[i], m.one_minus()[i]) < edge) continue;
    const double x = m.x()[i], w = m.one_minus_sq()[i], ut = u.theta[i];
    const double first = w * d1[i] + 2.0 * x * ut + 0.5 * ut * ut + ps.psi[i] -
                         chat.p(m.one_minus()[i], m.one_plus()[i]);
    const double second = w * p2[i] + ut * p1[i];
    r.theta = std::max(r.theta, std::fabs(first));
    r.phi = std::max(r.phi, std::fabs(second));
  }
  return r;
}

void write_csv(const SphericalField& f, std::ostream& os) {
  os << "theta,u_r,u_theta,u_phi,p\n";
  char buf[160];
  for (std::size_t k = 0; k < f.theta.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", f.theta[k], f.u_r[k], f.u_theta[k],
                  f.u_phi[k], f.p[k]);
    os << buf;
  }
}

nlohmann::json to_json(const SphericalField& f) {
  return {{"source", f.source}, {"theta", f.theta}, {"u_r", f.u_r},
          {"u_theta", f.u_theta}, {"u_phi", f.u_phi}, {"p", f.p}};
}

void write_point_cloud(const SphericalField& f, const std::vector<double>& radii, std::ostream& os) {
  os << "r,theta,u_r,u_theta,u_phi,p\n";
  char buf[200];
  for (double r : radii) {
    if (!(r > 0.0)) throw ParameterError("point cloud radii must be positive");
    for (std::size_t k = 0; k < f.theta.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r, f.theta[k], f.u_r[k] / r,
                    f.u_theta[k] / r, f.u_phi[k] / r, f.p[k] / (r * r));
      os << buf;
    }
  }
}

}  // namespace homax
