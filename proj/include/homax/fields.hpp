#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "homax/operators.hpp"

namespace homax {

/// Axisymmetric (-1)-homogeneous field on the unit sphere, sampled at
/// theta = arccos(x) for the mesh nodes (or requested angles).
struct SphericalField {
  std::vector<double> theta;
  std::vector<double> u_r;
  std::vector<double> u_theta;
  std::vector<double> u_phi;
  std::vector<double> p;
  std::string source;
};

/// Full profile U-bar + U-tilde.
ProfilePair total_profile(const NoSwirlProfile& base, const ProfilePair& perturbation);

/// u_theta = U_theta / sin, u_phi = U_phi / sin, u_r = U_theta'(x), and
/// p = -1/2 [(1-x^2) U''' - 2x U'' + U U'' + U'^2 + (U^2 + U_phi^2) / (1-x^2)],
/// evaluated as -1/2 [S'' - 2U' + (U^2 + U_phi^2) / (1-x^2)] with
/// S = (1-x^2) U' + 2x U + U^2/2. Where 1 - x^2 < 1e-4, S'' is extended
/// linearly in x.
SphericalField reconstruct(const ProfilePair& u, std::string source = {});

/// Fields at given angles by local interpolation; angles must lie in (0, pi).
SphericalField reconstruct_at(const ProfilePair& u, const std::vector<double>& theta,
                              std::string source = {});

/// Pressure from the angular form, differentiating u_r numerically in theta.
std::vector<double> pressure_angular(const ProfilePair& u);

struct ReducedResidual {
  double theta = 0.0;
  double phi = 0.0;
};

/// Sup over nodes with 1 - |x| >= edge of both reduced equations with P_chat.
ReducedResidual reduced_residual(const ProfilePair& u, const CTriple& chat, double edge = 1e-6);

void write_csv(const SphericalField& f, std::ostream& os);
nlohmann::json to_json(const SphericalField& f);

/// Point cloud on an (r, theta) grid: u(r) = u(1) / r, p(r) = p(1) / r^2.
/// Columns r, theta, u_r, u_theta, u_phi, p.
void write_point_cloud(const SphericalField& f, const std::vector<double>& radii, std::ostream& os);

}  // namespace homax
