#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace homax {

/// Row-banded linear map: out[i] = sum_k w[k*rows + i] * f[start[i] + k].
struct Band {
  int width = 0;
  std::size_t rows = 0;
  std::vector<int> start;
  std::vector<double> w;

  void apply(const double* f, double* out) const;
};

/// Pointwise data for one mesh node, with 1 +- x and 1 - x^2 free of cancellation.
struct Node {
  double u;
  double x;
  double one_plus;
  double one_minus;
  double one_minus_sq;
};

/// Symmetric graded mesh on (-1, 1).
///
/// Nodes are x_j = tanh(u(j / N)), j = -N..N, with u(tau) odd and smooth.
/// du/dtau is small near x = 0 and constant in the tails, so the spacing is
/// geometric in 1 -+ x near the endpoints. The grading exponent p fixes
/// kappa = u(1) so that the outermost node sits at distance 10^(-3p) from
/// the endpoint.
class Mesh {
 public:
  static constexpr int kDiffWidth = 9;
  static constexpr int kQuadWidth = 8;

  static std::shared_ptr<const Mesh> build(int n, double grading);

  int size() const noexcept { return n_; }
  int center() const noexcept { return n_ / 2; }
  double grading() const noexcept { return grading_; }
  double kappa() const noexcept { return kappa_; }
  /// Spacing in u = artanh(x) at the tail nodes.
  double du() const noexcept { return du_; }

  const std::vector<double>& u() const noexcept { return u_; }
  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& one_plus() const noexcept { return sp_; }
  const std::vector<double>& one_minus() const noexcept { return sm_; }
  const std::vector<double>& one_minus_sq() const noexcept { return w_; }
  Node node(int i) const noexcept { return {u_[i], x_[i], sp_[i], sm_[i], w_[i]}; }

  /// Differentiation stencils in x, orders 1..3.
  const Band& diff(int order) const;
  /// Stencils for int_{x_i}^{x_{i+1}} f dx (n-1 rows).
  const Band& interval_x() const noexcept { return quad_x_; }
  /// Stencils for int_{u_i}^{u_{i+1}} g du (n-1 rows).
  const Band& interval_u() const noexcept { return quad_u_; }

  /// Nodes between consecutive samples used by endpoint extrapolation.
  int tail_stride() const noexcept { return tail_stride_; }

  /// Index of the node equal to x, or -1.
  int find_node(double x) const noexcept;

 private:
  Mesh() = default;

  int n_ = 0;
  double grading_ = 0.0;
  double kappa_ = 0.0;
  double du_ = 0.0;
  int tail_stride_ = 1;
  std::vector<double> u_, x_, sp_, sm_, w_;
  Band diff_[3];
  Band quad_x_, quad_u_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Nodal values on a mesh, with optional endpoint limits.
class GridFunction {
 public:
  GridFunction() = default;
  explicit GridFunction(MeshPtr mesh);
  GridFunction(MeshPtr mesh, std::vector<double> values);

  template <class F>
  static GridFunction sample(MeshPtr mesh, F&& f) {
    GridFunction g(mesh);
    for (int i = 0; i < mesh->size(); ++i) g.v_[i] = f(mesh->node(i));
    return g;
  }

  const MeshPtr& mesh() const noexcept { return mesh_; }
  int size() const noexcept { return static_cast<int>(v_.size()); }
  const std::vector<double>& values() const noexcept { return v_; }
  std::vector<double>& values() noexcept { return v_; }
  double operator[](int i) const noexcept { return v_[i]; }
  double& operator[](int i) noexcept { return v_[i]; }
  double at_center() const noexcept { return v_[mesh_->center()]; }

  std::optional<double> left_limit;
  std::optional<double> right_limit;

  GridFunction& operator+=(const GridFunction& o);
  GridFunction& operator-=(const GridFunction& o);
  GridFunction& operator*=(double s);

 private:
  MeshPtr mesh_;
  std::vector<double> v_;
};

GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
/// Pointwise product.
GridFunction operator*(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);
/// alpha * a + beta * b
GridFunction combine(double alpha, const GridFunction& a, double beta, const GridFunction& b);

enum class Side { left, right };

/// Extrapolated value with an error estimate.
struct Limit {
  double value = 0.0;
  double error = 0.0;
  bool divergent = false;
};

enum class LimitModel {
  /// f ~ A + sum_k B_k (1 -+ x)^{alpha_k}; Wynn epsilon on geometric samples.
  power,
  /// f ~ A + B/L + C/L^2 with L = ln((1 -+ x)/3); least squares.
  log,
};

GridFunction differentiate(const GridFunction& f, int order);

/// Local 8-point Lagrange interpolation in u = artanh x; x must lie in (-1, 1).
double interpolate(const GridFunction& f, double x);

/// F(x) = int_base^x f(s) ds. base is -1, 1, or a mesh node.
/// Endpoint bases add an extrapolated tail; a divergent tail throws.
GridFunction cumulative_integral(const GridFunction& f, double base);

/// F(x) = int_base^x g(s)/(1-s^2) ds, evaluated as int g du.
GridFunction cumulative_log_singular(const GridFunction& g, double base);

/// int_{-1}^{1} g(s)/(1-s^2) ds; divergent when g(+-1) != 0.
Limit log_singular_integral(const GridFunction& g);

/// int_{-1}^{1} f(s) ds.
Limit integral(const GridFunction& f);

/// Limit of f (times weight, when given) at the endpoint.
Limit endpoint_limit(const GridFunction& f, Side side, LimitModel model = LimitModel::power,
                     const GridFunction* weight = nullptr);

/// Wynn epsilon acceleration of a sequence; error is the last diagonal change.
Limit wynn_epsilon(const std::vector<double>& seq);

void write_csv(const GridFunction& f, std::ostream& os);
nlohmann::json to_json(const GridFunction& f);
GridFunction grid_function_from_json(const nlohmann::json& j);

}  // namespace homax
