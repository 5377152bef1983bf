#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <boost/math/quadrature/gauss.hpp>
#include <cmath>

#include "homax/errors.hpp"
#include "homax/operators.hpp"
#include "support.hpp"

using namespace homax;
using homax::testing::Gen;

namespace {

MeshPtr mesh() {
  static MeshPtr m = Mesh::build(1025, 4.0);
  return m;
}

double sup_diff(const GridFunction& f, const std::function<double(const Node&)>& g,
                double edge = 1.0) {
  double e = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const Node q = f.mesh()->node(i);
    if (std::fabs(q.x) > edge) continue;
    e = std::max(e, std::fabs(f[i] - g(q)));
  }
  return e;
}

double sup_abs(const GridFunction& f) {
  double e = 0.0;
  for (int i = 0; i < f.size(); ++i) e = std::max(e, std::fabs(f[i]));
  return e;
}

const OperatorContext& ctx_zero() {
  static OperatorContext c = make_context(mesh(), {0, 0, 0}, 0.0);
  return c;
}

const OperatorContext& ctx_landau() {
  static OperatorContext c = make_context(mesh(), {0, 0, 0}, -1.0);
  return c;
}

const OperatorContext& ctx_2a() {
  static OperatorContext c = [] {
    const CTriple cc{-0.9, 0, 0};
    const auto b = gamma_bounds(cc);
    return make_context(mesh(), cc, b.plus, {}, {}, &b);
  }();
  return c;
}

const OperatorContext& ctx_2b() {
  static OperatorContext c = [] {
    const CTriple cc{0, -0.9, 0};
    const auto b = gamma_bounds(cc);
    return make_context(mesh(), cc, b.minus, {}, {}, &b);
  }();
  return c;
}

const OperatorContext& ctx_3() {
  static OperatorContext c = [] {
    const CTriple cc{-0.9, -0.9, cbar3(-0.9, -0.9)};
    return make_context(mesh(), cc, cbar3_gamma(-0.9, -0.9));
  }();
  return c;
}

const OperatorContext& ctx_case3() {
  static OperatorContext c = [] {
    const CTriple cc{-1, -1, 1};
    const auto b = gamma_bounds(cc);
    return make_context(mesh(), cc, 0.5 * (b.minus + b.plus), {}, {}, &b);
  }();
  return c;
}

std::vector<const OperatorContext*> variant_contexts() {
  return {&ctx_landau(), &ctx_2a(), &ctx_2b(), &ctx_3()};
}

/// Smooth xi with xi_theta(+-1) = xi_theta''(0) = 0.
ProfilePair random_xi(Gen& g) {
  const double a0 = g.uniform(-1, 1), a1 = g.uniform(-1, 1), a3 = g.uniform(-1, 1);
  const double b0 = g.uniform(-1, 1), b1 = g.uniform(-1, 1), b2 = g.uniform(-1, 1);
  ProfilePair xi;
  xi.theta = GridFunction::sample(mesh(), [&](const Node& q) {
    const double x = q.x;
    return q.one_minus_sq * (a0 + a1 * x + a0 * x * x + a3 * x * x * x);
  });
  xi.phi = GridFunction::sample(mesh(), [&](const Node& q) { return b0 + b1 * q.x + b2 * q.x * q.x; });
  return xi;
}

ProfilePair random_pair(Gen& g) {
  const double a0 = g.uniform(-1, 1), a1 = g.uniform(-1, 1), a2 = g.uniform(-1, 1);
  const double b0 = g.uniform(-1, 1), b1 = g.uniform(-1, 1), b2 = g.uniform(-1, 1);
  ProfilePair v;
  v.theta = GridFunction::sample(mesh(), [&](const Node& q) {
    return q.one_minus_sq * (a0 + a1 * q.x + a2 * q.x * q.x);
  });
  v.phi = GridFunction::sample(mesh(), [&](const Node& q) {
    return b0 + b1 * q.x + b2 * q.one_minus_sq * q.x;
  });
  return v;
}

double d_at0(const GridFunction& f, int order) { return differentiate(f, order).at_center(); }

}  // namespace

TEST_CASE("compute_ab for U = 1 - 5x") {
  const CTriple c{3, 0, cbar3(3, 0)};
  const auto p = solve_profile(mesh(), c, 1.0);
  const AB ab = compute_ab(p);
  CHECK(sup_diff(ab.b, [](const Node& q) {
          return 2.0 * std::log(q.one_minus) + 3.0 * std::log(q.one_plus);
        }) < 1e-8);
  CHECK(sup_diff(ab.a - ab.b, [](const Node& q) { return -std::log(q.one_minus_sq); }) < 1e-10);
  CHECK(ab.a.at_center() == 0.0);
  CHECK(ab.b.at_center() == 0.0);
  const GridFunction da = differentiate(ab.a, 1);
  double e = 0.0;
  for (int i = 0; i < mesh()->size(); ++i) {
    const Node q = mesh()->node(i);
    if (std::fabs(q.x) > 0.9) continue;
    e = std::max(e, std::fabs(da[i] - (2 * q.x + p.ubar[i]) / q.one_minus_sq));
  }
  CHECK(e < 1e-8);
}

TEST_CASE("compute_ab for U = 0") {
  const AB& ab = {ctx_zero().a(), ctx_zero().b()};
  CHECK(sup_abs(ab.b) < 1e-13);
  CHECK(sup_diff(ab.a, [](const Node& q) { return -std::log(q.one_minus_sq); }) < 1e-12);
}

TEST_CASE("psi against nested quadrature") {
  const auto w = GridFunction::sample(mesh(), [](const Node& q) { return q.one_minus_sq; });
  const PsiResult r = psi(w, w);
  using Q = boost::math::quadrature::gauss<double, 20>;
  auto oracle = [](double x) {
    return Q::integrate(
        [](double t1) {
          return Q::integrate([](double t2) { return Q::integrate([](double s) { return -4.0 * s; }, 0.0, t2); },
                              0.0, t1);
        },
        0.0, x);
  };
  for (double x : {-0.75, -0.5, 0.25, 0.5, 0.875}) {
    const int i = mesh()->find_node(x);
    if (i < 0) continue;
    CHECK(r.psi[i] == doctest::Approx(oracle(x)).epsilon(1e-10));
  }
  CHECK(sup_diff(r.psi, [](const Node& q) { return -std::pow(q.x, 4) / 6.0; }) < 1e-8);
  CHECK(r.at_left == doctest::Approx(oracle(-1.0)).epsilon(1e-8));
  CHECK(r.at_right == doctest::Approx(oracle(1.0)).epsilon(1e-8));
  CHECK(r.psi.at_center() == 0.0);
  CHECK(std::fabs(d_at0(r.psi, 1)) < 1e-12);
  CHECK(std::fabs(d_at0(r.psi, 2)) < 1e-10);
}

TEST_CASE("psi of zero swirl vanishes") {
  const GridFunction z(mesh());
  const auto v = GridFunction::sample(mesh(), [](const Node& q) { return q.x; });
  const PsiResult r = psi(z, v);
  CHECK(sup_abs(r.psi) == 0.0);
  CHECK(r.at_left == 0.0);
  CHECK(r.at_right == 0.0);
}

TEST_CASE("varphi second derivative at 0") {
  const auto& ctx = ctx_zero();
  const auto x = GridFunction::sample(mesh(), [](const Node& q) { return q.x; });
  CHECK(varphi_ddot0(ctx, x) == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(varphi_ddot0(ctx, GridFunction(mesh())) == 0.0);
  // Linear part scales with t, quadratic part with t^2.
  const auto& lc = ctx_landau();
  const auto u = GridFunction::sample(mesh(), [](const Node& q) { return std::sin(q.x) + q.x * q.x; });
  const double l = l_ddot0(lc, u);
  const double quad = varphi_ddot0(lc, u) - l;
  CHECK(varphi_ddot0(lc, 2.0 * u) == doctest::Approx(2 * l + 4 * quad).epsilon(1e-12));
}

TEST_CASE("kernels at U = 0") {
  const auto& ctx = ctx_zero();
  CHECK(ctx.case_tag() == CaseTag::case1);
  CHECK(sup_diff(ctx.kernel(KernelId::v1).theta, [](const Node& q) { return q.one_minus_sq; }) < 1e-12);
  CHECK(sup_diff(ctx.kernel(KernelId::v2).theta,
                 [](const Node& q) { return q.one_minus_sq * q.u; }) < 1e-10);
  CHECK(sup_diff(ctx.kernel(KernelId::v3).phi, [](const Node& q) { return q.x; }) < 1e-12);
  CHECK(sup_diff(ctx.kernel(KernelId::v4).phi, [](const Node&) { return 1.0; }) == 0.0);
  CHECK_THROWS_AS(ctx.kernel(KernelId::v2a), DivergenceError);
  CHECK_THROWS_AS(ctx.kernel(KernelId::v2b), DivergenceError);
  const Functionals f = functionals(ctx, ctx.kernel(KernelId::v3));
  CHECK(f.l3 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("kernels on the Landau profile A = 2") {
  const auto& ctx = ctx_landau();
  CHECK(sup_diff(ctx.exp_minus_b(), [](const Node& q) { return 4.0 / ((2 - q.x) * (2 - q.x)); }) < 1e-11);
  CHECK(sup_diff(ctx.kernel(KernelId::v1).theta,
                 [](const Node& q) { return 4.0 * q.one_minus_sq / ((2 - q.x) * (2 - q.x)); }) < 1e-11);
  CHECK(sup_diff(ctx.kernel(KernelId::v3).phi, [](const Node& q) { return 2 * q.x / (2 - q.x); }) < 1e-11);
}

TEST_CASE("V4 functionals") {
  const auto& ctx = ctx_landau();
  const Functionals f = functionals(ctx, ctx.kernel(KernelId::v4));
  CHECK(f.l1 == 0.0);
  CHECK(f.l2 == 0.0);
  CHECK(std::fabs(f.l3) < 1e-12);
  CHECK(f.l4 == 1.0);
  REQUIRE(f.l2a);
  CHECK(*f.l2a == 0.0);
}

TEST_CASE("variant selection") {
  CHECK(ctx_landau().variant() == Variant::w1);
  CHECK(ctx_2a().variant() == Variant::w2a);
  CHECK(ctx_2b().variant() == Variant::w2b);
  CHECK(ctx_3().variant() == Variant::w3);
  CHECK(ctx_case3().case_tag() == CaseTag::case3);
  CHECK_THROWS_AS(make_context(mesh(), {0, 0, 0}, 2.0), RegionError);
}

TEST_CASE("epsilon lower bounds") {
  CHECK(*epsilon_lower_bound(CaseTag::case1, 1.0, -1.0) == doctest::Approx(0.25));
  CHECK(*epsilon_lower_bound(CaseTag::case1, 2.5, 0.0) == doctest::Approx(0.25));
  CHECK(*epsilon_lower_bound(CaseTag::case2, 2.0, -1.2) == doctest::Approx(0.3));
  CHECK(*epsilon_lower_bound(CaseTag::case3, 2.0, -2.0) == 0.0);
  CHECK_FALSE(epsilon_lower_bound(CaseTag::case1, 3.0, 0.0));
  CHECK(choose_epsilon(CaseTag::case1, 1.0, 0.0) == doctest::Approx(0.27));
  CHECK(choose_epsilon(CaseTag::case1, 2.9, 0.0) == doctest::Approx(0.47));
  CHECK(choose_epsilon(CaseTag::case1, 2.95, 0.0) == doctest::Approx(0.5 * (0.475 + 0.5)));
  CHECK_THROWS_AS(choose_epsilon(CaseTag::case4, 3.0, 0.0), RegionError);
  for (const auto* c : variant_contexts()) {
    const auto lb = epsilon_lower_bound(c->case_tag(), branch_left_value(c->profile().c, c->profile().anchored_left),
                                        branch_right_value(c->profile().c, c->profile().anchored_right));
    REQUIRE(lb);
    CHECK(c->epsilon() > *lb);
    CHECK(c->epsilon() < 0.5);
  }
}

TEST_CASE("V2a and V2b from V1 and V2") {
  for (const auto* c : {&ctx_2a(), &ctx_2b()}) {
    const auto& v1 = c->kernel(KernelId::v1).theta;
    const auto& v2 = c->kernel(KernelId::v2).theta;
    const bool a = c->variant() == Variant::w2a;
    const GridFunction f = cumulative_integral(c->exp_a(), 0.0);
    const Limit tail = endpoint_limit(f, a ? Side::left : Side::right);
    REQUIRE_FALSE(tail.divergent);
    const auto& v = c->kernel(a ? KernelId::v2a : KernelId::v2b).theta;
    const GridFunction expect = combine(1.0, v2, -tail.value, v1);
    double e = 0.0;
    for (int i = 0; i < v.size(); ++i)
      e = std::max(e, std::fabs(v[i] - expect[i]) / std::max(1.0, std::fabs(v1[i])));
    CHECK(e < 1e-8);
  }
}

TEST_CASE("kernel vectors are annihilated by A") {
  for (const auto* c : variant_contexts()) {
    CAPTURE(to_string(c->variant()));
    for (KernelId id : c->basis_ids()) {
      CAPTURE(to_string(id));
      const NormReport r = norm_Y(*c, op_A(*c, c->kernel(id)));
      CHECK_FALSE(r.infinite);
      CHECK(r.total < 1e-6);
    }
  }
}

TEST_CASE("functional matrix is unit lower triangular") {
  for (const auto* c : variant_contexts()) {
    CAPTURE(to_string(c->variant()));
    const auto basis = c->basis();
    const auto ids = c->basis_ids();
    // Rows: defining functionals of the variant.
    auto row = [&](const ProfilePair& v) {
      const Functionals f = functionals(*c, v);
      switch (c->variant()) {
        case Variant::w1: return std::vector<double>{f.l1, f.l2, f.l3, f.l4};
        case Variant::w2a:
        case Variant::w2b: return std::vector<double>{f.l1, f.l3, f.l4};
        case Variant::w3: return std::vector<double>{f.l3, f.l4};
      }
      return std::vector<double>{};
    };
    for (std::size_t j = 0; j < basis.size(); ++j) {
      std::vector<double> col = row(basis[j]);
      if (ids[j] == KernelId::v2a || ids[j] == KernelId::v2b) {
        const double s = col[0];
        for (double& v : col) v /= s;
      }
      for (std::size_t i = 0; i < col.size(); ++i) {
        CAPTURE(i);
        CAPTURE(j);
        if (i == j) CHECK(std::fabs(col[i] - 1.0) < 1e-8);
        if (i < j) CHECK(std::fabs(col[i]) < 1e-8);
      }
    }
  }
}

TEST_CASE("right inverse: L0 W xi = xi") {
  for (const auto* c : variant_contexts()) {
    CAPTURE(to_string(c->variant()));
    testing::for_all(11, 20, [&](Gen& g) {
      const ProfilePair xi = random_xi(g);
      const ProfilePair w = right_inverse(*c, xi);
      const ProfilePair r = op_L(*c, ProfilePair::zero(mesh()), w) - xi;
      const NormReport nr = norm_Y(*c, r);
      const NormReport nx = norm_Y(*c, xi);
      CHECK_FALSE(nr.infinite);
      CHECK(nr.total <= 1e-5 * nx.total);
    });
  }
}

TEST_CASE("right inverse closed forms") {
  const auto& ctx = ctx_zero();
  ProfilePair xi = ProfilePair::zero(mesh());
  xi.phi = GridFunction::sample(mesh(), [](const Node& q) { return q.one_minus_sq; });
  const ProfilePair w = right_inverse(ctx, xi);
  CHECK(sup_diff(w.phi, [](const Node& q) { return 0.5 * q.x * q.x; }) < 1e-12);
  CHECK(sup_abs(right_inverse(ctx, ProfilePair::zero(mesh())).theta) == 0.0);
}

TEST_CASE("variant 3 corrects l''(0) by 2 C_W") {
  const auto& ctx = ctx_3();
  Gen g(5);
  const ProfilePair xi = random_xi(g);
  const ProfilePair w = right_inverse(ctx, xi, Variant::w3);
  const double cw = log_singular_integral(ctx.exp_a() * xi.theta).value / integral(ctx.exp_a()).value;
  CHECK(l_ddot0(ctx, w.theta) == doctest::Approx(d_at0(xi.theta, 2) + 2 * cw).epsilon(1e-8));
}

TEST_CASE("projection") {
  for (const auto* c : variant_contexts()) {
    CAPTURE(to_string(c->variant()));
    for (const auto& v : c->basis()) {
      const ProfilePair p = project(*c, v);
      CHECK(norm_X(*c, p).total < 1e-8);
    }
    testing::for_all(3, 10, [&](Gen& g) {
      const ProfilePair v = random_pair(g);
      const ProfilePair p = project(*c, v);
      const ProfilePair pp = project(*c, p);
      CHECK(norm_X(*c, pp - p).total <= 1e-8);
      const Functionals f = functionals(*c, p);
      CHECK(std::fabs(f.l3) < 1e-8);
      CHECK(std::fabs(f.l4) < 1e-8);
      if (c->variant() != Variant::w3) CHECK(std::fabs(f.l1) < 1e-8);
      if (c->variant() == Variant::w1) CHECK(std::fabs(f.l2) < 1e-8);
    });
  }
}

TEST_CASE("Q bilinearity and structure") {
  const auto& ctx = ctx_landau();
  testing::for_all(7, 5, [&](Gen& g) {
    const ProfilePair u = random_pair(g), u2 = random_pair(g), v = random_pair(g);
    const double a = g.uniform(-2, 2), b = g.uniform(-2, 2);
    const ProfilePair lhs = op_Q(ctx, a * u + b * u2, v);
    const ProfilePair rhs = a * op_Q(ctx, u, v) + b * op_Q(ctx, u2, v);
    CHECK(sup_abs(lhs.theta - rhs.theta) < 1e-10);
    CHECK(sup_abs(lhs.phi - rhs.phi) < 1e-10);
    const ProfilePair q = op_Q(ctx, u, v);
    const Limit ql = endpoint_limit(q.theta, Side::left);
    const Limit qr = endpoint_limit(q.theta, Side::right);
    CHECK(std::fabs(ql.value) < 1e-8);
    CHECK(std::fabs(qr.value) < 1e-8);
    CHECK(std::fabs(d_at0(q.theta, 2)) < 1e-8);
    CHECK(sup_abs(op_Q(ctx, u, ProfilePair::zero(mesh())).theta) == 0.0);
  });
}

TEST_CASE("Q without swirl") {
  const auto& ctx = ctx_landau();
  Gen g(9);
  ProfilePair u = random_pair(g), v = random_pair(g);
  u.phi = GridFunction(mesh());
  v.phi = GridFunction(mesh());
  const ProfilePair q = op_Q(ctx, u, v);
  const GridFunction uv = u.theta * v.theta;
  const double k = 0.25 * d_at0(uv, 2);
  CHECK(sup_diff(q.theta, [&](const Node& n) {
          const int i = mesh()->find_node(n.x);
          return 0.5 * uv[i] + k * n.one_minus_sq;
        }) < 1e-8);
}

TEST_CASE("A structure") {
  const auto& ctx = ctx_landau();
  testing::for_all(8, 5, [&](Gen& g) {
    const ProfilePair u = random_pair(g);
    const ProfilePair a = op_A(ctx, u);
    CHECK(std::fabs(d_at0(a.theta, 2)) < 1e-8);
    const ProfilePair l = op_L(ctx, ProfilePair::zero(mesh()), u);
    CHECK(sup_abs(l.theta - a.theta) == 0.0);
    CHECK(sup_abs(l.phi - a.phi) == 0.0);
  });
  CHECK(sup_abs(op_A(ctx, ProfilePair::zero(mesh())).theta) == 0.0);
}

TEST_CASE("G on multiples of V3 is quadratic") {
  const auto& ctx = ctx_landau();
  const ProfilePair& v3 = ctx.kernel(KernelId::v3);
  const ProfilePair g1 = op_G(ctx, v3);
  const ProfilePair g2 = op_G(ctx, 2.0 * v3);
  CHECK(sup_abs(g2.theta - 4.0 * g1.theta) < 1e-9 * std::max(1.0, sup_abs(g1.theta)));
  CHECK(sup_abs(op_G(ctx, ProfilePair::zero(mesh())).theta) == 0.0);
}

TEST_CASE("linearisation matches finite differences") {
  const auto& ctx = ctx_landau();
  testing::for_all(4, 3, [&](Gen& g) {
    const ProfilePair u = random_pair(g), v = random_pair(g);
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
    CHECK(slope == doctest::Approx(1.0).epsilon(0.2));
  });
}

TEST_CASE("norm examples") {
  const auto& ctx = ctx_landau();
  ProfilePair v = ProfilePair::zero(mesh());
  CHECK(norm_X(ctx, v).total == 0.0);
  v.theta = GridFunction::sample(mesh(), [](const Node& q) { return q.one_minus_sq; });
  const NormReport r = norm_X(ctx, v);
  CHECK(r.terms[0].value == doctest::Approx(1.0).epsilon(1e-12));
  double sum = 0.0;
  for (const auto& t : r.terms) sum += t.value;
  CHECK(r.total == sum);

  const auto& c3 = ctx_case3();
  ProfilePair w = ProfilePair::zero(mesh());
  w.theta = GridFunction::sample(mesh(), [](const Node& q) {
    return 1.0 / (std::log(q.one_plus / 3) * std::log(q.one_minus / 3));
  });
  CHECK(norm_X(c3, w).terms[0].value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("infinite norms are reported") {
  const auto& ctx = ctx_landau();
  ProfilePair v = ProfilePair::zero(mesh());
  v.theta = GridFunction::sample(mesh(), [](const Node&) { return 1.0; });
  const NormReport r = norm_X(ctx, v);
  CHECK(r.infinite);
  CHECK(std::isinf(r.total));
}

TEST_CASE("Y membership enforcement") {
  const auto& ctx = ctx_landau();
  ProfilePair xi = ProfilePair::zero(mesh());
  xi.theta = GridFunction::sample(mesh(), [](const Node& q) { return q.one_minus_sq + 1e-10 * q.x; });
  // xi''(0) = -2 is far above tolerance.
  CHECK(enforce_y(ctx, xi).violated);
  xi.theta = GridFunction::sample(mesh(), [](const Node& q) { return 1e-10 * (1 + q.x); });
  const YMembership m = enforce_y(ctx, xi);
  CHECK(m.corrected);
  CHECK(sup_abs(xi.theta) < 1e-20);
}

TEST_CASE("chat at zero perturbation is c") {
  const auto& ctx = ctx_landau();
  const CTriple c = chat(ctx, ProfilePair::zero(mesh()));
  CHECK(c.c1 == 0.0);
  CHECK(c.c2 == 0.0);
  CHECK(c.c3 == 0.0);
}
