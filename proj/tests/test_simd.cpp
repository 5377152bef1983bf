#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <vector>

#include "homax/mesh.hpp"
#include "homax/simd/kernels.hpp"
#include "support.hpp"

using namespace homax;
using homax::testing::Gen;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

std::vector<double> random_vec(Gen& g, std::size_t n, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = g.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("scalar variant is always available and listed first") {
  const auto isas = simd::available_isas();
  REQUIRE(!isas.empty());
  CHECK(isas.front() == simd::Isa::scalar);
  CHECK(simd::kernels_for(simd::Isa::scalar).isa == simd::Isa::scalar);
}

TEST_CASE("every variant matches scalar bit for bit") {
  const auto& ref = simd::scalar_kernels();
  for (simd::Isa isa : simd::available_isas()) {
    const auto& k = simd::kernels_for(isa);
    CAPTURE(simd::isa_name(isa));
    homax::testing::for_all(11, 25, [&](Gen& g) {
      const std::size_t n = static_cast<std::size_t>(g.integer(1, 300));
      const int width = g.integer(1, 9);
      const std::size_t len = n + width;
      auto f = random_vec(g, len);
      auto w = random_vec(g, n * width);
      std::vector<int> start(n);
      for (std::size_t i = 0; i < n; ++i) {
        // Mostly contiguous shifts with occasional clamped rows, like mesh stencils.
        start[i] = (g.integer(0, 9) == 0) ? g.integer(0, static_cast<int>(n)) : static_cast<int>(i);
      }
      std::vector<double> a(n), b(n);
      ref.banded_apply(n, width, w.data(), start.data(), f.data(), a.data());
      k.banded_apply(n, width, w.data(), start.data(), f.data(), b.data());
      CHECK(bit_equal(a, b));

      auto x = random_vec(g, n, -1e3, 1e3);
      auto y = random_vec(g, n, -1e3, 1e3);
      CHECK(ref.weighted_abs_max(n, x.data(), y.data()) == k.weighted_abs_max(n, x.data(), y.data()));

      ref.multiply(n, x.data(), y.data(), a.data());
      k.multiply(n, x.data(), y.data(), b.data());
      CHECK(bit_equal(a, b));

      const double alpha = g.uniform(-3, 3), beta = g.uniform(-3, 3);
      ref.axpby(n, alpha, x.data(), beta, y.data(), a.data());
      k.axpby(n, alpha, x.data(), beta, y.data(), b.data());
      CHECK(bit_equal(a, b));
    });
  }
}

TEST_CASE("weighted_abs_max propagates NaN and handles empty input") {
  for (simd::Isa isa : simd::available_isas()) {
    const auto& k = simd::kernels_for(isa);
    std::vector<double> w(9, 1.0), f{1, -7, 3, 2, 0, 1, 1, 1, 1};
    CHECK(k.weighted_abs_max(9, w.data(), f.data()) == 7.0);
    f[6] = std::nan("");
    CHECK(std::isnan(k.weighted_abs_max(9, w.data(), f.data())));
    CHECK(k.weighted_abs_max(0, w.data(), f.data()) == 0.0);
  }
}

TEST_CASE("mesh derivatives agree across variants") {
  auto mesh = Mesh::build(257, 4.0);
  auto f = GridFunction::sample(mesh, [](const Node& p) { return std::sin(3 * p.x) * p.one_minus_sq; });
  const Band& band = mesh->diff(2);
  std::vector<double> a(mesh->size()), b(mesh->size());
  simd::scalar_kernels().banded_apply(band.rows, band.width, band.w.data(), band.start.data(),
                                      f.values().data(), a.data());
  for (simd::Isa isa : simd::available_isas()) {
    simd::kernels_for(isa).banded_apply(band.rows, band.width, band.w.data(), band.start.data(),
                                        f.values().data(), b.data());
    CHECK(bit_equal(a, b));
  }
}
