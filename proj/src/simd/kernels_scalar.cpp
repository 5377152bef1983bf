#include <cmath>

#include "homax/simd/kernels.hpp"

namespace homax::simd {

double dot2(int width, std::size_t stride, const double* w, const double* f) {
  double s = 0.0, c = 0.0;
  for (int k = 0; k < width; ++k) {
    const double a = w[k * stride];
    const double p = a * f[k];
    const double pe = std::fma(a, f[k], -p);
    const double t = s + p;
    const double z = t - s;
    const double se = (s - (t - z)) + (p - z);
    s = t;
    c = c + (pe + se);
  }
  return s + c;
}

namespace {

void banded_apply(std::size_t n, int width, const double* w, const int* start, const double* f,
                  double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = dot2(width, n, w + i, f + start[i]);
}

double weighted_abs_max(std::size_t n, const double* w, const double* f) {
  double m = 0.0;
  bool nan = false;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::fabs(w[i] * f[i]);
    if (v != v) nan = true;
    if (v > m) m = v;
  }
  return nan ? std::nan("") : m;
}

void multiply(std::size_t n, const double* a, const double* b, double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby(std::size_t n, double alpha, const double* a, double beta, const double* b,
           double* out) {
  for (std::size_t i = 0; i < n; ++i) out[i] = alpha * a[i] + beta * b[i];
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::scalar, banded_apply, weighted_abs_max, multiply, axpby};
  return table;
}

}  // namespace homax::simd
