#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

#include "homax/simd/kernels.hpp"

namespace homax::simd {
namespace {

void banded_apply(std::size_t n, int width, const double* w, const int* start, const double* f,
                  double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const int st = start[i];
    if (start[i + 1] != st + 1) {
      for (std::size_t j = i; j < i + 2; ++j) out[j] = dot2(width, n, w + j, f + start[j]);
      continue;
    }
    float64x2_t s = vdupq_n_f64(0.0);
    float64x2_t c = vdupq_n_f64(0.0);
    for (int k = 0; k < width; ++k) {
      const float64x2_t a = vld1q_f64(w + k * n + i);
      const float64x2_t b = vld1q_f64(f + st + k);
      const float64x2_t p = vmulq_f64(a, b);
      const float64x2_t pe = vfmaq_f64(vnegq_f64(p), a, b);
      const float64x2_t t = vaddq_f64(s, p);
      const float64x2_t z = vsubq_f64(t, s);
      const float64x2_t se = vaddq_f64(vsubq_f64(s, vsubq_f64(t, z)), vsubq_f64(p, z));
      s = t;
      c = vaddq_f64(c, vaddq_f64(pe, se));
    }
    vst1q_f64(out + i, vaddq_f64(s, c));
  }
  for (; i < n; ++i) out[i] = dot2(width, n, w + i, f + start[i]);
}

double weighted_abs_max(std::size_t n, const double* w, const double* f) {
  float64x2_t m = vdupq_n_f64(0.0);
  bool any_nan = false;
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t v = vabsq_f64(vmulq_f64(vld1q_f64(w + i), vld1q_f64(f + i)));
    const uint64x2_t ordered = vceqq_f64(v, v);
    if ((vgetq_lane_u64(ordered, 0) & vgetq_lane_u64(ordered, 1)) != ~0ULL) any_nan = true;
    m = vmaxnmq_f64(m, v);
  }
  double r = vmaxnmvq_f64(m);
  for (; i < n; ++i) {
    const double v = std::fabs(w[i] * f[i]);
    if (v != v) any_nan = true;
    if (v > r) r = v;
  }
  return any_nan ? std::nan("") : r;
}

void multiply(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby(std::size_t n, double alpha, const double* a, double beta, const double* b,
           double* out) {
  const float64x2_t va = vdupq_n_f64(alpha);
  const float64x2_t vb = vdupq_n_f64(beta);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t x = vmulq_f64(va, vld1q_f64(a + i));
    const float64x2_t y = vmulq_f64(vb, vld1q_f64(b + i));
    vst1q_f64(out + i, vaddq_f64(x, y));
  }
  for (; i < n; ++i) out[i] = alpha * a[i] + beta * b[i];
}

}  // namespace

const KernelTable& neon_kernels() noexcept {
  static const KernelTable table{Isa::neon, banded_apply, weighted_abs_max, multiply, axpby};
  return table;
}

}  // namespace homax::simd

#endif
