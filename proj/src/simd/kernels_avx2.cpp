#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>

#include "homax/simd/kernels.hpp"

namespace homax::simd {
namespace {

void banded_apply(std::size_t n, int width, const double* w, const int* start, const double* f,
                  double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const int st = start[i];
    if (start[i + 1] != st + 1 || start[i + 2] != st + 2 || start[i + 3] != st + 3) {
      for (std::size_t j = i; j < i + 4; ++j) out[j] = dot2(width, n, w + j, f + start[j]);
      continue;
    }
    __m256d s = _mm256_setzero_pd();
    __m256d c = _mm256_setzero_pd();
    for (int k = 0; k < width; ++k) {
      const __m256d a = _mm256_loadu_pd(w + k * n + i);
      const __m256d b = _mm256_loadu_pd(f + st + k);
      const __m256d p = _mm256_mul_pd(a, b);
      const __m256d pe = _mm256_fmsub_pd(a, b, p);
      const __m256d t = _mm256_add_pd(s, p);
      const __m256d z = _mm256_sub_pd(t, s);
      const __m256d se = _mm256_add_pd(_mm256_sub_pd(s, _mm256_sub_pd(t, z)), _mm256_sub_pd(p, z));
      s = t;
      c = _mm256_add_pd(c, _mm256_add_pd(pe, se));
    }
    _mm256_storeu_pd(out + i, _mm256_add_pd(s, c));
  }
  for (; i < n; ++i) out[i] = dot2(width, n, w + i, f + start[i]);
}

double weighted_abs_max(std::size_t n, const double* w, const double* f) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  __m256d nan = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d v =
        _mm256_andnot_pd(sign, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(f + i)));
    nan = _mm256_or_pd(nan, _mm256_cmp_pd(v, v, _CMP_UNORD_Q));
    m = _mm256_max_pd(m, v);
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = 0.0;
  for (double l : lanes)
    if (l > r) r = l;
  bool any_nan = _mm256_movemask_pd(nan) != 0;
  for (; i < n; ++i) {
    const double v = std::fabs(w[i] * f[i]);
    if (v != v) any_nan = true;
    if (v > r) r = v;
  }
  return any_nan ? std::nan("") : r;
}

void multiply(std::size_t n, const double* a, const double* b, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void axpby(std::size_t n, double alpha, const double* a, double beta, const double* b,
           double* out) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d x = _mm256_mul_pd(va, _mm256_loadu_pd(a + i));
    const __m256d y = _mm256_mul_pd(vb, _mm256_loadu_pd(b + i));
    _mm256_storeu_pd(out + i, _mm256_add_pd(x, y));
  }
  for (; i < n; ++i) out[i] = alpha * a[i] + beta * b[i];
}

}  // namespace

const KernelTable& avx2_kernels() noexcept {
  static const KernelTable table{Isa::avx2, banded_apply, weighted_abs_max, multiply, axpby};
  return table;
}

}  // namespace homax::simd

#endif
