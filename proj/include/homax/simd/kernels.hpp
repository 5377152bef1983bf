#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace homax::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

/// Data-parallel loops shared by the mesh and operator layers.
///
/// Every variant performs the same floating-point operations in the same
/// order, so results are bit-identical across variants.
struct KernelTable {
  Isa isa;

  /// out[i] = sum_{k<width} w[k*n + i] * f[start[i] + k]
  /// Weights are stored column-major (one column per stencil slot). The sum is
  /// compensated (exact products via fma, two-sum on the running total), so it
  /// is as accurate as if computed in twice the working precision.
  void (*banded_apply)(std::size_t n, int width, const double* w, const int* start,
                       const double* f, double* out);

  /// max_i |w[i] * f[i]|; NaN if any product is NaN; 0 for n == 0.
  double (*weighted_abs_max)(std::size_t n, const double* w, const double* f);

  /// out[i] = a[i] * b[i]
  void (*multiply)(std::size_t n, const double* a, const double* b, double* out);

  /// out[i] = alpha * a[i] + beta * b[i]
  void (*axpby)(std::size_t n, double alpha, const double* a, double beta, const double* b,
                double* out);
};

/// Compensated sum_{k<width} w[k*stride] * f[k]; one row of banded_apply.
double dot2(int width, std::size_t stride, const double* w, const double* f);

const KernelTable& scalar_kernels() noexcept;
#if defined(__x86_64__) || defined(__i386__)
const KernelTable& avx2_kernels() noexcept;
#endif
#if defined(__aarch64__)
const KernelTable& neon_kernels() noexcept;
#endif

/// Variants usable on this CPU, scalar first.
std::vector<Isa> available_isas();

const KernelTable& kernels_for(Isa isa);

/// Best available variant. HOMAX_SIMD=scalar|avx2|neon overrides the choice.
const KernelTable& active_kernels();

}  // namespace homax::simd
