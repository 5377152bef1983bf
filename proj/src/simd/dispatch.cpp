#include <cstdlib>
#include <string>

#include "homax/errors.hpp"
#include "homax/simd/kernels.hpp"

namespace homax::simd {

std::string_view isa_name(Isa isa) noexcept {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::scalar};
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) out.push_back(Isa::avx2);
#endif
#if defined(__aarch64__)
  out.push_back(Isa::neon);
#endif
  return out;
}

const KernelTable& kernels_for(Isa isa) {
  for (Isa a : available_isas()) {
    if (a != isa) continue;
    switch (isa) {
      case Isa::scalar: return scalar_kernels();
#if defined(__x86_64__) || defined(__i386__)
      case Isa::avx2: return avx2_kernels();
#endif
#if defined(__aarch64__)
      case Isa::neon: return neon_kernels();
#endif
      default: break;
    }
  }
  throw ParameterError("kernel variant not available on this CPU: " + std::string(isa_name(isa)));
}

namespace {

const KernelTable& select() {
  const auto isas = available_isas();
  if (const char* env = std::getenv("HOMAX_SIMD")) {
    const std::string want(env);
    for (Isa a : isas)
      if (isa_name(a) == want) return kernels_for(a);
  }
  return kernels_for(isas.back());
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace homax::simd
