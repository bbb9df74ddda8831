#include <cstdlib>
#include <string_view>

#include "chatlearn/simd/dot.hpp"

namespace chatlearn::simd {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "scalar";
}

std::optional<Kernels> kernels_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return Kernels{Isa::Scalar, &scalar::dot, &scalar::dot_norms};
    case Isa::Avx2:
#if defined(__x86_64__) || defined(_M_X64)
      if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return Kernels{Isa::Avx2, &avx2::dot, &avx2::dot_norms};
      }
#endif
      return std::nullopt;
    case Isa::Neon:
#if defined(__aarch64__)
      return Kernels{Isa::Neon, &neon::dot, &neon::dot_norms};
#else
      return std::nullopt;
#endif
  }
  return std::nullopt;
}

const Kernels& active() noexcept {
  static const Kernels chosen = [] {
    if (const char* forced = std::getenv("CHATLEARN_SIMD"); forced && std::string_view(forced) == "scalar") {
      return *kernels_for(Isa::Scalar);
    }
    for (Isa isa : {Isa::Avx2, Isa::Neon}) {
      if (auto k = kernels_for(isa)) return *k;
    }
    return *kernels_for(Isa::Scalar);
  }();
  return chosen;
}

}  // namespace chatlearn::simd
