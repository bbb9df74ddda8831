#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

// Inner-product kernels behind cosine similarity. The scalar versions are the
// reference; vector variants are selected once at runtime from CPU features
// and must agree with the reference to within rounding.

namespace chatlearn::simd {

enum class Isa { Scalar, Avx2, Neon };

std::string_view to_string(Isa isa) noexcept;

struct DotNorms {
  double dot = 0.0;
  double norm_a_sq = 0.0;
  double norm_b_sq = 0.0;
};

using DotFn = double (*)(const double* a, const double* b, std::size_t n) noexcept;
using DotNormsFn = DotNorms (*)(const double* a, const double* b, std::size_t n) noexcept;

struct Kernels {
  Isa isa;
  DotFn dot;
  DotNormsFn dot_norms;
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n) noexcept;
DotNorms dot_norms(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n) noexcept;
DotNorms dot_norms(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, std::size_t n) noexcept;
DotNorms dot_norms(const double* a, const double* b, std::size_t n) noexcept;
}  // namespace neon
#endif

/// Kernels for `isa` if compiled in and supported by this CPU.
std::optional<Kernels> kernels_for(Isa isa) noexcept;

/// Best available kernels; resolved on first use. CHATLEARN_SIMD=scalar forces
/// the reference path.
const Kernels& active() noexcept;

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

inline DotNorms dot_norms(std::span<const double> a, std::span<const double> b) noexcept {
  return active().dot_norms(a.data(), b.data(), a.size() < b.size() ? a.size() : b.size());
}

}  // namespace chatlearn::simd
