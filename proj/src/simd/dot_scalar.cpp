#include "chatlearn/simd/dot.hpp"

namespace chatlearn::simd::scalar {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

DotNorms dot_norms(const double* a, const double* b, std::size_t n) noexcept {
  DotNorms r;
  for (std::size_t i = 0; i < n; ++i) {
    r.dot += a[i] * b[i];
    r.norm_a_sq += a[i] * a[i];
    r.norm_b_sq += b[i] * b[i];
  }
  return r;
}

}  // namespace chatlearn::simd::scalar
