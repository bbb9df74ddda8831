#if defined(__aarch64__)
#include <arm_neon.h>

#include "chatlearn/simd/dot.hpp"

namespace chatlearn::simd::neon {

double dot(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double sum = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

DotNorms dot_norms(const double* a, const double* b, std::size_t n) noexcept {
  float64x2_t ab = vdupq_n_f64(0.0);
  float64x2_t aa = vdupq_n_f64(0.0);
  float64x2_t bb = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t va = vld1q_f64(a + i);
    const float64x2_t vb = vld1q_f64(b + i);
    ab = vfmaq_f64(ab, va, vb);
    aa = vfmaq_f64(aa, va, va);
    bb = vfmaq_f64(bb, vb, vb);
  }
  DotNorms r{vaddvq_f64(ab), vaddvq_f64(aa), vaddvq_f64(bb)};
  for (; i < n; ++i) {
    r.dot += a[i] * b[i];
    r.norm_a_sq += a[i] * a[i];
    r.norm_b_sq += b[i] * b[i];
  }
  return r;
}

}  // namespace chatlearn::simd::neon
#endif
