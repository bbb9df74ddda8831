#include "chatlearn/review/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "chatlearn/error.hpp"
#include "chatlearn/simd/dot.hpp"

namespace chatlearn::review {

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::dimension_mismatch,
                "cosine of " + std::to_string(a.size()) + "-d and " + std::to_string(b.size()) + "-d vectors");
  }
  const auto r = simd::dot_norms(a, b);
  if (r.norm_a_sq == 0.0 || r.norm_b_sq == 0.0) throw Error(Errc::zero_vector, "cosine of a zero vector");
  return std::clamp(r.dot / (std::sqrt(r.norm_a_sq) * std::sqrt(r.norm_b_sq)), -1.0, 1.0);
}

}  // namespace chatlearn::review
