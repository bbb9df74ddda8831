#pragma once

#include <span>

#include "chatlearn/llm/gateway.hpp"

namespace chatlearn::review {

/// dot(a, b) / (|a| |b|), clamped to [-1, 1]. Throws dimension-mismatch or
/// zero-vector.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

inline double cosine_similarity(const llm::EmbeddingVector& a, const llm::EmbeddingVector& b) {
  return cosine_similarity(std::span<const double>(a.values), std::span<const double>(b.values));
}

}  // namespace chatlearn::review
