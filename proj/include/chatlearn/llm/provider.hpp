#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chatlearn::llm {

/// Decoding knobs forwarded to chat providers. Defaults are deterministic.
struct DecodingParams {
  double temperature = 0.0;
  double top_p = 1.0;
  std::optional<int> max_tokens;
  std::optional<std::int64_t> seed;
};

/// Raised by providers for failures worth one retry (connection refused,
/// reset, 5xx). Timeouts are reported as Error(Errc::timeout) instead.
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual std::string complete(const std::string& prompt, const DecodingParams& params,
                               std::chrono::milliseconds timeout) = 0;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual std::vector<double> embed(const std::string& text, std::chrono::milliseconds timeout) = 0;
  /// Stable identifier; vectors from different ids never share a store.
  virtual std::string id() const = 0;
};

}  // namespace chatlearn::llm
