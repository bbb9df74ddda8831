#pragma once

#include <chrono>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/llm/prompt.hpp"
#include "chatlearn/llm/provider.hpp"

namespace chatlearn::llm {

struct EmbeddingVector {
  std::vector<double> values;

  std::size_t dimension() const noexcept { return values.size(); }
  bool operator==(const EmbeddingVector&) const = default;
};

struct ProviderResponse {
  std::string raw_text;
  std::optional<nlohmann::json> parsed;  // present iff raw_text matches the format
  std::chrono::milliseconds latency{0};
};

struct GatewayOptions {
  std::chrono::milliseconds timeout{15000};
  std::size_t max_in_flight = 8;
  DecodingParams decoding;
};

/// Front door for chat completions and embeddings. Shared by all sessions;
/// at most `max_in_flight` provider calls run at once, extra callers block.
class Gateway {
 public:
  static constexpr std::size_t kMaxInFlightLimit = 1024;

  Gateway(std::shared_ptr<ChatProvider> chat, std::shared_ptr<EmbeddingProvider> embedder,
          GatewayOptions options = {});

  /// One retry on TransportError, then provider-unavailable. Timeouts are not
  /// retried.
  ProviderResponse complete(std::string_view prompt, OutputFormat format = OutputFormat::PlainText);
  ProviderResponse complete(std::string_view prompt, OutputFormat format, const DecodingParams& params);

  /// Throws empty-text for blank input. The first vector fixes the dimension;
  /// later mismatches raise dimension-mismatch.
  EmbeddingVector embed(std::string_view text);

  std::string embedding_provider_id() const { return embedder_->id(); }
  std::optional<std::size_t> embedding_dimension() const;
  const GatewayOptions& options() const noexcept { return options_; }

 private:
  class Slot;

  std::shared_ptr<ChatProvider> chat_;
  std::shared_ptr<EmbeddingProvider> embedder_;
  GatewayOptions options_;
  std::counting_semaphore<kMaxInFlightLimit> in_flight_;
  mutable std::mutex dim_mu_;
  std::optional<std::size_t> dimension_;
};

}  // namespace chatlearn::llm
