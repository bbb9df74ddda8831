#include "chatlearn/llm/gateway.hpp"

#include <algorithm>

#include "chatlearn/error.hpp"
#include "chatlearn/llm/json_extract.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn::llm {

class Gateway::Slot {
 public:
  explicit Slot(std::counting_semaphore<kMaxInFlightLimit>& sem) : sem_(sem) { sem_.acquire(); }
  ~Slot() { sem_.release(); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  std::counting_semaphore<kMaxInFlightLimit>& sem_;
};

Gateway::Gateway(std::shared_ptr<ChatProvider> chat, std::shared_ptr<EmbeddingProvider> embedder,
                 GatewayOptions options)
    : chat_(std::move(chat)),
      embedder_(std::move(embedder)),
      options_(options),
      in_flight_(static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(options.max_in_flight, 1, kMaxInFlightLimit))) {
  if (!chat_ || !embedder_) throw Error(Errc::bad_config, "gateway needs a chat and an embedding provider");
}

ProviderResponse Gateway::complete(std::string_view prompt, OutputFormat format) {
  return complete(prompt, format, options_.decoding);
}

ProviderResponse Gateway::complete(std::string_view prompt, OutputFormat format, const DecodingParams& params) {
  if (prompt.empty()) throw Error(Errc::empty_text, "prompt is empty");
  const std::string owned(prompt);
  const auto start = std::chrono::steady_clock::now();
  std::string raw;
  {
    Slot slot(in_flight_);
    for (int attempt = 0;; ++attempt) {
      try {
        raw = chat_->complete(owned, params, options_.timeout);
        break;
      } catch (const TransportError& e) {
        if (attempt >= 1) throw Error(Errc::provider_unavailable, e.what());
      }
    }
  }
  ProviderResponse r;
  r.latency = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  r.parsed = parse_output(raw, format);
  r.raw_text = std::move(raw);
  return r;
}

EmbeddingVector Gateway::embed(std::string_view text) {
  const auto trimmed = text::trim(text);
  if (trimmed.empty()) throw Error(Errc::empty_text, "cannot embed empty text");
  EmbeddingVector v;
  {
    Slot slot(in_flight_);
    for (int attempt = 0;; ++attempt) {
      try {
        v.values = embedder_->embed(trimmed, options_.timeout);
        break;
      } catch (const TransportError& e) {
        if (attempt >= 1) throw Error(Errc::provider_unavailable, e.what());
      }
    }
  }
  if (v.values.empty()) throw Error(Errc::embedding_failure, "provider returned an empty vector");
  std::lock_guard lock(dim_mu_);
  if (!dimension_) {
    dimension_ = v.dimension();
  } else if (*dimension_ != v.dimension()) {
    throw Error(Errc::dimension_mismatch, "embedding dimension changed from " + std::to_string(*dimension_) +
                                              " to " + std::to_string(v.dimension()));
  }
  return v;
}

std::optional<std::size_t> Gateway::embedding_dimension() const {
  std::lock_guard lock(dim_mu_);
  return dimension_;
}

}  // namespace chatlearn::llm
