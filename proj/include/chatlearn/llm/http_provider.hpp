#pragma once

#include <string>

#include "chatlearn/llm/provider.hpp"

namespace chatlearn::llm {

struct HttpProviderOptions {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string chat_model;
  std::string embed_model;
  std::string api_key;

  /// Reads LLM_BASE_URL, LLM_CHAT_MODEL, LLM_EMBED_MODEL, LLM_API_KEY.
  static HttpProviderOptions from_env();
};

/// Speaks the common chat-completions / embeddings JSON endpoints:
///   POST {base}/chat/completions  {"model", "messages", "temperature", ...}
///   POST {base}/embeddings        {"model", "input"}
class HttpProvider final : public ChatProvider, public EmbeddingProvider {
 public:
  explicit HttpProvider(HttpProviderOptions options);

  std::string complete(const std::string& prompt, const DecodingParams& params,
                       std::chrono::milliseconds timeout) override;
  std::vector<double> embed(const std::string& text, std::chrono::milliseconds timeout) override;
  std::string id() const override { return "http:" + options_.embed_model; }

 private:
  std::string post(const std::string& endpoint, const std::string& body, std::chrono::milliseconds timeout);

  HttpProviderOptions options_;
  std::string origin_;       // scheme://host[:port]
  std::string path_prefix_;  // e.g. /v1
};

}  // namespace chatlearn::llm
