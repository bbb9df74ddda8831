#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "chatlearn/llm/provider.hpp"

namespace chatlearn::llm {

/// Scripted provider for tests and replays.
///
/// Script lines (JSONL, blank lines and lines starting with '#' ignored):
///   {"match": ["substr", ...], "reply": "text", "times": 1}
///   {"match": "substr", "fail": "transport" | "timeout"}
///   {"embed": "text", "vector": [0.1, 0.2]}      // zero-padded, normalized
///   {"embed": "text", "fail": "transport"}
///
/// Completion rules are tried in order; the first rule whose substrings all
/// occur in the prompt and that has uses left wins. An unmatched prompt is a
/// transport failure. Unscripted embeddings are pseudo-random unit vectors
/// seeded by a stable hash of the normalized text.
class MockProvider final : public ChatProvider, public EmbeddingProvider {
 public:
  static constexpr std::size_t kDimension = 64;

  MockProvider() = default;

  static MockProvider from_jsonl(std::string_view script);
  static MockProvider from_file(const std::filesystem::path& path);

  void add_reply(std::vector<std::string> match, std::string reply, std::optional<int> times = std::nullopt);
  void add_failure(std::vector<std::string> match, bool timeout = false, std::optional<int> times = std::nullopt);
  void set_embedding(std::string_view text, std::vector<double> values);
  void fail_embedding(std::string_view text);

  std::string complete(const std::string& prompt, const DecodingParams& params,
                       std::chrono::milliseconds timeout) override;
  std::vector<double> embed(const std::string& text, std::chrono::milliseconds timeout) override;
  std::string id() const override { return "mock-64"; }

  /// Every prompt received, in arrival order.
  std::vector<std::string> prompts() const;

  MockProvider(MockProvider&& other) noexcept;
  MockProvider& operator=(MockProvider&& other) noexcept;

 private:
  enum class Outcome { Reply, Transport, Timeout };
  struct Rule {
    std::vector<std::string> match;
    Outcome outcome = Outcome::Reply;
    std::string reply;
    std::optional<int> remaining;
  };
  struct ScriptedEmbedding {
    std::vector<double> values;
    bool fail = false;
  };

  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::map<std::string, ScriptedEmbedding> embeddings_;  // keyed by normalized text
  std::vector<std::string> prompts_;
};

/// Deterministic hash-seeded unit vector used for unscripted mock embeddings.
std::vector<double> hashed_unit_vector(std::string_view normalized_text, std::size_t dimension);

std::uint64_t fnv1a64(std::string_view s) noexcept;

}  // namespace chatlearn::llm
