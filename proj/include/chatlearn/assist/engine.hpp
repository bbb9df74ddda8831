#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/core/session.hpp"
#include "chatlearn/error.hpp"
#include "chatlearn/llm/gateway.hpp"
#include "chatlearn/metrics/event_log.hpp"
#include "chatlearn/review/store.hpp"

namespace chatlearn::assist {

struct ByteSpan {
  std::size_t offset = 0;
  std::size_t length = 0;

  bool operator==(const ByteSpan&) const = default;
};

/// Maximal runs of native-script (Han) characters, ordered, non-overlapping.
/// Digits, spaces and punctuation break a run.
std::vector<ByteSpan> detect_l1_segments(std::string_view text);

enum class Direction { ToNative, ToTarget };  // L2 -> L1, L1/mixed -> L2

struct TranslationResult {
  std::string source_text;
  std::string translated_text;
  Direction direction = Direction::ToNative;
  std::vector<core::MessageId> context_used;

  bool operator==(const TranslationResult&) const = default;
  nlohmann::ordered_json to_json() const;
};

struct Explanation {
  std::string selection;
  std::string explanation_text;
  core::MessageId source_message_id = 0;

  nlohmann::ordered_json to_json() const;
};

struct ExtractionMapping {
  std::vector<std::pair<std::string, std::string>> pairs;  // (l1 phrase, l2 span); span may be ""
  std::string translated_text;

  bool operator==(const ExtractionMapping&) const = default;
  nlohmann::ordered_json to_json() const;
};

struct ExpressionBuild {
  TranslationResult translation;
  std::optional<ExtractionMapping> mapping;  // ChatLearn with L1 segments only
  std::vector<review::ReviewCard> cards;     // expression-driven recall
  bool degraded = false;                     // an extractor stage failed
};

/// Raised by extract_and_map when stage 1 or 3 yields nothing usable.
class StageFailure : public Error {
 public:
  StageFailure(int stage, const std::string& what, std::optional<std::string> translated_text = std::nullopt)
      : Error(Errc::stage_parse_failure, "stage " + std::to_string(stage) + ": " + what),
        stage_(stage),
        translated_text_(std::move(translated_text)) {}

  int stage() const noexcept { return stage_; }
  /// Stage-2 output, when the failure happened after it.
  const std::optional<std::string>& translated_text() const noexcept { return translated_text_; }

 private:
  int stage_;
  std::optional<std::string> translated_text_;
};

/// Per-message cache of full comprehension results.
class ComprehensionCache {
 public:
  std::optional<TranslationResult> get(core::MessageId id) const;
  void put(core::MessageId id, TranslationResult r);

 private:
  mutable std::mutex mu_;
  std::map<core::MessageId, TranslationResult> results_;
};

/// Everything an assist call touches for one session.
struct SessionContext {
  core::Session& session;
  metrics::EventLog& log;
  review::ReviewStore& store;
  ComprehensionCache& cache;
};

struct ExtractionRequest {
  std::string draft;
  std::vector<core::Message> context;
  std::string native_language;  // tags, e.g. "zh"
  std::string target_language;
};

class AssistEngine {
 public:
  explicit AssistEngine(llm::Gateway& gateway) : gateway_(gateway) {}

  /// Translates an NS message into the native language. Cached per message;
  /// every call logs a FullComprehension event.
  TranslationResult comprehend_full(const SessionContext& ctx, core::MessageId message_id);

  /// Explains a selected fragment of a received message and captures it.
  Explanation explore_expression(const SessionContext& ctx, core::MessageId message_id, std::string_view selection);

  /// Translates a draft; in ChatLearn also runs expression-driven recall and,
  /// when the draft has L1 segments, the extractor.
  ExpressionBuild build_expression(const SessionContext& ctx, std::string_view draft);

  /// Three-stage extract / translate / map pipeline. Unverifiable spans become
  /// "" and, when `log` is given, are recorded as Degradation events.
  ExtractionMapping extract_and_map(const ExtractionRequest& request, metrics::EventLog* log = nullptr);

 private:
  std::string translate(std::string_view text, std::string_view from_tag, std::string_view to_tag,
                        std::span<const core::Message> context, metrics::EventLog* log);

  llm::Gateway& gateway_;
};

}  // namespace chatlearn::assist
