#pragma once

#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/core/session.hpp"
#include "chatlearn/metrics/event_log.hpp"

namespace chatlearn::metrics {

struct RecallItem {
  std::string expression;
  int confidence = 1;  // 1..7
  int difficulty = 1;  // 1..7

  bool operator==(const RecallItem&) const = default;
};

struct RecallSubmission {
  std::vector<RecallItem> items;
  double submitted_within_seconds = 0.0;

  static RecallSubmission from_json(const nlohmann::json& j);
  nlohmann::ordered_json to_json() const;
};

struct RecalledExpression {
  std::string expression;             // normalized form of the first variant
  std::vector<std::string> variants;  // as submitted
  int confidence = 0;                 // max over variants
  double difficulty = 0.0;            // mean over variants
  bool flagged = false;               // some variant passed only the fuzzy rule

  bool operator==(const RecalledExpression&) const = default;
};

struct RecallResult {
  std::vector<RecalledExpression> valid_items;
  std::size_t recall_quantity = 0;
  double mean_confidence = 0.0;
  double mean_difficulty = 0.0;
  std::vector<std::string> flagged_for_review;
  std::vector<std::string> rejected;

  bool operator==(const RecallResult&) const = default;

  nlohmann::ordered_json to_json() const;
  static RecallResult from_json(const nlohmann::json& j);
};

/// Words ignored when comparing variants.
std::span<const std::string_view> recall_stopwords() noexcept;

/// Lowercase, collapsed whitespace, edge punctuation stripped.
std::string normalize_recall_item(std::string_view s);

/// Stopword-filtered, lowercased, sorted word tokens.
std::vector<std::string> token_bag(std::string_view s);

/// True iff the two items are variants of one expression.
bool same_expression(std::string_view a, std::string_view b);

/// Everything the NNS saw in the target language: NS messages plus
/// system-generated translations and explanations. One segment per text.
std::vector<std::string> recall_corpus(std::span<const core::Message> messages, std::span<const LogEvent> events);

/// Core validity and merge rules, independent of session state.
RecallResult evaluate_recall(std::span<const std::string> corpus, const RecallSubmission& submission);

/// Checks state (RecallTest) and time budget, then evaluates.
RecallResult validate_recall(const core::Session& session, std::span<const LogEvent> events,
                             const RecallSubmission& submission);

}  // namespace chatlearn::metrics
