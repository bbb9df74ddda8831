#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "chatlearn/core/session.hpp"
#include "chatlearn/metrics/event_log.hpp"
#include "chatlearn/metrics/recall.hpp"

namespace chatlearn::metrics {

/// Share of native-script tokens in a draft; 0 for empty input.
double l1_ratio(std::string_view draft_text);

struct LearningOpportunities {
  std::uint64_t comprehension = 0;
  std::uint64_t expression = 0;

  bool operator==(const LearningOpportunities&) const = default;
};

struct MetricsReport {
  std::uint64_t expression_support_count = 0;
  double first_language_usage_ratio = 0.0;
  std::uint64_t expression_l1_tokens = 0;
  std::uint64_t expression_total_tokens = 0;
  std::uint64_t full_comprehension_count = 0;
  std::uint64_t partial_comprehension_count = 0;
  LearningOpportunities learning_opportunities_by_source;
  std::uint64_t card_interaction_count = 0;
  std::uint64_t card_trigger_frequency = 0;
  std::uint64_t message_count = 0;  // NNS messages
  std::uint64_t message_token_total = 0;
  std::optional<RecallResult> recall;

  bool operator==(const MetricsReport&) const = default;

  nlohmann::ordered_json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
  /// Aligned two-column text table.
  std::string to_table() const;
};

/// Pure fold over the event log.
MetricsReport fold_events(std::span<const LogEvent> events);

/// Session must be in RecallTest or Closed, else session-not-finished.
MetricsReport compute_report(core::SessionState state, std::span<const LogEvent> events,
                             std::optional<RecallResult> recall = std::nullopt);

}  // namespace chatlearn::metrics
