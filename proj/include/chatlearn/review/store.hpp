#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/core/session.hpp"
#include "chatlearn/llm/gateway.hpp"
#include "chatlearn/metrics/event_log.hpp"

namespace chatlearn::review {

enum class Source { Comprehension, Expression };
enum class Trigger { ContextDriven, ExpressionDriven };

std::string_view to_string(Source s) noexcept;
std::string_view to_string(Trigger t) noexcept;
Source source_from_string(std::string_view s);
Trigger trigger_from_string(std::string_view s);

using EntryId = std::uint64_t;

struct ExpressionEntry {
  EntryId id = 0;
  std::string surface_text;
  std::string normalized;  // dedup key
  std::string context_message;
  std::optional<llm::EmbeddingVector> embedding;  // absent after an embedding failure
  Source source = Source::Comprehension;
  std::int64_t captured_at = 0;
  core::MessageId turn = 0;  // last message id when captured
  std::uint64_t trigger_count = 0;
  std::uint64_t interaction_count = 0;
  bool pinned = false;

  bool operator==(const ExpressionEntry&) const = default;

  nlohmann::ordered_json to_json() const;
  static ExpressionEntry from_json(const nlohmann::json& j);
};

struct ReviewCard {
  EntryId entry_id = 0;
  double similarity = 0.0;
  Trigger trigger = Trigger::ContextDriven;
  std::string surface_text;
  std::string shown_context;  // the captured surrounding message

  bool operator==(const ReviewCard&) const = default;
  nlohmann::ordered_json to_json() const;
};

/// Pure ranking: cosine against every entry with an embedding, keep
/// similarity >= threshold, order by similarity desc then captured_at desc
/// then id desc, truncate to top_k. `eligible` filters entries first.
std::vector<ReviewCard> rank_entries(const llm::EmbeddingVector& query, std::span<const ExpressionEntry> entries,
                                     double threshold, int top_k, Trigger trigger,
                                     const std::function<bool(const ExpressionEntry&)>& eligible = {});

/// Per-session store of captured expressions and the two retrieval triggers.
/// Every operation raises feature-disabled for Baseline sessions.
class ReviewStore {
 public:
  using ChangeListener = std::function<void(const ReviewStore&)>;

  ReviewStore(core::SessionConfig config, llm::Gateway& gateway, metrics::EventLog& log, const Clock& clock);

  ReviewStore(const ReviewStore&) = delete;
  ReviewStore& operator=(const ReviewStore&) = delete;

  /// Reuses an entry with the same normalized text (refreshing captured_at,
  /// keeping counters). Logs one Capture event per call.
  ExpressionEntry capture(std::string_view surface_text, std::string_view context_message, Source source,
                          core::MessageId turn);

  /// Cards for an incoming NS message. Entries captured at or after
  /// `message_id` (same turn) are skipped.
  std::vector<ReviewCard> retrieve_context_driven(std::string_view incoming_text, core::MessageId message_id);
  std::vector<ReviewCard> retrieve_expression_driven(std::string_view draft_text);

  /// Requires an un-interacted trigger; pins the entry.
  ExpressionEntry record_interaction(EntryId id);

  std::vector<ExpressionEntry> entries() const;
  std::optional<ExpressionEntry> find(EntryId id) const;
  std::optional<ExpressionEntry> find_by_text(std::string_view surface_text) const;
  std::vector<ReviewCard> pinned_cards() const;

  /// One entry per line, embeddings as number arrays.
  std::string export_jsonl() const;
  void restore(std::vector<ExpressionEntry> entries);

  void set_change_listener(ChangeListener l);

 private:
  void require_enabled() const;
  std::vector<ReviewCard> retrieve(std::string_view query_text, Trigger trigger,
                                   const std::function<bool(const ExpressionEntry&)>& eligible);
  void notify() const;

  core::SessionConfig config_;
  llm::Gateway& gateway_;
  metrics::EventLog& log_;
  const Clock& clock_;

  mutable std::mutex mu_;
  std::vector<ExpressionEntry> entries_;
  ChangeListener on_change_;
};

}  // namespace chatlearn::review
