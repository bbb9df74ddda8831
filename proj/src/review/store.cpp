#include "chatlearn/review/store.hpp"

#include <algorithm>

#include "chatlearn/error.hpp"
#include "chatlearn/llm/provider.hpp"
#include "chatlearn/review/similarity.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn::review {

using metrics::EventKind;

std::string_view to_string(Source s) noexcept {
  return s == Source::Comprehension ? "comprehension" : "expression";
}

std::string_view to_string(Trigger t) noexcept {
  return t == Trigger::ContextDriven ? "context" : "expression";
}

Source source_from_string(std::string_view s) {
  if (s == "comprehension") return Source::Comprehension;
  if (s == "expression") return Source::Expression;
  throw Error(Errc::io_error, "unknown capture source '" + std::string(s) + "'");
}

Trigger trigger_from_string(std::string_view s) {
  if (s == "context") return Trigger::ContextDriven;
  if (s == "expression") return Trigger::ExpressionDriven;
  throw Error(Errc::protocol_error, "unknown trigger '" + std::string(s) + "'");
}

nlohmann::ordered_json ExpressionEntry::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["surface_text"] = surface_text;
  j["normalized"] = normalized;
  j["context_message"] = context_message;
  j["source"] = std::string(to_string(source));
  j["captured_at"] = captured_at;
  j["turn"] = turn;
  j["trigger_count"] = trigger_count;
  j["interaction_count"] = interaction_count;
  j["pinned"] = pinned;
  j["embedding"] = embedding ? nlohmann::ordered_json(embedding->values) : nlohmann::ordered_json(nullptr);
  return j;
}

ExpressionEntry ExpressionEntry::from_json(const nlohmann::json& j) {
  ExpressionEntry e;
  e.id = j.at("id").get<EntryId>();
  e.surface_text = j.at("surface_text").get<std::string>();
  e.normalized = j.at("normalized").get<std::string>();
  e.context_message = j.at("context_message").get<std::string>();
  e.source = source_from_string(j.at("source").get<std::string>());
  e.captured_at = j.at("captured_at").get<std::int64_t>();
  e.turn = j.at("turn").get<core::MessageId>();
  e.trigger_count = j.at("trigger_count").get<std::uint64_t>();
  e.interaction_count = j.at("interaction_count").get<std::uint64_t>();
  e.pinned = j.at("pinned").get<bool>();
  if (const auto& v = j.at("embedding"); !v.is_null()) e.embedding = llm::EmbeddingVector{v.get<std::vector<double>>()};
  return e;
}

nlohmann::ordered_json ReviewCard::to_json() const {
  nlohmann::ordered_json j;
  j["entry_id"] = entry_id;
  j["similarity"] = similarity;
  j["trigger"] = std::string(to_string(trigger));
  j["surface_text"] = surface_text;
  j["shown_context"] = shown_context;
  return j;
}

std::vector<ReviewCard> rank_entries(const llm::EmbeddingVector& query, std::span<const ExpressionEntry> entries,
                                     double threshold, int top_k, Trigger trigger,
                                     const std::function<bool(const ExpressionEntry&)>& eligible) {
  struct Scored {
    const ExpressionEntry* entry;
    double similarity;
  };
  std::vector<Scored> scored;
  scored.reserve(entries.size());
  for (const auto& e : entries) {
    if (!e.embedding) continue;
    if (eligible && !eligible(e)) continue;
    const double s = cosine_similarity(query, *e.embedding);
    if (s >= threshold) scored.push_back({&e, s});
  }
  std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.entry->captured_at != b.entry->captured_at) return a.entry->captured_at > b.entry->captured_at;
    return a.entry->id > b.entry->id;
  });
  if (top_k >= 0 && scored.size() > static_cast<std::size_t>(top_k)) scored.resize(static_cast<std::size_t>(top_k));

  std::vector<ReviewCard> cards;
  cards.reserve(scored.size());
  for (const auto& s : scored) {
    cards.push_back({s.entry->id, s.similarity, trigger, s.entry->surface_text, s.entry->context_message});
  }
  return cards;
}

ReviewStore::ReviewStore(core::SessionConfig config, llm::Gateway& gateway, metrics::EventLog& log,
                         const Clock& clock)
    : config_(std::move(config)), gateway_(gateway), log_(log), clock_(clock) {}

void ReviewStore::require_enabled() const {
  if (!config_.learning_enabled()) throw Error(Errc::feature_disabled, "review cards are not part of Baseline");
}

void ReviewStore::notify() const {
  ChangeListener l;
  {
    std::lock_guard lock(mu_);
    l = on_change_;
  }
  if (l) l(*this);
}

ExpressionEntry ReviewStore::capture(std::string_view surface_text, std::string_view context_message, Source source,
                                     core::MessageId turn) {
  require_enabled();
  const auto surface = text::trim(surface_text);
  if (surface.empty()) throw Error(Errc::empty_text, "cannot capture an empty expression");
  const auto key = text::normalize_key(surface);

  bool needs_embedding = true;
  {
    std::lock_guard lock(mu_);
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.normalized == key; });
    needs_embedding = it == entries_.end() || !it->embedding;
  }

  std::optional<llm::EmbeddingVector> embedding;
  std::string failure;
  if (needs_embedding) {
    try {
      embedding = gateway_.embed(surface);
    } catch (const Error& e) {
      failure = e.what();
    } catch (const llm::TransportError& e) {
      failure = e.what();
    }
  }

  ExpressionEntry result;
  bool created = false;
  {
    std::lock_guard lock(mu_);
    auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.normalized == key; });
    if (it == entries_.end()) {
      ExpressionEntry e;
      e.id = entries_.empty() ? 1 : entries_.back().id + 1;
      e.surface_text = surface;
      e.normalized = key;
      e.context_message = std::string(context_message);
      e.embedding = std::move(embedding);
      e.source = source;
      e.captured_at = clock_.now_ms();
      e.turn = turn;
      entries_.push_back(std::move(e));
      it = entries_.end() - 1;
      created = true;
    } else {
      it->captured_at = clock_.now_ms();
      if (!it->embedding && embedding) it->embedding = std::move(embedding);
    }
    result = *it;

    nlohmann::ordered_json payload;
    payload["entry_id"] = result.id;
    payload["surface_text"] = std::string(surface);
    payload["source"] = std::string(to_string(source));
    payload["new_entry"] = created;
    log_.append(EventKind::Capture, std::move(payload));
    if (!failure.empty()) {
      log_.append(EventKind::Degradation, {{"reason", "embedding-failure"}, {"entry_id", result.id}, {"detail", failure}});
    }
  }
  notify();
  return result;
}

std::vector<ReviewCard> ReviewStore::retrieve(std::string_view query_text, Trigger trigger,
                                              const std::function<bool(const ExpressionEntry&)>& eligible) {
  require_enabled();
  {
    std::lock_guard lock(mu_);
    if (entries_.empty()) return {};
  }
  llm::EmbeddingVector query;
  try {
    query = gateway_.embed(query_text);
  } catch (const std::exception& e) {
    log_.append(EventKind::Degradation, {{"reason", "embedding-failure"},
                                         {"trigger", std::string(to_string(trigger))},
                                         {"detail", e.what()}});
    return {};
  }

  std::vector<ReviewCard> cards;
  {
    std::lock_guard lock(mu_);
    cards = rank_entries(query, entries_, config_.similarity_threshold, config_.top_k, trigger, eligible);
    for (const auto& card : cards) {
      auto& e = entries_[card.entry_id - 1];
      ++e.trigger_count;
      nlohmann::ordered_json payload;
      payload["entry_id"] = card.entry_id;
      payload["surface_text"] = card.surface_text;
      payload["trigger"] = std::string(to_string(trigger));
      payload["similarity"] = card.similarity;
      log_.append(EventKind::CardTriggered, std::move(payload));
    }
  }
  if (!cards.empty()) notify();
  return cards;
}

std::vector<ReviewCard> ReviewStore::retrieve_context_driven(std::string_view incoming_text,
                                                             core::MessageId message_id) {
  return retrieve(incoming_text, Trigger::ContextDriven,
                  [message_id](const ExpressionEntry& e) { return e.turn < message_id; });
}

std::vector<ReviewCard> ReviewStore::retrieve_expression_driven(std::string_view draft_text) {
  return retrieve(draft_text, Trigger::ExpressionDriven, {});
}

ExpressionEntry ReviewStore::record_interaction(EntryId id) {
  require_enabled();
  ExpressionEntry result;
  {
    std::lock_guard lock(mu_);
    if (id == 0 || id > entries_.size()) throw Error(Errc::unknown_entry, "no entry " + std::to_string(id));
    auto& e = entries_[id - 1];
    if (e.trigger_count == 0) throw Error(Errc::never_triggered, "entry " + std::to_string(id) + " was never shown");
    if (e.interaction_count >= e.trigger_count) {
      throw Error(Errc::never_triggered, "entry " + std::to_string(id) + " has no un-interacted trigger");
    }
    ++e.interaction_count;
    e.pinned = true;
    result = e;
    log_.append(EventKind::CardInteraction, {{"entry_id", id}, {"surface_text", e.surface_text}});
  }
  notify();
  return result;
}

std::vector<ExpressionEntry> ReviewStore::entries() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::optional<ExpressionEntry> ReviewStore::find(EntryId id) const {
  std::lock_guard lock(mu_);
  if (id == 0 || id > entries_.size()) return std::nullopt;
  return entries_[id - 1];
}

std::optional<ExpressionEntry> ReviewStore::find_by_text(std::string_view surface_text) const {
  const auto key = text::normalize_key(surface_text);
  std::lock_guard lock(mu_);
  for (const auto& e : entries_) {
    if (e.normalized == key) return e;
  }
  return std::nullopt;
}

std::vector<ReviewCard> ReviewStore::pinned_cards() const {
  require_enabled();
  std::lock_guard lock(mu_);
  std::vector<ReviewCard> out;
  for (const auto& e : entries_) {
    if (e.pinned) out.push_back({e.id, 1.0, Trigger::ContextDriven, e.surface_text, e.context_message});
  }
  return out;
}

std::string ReviewStore::export_jsonl() const {
  std::lock_guard lock(mu_);
  std::string out;
  for (const auto& e : entries_) {
    out.append(e.to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
    out.push_back('\n');
  }
  return out;
}

void ReviewStore::restore(std::vector<ExpressionEntry> entries) {
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].id != i + 1) throw Error(Errc::io_error, "review store ids are not contiguous");
  }
  std::lock_guard lock(mu_);
  entries_ = std::move(entries);
}

void ReviewStore::set_change_listener(ChangeListener l) {
  std::lock_guard lock(mu_);
  on_change_ = std::move(l);
}

}  // namespace chatlearn::review
