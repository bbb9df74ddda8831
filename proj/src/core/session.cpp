#include "chatlearn/core/session.hpp"

#include <algorithm>
#include <chrono>

#include "chatlearn/error.hpp"
#include "chatlearn/text/tokenizer.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn {

std::int64_t SystemClock::now_ms() const {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

}  // namespace chatlearn

namespace chatlearn::core {

std::string_view to_string(Condition c) noexcept {
  return c == Condition::Baseline ? "Baseline" : "ChatLearn";
}

std::string_view to_string(Sender s) noexcept {
  switch (s) {
    case Sender::NNS: return "NNS";
    case Sender::NS: return "NS";
    case Sender::System: return "System";
  }
  return "System";
}

std::string_view to_string(SessionState s) noexcept {
  switch (s) {
    case SessionState::Active: return "Active";
    case SessionState::RecallTest: return "RecallTest";
    case SessionState::Closed: return "Closed";
  }
  return "Closed";
}

Condition condition_from_string(std::string_view s) {
  if (s == "Baseline" || s == "baseline") return Condition::Baseline;
  if (s == "ChatLearn" || s == "chatlearn") return Condition::ChatLearn;
  throw Error(Errc::invalid_config, "unknown condition '" + std::string(s) + "'");
}

Sender sender_from_string(std::string_view s) {
  if (s == "NNS") return Sender::NNS;
  if (s == "NS") return Sender::NS;
  if (s == "System") return Sender::System;
  throw Error(Errc::protocol_error, "unknown sender '" + std::string(s) + "'");
}

SessionState state_from_string(std::string_view s) {
  if (s == "Active") return SessionState::Active;
  if (s == "RecallTest") return SessionState::RecallTest;
  if (s == "Closed") return SessionState::Closed;
  throw Error(Errc::bad_config, "unknown session state '" + std::string(s) + "'");
}

std::string language_name(std::string_view tag) {
  static const std::map<std::string, std::string, std::less<>> names = {
      {"zh", "Chinese"}, {"en", "English"}, {"ja", "Japanese"}, {"ko", "Korean"},
      {"es", "Spanish"}, {"fr", "French"},  {"de", "German"},
  };
  if (auto it = names.find(tag); it != names.end()) return it->second;
  return std::string(tag);
}

void SessionConfig::validate() const {
  auto fail = [](const std::string& why) { throw Error(Errc::invalid_config, why); };
  if (context_window_turns <= 0) fail("context_window_turns must be positive");
  if (top_k <= 0) fail("top_k must be positive");
  if (recall_test_seconds <= 0) fail("recall_test_seconds must be positive");
  if (!(similarity_threshold >= -1.0 && similarity_threshold <= 1.0)) {
    fail("similarity_threshold must lie in [-1, 1]");
  }
  // Only the Han classifier exists for native-script detection.
  if (native_language != "zh") fail("unsupported native_language '" + native_language + "'");
  if (target_language.empty() || target_language == native_language) {
    fail("target_language must be set and differ from native_language");
  }
}

nlohmann::ordered_json SessionConfig::to_json() const {
  nlohmann::ordered_json j;
  j["condition"] = std::string(to_string(condition));
  j["context_window_turns"] = context_window_turns;
  j["similarity_threshold"] = similarity_threshold;
  j["top_k"] = top_k;
  j["recall_test_seconds"] = recall_test_seconds;
  j["native_language"] = native_language;
  j["target_language"] = target_language;
  j["persist_review_store"] = persist_review_store;
  return j;
}

SessionConfig SessionConfig::from_json(const nlohmann::json& j) { return from_json(j, SessionConfig{}); }

SessionConfig SessionConfig::from_json(const nlohmann::json& j, SessionConfig base) {
  if (!j.is_object()) throw Error(Errc::invalid_config, "session config must be an object");
  try {
    if (j.contains("condition")) base.condition = condition_from_string(j.at("condition").get<std::string>());
    if (j.contains("context_window_turns")) base.context_window_turns = j.at("context_window_turns").get<int>();
    if (j.contains("similarity_threshold")) base.similarity_threshold = j.at("similarity_threshold").get<double>();
    if (j.contains("top_k")) base.top_k = j.at("top_k").get<int>();
    if (j.contains("recall_test_seconds")) base.recall_test_seconds = j.at("recall_test_seconds").get<int>();
    if (j.contains("native_language")) base.native_language = j.at("native_language").get<std::string>();
    if (j.contains("target_language")) base.target_language = j.at("target_language").get<std::string>();
    if (j.contains("persist_review_store")) base.persist_review_store = j.at("persist_review_store").get<bool>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, e.what());
  }
  base.validate();
  return base;
}

nlohmann::ordered_json Message::to_json() const {
  nlohmann::ordered_json j;
  j["id"] = id;
  j["session_id"] = session_id;
  j["sender"] = std::string(to_string(sender));
  j["original_text"] = original_text;
  j["shown_translation"] = shown_translation ? nlohmann::ordered_json(*shown_translation) : nlohmann::ordered_json(nullptr);
  j["sent_at"] = sent_at;
  j["token_count"] = token_count;
  return j;
}

Message Message::from_json(const nlohmann::json& j) {
  Message m;
  m.id = j.at("id").get<MessageId>();
  m.session_id = j.at("session_id").get<std::string>();
  m.sender = sender_from_string(j.at("sender").get<std::string>());
  m.original_text = j.at("original_text").get<std::string>();
  if (const auto& t = j.at("shown_translation"); !t.is_null()) m.shown_translation = t.get<std::string>();
  m.sent_at = j.at("sent_at").get<std::int64_t>();
  m.token_count = j.at("token_count").get<std::size_t>();
  return m;
}

std::string render_history(std::span<const Message> messages) {
  std::string out;
  for (const auto& m : messages) {
    if (!out.empty()) out.push_back('\n');
    out.append(to_string(m.sender));
    out.append(": ");
    out.append(m.original_text);
  }
  return out;
}

Session::Session(std::string id, SessionConfig config, const Clock& clock)
    : id_(std::move(id)), config_(std::move(config)), clock_(clock) {
  config_.validate();
}

Message Session::append(Sender sender, std::string_view text, std::optional<std::string> shown_translation) {
  if (text::trim(text).empty()) throw Error(Errc::empty_text, "message text is empty");
  std::unique_lock lock(mu_);
  if (state_ != SessionState::Active) throw Error(Errc::session_closed, "session " + id_ + " is not active");
  Message m;
  m.id = messages_.empty() ? 1 : messages_.back().id + 1;
  m.session_id = id_;
  m.sender = sender;
  m.original_text = std::string(text);
  m.shown_translation = std::move(shown_translation);
  m.sent_at = clock_.now_ms();
  m.token_count = text::count_tokens(text).total();
  messages_.push_back(m);
  if (on_append_) on_append_(m);
  return m;
}

std::vector<Message> Session::messages() const {
  std::shared_lock lock(mu_);
  return messages_;
}

std::optional<Message> Session::find(MessageId id) const {
  std::shared_lock lock(mu_);
  // Ids are 1..n without gaps.
  if (id == 0 || id > messages_.size()) return std::nullopt;
  return messages_[id - 1];
}

std::size_t Session::size() const {
  std::shared_lock lock(mu_);
  return messages_.size();
}

MessageId Session::last_id() const {
  std::shared_lock lock(mu_);
  return messages_.empty() ? 0 : messages_.back().id;
}

std::vector<Message> Session::history_window() const {
  std::shared_lock lock(mu_);
  const auto n = std::min<std::size_t>(static_cast<std::size_t>(config_.context_window_turns), messages_.size());
  return {messages_.end() - static_cast<std::ptrdiff_t>(n), messages_.end()};
}

SessionState Session::state() const {
  std::shared_lock lock(mu_);
  return state_;
}

void Session::begin_recall() {
  std::unique_lock lock(mu_);
  if (state_ != SessionState::Active) {
    throw Error(Errc::wrong_state, "cannot begin recall from state " + std::string(to_string(state_)));
  }
  state_ = SessionState::RecallTest;
  if (on_state_) on_state_(state_);
}

void Session::close() {
  std::unique_lock lock(mu_);
  if (state_ == SessionState::Closed) throw Error(Errc::wrong_state, "session already closed");
  state_ = SessionState::Closed;
  if (on_state_) on_state_(state_);
}

void Session::set_append_listener(AppendListener l) {
  std::unique_lock lock(mu_);
  on_append_ = std::move(l);
}

void Session::set_state_listener(StateListener l) {
  std::unique_lock lock(mu_);
  on_state_ = std::move(l);
}

std::unique_ptr<Session> Session::restore(std::string id, SessionConfig config, const Clock& clock,
                                          std::vector<Message> messages, SessionState state) {
  for (std::size_t i = 0; i < messages.size(); ++i) {
    if (messages[i].id != i + 1 || messages[i].session_id != id) {
      throw Error(Errc::io_error, "persisted messages of session " + id + " are not gap-free");
    }
  }
  auto s = std::make_unique<Session>(std::move(id), std::move(config), clock);
  s->messages_ = std::move(messages);
  s->state_ = state;
  return s;
}

std::shared_ptr<Session> SessionStore::create(const SessionConfig& config) {
  std::lock_guard lock(mu_);
  std::string id;
  do {
    id = "session-" + std::to_string(next_serial_++);
  } while (sessions_.contains(id));
  auto s = std::make_shared<Session>(id, config, clock_);
  sessions_.emplace(id, s);
  return s;
}

std::shared_ptr<Session> SessionStore::create(const SessionConfig& config, const std::string& id) {
  if (id.empty()) throw Error(Errc::invalid_config, "session id must not be empty");
  std::lock_guard lock(mu_);
  if (sessions_.contains(id)) throw Error(Errc::invalid_config, "session id '" + id + "' already exists");
  auto s = std::make_shared<Session>(id, config, clock_);
  sessions_.emplace(id, s);
  return s;
}

void SessionStore::adopt(std::shared_ptr<Session> session) {
  std::lock_guard lock(mu_);
  const auto id = session->id();
  if (!sessions_.emplace(id, std::move(session)).second) {
    throw Error(Errc::invalid_config, "session id '" + id + "' already exists");
  }
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionStore::ids() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, _] : sessions_) out.push_back(id);
  return out;
}

}  // namespace chatlearn::core
