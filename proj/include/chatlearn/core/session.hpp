#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/core/clock.hpp"

namespace chatlearn::core {

enum class Condition { Baseline, ChatLearn };
enum class Sender { NNS, NS, System };
enum class SessionState { Active, RecallTest, Closed };

std::string_view to_string(Condition c) noexcept;
std::string_view to_string(Sender s) noexcept;
std::string_view to_string(SessionState s) noexcept;
Condition condition_from_string(std::string_view s);  // throws invalid-config
Sender sender_from_string(std::string_view s);        // throws protocol-error
SessionState state_from_string(std::string_view s);

/// Display name used inside prompts ("zh" -> "Chinese"). Unknown tags are
/// returned unchanged.
std::string language_name(std::string_view tag);

struct SessionConfig {
  Condition condition = Condition::ChatLearn;
  int context_window_turns = 6;
  double similarity_threshold = 0.15;
  int top_k = 3;
  int recall_test_seconds = 180;
  std::string native_language = "zh";
  std::string target_language = "en";
  // Review entries outlive the session only when enabled.
  bool persist_review_store = false;

  /// Throws Error(invalid_config) on any violated invariant.
  void validate() const;

  bool learning_enabled() const noexcept { return condition == Condition::ChatLearn; }

  nlohmann::ordered_json to_json() const;
  /// Missing keys keep their defaults; result is validated.
  static SessionConfig from_json(const nlohmann::json& j, SessionConfig base);
  static SessionConfig from_json(const nlohmann::json& j);
};

using MessageId = std::uint64_t;

struct Message {
  MessageId id = 0;
  std::string session_id;
  Sender sender = Sender::NNS;
  std::string original_text;
  std::optional<std::string> shown_translation;
  std::int64_t sent_at = 0;
  std::size_t token_count = 0;

  bool operator==(const Message&) const = default;

  /// Key order: id, session_id, sender, original_text, shown_translation,
  /// sent_at, token_count.
  nlohmann::ordered_json to_json() const;
  static Message from_json(const nlohmann::json& j);
};

/// "role: text" lines, oldest first, joined by '\n'.
std::string render_history(std::span<const Message> messages);

class Session {
 public:
  using AppendListener = std::function<void(const Message&)>;
  using StateListener = std::function<void(SessionState)>;

  Session(std::string id, SessionConfig config, const Clock& clock);

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const noexcept { return id_; }
  const SessionConfig& config() const noexcept { return config_; }

  /// Serialized per session. Listeners run under the append lock, so every
  /// observer sees the same order.
  Message append(Sender sender, std::string_view text,
                 std::optional<std::string> shown_translation = std::nullopt);

  std::vector<Message> messages() const;
  std::optional<Message> find(MessageId id) const;
  std::size_t size() const;
  MessageId last_id() const;

  /// Last min(context_window_turns, size) messages, chronological.
  std::vector<Message> history_window() const;

  SessionState state() const;
  void begin_recall();  // Active -> RecallTest
  void close();         // Active|RecallTest -> Closed

  void set_append_listener(AppendListener l);
  void set_state_listener(StateListener l);

  /// Rebuilds a session from persisted messages. Ids must be 1..n.
  static std::unique_ptr<Session> restore(std::string id, SessionConfig config, const Clock& clock,
                                          std::vector<Message> messages, SessionState state);

 private:
  std::string id_;
  SessionConfig config_;
  const Clock& clock_;

  mutable std::shared_mutex mu_;
  std::vector<Message> messages_;
  SessionState state_ = SessionState::Active;
  AppendListener on_append_;
  StateListener on_state_;
};

/// Owns all sessions; ids are unique across the store.
class SessionStore {
 public:
  explicit SessionStore(const Clock& clock) : clock_(clock) {}

  std::shared_ptr<Session> create(const SessionConfig& config);
  /// Creates with a caller-chosen id; invalid-config if the id is taken or empty.
  std::shared_ptr<Session> create(const SessionConfig& config, const std::string& id);
  void adopt(std::shared_ptr<Session> session);
  std::shared_ptr<Session> find(const std::string& id) const;
  std::vector<std::string> ids() const;

 private:
  const Clock& clock_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_serial_ = 1;
};

}  // namespace chatlearn::core
