#pragma once

#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/core/clock.hpp"

namespace chatlearn::metrics {

enum class EventKind {
  MessageSent,
  FullComprehension,
  PartialComprehension,
  ExpressionSupport,
  Capture,
  CardTriggered,
  CardInteraction,
  Degradation,  // not counted by any metric
};

std::string_view to_string(EventKind k) noexcept;
EventKind event_kind_from_string(std::string_view s);

struct LogEvent {
  std::uint64_t seq = 0;
  std::string session_id;
  EventKind kind = EventKind::Degradation;
  nlohmann::ordered_json payload = nlohmann::ordered_json::object();
  std::int64_t at = 0;

  bool operator==(const LogEvent&) const = default;

  nlohmann::ordered_json to_json() const;
  static LogEvent from_json(const nlohmann::ordered_json& j);
};

/// Append-only per-session log. `seq` starts at 1 and increases by one.
class EventLog {
 public:
  using Sink = std::function<void(const LogEvent&)>;

  EventLog(std::string session_id, const Clock& clock) : session_id_(std::move(session_id)), clock_(clock) {}

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  LogEvent append(EventKind kind, nlohmann::ordered_json payload);

  std::vector<LogEvent> snapshot() const;
  std::size_t size() const;
  const std::string& session_id() const noexcept { return session_id_; }

  /// Called under the log lock for each appended event.
  void set_sink(Sink sink);

  /// Seeds a fresh log with persisted events; seq must be 1..n.
  void restore(std::vector<LogEvent> events);

 private:
  std::string session_id_;
  const Clock& clock_;
  mutable std::mutex mu_;
  std::vector<LogEvent> events_;
  Sink sink_;
};

}  // namespace chatlearn::metrics
