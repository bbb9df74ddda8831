#include "chatlearn/metrics/event_log.hpp"

#include "chatlearn/error.hpp"

namespace chatlearn::metrics {

std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::MessageSent: return "MessageSent";
    case EventKind::FullComprehension: return "FullComprehension";
    case EventKind::PartialComprehension: return "PartialComprehension";
    case EventKind::ExpressionSupport: return "ExpressionSupport";
    case EventKind::Capture: return "Capture";
    case EventKind::CardTriggered: return "CardTriggered";
    case EventKind::CardInteraction: return "CardInteraction";
    case EventKind::Degradation: return "Degradation";
  }
  return "Degradation";
}

EventKind event_kind_from_string(std::string_view s) {
  for (auto k : {EventKind::MessageSent, EventKind::FullComprehension, EventKind::PartialComprehension,
                 EventKind::ExpressionSupport, EventKind::Capture, EventKind::CardTriggered,
                 EventKind::CardInteraction, EventKind::Degradation}) {
    if (to_string(k) == s) return k;
  }
  throw Error(Errc::io_error, "unknown event kind '" + std::string(s) + "'");
}

nlohmann::ordered_json LogEvent::to_json() const {
  nlohmann::ordered_json j;
  j["seq"] = seq;
  j["session_id"] = session_id;
  j["kind"] = std::string(to_string(kind));
  j["at"] = at;
  j["payload"] = payload;
  return j;
}

LogEvent LogEvent::from_json(const nlohmann::ordered_json& j) {
  LogEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.session_id = j.at("session_id").get<std::string>();
  e.kind = event_kind_from_string(j.at("kind").get<std::string>());
  e.at = j.at("at").get<std::int64_t>();
  e.payload = j.at("payload");
  return e;
}

LogEvent EventLog::append(EventKind kind, nlohmann::ordered_json payload) {
  std::lock_guard lock(mu_);
  LogEvent e;
  e.seq = events_.size() + 1;
  e.session_id = session_id_;
  e.kind = kind;
  e.payload = std::move(payload);
  e.at = clock_.now_ms();
  events_.push_back(e);
  if (sink_) sink_(e);
  return e;
}

std::vector<LogEvent> EventLog::snapshot() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::size_t EventLog::size() const {
  std::lock_guard lock(mu_);
  return events_.size();
}

void EventLog::set_sink(Sink sink) {
  std::lock_guard lock(mu_);
  sink_ = std::move(sink);
}

void EventLog::restore(std::vector<LogEvent> events) {
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].seq != i + 1) throw Error(Errc::io_error, "event log seq is not contiguous");
  }
  std::lock_guard lock(mu_);
  events_ = std::move(events);
}

}  // namespace chatlearn::metrics
