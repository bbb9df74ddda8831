#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chatlearn/assist/engine.hpp"
#include "chatlearn/core/session.hpp"
#include "chatlearn/llm/gateway.hpp"
#include "chatlearn/metrics/event_log.hpp"
#include "chatlearn/metrics/recall.hpp"
#include "chatlearn/metrics/report.hpp"
#include "chatlearn/review/store.hpp"

namespace chatlearn::service {

namespace fs = std::filesystem;

/// Append-only JSONL writer plus atomic whole-file rewrites for one session
/// directory:
///   session.json    id, config, state
///   messages.jsonl  one Message per line
///   events.jsonl    one LogEvent per line
///   store.jsonl     review store snapshot
///   recall.json     recall result, once submitted
class SessionJournal {
 public:
  explicit SessionJournal(fs::path dir);

  const fs::path& dir() const noexcept { return dir_; }

  void append_line(const std::string& file, const std::string& line);
  void rewrite(const std::string& file, const std::string& content);

 private:
  fs::path dir_;
  std::mutex mu_;
};

/// Reads a JSONL file, skipping a torn trailing line left by a crash.
std::vector<nlohmann::ordered_json> read_jsonl(const fs::path& file);

/// Everything one chat session owns, wired to its journal when persistent.
class SessionRuntime {
 public:
  SessionRuntime(const SessionRuntime&) = delete;
  SessionRuntime& operator=(const SessionRuntime&) = delete;

  static std::unique_ptr<SessionRuntime> create(const std::string& id, const core::SessionConfig& config,
                                                llm::Gateway& gateway, const Clock& clock,
                                                std::optional<fs::path> dir);
  /// Rebuilds a persisted session.
  static std::unique_ptr<SessionRuntime> load(const fs::path& dir, llm::Gateway& gateway, const Clock& clock);

  core::Session& session() noexcept { return *session_; }
  const core::Session& session() const noexcept { return *session_; }
  metrics::EventLog& log() noexcept { return log_; }
  const metrics::EventLog& log() const noexcept { return log_; }
  review::ReviewStore& store() noexcept { return store_; }
  assist::ComprehensionCache& cache() noexcept { return cache_; }
  assist::SessionContext context() noexcept { return {*session_, log_, store_, cache_}; }

  /// Serializes all state-changing work for this session.
  std::mutex& turn_mutex() noexcept { return turn_mu_; }

  struct Posted {
    core::Message message;
    std::vector<review::ReviewCard> cards;  // context-driven recall for NS messages
  };
  /// Appends, logs MessageSent and, for NS messages in ChatLearn, runs
  /// context-driven recall.
  Posted post_message(core::Sender sender, std::string_view text,
                      std::optional<std::string> shown_translation = std::nullopt);

  metrics::RecallResult submit_recall(const metrics::RecallSubmission& submission);
  std::optional<metrics::RecallResult> recall() const;

  metrics::MetricsReport report() const;
  std::optional<fs::path> dir() const;

 private:
  SessionRuntime(std::unique_ptr<core::Session> session, llm::Gateway& gateway, const Clock& clock,
                 std::optional<fs::path> dir);
  void attach_journal();
  void write_session_file() const;

  std::unique_ptr<core::Session> session_;
  metrics::EventLog log_;
  review::ReviewStore store_;
  assist::ComprehensionCache cache_;
  std::unique_ptr<SessionJournal> journal_;
  std::string embedding_provider_;

  mutable std::mutex recall_mu_;
  std::optional<metrics::RecallResult> recall_;
  std::mutex turn_mu_;
};

/// Session token -> runtime. Tokens double as session ids and directory
/// names, so they are limited to [A-Za-z0-9_-].
class SessionRegistry {
 public:
  SessionRegistry(llm::Gateway& gateway, const Clock& clock, core::SessionConfig defaults,
                  std::optional<fs::path> data_dir);

  /// Existing session for `token`, or a new one from defaults + overrides.
  /// Overrides on an existing session must not change its condition.
  std::shared_ptr<SessionRuntime> open(const std::string& token, const nlohmann::json& overrides = {});
  std::shared_ptr<SessionRuntime> find(const std::string& token) const;
  std::vector<std::string> tokens() const;

  /// Loads every session directory under data_dir. Returns the count.
  std::size_t recover();

  const core::SessionConfig& defaults() const noexcept { return defaults_; }

 private:
  llm::Gateway& gateway_;
  const Clock& clock_;
  core::SessionConfig defaults_;
  std::optional<fs::path> data_dir_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<SessionRuntime>> sessions_;
};

bool valid_token(std::string_view token) noexcept;

/// Loads a session directory without a live provider (report tooling).
struct SessionDirectory {
  core::SessionConfig config;
  core::SessionState state = core::SessionState::Active;
  std::string id;
  std::vector<core::Message> messages;
  std::vector<metrics::LogEvent> events;
  std::vector<review::ExpressionEntry> entries;
  std::optional<metrics::RecallResult> recall;
};
SessionDirectory read_session_directory(const fs::path& dir);

}  // namespace chatlearn::service
