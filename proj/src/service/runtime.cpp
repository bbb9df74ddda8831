#include "chatlearn/service/runtime.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "chatlearn/error.hpp"

namespace chatlearn::service {

namespace {

constexpr const char* kSessionFile = "session.json";
constexpr const char* kMessagesFile = "messages.jsonl";
constexpr const char* kEventsFile = "events.jsonl";
constexpr const char* kStoreFile = "store.jsonl";
constexpr const char* kRecallFile = "recall.json";

std::string dump(const nlohmann::ordered_json& j) {
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + p.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

SessionJournal::SessionJournal(fs::path dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw Error(Errc::io_error, "cannot create " + dir_.string() + ": " + ec.message());
}

void SessionJournal::append_line(const std::string& file, const std::string& line) {
  std::lock_guard lock(mu_);
  std::ofstream out(dir_ / file, std::ios::binary | std::ios::app);
  out << line << '\n';
  out.flush();
  if (!out) throw Error(Errc::io_error, "cannot append to " + (dir_ / file).string());
}

void SessionJournal::rewrite(const std::string& file, const std::string& content) {
  std::lock_guard lock(mu_);
  const auto tmp = dir_ / (file + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << content;
    out.flush();
    if (!out) throw Error(Errc::io_error, "cannot write " + tmp.string());
  }
  fs::rename(tmp, dir_ / file);
}

std::vector<nlohmann::ordered_json> read_jsonl(const fs::path& file) {
  std::vector<nlohmann::ordered_json> out;
  if (!fs::exists(file)) return out;
  const auto content = read_file(file);
  std::size_t pos = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn final line
    const auto line = std::string_view(content).substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    auto j = nlohmann::ordered_json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::io_error, "corrupt line in " + file.string());
    out.push_back(std::move(j));
  }
  return out;
}

namespace {

// Cuts a partially written last line so later appends start on a fresh line.
void drop_torn_tail(const fs::path& file) {
  if (!fs::exists(file)) return;
  const auto content = read_file(file);
  const auto keep = content.rfind('\n') == std::string::npos ? 0 : content.rfind('\n') + 1;
  if (keep != content.size()) fs::resize_file(file, keep);
}

}  // namespace

SessionRuntime::SessionRuntime(std::unique_ptr<core::Session> session, llm::Gateway& gateway, const Clock& clock,
                               std::optional<fs::path> dir)
    : session_(std::move(session)),
      log_(session_->id(), clock),
      store_(session_->config(), gateway, log_, clock),
      embedding_provider_(gateway.embedding_provider_id()) {
  if (dir) journal_ = std::make_unique<SessionJournal>(*dir);
}

void SessionRuntime::write_session_file() const {
  if (!journal_) return;
  nlohmann::ordered_json j;
  j["id"] = session_->id();
  j["config"] = session_->config().to_json();
  j["state"] = std::string(core::to_string(session_->state()));
  j["embedding_provider"] = embedding_provider_;
  journal_->rewrite(kSessionFile, j.dump(2) + "\n");
}

void SessionRuntime::attach_journal() {
  if (!journal_) return;
  auto* journal = journal_.get();
  session_->set_append_listener(
      [journal](const core::Message& m) { journal->append_line(kMessagesFile, dump(m.to_json())); });
  session_->set_state_listener([this, journal](core::SessionState state) {
    nlohmann::ordered_json j;
    j["id"] = session_->id();
    j["config"] = session_->config().to_json();
    j["state"] = std::string(core::to_string(state));
    j["embedding_provider"] = embedding_provider_;
    journal->rewrite(kSessionFile, j.dump(2) + "\n");
  });
  log_.set_sink([journal](const metrics::LogEvent& e) { journal->append_line(kEventsFile, dump(e.to_json())); });
  store_.set_change_listener([journal](const review::ReviewStore& s) { journal->rewrite(kStoreFile, s.export_jsonl()); });
}

std::unique_ptr<SessionRuntime> SessionRuntime::create(const std::string& id, const core::SessionConfig& config,
                                                       llm::Gateway& gateway, const Clock& clock,
                                                       std::optional<fs::path> dir) {
  auto session = std::make_unique<core::Session>(id, config, clock);
  std::unique_ptr<SessionRuntime> rt(new SessionRuntime(std::move(session), gateway, clock, std::move(dir)));
  if (rt->journal_) {
    rt->write_session_file();
    // Fresh files; a stale directory from an earlier run would break id order.
    rt->journal_->rewrite(kMessagesFile, "");
    rt->journal_->rewrite(kEventsFile, "");
    rt->journal_->rewrite(kStoreFile, "");
  }
  rt->attach_journal();
  return rt;
}

SessionDirectory read_session_directory(const fs::path& dir) {
  SessionDirectory d;
  const auto meta = nlohmann::json::parse(read_file(dir / kSessionFile), nullptr, false);
  if (meta.is_discarded()) throw Error(Errc::io_error, "corrupt " + (dir / kSessionFile).string());
  d.id = meta.at("id").get<std::string>();
  d.config = core::SessionConfig::from_json(meta.at("config"));
  d.state = core::state_from_string(meta.at("state").get<std::string>());
  for (const auto& j : read_jsonl(dir / kMessagesFile)) d.messages.push_back(core::Message::from_json(j));
  for (const auto& j : read_jsonl(dir / kEventsFile)) d.events.push_back(metrics::LogEvent::from_json(j));
  for (const auto& j : read_jsonl(dir / kStoreFile)) d.entries.push_back(review::ExpressionEntry::from_json(j));
  if (fs::exists(dir / kRecallFile)) {
    d.recall = metrics::RecallResult::from_json(nlohmann::json::parse(read_file(dir / kRecallFile)));
  }
  return d;
}

std::unique_ptr<SessionRuntime> SessionRuntime::load(const fs::path& dir, llm::Gateway& gateway,
                                                     const Clock& clock) {
  auto d = read_session_directory(dir);
  const auto meta = nlohmann::json::parse(read_file(dir / kSessionFile));
  if (meta.value("embedding_provider", "") != gateway.embedding_provider_id() && !d.entries.empty()) {
    throw Error(Errc::bad_config, "session " + d.id + " was embedded by '" + meta.value("embedding_provider", "") +
                                      "', not '" + gateway.embedding_provider_id() + "'");
  }
  auto session = core::Session::restore(d.id, d.config, clock, std::move(d.messages), d.state);
  std::unique_ptr<SessionRuntime> rt(new SessionRuntime(std::move(session), gateway, clock, dir));

  for (const auto& e : d.events) {
    if (e.kind != metrics::EventKind::FullComprehension) continue;
    const auto id = e.payload.at("message_id").get<core::MessageId>();
    if (rt->cache_.get(id)) continue;
    const auto m = rt->session_->find(id);
    if (!m) continue;
    assist::TranslationResult r;
    r.source_text = m->original_text;
    r.translated_text = e.payload.at("translated_text").get<std::string>();
    r.direction = assist::Direction::ToNative;
    r.context_used = e.payload.at("context_used").get<std::vector<core::MessageId>>();
    rt->cache_.put(id, std::move(r));
  }
  rt->log_.restore(std::move(d.events));
  rt->store_.restore(std::move(d.entries));
  rt->recall_ = std::move(d.recall);
  drop_torn_tail(dir / kMessagesFile);
  drop_torn_tail(dir / kEventsFile);
  rt->attach_journal();
  return rt;
}

SessionRuntime::Posted SessionRuntime::post_message(core::Sender sender, std::string_view text,
                                                    std::optional<std::string> shown_translation) {
  Posted posted;
  posted.message = session_->append(sender, text, std::move(shown_translation));
  nlohmann::ordered_json payload;
  payload["message_id"] = posted.message.id;
  payload["sender"] = std::string(core::to_string(sender));
  payload["tokens"] = posted.message.token_count;
  log_.append(metrics::EventKind::MessageSent, std::move(payload));
  if (sender == core::Sender::NS && session_->config().learning_enabled()) {
    posted.cards = store_.retrieve_context_driven(posted.message.original_text, posted.message.id);
  }
  return posted;
}

metrics::RecallResult SessionRuntime::submit_recall(const metrics::RecallSubmission& submission) {
  const auto events = log_.snapshot();
  auto result = metrics::validate_recall(*session_, events, submission);
  {
    std::lock_guard lock(recall_mu_);
    recall_ = result;
  }
  if (journal_) journal_->rewrite(kRecallFile, result.to_json().dump(2) + "\n");
  session_->close();
  return result;
}

std::optional<metrics::RecallResult> SessionRuntime::recall() const {
  std::lock_guard lock(recall_mu_);
  return recall_;
}

metrics::MetricsReport SessionRuntime::report() const {
  const auto events = log_.snapshot();
  return metrics::compute_report(session_->state(), events, recall());
}

std::optional<fs::path> SessionRuntime::dir() const {
  if (!journal_) return std::nullopt;
  return journal_->dir();
}

bool valid_token(std::string_view token) noexcept {
  if (token.empty() || token.size() > 128) return false;
  for (char c : token) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

SessionRegistry::SessionRegistry(llm::Gateway& gateway, const Clock& clock, core::SessionConfig defaults,
                                 std::optional<fs::path> data_dir)
    : gateway_(gateway), clock_(clock), defaults_(std::move(defaults)), data_dir_(std::move(data_dir)) {
  defaults_.validate();
}

std::shared_ptr<SessionRuntime> SessionRegistry::open(const std::string& token, const nlohmann::json& overrides) {
  if (!valid_token(token)) throw Error(Errc::protocol_error, "session token must match [A-Za-z0-9_-]{1,128}");
  std::lock_guard lock(mu_);
  if (auto it = sessions_.find(token); it != sessions_.end()) {
    if (overrides.is_object() && overrides.contains("condition")) {
      const auto wanted = core::condition_from_string(overrides.at("condition").get<std::string>());
      if (wanted != it->second->session().config().condition) {
        throw Error(Errc::invalid_config, "condition is fixed at session creation");
      }
    }
    return it->second;
  }
  const auto config = overrides.is_object() ? core::SessionConfig::from_json(overrides, defaults_) : defaults_;
  std::optional<fs::path> dir;
  if (data_dir_) dir = *data_dir_ / token;
  std::shared_ptr<SessionRuntime> rt = SessionRuntime::create(token, config, gateway_, clock_, dir);
  sessions_.emplace(token, rt);
  return rt;
}

std::shared_ptr<SessionRuntime> SessionRegistry::find(const std::string& token) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(token);
  return it == sessions_.end() ? nullptr : it->second;
}

std::vector<std::string> SessionRegistry::tokens() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [t, _] : sessions_) out.push_back(t);
  return out;
}

std::size_t SessionRegistry::recover() {
  if (!data_dir_ || !fs::exists(*data_dir_)) return 0;
  std::size_t n = 0;
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(*data_dir_)) {
    if (entry.is_directory() && fs::exists(entry.path() / kSessionFile)) dirs.push_back(entry.path());
  }
  std::sort(dirs.begin(), dirs.end());
  std::lock_guard lock(mu_);
  for (const auto& d : dirs) {
    std::shared_ptr<SessionRuntime> rt = SessionRuntime::load(d, gateway_, clock_);
    const auto id = rt->session().id();
    if (sessions_.emplace(id, std::move(rt)).second) ++n;
  }
  return n;
}

}  // namespace chatlearn::service
