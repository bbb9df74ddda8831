#include "chatlearn/service/replay.hpp"

#include <fstream>
#include <set>

#include "chatlearn/core/clock.hpp"
#include "chatlearn/llm/mock_provider.hpp"
#include "chatlearn/service/hub.hpp"
#include "chatlearn/service/runtime.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn::service {

namespace {

const std::set<std::string> kOps = {
    "ns_send", "nns_draft", "nns_full_comprehend", "nns_explore", "nns_card_interact", "begin_recall",
    "recall_submit", "close",
};

[[noreturn]] void invalid(std::size_t step, const std::string& what) {
  throw Error(Errc::script_invalid, "step " + std::to_string(step) + ": " + what);
}

const std::string& text_field(const nlohmann::json& step, std::size_t i, const char* key) {
  auto it = step.find(key);
  if (it == step.end() || !it->is_string() || it->get_ref<const std::string&>().empty()) {
    invalid(i, std::string("needs non-empty string '") + key + "'");
  }
  return it->get_ref<const std::string&>();
}

class LocalPeer final : public Peer {
 public:
  void send(const WireFrame& frame) override { frames.push_back(frame); }
  void close() override { closed = true; }

  std::vector<WireFrame> frames;
  bool closed = false;
};

class Driver {
 public:
  Driver(Hub& hub, const std::string& token, ManualClock& clock, std::int64_t step_ms)
      : hub_(hub), token_(token), clock_(clock), step_ms_(step_ms) {}

  /// Sends one request and returns its ack payload.
  nlohmann::ordered_json request(const std::shared_ptr<LocalPeer>& peer, std::size_t step, const std::string& type,
                                 nlohmann::ordered_json payload) {
    WireFrame f;
    f.type = type;
    f.session_token = token_;
    f.request_id = "r" + std::to_string(++requests_);
    f.payload = std::move(payload);
    // Through the codec, so replays exercise the wire format too.
    const std::size_t before = peer->frames.size();
    hub_.handle_text(peer, encode(f));
    for (std::size_t i = before; i < peer->frames.size(); ++i) {
      const auto& r = peer->frames[i];
      if (r.request_id != f.request_id) continue;
      if (r.type == "error") {
        throw StepFailure(step, type + " failed: " + r.payload.value("code", "") + ": " +
                                    r.payload.value("message", ""));
      }
      if (r.type == "ack") return r.payload.at("result");
    }
    throw StepFailure(step, type + " got no reply");
  }

  void tick() { clock_.advance(step_ms_); }

 private:
  Hub& hub_;
  std::string token_;
  ManualClock& clock_;
  std::int64_t step_ms_;
  std::uint64_t requests_ = 0;
};

std::optional<std::uint64_t> seen_card(const std::vector<WireFrame>& frames, std::string_view surface) {
  const auto key = text::normalize_key(surface);
  std::optional<std::uint64_t> found;
  for (const auto& f : frames) {
    const nlohmann::ordered_json* cards = nullptr;
    if (f.type == "cards") {
      cards = &f.payload["cards"];
    } else if (f.type == "ack" && f.payload.value("for", "") == "cards") {
      cards = &f.payload["result"]["pinned"];
    }
    if (!cards || !cards->is_array()) continue;
    for (const auto& c : *cards) {
      if (text::normalize_key(c.value("surface_text", "")) == key) found = c.at("entry_id").get<std::uint64_t>();
    }
  }
  return found;
}

void write_text(const fs::path& file, const std::string& content) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw Error(Errc::io_error, "cannot write " + file.string());
}

}  // namespace

TranscriptScript TranscriptScript::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(Errc::script_invalid, "script must be a JSON object");
  TranscriptScript s;
  try {
    s.session_id = j.at("session_id").get<std::string>();
    if (j.contains("condition")) s.condition = core::condition_from_string(j.at("condition").get<std::string>());
    if (j.contains("config")) s.config = j.at("config");
    if (j.contains("mock_llm_script") && !j.at("mock_llm_script").is_null()) {
      fs::path p = j.at("mock_llm_script").get<std::string>();
      s.mock_llm_script = p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    }
    for (const auto& step : j.at("steps")) s.steps.push_back(step);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::script_invalid, std::string("malformed script: ") + e.what());
  } catch (const Error& e) {
    throw Error(Errc::script_invalid, e.what());
  }
  if (!valid_token(s.session_id)) throw Error(Errc::script_invalid, "session_id must match [A-Za-z0-9_-]{1,128}");
  if (!s.config.is_object()) throw Error(Errc::script_invalid, "config must be an object");
  if (s.config.contains("condition") &&
      s.config["condition"] != std::string(core::to_string(s.condition))) {
    throw Error(Errc::script_invalid, "config.condition disagrees with condition");
  }
  if (s.steps.empty()) throw Error(Errc::script_invalid, "script has no steps");

  bool recall_begun = false;
  bool recall_done = false;
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& step = s.steps[i];
    if (!step.is_object() || !step.contains("op") || !step["op"].is_string()) invalid(i, "needs an 'op'");
    const auto op = step["op"].get<std::string>();
    if (!kOps.contains(op)) invalid(i, "unknown op '" + op + "'");
    if (op == "close") {
      if (i + 1 != s.steps.size()) invalid(i, "close must be the last step");
    } else if (i + 1 == s.steps.size()) {
      invalid(i, "the last step must be close");
    }
    if (op == "ns_send") {
      text_field(step, i, "text");
    } else if (op == "nns_draft") {
      text_field(step, i, "text");
      if (step.contains("assist") && !step["assist"].is_boolean()) invalid(i, "'assist' must be a boolean");
    } else if (op == "nns_full_comprehend" || op == "nns_explore") {
      const bool ok = step.contains("msg_ref") && step["msg_ref"].is_number_integer() &&
                      (step["msg_ref"].is_number_unsigned() || step["msg_ref"].get<std::int64_t>() >= 0);
      if (!ok) invalid(i, "needs a non-negative integer 'msg_ref'");
      const auto ref = step["msg_ref"].get<std::size_t>();
      if (ref >= i || s.steps[ref].value("op", "") != "ns_send") {
        invalid(i, "msg_ref " + std::to_string(ref) + " is not an earlier ns_send step");
      }
      if (op == "nns_explore") text_field(step, i, "selection");
    } else if (op == "nns_card_interact") {
      text_field(step, i, "entry_ref");
    } else if (op == "begin_recall") {
      if (recall_begun) invalid(i, "begin_recall appears twice");
      recall_begun = true;
    } else if (op == "recall_submit") {
      if (!recall_begun) invalid(i, "recall_submit before begin_recall");
      if (recall_done) invalid(i, "recall_submit appears twice");
      recall_done = true;
      try {
        metrics::RecallSubmission::from_json(step);
      } catch (const Error& e) {
        invalid(i, e.what());
      }
    }
  }
  return s;
}

TranscriptScript TranscriptScript::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::io_error, "cannot open script " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::script_invalid, std::string("script is not valid JSON: ") + e.what());
  }
  return from_json(j, file.parent_path());
}

ReplayOutcome replay(const TranscriptScript& script, const fs::path& out_dir, const ReplayOptions& options) {
  auto mock = std::make_shared<llm::MockProvider>(script.mock_llm_script
                                                      ? llm::MockProvider::from_file(*script.mock_llm_script)
                                                      : llm::MockProvider{});
  llm::Gateway gateway(mock, mock);
  ManualClock clock(options.start_ms);

  const fs::path session_dir = out_dir / script.session_id;
  if (fs::exists(session_dir)) {
    if (!fs::exists(session_dir / "session.json")) {
      throw Error(Errc::io_error, session_dir.string() + " exists and is not a session directory");
    }
    fs::remove_all(session_dir);
  }
  fs::create_directories(out_dir);

  core::SessionConfig defaults;
  defaults.condition = script.condition;
  SessionRegistry registry(gateway, clock, defaults, out_dir);
  assist::AssistEngine engine(gateway);
  Hub hub(registry, engine);
  Driver driver(hub, script.session_id, clock, options.step_ms);

  auto nns = std::make_shared<LocalPeer>();
  auto ns = std::make_shared<LocalPeer>();
  auto config = nlohmann::ordered_json::parse(script.config.dump());
  config["condition"] = std::string(core::to_string(script.condition));
  try {
    driver.request(nns, 0, "hello", {{"role", "NNS"}, {"config", config}});
    driver.request(ns, 0, "hello", {{"role", "NS"}});
  } catch (const StepFailure& e) {
    throw Error(Errc::step_failure, std::string("joining the session failed: ") + e.what());
  }

  std::vector<std::optional<std::uint64_t>> message_of(script.steps.size());
  for (std::size_t i = 0; i < script.steps.size(); ++i) {
    driver.tick();
    const auto& step = script.steps[i];
    const auto op = step["op"].get<std::string>();
    if (op == "ns_send") {
      message_of[i] = driver.request(ns, i, "message", {{"text", step["text"].get<std::string>()}})["message_id"].get<std::uint64_t>();
    } else if (op == "nns_draft") {
      std::string text = step["text"].get<std::string>();
      if (step.value("assist", true)) {
        const auto built = driver.request(nns, i, "build_expression", {{"draft", text}});
        text = built["translation"]["translated_text"].get<std::string>();
      }
      message_of[i] = driver.request(nns, i, "message", {{"text", text}})["message_id"].get<std::uint64_t>();
    } else if (op == "nns_full_comprehend") {
      driver.request(nns, i, "translate_full", {{"message_id", *message_of[step["msg_ref"].get<std::size_t>()]}});
    } else if (op == "nns_explore") {
      driver.request(nns, i, "explore",
                     {{"message_id", *message_of[step["msg_ref"].get<std::size_t>()]}, {"selection", step["selection"].get<std::string>()}});
    } else if (op == "nns_card_interact") {
      const auto ref = step["entry_ref"].get<std::string>();
      auto id = seen_card(nns->frames, ref);
      if (!id) {
        // A card may also be pinned without having been pushed this session.
        driver.request(nns, i, "cards", nlohmann::ordered_json::object());
        id = seen_card(nns->frames, ref);
      }
      if (!id) throw StepFailure(i, "no card for '" + ref + "' has been shown to the NNS");
      driver.request(nns, i, "card_interact", {{"entry_id", *id}});
    } else if (op == "begin_recall") {
      driver.request(nns, i, "begin_recall", nlohmann::ordered_json::object());
    } else if (op == "recall_submit") {
      auto payload = nlohmann::ordered_json::parse(step.dump());
      payload.erase("op");
      driver.request(nns, i, "recall_submit", std::move(payload));
    } else if (op == "close") {
      hub.close_session(script.session_id);
    }
  }
  hub.disconnect(nns.get());
  hub.disconnect(ns.get());

  auto rt = registry.find(script.session_id);
  ReplayOutcome outcome;
  outcome.session_dir = session_dir;
  outcome.report = rt->report();
  outcome.nns_frames = nns->frames;
  outcome.ns_frames = ns->frames;

  std::string frames;
  for (const auto& [role, list] : {std::pair{"NNS", &nns->frames}, std::pair{"NS", &ns->frames}}) {
    for (const auto& f : *list) {
      nlohmann::ordered_json line;
      line["to"] = role;
      line["frame"] = nlohmann::ordered_json::parse(encode(f));
      frames += line.dump() + "\n";
    }
  }
  write_text(session_dir / "frames.jsonl", frames);
  write_text(session_dir / "report.json", outcome.report.to_json().dump(2) + "\n");
  write_text(session_dir / "report.txt", outcome.report.to_table());
  return outcome;
}

}  // namespace chatlearn::service
