#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/core/session.hpp"
#include "chatlearn/error.hpp"
#include "chatlearn/metrics/report.hpp"
#include "chatlearn/service/frame.hpp"

namespace chatlearn::service {

namespace fs = std::filesystem;

/// A scripted two-party session:
///   {"session_id": "demo", "condition": "ChatLearn", "config": {...},
///    "mock_llm_script": "demo.mock.jsonl",
///    "steps": [{"op": "ns_send", "text": "..."}, ...]}
///
/// Ops and their fields:
///   ns_send               text
///   nns_draft             text, assist (default true)
///   nns_full_comprehend   msg_ref
///   nns_explore           msg_ref, selection
///   nns_card_interact     entry_ref (surface text of a card the NNS has seen)
///   begin_recall
///   recall_submit         items [{expression, confidence, difficulty}],
///                         submitted_within_seconds
///   close
/// msg_ref is the index of an earlier ns_send step.
struct TranscriptScript {
  std::string session_id;
  core::Condition condition = core::Condition::ChatLearn;
  nlohmann::json config = nlohmann::json::object();
  std::optional<fs::path> mock_llm_script;
  std::vector<nlohmann::json> steps;

  /// Throws Error(script_invalid) on unknown ops, bad references or a
  /// missing/misplaced close.
  static TranscriptScript from_json(const nlohmann::json& j, const fs::path& base_dir = {});
  static TranscriptScript load(const fs::path& file);
};

/// Raised when a step's request comes back as an error frame.
class StepFailure : public Error {
 public:
  StepFailure(std::size_t step, const std::string& what)
      : Error(Errc::step_failure, "step " + std::to_string(step) + ": " + what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

struct ReplayOptions {
  std::int64_t start_ms = 1'700'000'000'000;
  std::int64_t step_ms = 1000;
};

struct ReplayOutcome {
  fs::path session_dir;
  metrics::MetricsReport report;
  std::vector<WireFrame> nns_frames;  // everything the server sent to each side
  std::vector<WireFrame> ns_frames;
};

/// Runs the script against an in-process Hub with a mock provider and a
/// manual clock. Writes out_dir/<session_id>/ (session files, frames.jsonl,
/// report.json, report.txt). An existing session directory is replaced.
ReplayOutcome replay(const TranscriptScript& script, const fs::path& out_dir, const ReplayOptions& options = {});

}  // namespace chatlearn::service
