#include "chatlearn/error.hpp"

namespace chatlearn {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_config: return "invalid-config";
    case Errc::bad_config: return "bad-config";
    case Errc::session_closed: return "session-closed";
    case Errc::empty_text: return "empty-text";
    case Errc::unknown_session: return "unknown-session";
    case Errc::unknown_message: return "unknown-message";
    case Errc::wrong_state: return "wrong-state";
    case Errc::session_not_finished: return "session-not-finished";
    case Errc::over_time: return "over-time";
    case Errc::missing_placeholder: return "missing-placeholder";
    case Errc::provider_unavailable: return "provider-unavailable";
    case Errc::timeout: return "timeout";
    case Errc::feature_disabled: return "feature-disabled";
    case Errc::selection_not_found: return "selection-not-found";
    case Errc::partial_pipeline_failure: return "partial-pipeline-failure";
    case Errc::stage_parse_failure: return "stage-parse-failure";
    case Errc::embedding_failure: return "embedding-failure";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::zero_vector: return "zero-vector";
    case Errc::unknown_entry: return "unknown-entry";
    case Errc::never_triggered: return "never-triggered";
    case Errc::protocol_error: return "protocol-error";
    case Errc::role_taken: return "role-taken";
    case Errc::port_in_use: return "port-in-use";
    case Errc::script_invalid: return "script-invalid";
    case Errc::step_failure: return "step-failure";
    case Errc::io_error: return "io-error";
  }
  return "unknown";
}

}  // namespace chatlearn
