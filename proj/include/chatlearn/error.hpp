#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chatlearn {

enum class Errc {
  invalid_config,
  bad_config,
  session_closed,
  empty_text,
  unknown_session,
  unknown_message,
  wrong_state,
  session_not_finished,
  over_time,
  missing_placeholder,
  provider_unavailable,
  timeout,
  feature_disabled,
  selection_not_found,
  partial_pipeline_failure,
  stage_parse_failure,
  embedding_failure,
  dimension_mismatch,
  zero_vector,
  unknown_entry,
  never_triggered,
  protocol_error,
  role_taken,
  port_in_use,
  script_invalid,
  step_failure,
  io_error,
};

/// Stable kebab-case name used on the wire and in logs.
std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  explicit Error(Errc code) : Error(code, std::string(to_string(code))) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace chatlearn
