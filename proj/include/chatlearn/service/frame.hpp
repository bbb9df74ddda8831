#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace chatlearn::service {

/// Every frame type on the wire.
inline constexpr std::array<std::string_view, 11> kFrameTypes = {
    "hello", "message", "translate_full", "explore", "build_expression", "cards",
    "card_interact", "begin_recall", "recall_submit", "error", "ack",
};

bool is_frame_type(std::string_view type) noexcept;

struct WireFrame {
  std::string type;
  std::string session_token;
  std::optional<std::string> request_id;  // echoed on the matching ack/error
  nlohmann::ordered_json payload = nlohmann::ordered_json::object();

  bool operator==(const WireFrame&) const = default;
};

/// {"type", "session_token", ["request_id"], "payload"} as one JSON text.
std::string encode(const WireFrame& frame);

/// Throws Error(protocol_error) on malformed JSON, missing fields or an
/// unknown type tag.
WireFrame decode(std::string_view text);

WireFrame make_error(const WireFrame& request, std::string_view code, std::string_view message);
WireFrame make_ack(const WireFrame& request, nlohmann::ordered_json payload);

}  // namespace chatlearn::service
