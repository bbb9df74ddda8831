#include "chatlearn/service/frame.hpp"

#include <algorithm>

#include "chatlearn/error.hpp"

namespace chatlearn::service {

bool is_frame_type(std::string_view type) noexcept {
  return std::find(kFrameTypes.begin(), kFrameTypes.end(), type) != kFrameTypes.end();
}

std::string encode(const WireFrame& frame) {
  nlohmann::ordered_json j;
  j["type"] = frame.type;
  j["session_token"] = frame.session_token;
  if (frame.request_id) j["request_id"] = *frame.request_id;
  j["payload"] = frame.payload;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

WireFrame decode(std::string_view text) {
  auto j = nlohmann::ordered_json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(Errc::protocol_error, "frame is not a JSON object");
  WireFrame f;
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) throw Error(Errc::protocol_error, "frame lacks a type");
  f.type = type->get<std::string>();
  if (!is_frame_type(f.type)) throw Error(Errc::protocol_error, "unknown frame type '" + f.type + "'");
  const auto token = j.find("session_token");
  if (token == j.end() || !token->is_string()) throw Error(Errc::protocol_error, "frame lacks a session_token");
  f.session_token = token->get<std::string>();
  if (auto rid = j.find("request_id"); rid != j.end()) {
    if (!rid->is_string()) throw Error(Errc::protocol_error, "request_id must be a string");
    f.request_id = rid->get<std::string>();
  }
  if (auto p = j.find("payload"); p != j.end()) {
    if (!p->is_object()) throw Error(Errc::protocol_error, "payload must be an object");
    f.payload = *p;
  }
  return f;
}

WireFrame make_error(const WireFrame& request, std::string_view code, std::string_view message) {
  WireFrame f;
  f.type = "error";
  f.session_token = request.session_token;
  f.request_id = request.request_id;
  f.payload["code"] = std::string(code);
  f.payload["message"] = std::string(message);
  f.payload["for"] = request.type;
  return f;
}

WireFrame make_ack(const WireFrame& request, nlohmann::ordered_json payload) {
  WireFrame f;
  f.type = "ack";
  f.session_token = request.session_token;
  f.request_id = request.request_id;
  f.payload["for"] = request.type;
  f.payload["result"] = std::move(payload);
  return f;
}

}  // namespace chatlearn::service
