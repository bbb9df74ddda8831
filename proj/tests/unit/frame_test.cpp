#include <gtest/gtest.h>

#include "chatlearn/error.hpp"
#include "chatlearn/service/frame.hpp"
#include "frame_gen.hpp"

using namespace chatlearn;
using namespace chatlearn::service;

namespace {

Errc decode_error(std::string_view text) {
  try {
    decode(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decoded: " << text;
  return Errc::io_error;
}

}  // namespace

TEST(Frame, RandomRoundTrip) {
  std::mt19937_64 rng(20240501);
  for (int i = 0; i < 2000; ++i) {
    const auto f = chatlearn::testing::random_frame(rng);
    const auto text = encode(f);
    EXPECT_EQ(decode(text), f) << text;
    EXPECT_EQ(encode(decode(text)), text);
  }
}

TEST(Frame, EncodingKeyOrder) {
  WireFrame f{"message", "tok", "r1", {{"text", "hi"}}};
  EXPECT_EQ(encode(f), R"({"type":"message","session_token":"tok","request_id":"r1","payload":{"text":"hi"}})");
  f.request_id.reset();
  EXPECT_EQ(encode(f), R"({"type":"message","session_token":"tok","payload":{"text":"hi"}})");
}

TEST(Frame, MissingPayloadIsEmptyObject) {
  const auto f = decode(R"({"type":"cards","session_token":"t"})");
  EXPECT_TRUE(f.payload.is_object());
  EXPECT_TRUE(f.payload.empty());
  EXPECT_FALSE(f.request_id);
}

TEST(Frame, DecodeErrors) {
  EXPECT_EQ(decode_error(""), Errc::protocol_error);
  EXPECT_EQ(decode_error("{"), Errc::protocol_error);
  EXPECT_EQ(decode_error("[]"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"session_token":"t"})"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"type":3,"session_token":"t"})"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"type":"message"})"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"type":"message","session_token":1})"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"type":"message","session_token":"t","request_id":5})"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"type":"message","session_token":"t","payload":[]})"), Errc::protocol_error);
}

TEST(Frame, UnknownTypeRejected) {
  EXPECT_EQ(decode_error(R"({"type":"typing","session_token":"t"})"), Errc::protocol_error);
  EXPECT_EQ(decode_error(R"({"type":"Message","session_token":"t"})"), Errc::protocol_error);
  for (auto t : kFrameTypes) EXPECT_TRUE(is_frame_type(t));
  EXPECT_FALSE(is_frame_type(""));
}

TEST(Frame, AckAndErrorEchoRequest) {
  const WireFrame req{"explore", "tok", "r9", {}};
  const auto ack = make_ack(req, {{"x", 1}});
  EXPECT_EQ(ack.type, "ack");
  EXPECT_EQ(ack.request_id, "r9");
  EXPECT_EQ(ack.session_token, "tok");
  EXPECT_EQ(ack.payload["for"], "explore");
  EXPECT_EQ(ack.payload["result"]["x"], 1);
  const auto err = make_error(req, "feature-disabled", "no");
  EXPECT_EQ(err.type, "error");
  EXPECT_EQ(err.request_id, "r9");
  EXPECT_EQ(err.payload["code"], "feature-disabled");
  EXPECT_EQ(err.payload["message"], "no");
  EXPECT_EQ(err.payload["for"], "explore");
}
