#include <gtest/gtest.h>

#include "chatlearn/core/clock.hpp"
#include "chatlearn/llm/mock_provider.hpp"
#include "chatlearn/service/hub.hpp"

using namespace chatlearn;
using namespace chatlearn::service;

namespace {

class RecordingPeer : public Peer {
 public:
  void send(const WireFrame& frame) override { frames.push_back(frame); }
  void close() override { closed = true; }

  std::vector<WireFrame> frames;
  bool closed = false;
};

struct HubRig {
  HubRig() : mock(std::make_shared<llm::MockProvider>()), gateway(mock, mock), clock(0) {
    mock->add_reply({"User Message: Hello there"}, R"({"translated_text": "你好"})");
  }

  std::shared_ptr<RecordingPeer> join(const std::string& role, const std::string& token = "room",
                                      nlohmann::ordered_json config = nullptr) {
    auto p = std::make_shared<RecordingPeer>();
    nlohmann::ordered_json payload{{"role", role}};
    if (!config.is_null()) payload["config"] = config;
    hub.handle(p, {"hello", token, "h", payload});
    return p;
  }

  WireFrame request(const std::shared_ptr<RecordingPeer>& p, const std::string& type,
                    nlohmann::ordered_json payload = nlohmann::ordered_json::object(), const std::string& token = "room") {
    const auto rid = "q" + std::to_string(++next_id);
    hub.handle(p, {type, token, rid, std::move(payload)});
    for (const auto& f : p->frames) {
      if (f.request_id == rid) return f;
    }
    ADD_FAILURE() << "no reply to " << type;
    return {};
  }

  std::shared_ptr<llm::MockProvider> mock;
  llm::Gateway gateway;
  ManualClock clock;
  SessionRegistry registry{gateway, clock, {}, std::nullopt};
  assist::AssistEngine engine{gateway};
  Hub hub{registry, engine};
  int next_id = 0;
};

std::string error_code(const WireFrame& f) {
  return f.type == "error" ? f.payload.value("code", std::string()) : std::string();
}

std::vector<std::string> relayed_texts(const RecordingPeer& p) {
  std::vector<std::string> out;
  for (const auto& f : p.frames) {
    if (f.type == "message") out.push_back(f.payload["original_text"].get<std::string>());
  }
  return out;
}

}  // namespace

TEST(Hub, HelloAck) {
  HubRig r;
  auto nns = r.join("NNS", "room", {{"condition", "Baseline"}});
  ASSERT_EQ(nns->frames.size(), 1u);
  const auto& ack = nns->frames[0];
  EXPECT_EQ(ack.type, "ack");
  EXPECT_EQ(ack.request_id, "h");
  EXPECT_EQ(ack.payload["for"], "hello");
  const auto& res = ack.payload["result"];
  EXPECT_EQ(res["session_id"], "room");
  EXPECT_EQ(res["role"], "NNS");
  EXPECT_EQ(res["condition"], "Baseline");
  EXPECT_EQ(res["state"], "Active");
  EXPECT_TRUE(res["messages"].empty());
  EXPECT_EQ(res["config"]["top_k"], 3);
}

TEST(Hub, RelaysInOrderToBothSides) {
  HubRig r;
  auto nns = r.join("NNS");
  auto ns = r.join("NS");
  const std::vector<std::string> texts = {"Hello there", "hi", "how are you", "fine", "bye"};
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto& who = i % 2 == 0 ? ns : nns;
    const auto ack = r.request(who, "message", {{"text", texts[i]}});
    EXPECT_EQ(ack.type, "ack");
    EXPECT_EQ(ack.payload["result"]["message_id"], i + 1);
  }
  EXPECT_EQ(relayed_texts(*nns), texts);
  EXPECT_EQ(relayed_texts(*ns), texts);

  // A late joiner gets the history in its hello ack.
  r.hub.disconnect(ns.get());
  auto ns2 = r.join("NS");
  EXPECT_EQ(ns2->frames.at(0).payload["result"]["messages"].size(), texts.size());
}

TEST(Hub, RoleTakenClosesSecondConnection) {
  HubRig r;
  auto first = r.join("NNS");
  auto second = r.join("NNS");
  EXPECT_EQ(error_code(second->frames.at(0)), "role-taken");
  EXPECT_TRUE(second->closed);
  EXPECT_FALSE(first->closed);
  r.hub.disconnect(first.get());
  auto third = r.join("NNS");
  EXPECT_EQ(third->frames.at(0).type, "ack");
}

TEST(Hub, SeatFreedWhenPeerDies) {
  HubRig r;
  {
    auto gone = r.join("NS");
  }
  auto again = r.join("NS");
  EXPECT_EQ(again->frames.at(0).type, "ack");
}

TEST(Hub, HelloErrors) {
  HubRig r;
  auto p = std::make_shared<RecordingPeer>();
  r.hub.handle(p, {"hello", "room", "h", {{"role", "teacher"}}});
  EXPECT_EQ(error_code(p->frames.back()), "protocol-error");
  r.hub.handle(p, {"hello", "bad token!", "h", {{"role", "NS"}}});
  EXPECT_EQ(error_code(p->frames.back()), "protocol-error");
  r.hub.handle(p, {"hello", "room", "h", {{"role", "NS"}, {"config", {{"top_k", 0}}}}});
  EXPECT_EQ(error_code(p->frames.back()), "invalid-config");
  r.hub.handle(p, {"hello", "room", "h", {{"role", "NS"}}});
  EXPECT_EQ(p->frames.back().type, "ack");
  r.hub.handle(p, {"hello", "room", "h2", {{"role", "NNS"}}});
  EXPECT_EQ(error_code(p->frames.back()), "protocol-error");

  auto b = r.join("NNS", "room", {{"condition", "Baseline"}});
  EXPECT_EQ(error_code(b->frames.back()), "invalid-config");
}

TEST(Hub, ProtocolErrors) {
  HubRig r;
  auto p = std::make_shared<RecordingPeer>();
  r.hub.handle(p, {"message", "room", "m", {{"text", "hi"}}});
  EXPECT_EQ(error_code(p->frames.back()), "protocol-error");
  EXPECT_EQ(p->frames.back().request_id, "m");

  r.hub.handle_text(p, "not json");
  EXPECT_EQ(error_code(p->frames.back()), "protocol-error");
  EXPECT_EQ(p->frames.back().payload["for"], "unknown");
  r.hub.handle_text(p, R"({"type":"typing","session_token":"room"})");
  EXPECT_EQ(error_code(p->frames.back()), "protocol-error");

  auto nns = r.join("NNS");
  EXPECT_EQ(error_code(r.request(nns, "ack")), "protocol-error");
  EXPECT_EQ(error_code(r.request(nns, "error")), "protocol-error");
  EXPECT_EQ(error_code(r.request(nns, "message", {{"text", "x"}}, "other")), "protocol-error");
  EXPECT_EQ(error_code(r.request(nns, "message", {{"text", 3}})), "protocol-error");
  EXPECT_EQ(error_code(r.request(nns, "message", {{"text", "  "}})), "empty-text");
  EXPECT_EQ(error_code(r.request(nns, "translate_full", {{"message_id", "1"}})), "protocol-error");
  EXPECT_EQ(error_code(r.request(nns, "translate_full", {{"message_id", 7}})), "unknown-message");
}

TEST(Hub, NsCannotUseLanguageSupport) {
  HubRig r;
  auto ns = r.join("NS");
  for (const auto* type : {"translate_full", "explore", "build_expression", "cards", "card_interact", "begin_recall",
                           "recall_submit"}) {
    EXPECT_EQ(error_code(r.request(ns, type)), "feature-disabled") << type;
  }
}

TEST(Hub, BaselineGatesLearningFeatures) {
  HubRig r;
  auto nns = r.join("NNS", "room", {{"condition", "Baseline"}});
  auto ns = r.join("NS");
  r.request(ns, "message", {{"text", "Hello there"}});
  EXPECT_EQ(error_code(r.request(nns, "explore", {{"message_id", 1}, {"selection", "Hello"}})), "feature-disabled");
  EXPECT_EQ(error_code(r.request(nns, "cards")), "feature-disabled");
  EXPECT_EQ(error_code(r.request(nns, "card_interact", {{"entry_id", 1}})), "feature-disabled");
  const auto full = r.request(nns, "translate_full", {{"message_id", 1}});
  ASSERT_EQ(full.type, "ack");
  EXPECT_EQ(full.payload["result"]["translated_text"], "你好");
  for (const auto& f : nns->frames) EXPECT_NE(f.type, "cards");
}

TEST(Hub, RecallFlowOverFrames) {
  HubRig r;
  auto nns = r.join("NNS");
  auto ns = r.join("NS");
  r.request(ns, "message", {{"text", "Hello there"}});
  const auto begin = r.request(nns, "begin_recall");
  EXPECT_EQ(begin.payload["result"]["recall_test_seconds"], 180);
  EXPECT_EQ(error_code(r.request(ns, "message", {{"text", "late"}})), "session-closed");
  const auto result = r.request(
      nns, "recall_submit",
      {{"items", {{{"expression", "hello there"}, {"confidence", 4}, {"difficulty", 2}}}}, {"submitted_within_seconds", 30}});
  ASSERT_EQ(result.type, "ack") << result.payload.dump();
  EXPECT_EQ(result.payload["result"]["recall_quantity"], 1);
  EXPECT_EQ(r.registry.find("room")->session().state(), core::SessionState::Closed);
  EXPECT_NO_THROW(r.hub.close_session("room"));
  EXPECT_THROW(r.hub.close_session("nope"), Error);
}
