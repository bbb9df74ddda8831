#include <gtest/gtest.h>

#include <cstdlib>

#include "chatlearn/core/clock.hpp"
#include "chatlearn/llm/mock_provider.hpp"
#include "chatlearn/service/config.hpp"
#include "chatlearn/service/server.hpp"
#include "test_support.hpp"
#include "ws_client.hpp"

using namespace chatlearn;
using namespace chatlearn::service;
using chatlearn::testing::TempDir;
using chatlearn::testing::WsClient;

namespace {

struct Live {
  Live() : mock(std::make_shared<llm::MockProvider>()), gateway(mock, mock) {
    mock->add_reply({"User Message: Hello over the wire"}, R"({"translated_text": "你好"})");
    port = server.start();
  }
  ~Live() { server.stop(); }

  std::shared_ptr<llm::MockProvider> mock;
  llm::Gateway gateway;
  SystemClock clock;
  SessionRegistry registry{gateway, clock, {}, std::nullopt};
  assist::AssistEngine engine{gateway};
  Hub hub{registry, engine};
  Server server{hub, "127.0.0.1", 0};
  std::uint16_t port = 0;
};

std::optional<WireFrame> next_of_type(WsClient& c, const std::string& type) {
  while (auto f = c.next()) {
    if (f->type == type) return f;
  }
  return std::nullopt;
}

}  // namespace

TEST(Server, TwoClientsChatOverWebSocket) {
  Live live;
  ASSERT_NE(live.port, 0);
  WsClient nns("127.0.0.1", live.port), ns("127.0.0.1", live.port);
  auto h1 = nns.call("room", "hello", {{"role", "NNS"}});
  ASSERT_TRUE(h1);
  EXPECT_EQ(h1->type, "ack");
  auto h2 = ns.call("room", "hello", {{"role", "NS"}});
  ASSERT_TRUE(h2);
  EXPECT_EQ(h2->type, "ack");

  auto sent = ns.call("room", "message", {{"text", "Hello over the wire"}});
  ASSERT_TRUE(sent);
  EXPECT_EQ(sent->payload["result"]["message_id"], 1);
  auto relay = next_of_type(nns, "message");
  ASSERT_TRUE(relay);
  EXPECT_EQ(relay->payload["original_text"], "Hello over the wire");
  EXPECT_EQ(relay->payload["sender"], "NS");

  auto full = nns.call("room", "translate_full", {{"message_id", 1}});
  ASSERT_TRUE(full);
  EXPECT_EQ(full->payload["result"]["translated_text"], "你好");

  auto bad = nns.call("room", "explore", {{"message_id", 1}, {"selection", "nowhere"}});
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->payload["code"], "selection-not-found");

  // Garbage on the wire is answered, not fatal.
  nns.send_raw("{{{");
  auto err = next_of_type(nns, "error");
  ASSERT_TRUE(err);
  EXPECT_EQ(err->payload["code"], "protocol-error");
  EXPECT_TRUE(nns.call("room", "cards"));
}

TEST(Server, ThirdClientGetsRoleTakenAndIsClosed) {
  Live live;
  WsClient a("127.0.0.1", live.port), b("127.0.0.1", live.port);
  ASSERT_EQ(a.call("room", "hello", {{"role", "NNS"}})->type, "ack");
  ASSERT_EQ(b.call("room", "hello", {{"role", "NS"}})->type, "ack");
  WsClient c("127.0.0.1", live.port);
  auto r = c.call("room", "hello", {{"role", "NNS"}});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->payload["code"], "role-taken");
  EXPECT_FALSE(c.next());  // server closed the socket
}

TEST(Server, SeatFreedOnDisconnect) {
  Live live;
  {
    WsClient a("127.0.0.1", live.port);
    ASSERT_EQ(a.call("room", "hello", {{"role", "NS"}})->type, "ack");
  }
  // The server notices the close asynchronously.
  std::optional<WireFrame> r;
  for (int i = 0; i < 50; ++i) {
    WsClient again("127.0.0.1", live.port);
    r = again.call("room", "hello", {{"role", "NS"}});
    if (r && r->type == "ack") break;
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  ASSERT_TRUE(r);
  EXPECT_EQ(r->type, "ack");
}

TEST(Server, PortInUse) {
  Live live;
  Server other(live.hub, "127.0.0.1", live.port);
  try {
    other.start();
    FAIL() << "expected port-in-use";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::port_in_use);
  }
}

TEST(Server, StopIsIdempotent) {
  Live live;
  live.server.stop();
  live.server.stop();
}

TEST(ServiceConfig, LoadResolvesRelativePaths) {
  TempDir tmp;
  chatlearn::testing::write_file(tmp.path() / "serve.json", R"({
    "bind": "0.0.0.0", "port": 0, "data_dir": "sessions",
    "session_defaults": {"condition": "Baseline", "top_k": 5},
    "provider": {"kind": "mock", "mock_script": "mock.jsonl", "timeout_ms": 500, "max_in_flight": 2}
  })");
  unsetenv("LLM_PROVIDER");
  unsetenv("LLM_MOCK_SCRIPT");
  const auto c = ServiceConfig::load(tmp.path() / "serve.json");
  EXPECT_EQ(c.bind, "0.0.0.0");
  EXPECT_EQ(c.port, 0);
  EXPECT_EQ(c.data_dir, tmp.path() / "sessions");
  EXPECT_EQ(c.session_defaults.condition, core::Condition::Baseline);
  EXPECT_EQ(c.session_defaults.top_k, 5);
  EXPECT_EQ(c.session_defaults.similarity_threshold, 0.15);
  EXPECT_EQ(c.provider.mock_script, tmp.path() / "mock.jsonl");
  EXPECT_EQ(c.provider.timeout_ms, 500);
  EXPECT_EQ(c.provider.max_in_flight, 2);

  setenv("LLM_MOCK_SCRIPT", "/elsewhere.jsonl", 1);
  EXPECT_EQ(ServiceConfig::load(tmp.path() / "serve.json").provider.mock_script, "/elsewhere.jsonl");
  setenv("LLM_PROVIDER", "carrier-pigeon", 1);
  EXPECT_THROW(ServiceConfig::load(tmp.path() / "serve.json"), Error);
  unsetenv("LLM_PROVIDER");
  unsetenv("LLM_MOCK_SCRIPT");
}

TEST(ServiceConfig, Defaults) {
  const auto c = ServiceConfig::from_json(nlohmann::json::object());
  EXPECT_EQ(c.bind, "127.0.0.1");
  EXPECT_EQ(c.port, 8080);
  EXPECT_FALSE(c.data_dir);
  EXPECT_EQ(c.provider.kind, "mock");
  EXPECT_EQ(c.provider.timeout_ms, 15000);
}

TEST(ServiceConfig, Rejects) {
  auto code = [](const std::function<void()>& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::io_error;
  };
  EXPECT_EQ(code([] { ServiceConfig::from_json(nlohmann::json::array()); }), Errc::invalid_config);
  EXPECT_EQ(code([] { ServiceConfig::from_json({{"port", 70000}}); }), Errc::invalid_config);
  EXPECT_EQ(code([] { ServiceConfig::from_json({{"port", "80"}}); }), Errc::invalid_config);
  EXPECT_EQ(code([] { ServiceConfig::from_json({{"provider", {{"kind", "other"}}}}); }), Errc::invalid_config);
  EXPECT_EQ(code([] { ServiceConfig::from_json({{"provider", {{"timeout_ms", 0}}}}); }), Errc::invalid_config);
  EXPECT_EQ(code([] { ServiceConfig::from_json({{"session_defaults", {{"top_k", 0}}}}); }), Errc::invalid_config);
  TempDir tmp;
  EXPECT_EQ(code([&] { ServiceConfig::load(tmp.path() / "none.json"); }), Errc::io_error);
  chatlearn::testing::write_file(tmp.path() / "bad.json", "{");
  EXPECT_EQ(code([&] { ServiceConfig::load(tmp.path() / "bad.json"); }), Errc::invalid_config);
}
