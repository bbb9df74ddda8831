#include <gtest/gtest.h>

#include <thread>

#include "chatlearn/core/clock.hpp"
#include "chatlearn/core/session.hpp"
#include "chatlearn/error.hpp"

using namespace chatlearn;
using namespace chatlearn::core;

namespace {

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::io_error;
}

}  // namespace

TEST(SessionConfig, Defaults) {
  const SessionConfig c;
  EXPECT_EQ(c.context_window_turns, 6);
  EXPECT_EQ(c.top_k, 3);
  EXPECT_DOUBLE_EQ(c.similarity_threshold, 0.15);
  EXPECT_EQ(c.recall_test_seconds, 180);
  EXPECT_EQ(c.condition, Condition::ChatLearn);
  EXPECT_FALSE(c.persist_review_store);
  EXPECT_NO_THROW(c.validate());
}

TEST(SessionConfig, RejectsNonPositiveAndUnknown) {
  EXPECT_EQ(code_of([] { SessionConfig::from_json({{"context_window_turns", 0}}); }), Errc::invalid_config);
  EXPECT_EQ(code_of([] { SessionConfig::from_json({{"top_k", -1}}); }), Errc::invalid_config);
  EXPECT_EQ(code_of([] { SessionConfig::from_json({{"recall_test_seconds", 0}}); }), Errc::invalid_config);
  EXPECT_EQ(code_of([] { SessionConfig::from_json({{"similarity_threshold", 1.5}}); }), Errc::invalid_config);
  EXPECT_EQ(code_of([] { SessionConfig::from_json({{"condition", "Hybrid"}}); }), Errc::invalid_config);
}

TEST(SessionConfig, JsonRoundTripKeepsOverrides) {
  const auto c = SessionConfig::from_json({{"condition", "Baseline"}, {"top_k", 5}, {"similarity_threshold", -1}});
  EXPECT_EQ(c.condition, Condition::Baseline);
  EXPECT_EQ(c.top_k, 5);
  EXPECT_DOUBLE_EQ(c.similarity_threshold, -1.0);
  EXPECT_EQ(c.context_window_turns, 6);
  const auto back = SessionConfig::from_json(nlohmann::json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());
}

TEST(Session, AppendAssignsSequentialIds) {
  ManualClock clock(1000);
  Session s("s", SessionConfig{}, clock);
  const auto m1 = s.append(Sender::NS, "Hi there");
  clock.advance(5);
  const auto m2 = s.append(Sender::NNS, "你好 friend");
  EXPECT_EQ(m1.id, 1u);
  EXPECT_EQ(m2.id, 2u);
  EXPECT_EQ(m1.sent_at, 1000);
  EXPECT_EQ(m2.sent_at, 1005);
  EXPECT_EQ(m1.token_count, 2u);
  EXPECT_EQ(m2.token_count, 3u);
  EXPECT_EQ(s.last_id(), 2u);
}

TEST(Session, EmptyTextAndClosedSession) {
  ManualClock clock;
  Session s("s", SessionConfig{}, clock);
  EXPECT_EQ(code_of([&] { s.append(Sender::NS, "   "); }), Errc::empty_text);
  s.close();
  EXPECT_EQ(code_of([&] { s.append(Sender::NS, "hello"); }), Errc::session_closed);
}

TEST(Session, StateMachine) {
  ManualClock clock;
  Session a("a", SessionConfig{}, clock);
  a.begin_recall();
  EXPECT_EQ(a.state(), SessionState::RecallTest);
  EXPECT_EQ(code_of([&] { a.begin_recall(); }), Errc::wrong_state);
  EXPECT_EQ(code_of([&] { a.append(Sender::NS, "late"); }), Errc::session_closed);
  a.close();
  EXPECT_EQ(a.state(), SessionState::Closed);
  EXPECT_EQ(code_of([&] { a.close(); }), Errc::wrong_state);

  Session b("b", SessionConfig{}, clock);
  b.close();
  EXPECT_EQ(code_of([&] { b.begin_recall(); }), Errc::wrong_state);
}

TEST(Session, ConcurrentAppendsAreGapFree) {
  ManualClock clock;
  Session s("s", SessionConfig{}, clock);
  std::vector<MessageId> seen;
  s.set_append_listener([&](const Message& m) { seen.push_back(m.id); });
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 50; ++i) s.append(t % 2 ? Sender::NS : Sender::NNS, "msg " + std::to_string(i));
    });
  }
  for (auto& t : threads) t.join();
  ASSERT_EQ(s.size(), 200u);
  const auto all = s.messages();
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].id, i + 1);
  ASSERT_EQ(seen.size(), 200u);
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i + 1);
}

TEST(Session, HistoryWindow) {
  ManualClock clock;
  Session s("s", SessionConfig{}, clock);
  EXPECT_TRUE(s.history_window().empty());
  for (int i = 1; i <= 3; ++i) s.append(Sender::NS, "m" + std::to_string(i));
  EXPECT_EQ(s.history_window().size(), 3u);
  for (int i = 4; i <= 10; ++i) s.append(i % 2 ? Sender::NS : Sender::NNS, "m" + std::to_string(i));
  const auto w = s.history_window();
  ASSERT_EQ(w.size(), 6u);
  EXPECT_EQ(w.front().id, 5u);
  EXPECT_EQ(w.back().id, 10u);
  // Always a suffix of the history.
  const auto all = s.messages();
  EXPECT_TRUE(std::equal(w.begin(), w.end(), all.end() - 6));
}

TEST(Session, RenderHistory) {
  ManualClock clock;
  Session s("s", SessionConfig{}, clock);
  s.append(Sender::NS, "Hi!");
  s.append(Sender::NNS, "Hello");
  EXPECT_EQ(render_history(s.history_window()), "NS: Hi!\nNNS: Hello");
}

TEST(Message, JsonKeyOrder) {
  Message m;
  m.id = 3;
  m.session_id = "s";
  m.sender = Sender::NS;
  m.original_text = "hey";
  m.sent_at = 9;
  m.token_count = 1;
  EXPECT_EQ(m.to_json().dump(),
            R"({"id":3,"session_id":"s","sender":"NS","original_text":"hey","shown_translation":null,"sent_at":9,"token_count":1})");
  m.shown_translation = "嘿";
  EXPECT_EQ(Message::from_json(nlohmann::json::parse(m.to_json().dump())), m);
}

TEST(SessionStore, DistinctIds) {
  ManualClock clock;
  SessionStore store(clock);
  const auto a = store.create(SessionConfig{});
  const auto b = store.create(SessionConfig{});
  EXPECT_NE(a->id(), b->id());
  EXPECT_EQ(store.find(a->id()), a);
  EXPECT_EQ(a->state(), SessionState::Active);
  EXPECT_EQ(a->size(), 0u);
  EXPECT_EQ(code_of([&] { store.create(SessionConfig{}, a->id()); }), Errc::invalid_config);
}

TEST(Session, RestoreRequiresContiguousIds) {
  ManualClock clock;
  Message m;
  m.id = 2;
  m.session_id = "s";
  m.original_text = "x";
  EXPECT_THROW(Session::restore("s", SessionConfig{}, clock, {m}, SessionState::Active), Error);
}
