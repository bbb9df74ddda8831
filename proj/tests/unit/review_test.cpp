#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "chatlearn/core/clock.hpp"
#include "chatlearn/error.hpp"
#include "chatlearn/llm/mock_provider.hpp"
#include "chatlearn/review/similarity.hpp"
#include "chatlearn/review/store.hpp"

using namespace chatlearn;
using namespace chatlearn::review;

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

struct Rig {
  explicit Rig(core::SessionConfig cfg = {}, std::shared_ptr<llm::MockProvider> m = nullptr)
      : mock(m ? m : std::make_shared<llm::MockProvider>()),
        gateway(mock, mock),
        clock(100),
        log("s", clock),
        store(cfg, gateway, log, clock) {}

  std::size_t events(metrics::EventKind k) const {
    const auto all = log.snapshot();
    return std::count_if(all.begin(), all.end(), [&](const auto& e) { return e.kind == k; });
  }

  std::shared_ptr<llm::MockProvider> mock;
  llm::Gateway gateway;
  ManualClock clock;
  metrics::EventLog log;
  ReviewStore store;
};

// Brute-force reference: every cosine by plain loops, filter, full sort.
std::vector<std::pair<EntryId, double>> oracle(const std::vector<double>& q, const std::vector<ExpressionEntry>& entries,
                                               double threshold, int k) {
  struct Row {
    EntryId id;
    double sim;
    std::int64_t at;
  };
  std::vector<Row> rows;
  for (const auto& e : entries) {
    if (!e.embedding) continue;
    const auto& v = e.embedding->values;
    double dot = 0, nq = 0, nv = 0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      dot += q[i] * v[i];
      nq += q[i] * q[i];
      nv += v[i] * v[i];
    }
    const double sim = std::clamp(dot / (std::sqrt(nq) * std::sqrt(nv)), -1.0, 1.0);
    if (sim >= threshold) rows.push_back({e.id, sim, e.captured_at});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.sim != b.sim) return a.sim > b.sim;
    if (a.at != b.at) return a.at > b.at;
    return a.id > b.id;
  });
  std::vector<std::pair<EntryId, double>> out;
  for (int i = 0; i < std::min<int>(k, rows.size()); ++i) out.emplace_back(rows[i].id, rows[i].sim);
  return out;
}

}  // namespace

TEST(Cosine, HandValues) {
  const std::vector<double> a = {1, 0};
  const std::vector<double> b = {1, 1};
  EXPECT_NEAR(cosine_similarity(a, b), 0.70710678, 1e-8);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  const std::vector<double> c = {0, 3};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, c), 0.0);
}

TEST(Cosine, Errors) {
  const std::vector<double> a = {1, 0};
  const std::vector<double> b = {1, 0, 0};
  const std::vector<double> z = {0, 0};
  EXPECT_EQ(code_of([&] { cosine_similarity(a, b); }), Errc::dimension_mismatch);
  EXPECT_EQ(code_of([&] { cosine_similarity(a, z); }), Errc::zero_vector);
}

TEST(ReviewStore, CaptureDedupsByNormalizedText) {
  Rig r;
  const auto a = r.store.capture("Cuisine", "ctx 1", Source::Comprehension, 1);
  r.clock.advance(10);
  const auto b = r.store.capture("  cuisine ", "ctx 2", Source::Expression, 2);
  EXPECT_EQ(a.id, b.id);
  EXPECT_EQ(r.store.entries().size(), 1u);
  EXPECT_EQ(b.captured_at, a.captured_at + 10);
  EXPECT_EQ(b.source, Source::Comprehension);  // first capture decides
  EXPECT_EQ(r.events(metrics::EventKind::Capture), 2u);
}

TEST(ReviewStore, CaptureIdempotenceOverManyCalls) {
  Rig r;
  for (int i = 0; i < 7; ++i) r.store.capture("mala hotpot", "ctx", Source::Expression, 1);
  EXPECT_EQ(r.store.entries().size(), 1u);
  EXPECT_EQ(r.events(metrics::EventKind::Capture), 7u);
}

TEST(ReviewStore, SourceTags) {
  Rig r;
  EXPECT_EQ(r.store.capture("cuisine", "c", Source::Comprehension, 1).source, Source::Comprehension);
  EXPECT_EQ(r.store.capture("mala hotpot", "c", Source::Expression, 1).source, Source::Expression);
}

TEST(ReviewStore, EmbeddingFailureKeepsEntryOutOfRetrieval) {
  auto mock = std::make_shared<llm::MockProvider>();
  mock->fail_embedding("broken phrase");
  Rig r({}, mock);
  const auto e = r.store.capture("broken phrase", "ctx", Source::Comprehension, 1);
  EXPECT_FALSE(e.embedding);
  EXPECT_EQ(r.events(metrics::EventKind::Degradation), 1u);
  r.mock->set_embedding("query", {1.0});
  EXPECT_TRUE(r.store.retrieve_expression_driven("query").empty());
}

TEST(ReviewStore, EmptyStoreRetrievesNothing) {
  Rig r;
  EXPECT_TRUE(r.store.retrieve_context_driven("anything", 5).empty());
  EXPECT_TRUE(r.store.retrieve_expression_driven("anything").empty());
}

TEST(ReviewStore, SelfQueryScoresOne) {
  Rig r;
  r.store.capture("brain rot", "ctx", Source::Comprehension, 1);
  const auto cards = r.store.retrieve_context_driven("brain rot", 2);
  ASSERT_FALSE(cards.empty());
  EXPECT_NEAR(cards[0].similarity, 1.0, 1e-9);
  EXPECT_EQ(cards[0].trigger, Trigger::ContextDriven);
  EXPECT_EQ(cards[0].shown_context, "ctx");
}

TEST(ReviewStore, OrthogonalFilteredAndNegativeThresholdCapped) {
  auto mock = std::make_shared<llm::MockProvider>();
  for (int i = 0; i < 5; ++i) {
    std::vector<double> v(i + 1, 0.0);
    v[i] = 1.0;
    mock->set_embedding("e" + std::to_string(i), v);
  }
  mock->set_embedding("q", {0, 0, 0, 0, 0, 1});
  Rig r({}, mock);
  for (int i = 0; i < 5; ++i) r.store.capture("e" + std::to_string(i), "ctx", Source::Expression, 1);
  EXPECT_TRUE(r.store.retrieve_expression_driven("q").empty());

  core::SessionConfig open;
  open.similarity_threshold = -1;
  Rig all(open, mock);
  for (int i = 0; i < 5; ++i) all.store.capture("e" + std::to_string(i), "ctx", Source::Expression, 1);
  const auto cards = all.store.retrieve_expression_driven("q");
  ASSERT_EQ(cards.size(), 3u);
  for (const auto& c : cards) EXPECT_EQ(c.trigger, Trigger::ExpressionDriven);
}

TEST(ReviewStore, TiesPreferRecentCapture) {
  auto mock = std::make_shared<llm::MockProvider>();
  mock->set_embedding("old", {1, 0});
  mock->set_embedding("new", {1, 0});
  mock->set_embedding("q", {1, 0});
  Rig r({}, mock);
  r.store.capture("old", "c", Source::Expression, 1);
  r.clock.advance(1);
  r.store.capture("new", "c", Source::Expression, 1);
  const auto cards = r.store.retrieve_expression_driven("q");
  ASSERT_EQ(cards.size(), 2u);
  EXPECT_EQ(cards[0].surface_text, "new");
  EXPECT_EQ(cards[1].surface_text, "old");
}

TEST(ReviewStore, FiveEntryStoreMatchesOracle) {
  Rig r;
  for (const char* s : {"cuisine", "mala hotpot", "social media", "brain rot", "invasion of privacy"}) {
    r.store.capture(s, "ctx", Source::Comprehension, 1);
    r.clock.advance(1);
  }
  core::SessionConfig open;
  open.similarity_threshold = -1;
  open.top_k = 5;
  Rig wide(open, r.mock);
  for (const auto& e : r.store.entries()) {
    wide.store.capture(e.surface_text, "ctx", Source::Comprehension, 1);
    wide.clock.advance(1);
  }
  for (const char* q : {"spicy food", "cuisine", "phones"}) {
    const auto qv = r.gateway.embed(q).values;
    for (auto* rig : {&r, &wide}) {
      const auto entries = rig->store.entries();
      const auto cfg = rig == &r ? core::SessionConfig{} : open;
      const auto want = oracle(qv, entries, cfg.similarity_threshold, cfg.top_k);
      const auto got = rig->store.retrieve_context_driven(q, 99);
      ASSERT_EQ(got.size(), want.size()) << q;
      for (std::size_t i = 0; i < got.size(); ++i) {
        EXPECT_EQ(got[i].entry_id, want[i].first);
        EXPECT_NEAR(got[i].similarity, want[i].second, 1e-9);
      }
    }
  }
}

TEST(RankEntries, RandomizedAgainstOracleAndMonotone) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(0, 50)(rng);
    const std::size_t dim = 8;
    std::vector<ExpressionEntry> entries(n);
    for (std::size_t i = 0; i < n; ++i) {
      entries[i].id = i + 1;
      entries[i].captured_at = std::uniform_int_distribution<int>(0, 5)(rng);  // force ties
      std::vector<double> v(dim);
      for (auto& x : v) x = u(rng);
      if (i % 7 == 3 && i > 0) v = entries[i - 1].embedding->values;  // exact similarity ties
      entries[i].embedding = llm::EmbeddingVector{v};
    }
    llm::EmbeddingVector q;
    q.values.resize(dim);
    for (auto& x : q.values) x = u(rng);
    const double threshold = std::uniform_real_distribution<double>(-0.2, 0.9)(rng);
    for (int k : {1, 2, 3, 5}) {
      const auto got = rank_entries(q, entries, threshold, k, Trigger::ContextDriven);
      const auto want = oracle(q.values, entries, threshold, k);
      ASSERT_EQ(got.size(), want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        ASSERT_EQ(got[i].entry_id, want[i].first);
        ASSERT_NEAR(got[i].similarity, want[i].second, 1e-9);
      }
      // k is a prefix of k+1.
      const auto more = rank_entries(q, entries, threshold, k + 1, Trigger::ContextDriven);
      ASSERT_GE(more.size(), got.size());
      for (std::size_t i = 0; i < got.size(); ++i) ASSERT_EQ(more[i].entry_id, got[i].entry_id);
      // Raising the threshold only cuts the tail.
      const auto strict = rank_entries(q, entries, threshold + 0.1, k, Trigger::ContextDriven);
      ASSERT_LE(strict.size(), got.size());
      for (std::size_t i = 0; i < strict.size(); ++i) ASSERT_EQ(strict[i].entry_id, got[i].entry_id);
    }
  }
}

TEST(ReviewStore, TriggerCountsAndInteraction) {
  Rig r;
  const auto e = r.store.capture("cuisine", "ctx", Source::Comprehension, 1);
  EXPECT_EQ(code_of([&] { r.store.record_interaction(e.id); }), Errc::never_triggered);
  EXPECT_EQ(code_of([&] { r.store.record_interaction(999); }), Errc::unknown_entry);
  r.store.retrieve_context_driven("cuisine", 2);
  const auto after = r.store.record_interaction(e.id);
  EXPECT_EQ(after.interaction_count, 1u);
  EXPECT_EQ(after.trigger_count, 1u);
  EXPECT_TRUE(after.pinned);
  // One interaction per trigger.
  EXPECT_EQ(code_of([&] { r.store.record_interaction(e.id); }), Errc::never_triggered);
  EXPECT_EQ(r.events(metrics::EventKind::CardTriggered), 1u);
  EXPECT_EQ(r.events(metrics::EventKind::CardInteraction), 1u);
  const auto pinned = r.store.pinned_cards();
  ASSERT_EQ(pinned.size(), 1u);
  EXPECT_EQ(pinned[0].surface_text, "cuisine");
}

TEST(ReviewStore, ContextQuerySkipsSameTurnCaptures) {
  Rig r;
  r.store.capture("brain rot", "Do people consume too much brain rot content?", Source::Comprehension, 6);
  EXPECT_TRUE(r.store.retrieve_context_driven("brain rot", 6).empty());
  EXPECT_EQ(r.store.retrieve_context_driven("brain rot", 7).size(), 1u);
}

TEST(ReviewStore, BaselineIsDisabled) {
  core::SessionConfig cfg;
  cfg.condition = core::Condition::Baseline;
  Rig r(cfg);
  EXPECT_EQ(code_of([&] { r.store.capture("x", "c", Source::Expression, 1); }), Errc::feature_disabled);
  EXPECT_EQ(code_of([&] { r.store.retrieve_context_driven("x", 1); }), Errc::feature_disabled);
  EXPECT_EQ(code_of([&] { r.store.retrieve_expression_driven("x"); }), Errc::feature_disabled);
  EXPECT_EQ(code_of([&] { r.store.record_interaction(1); }), Errc::feature_disabled);
}

TEST(ReviewStore, ExportAndRestoreRoundTrip) {
  Rig r;
  r.store.capture("cuisine", "ctx", Source::Comprehension, 1);
  r.store.capture("mala hotpot", "ctx", Source::Expression, 2);
  r.store.retrieve_context_driven("cuisine", 3);
  const auto dump = r.store.export_jsonl();
  std::vector<ExpressionEntry> back;
  std::istringstream in(dump);
  for (std::string line; std::getline(in, line);) back.push_back(ExpressionEntry::from_json(nlohmann::json::parse(line)));
  EXPECT_EQ(back, r.store.entries());
  Rig fresh;
  fresh.store.restore(back);
  EXPECT_EQ(fresh.store.entries(), r.store.entries());
  EXPECT_EQ(fresh.store.capture("brain rot", "c", Source::Comprehension, 3).id, 3u);
}

TEST(ReviewStore, InteractionNeverExceedsTriggers) {
  Rig r;
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"cuisine", "hotpot", "media", "privacy"};
  for (const auto& w : words) r.store.capture(w, "ctx", Source::Comprehension, 1);
  for (int i = 0; i < 200; ++i) {
    if (rng() % 2) {
      r.store.retrieve_context_driven(words[rng() % words.size()], 2);
    } else {
      try {
        r.store.record_interaction(1 + rng() % words.size());
      } catch (const Error&) {
      }
    }
    for (const auto& e : r.store.entries()) ASSERT_LE(e.interaction_count, e.trigger_count);
  }
}
