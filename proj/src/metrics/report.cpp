#include "chatlearn/metrics/report.hpp"

#include <iomanip>
#include <sstream>
#include <vector>

#include "chatlearn/error.hpp"
#include "chatlearn/text/tokenizer.hpp"

namespace chatlearn::metrics {

double l1_ratio(std::string_view draft_text) {
  const auto c = text::count_tokens(draft_text);
  if (c.total() == 0) return 0.0;
  return static_cast<double>(c.native) / static_cast<double>(c.total());
}

namespace {

std::uint64_t u64(const nlohmann::ordered_json& payload, const char* key) {
  auto it = payload.find(key);
  if (it == payload.end() || !it->is_number_integer()) return 0;
  if (!it->is_number_unsigned() && it->get<std::int64_t>() < 0) return 0;
  return it->get<std::uint64_t>();
}

std::string str(const nlohmann::ordered_json& payload, const char* key) {
  auto it = payload.find(key);
  return it != payload.end() && it->is_string() ? it->get<std::string>() : std::string();
}

}  // namespace

MetricsReport fold_events(std::span<const LogEvent> events) {
  MetricsReport r;
  for (const auto& e : events) {
    switch (e.kind) {
      case EventKind::MessageSent:
        if (str(e.payload, "sender") == "NNS") {
          ++r.message_count;
          r.message_token_total += u64(e.payload, "tokens");
        }
        break;
      case EventKind::FullComprehension:
        ++r.full_comprehension_count;
        break;
      case EventKind::PartialComprehension:
        ++r.partial_comprehension_count;
        break;
      case EventKind::ExpressionSupport:
        ++r.expression_support_count;
        r.expression_l1_tokens += u64(e.payload, "l1_tokens");
        r.expression_total_tokens += u64(e.payload, "total_tokens");
        break;
      case EventKind::Capture:
        if (str(e.payload, "source") == "expression") {
          ++r.learning_opportunities_by_source.expression;
        } else {
          ++r.learning_opportunities_by_source.comprehension;
        }
        break;
      case EventKind::CardTriggered:
        ++r.card_trigger_frequency;
        break;
      case EventKind::CardInteraction:
        ++r.card_interaction_count;
        break;
      case EventKind::Degradation:
        break;
    }
  }
  if (r.expression_total_tokens > 0) {
    r.first_language_usage_ratio =
        static_cast<double>(r.expression_l1_tokens) / static_cast<double>(r.expression_total_tokens);
  }
  return r;
}

MetricsReport compute_report(core::SessionState state, std::span<const LogEvent> events,
                             std::optional<RecallResult> recall) {
  if (state == core::SessionState::Active) {
    throw Error(Errc::session_not_finished, "report needs a session in RecallTest or Closed");
  }
  auto r = fold_events(events);
  r.recall = std::move(recall);
  return r;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["expression_support_count"] = expression_support_count;
  j["first_language_usage_ratio"] = first_language_usage_ratio;
  j["expression_l1_tokens"] = expression_l1_tokens;
  j["expression_total_tokens"] = expression_total_tokens;
  j["full_comprehension_count"] = full_comprehension_count;
  j["partial_comprehension_count"] = partial_comprehension_count;
  j["learning_opportunities_by_source"] = {{"comprehension", learning_opportunities_by_source.comprehension},
                                           {"expression", learning_opportunities_by_source.expression}};
  j["card_interaction_count"] = card_interaction_count;
  j["card_trigger_frequency"] = card_trigger_frequency;
  j["message_count"] = message_count;
  j["message_token_total"] = message_token_total;
  j["recall"] = recall ? recall->to_json() : nlohmann::ordered_json(nullptr);
  return j;
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  r.expression_support_count = j.at("expression_support_count").get<std::uint64_t>();
  r.first_language_usage_ratio = j.at("first_language_usage_ratio").get<double>();
  r.expression_l1_tokens = j.at("expression_l1_tokens").get<std::uint64_t>();
  r.expression_total_tokens = j.at("expression_total_tokens").get<std::uint64_t>();
  r.full_comprehension_count = j.at("full_comprehension_count").get<std::uint64_t>();
  r.partial_comprehension_count = j.at("partial_comprehension_count").get<std::uint64_t>();
  r.learning_opportunities_by_source.comprehension =
      j.at("learning_opportunities_by_source").at("comprehension").get<std::uint64_t>();
  r.learning_opportunities_by_source.expression =
      j.at("learning_opportunities_by_source").at("expression").get<std::uint64_t>();
  r.card_interaction_count = j.at("card_interaction_count").get<std::uint64_t>();
  r.card_trigger_frequency = j.at("card_trigger_frequency").get<std::uint64_t>();
  r.message_count = j.at("message_count").get<std::uint64_t>();
  r.message_token_total = j.at("message_token_total").get<std::uint64_t>();
  if (const auto& rc = j.at("recall"); !rc.is_null()) r.recall = RecallResult::from_json(rc);
  return r;
}

std::string MetricsReport::to_table() const {
  std::vector<std::pair<std::string, std::string>> rows;
  auto num = [](auto v) { return std::to_string(v); };
  auto real = [](double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
  };
  rows.emplace_back("expression support count", num(expression_support_count));
  rows.emplace_back("first-language usage ratio", real(first_language_usage_ratio));
  rows.emplace_back("full comprehension count", num(full_comprehension_count));
  rows.emplace_back("partial comprehension count", num(partial_comprehension_count));
  rows.emplace_back("learning opportunities (comprehension)", num(learning_opportunities_by_source.comprehension));
  rows.emplace_back("learning opportunities (expression)", num(learning_opportunities_by_source.expression));
  rows.emplace_back("review card interactions", num(card_interaction_count));
  rows.emplace_back("review card triggers", num(card_trigger_frequency));
  rows.emplace_back("message count", num(message_count));
  rows.emplace_back("message tokens", num(message_token_total));
  if (recall) {
    rows.emplace_back("recall quantity", num(recall->recall_quantity));
    rows.emplace_back("recall mean confidence", real(recall->mean_confidence));
    rows.emplace_back("recall mean difficulty", real(recall->mean_difficulty));
    rows.emplace_back("recall flagged for review", num(recall->flagged_for_review.size()));
  }
  std::size_t width = 0;
  for (const auto& [k, _] : rows) width = std::max(width, k.size());
  std::ostringstream os;
  for (const auto& [k, v] : rows) os << std::left << std::setw(static_cast<int>(width)) << k << "  " << v << '\n';
  return os.str();
}

}  // namespace chatlearn::metrics
