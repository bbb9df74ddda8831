#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "chatlearn/metrics/report.hpp"

namespace chatlearn::testing {

// Compares a report with the hand-derived expectations in expected.json.
// Returns the list of mismatches; empty means equal. Ratios use 1e-9.
inline std::vector<std::string> report_mismatches(const metrics::MetricsReport& r, const nlohmann::json& want) {
  std::vector<std::string> bad;
  auto count = [&](const char* key, std::uint64_t got) {
    if (want.at(key).get<std::uint64_t>() != got) {
      bad.push_back(std::string(key) + ": got " + std::to_string(got) + ", want " + want.at(key).dump());
    }
  };
  auto ratio = [&](const char* key, double got) {
    if (std::abs(want.at(key).get<double>() - got) > 1e-9) {
      bad.push_back(std::string(key) + ": got " + std::to_string(got) + ", want " + want.at(key).dump());
    }
  };
  count("expression_support_count", r.expression_support_count);
  ratio("first_language_usage_ratio", r.first_language_usage_ratio);
  count("expression_l1_tokens", r.expression_l1_tokens);
  count("expression_total_tokens", r.expression_total_tokens);
  count("full_comprehension_count", r.full_comprehension_count);
  count("partial_comprehension_count", r.partial_comprehension_count);
  const auto& opp = want.at("learning_opportunities_by_source");
  if (opp.at("comprehension").get<std::uint64_t>() != r.learning_opportunities_by_source.comprehension ||
      opp.at("expression").get<std::uint64_t>() != r.learning_opportunities_by_source.expression) {
    bad.push_back("learning_opportunities_by_source: got " +
                  std::to_string(r.learning_opportunities_by_source.comprehension) + "/" +
                  std::to_string(r.learning_opportunities_by_source.expression));
  }
  count("card_interaction_count", r.card_interaction_count);
  count("card_trigger_frequency", r.card_trigger_frequency);
  count("message_count", r.message_count);
  count("message_token_total", r.message_token_total);
  if (!r.recall) {
    bad.push_back("recall: missing");
    return bad;
  }
  count("recall_quantity", r.recall->recall_quantity);
  ratio("mean_confidence", r.recall->mean_confidence);
  ratio("mean_difficulty", r.recall->mean_difficulty);
  if (want.at("rejected").get<std::vector<std::string>>() != r.recall->rejected) bad.push_back("rejected differs");
  return bad;
}

}  // namespace chatlearn::testing
