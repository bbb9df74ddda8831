#include "chatlearn/metrics/recall.hpp"

#include <algorithm>
#include <array>
#include <map>

#include "chatlearn/error.hpp"
#include "chatlearn/text/tokenizer.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn::metrics {

namespace {

constexpr std::array<std::string_view, 8> kStopwords = {"a", "an", "the", "of", "in", "on", "to", "for"};

bool is_stopword(std::string_view w) {
  return std::find(kStopwords.begin(), kStopwords.end(), w) != kStopwords.end();
}

std::vector<std::string> filtered_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& tok : text::tokenize(text::normalize_key(s))) {
    if (!is_stopword(tok)) out.push_back(std::move(tok));
  }
  return out;
}

std::string merge_key(std::string_view item) {
  const auto bag = token_bag(item);
  if (bag.empty()) return "\x01" + normalize_recall_item(item);
  std::string key;
  for (const auto& t : bag) {
    key.append(t);
    key.push_back('\0');
  }
  return key;
}

bool fuzzy_occurs(const std::vector<std::string>& bag, std::span<const std::vector<std::string>> segments) {
  if (bag.empty()) return false;
  for (const auto& seg : segments) {
    if (seg.size() < bag.size()) continue;
    for (std::size_t i = 0; i + bag.size() <= seg.size(); ++i) {
      std::vector<std::string> window(seg.begin() + static_cast<std::ptrdiff_t>(i),
                                      seg.begin() + static_cast<std::ptrdiff_t>(i + bag.size()));
      std::sort(window.begin(), window.end());
      if (window == bag) return true;
    }
  }
  return false;
}

void check_rating(int v, const char* what) {
  if (v < 1 || v > 7) throw Error(Errc::protocol_error, std::string(what) + " must be an integer in [1, 7]");
}

}  // namespace

RecallSubmission RecallSubmission::from_json(const nlohmann::json& j) {
  RecallSubmission s;
  try {
    for (const auto& it : j.at("items")) {
      s.items.push_back({it.at("expression").get<std::string>(), it.at("confidence").get<int>(),
                         it.at("difficulty").get<int>()});
    }
    s.submitted_within_seconds = j.at("submitted_within_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::protocol_error, std::string("malformed recall submission: ") + e.what());
  }
  return s;
}

nlohmann::ordered_json RecallSubmission::to_json() const {
  nlohmann::ordered_json j;
  j["items"] = nlohmann::ordered_json::array();
  for (const auto& it : items) {
    j["items"].push_back({{"expression", it.expression}, {"confidence", it.confidence}, {"difficulty", it.difficulty}});
  }
  j["submitted_within_seconds"] = submitted_within_seconds;
  return j;
}

nlohmann::ordered_json RecallResult::to_json() const {
  nlohmann::ordered_json j;
  j["valid_items"] = nlohmann::ordered_json::array();
  for (const auto& v : valid_items) {
    nlohmann::ordered_json item;
    item["expression"] = v.expression;
    item["variants"] = v.variants;
    item["confidence"] = v.confidence;
    item["difficulty"] = v.difficulty;
    item["flagged"] = v.flagged;
    j["valid_items"].push_back(std::move(item));
  }
  j["recall_quantity"] = recall_quantity;
  j["mean_confidence"] = mean_confidence;
  j["mean_difficulty"] = mean_difficulty;
  j["flagged_for_review"] = flagged_for_review;
  j["rejected"] = rejected;
  return j;
}

RecallResult RecallResult::from_json(const nlohmann::json& j) {
  RecallResult r;
  for (const auto& v : j.at("valid_items")) {
    r.valid_items.push_back({v.at("expression").get<std::string>(), v.at("variants").get<std::vector<std::string>>(),
                             v.at("confidence").get<int>(), v.at("difficulty").get<double>(),
                             v.at("flagged").get<bool>()});
  }
  r.recall_quantity = j.at("recall_quantity").get<std::size_t>();
  r.mean_confidence = j.at("mean_confidence").get<double>();
  r.mean_difficulty = j.at("mean_difficulty").get<double>();
  r.flagged_for_review = j.at("flagged_for_review").get<std::vector<std::string>>();
  r.rejected = j.at("rejected").get<std::vector<std::string>>();
  return r;
}

std::span<const std::string_view> recall_stopwords() noexcept { return kStopwords; }

std::string normalize_recall_item(std::string_view s) {
  const std::string collapsed = text::normalize_key(s);
  std::size_t b = 0;
  std::size_t e = collapsed.size();
  while (b < e) {
    const auto d = text::decode_at(collapsed, b);
    if (!text::is_punctuation(d.code_point)) break;
    b += d.length;
  }
  while (e > b) {
    // Step back to the start of the last code point.
    std::size_t start = e - 1;
    while (start > b && (static_cast<unsigned char>(collapsed[start]) & 0xC0) == 0x80) --start;
    if (!text::is_punctuation(text::decode_at(collapsed, start).code_point)) break;
    e = start;
  }
  return text::trim(std::string_view(collapsed).substr(b, e - b));
}

std::vector<std::string> token_bag(std::string_view s) {
  auto bag = filtered_tokens(s);
  std::sort(bag.begin(), bag.end());
  return bag;
}

bool same_expression(std::string_view a, std::string_view b) { return merge_key(a) == merge_key(b); }

std::vector<std::string> recall_corpus(std::span<const core::Message> messages, std::span<const LogEvent> events) {
  std::vector<std::string> corpus;
  for (const auto& m : messages) {
    if (m.sender == core::Sender::NS) corpus.push_back(m.original_text);
  }
  for (const auto& e : events) {
    if (e.kind == EventKind::ExpressionSupport) {
      if (auto it = e.payload.find("translated_text"); it != e.payload.end() && it->is_string()) {
        corpus.push_back(it->get<std::string>());
      }
    } else if (e.kind == EventKind::PartialComprehension) {
      if (auto it = e.payload.find("explanation"); it != e.payload.end() && it->is_string()) {
        corpus.push_back(it->get<std::string>());
      }
    }
  }
  return corpus;
}

RecallResult evaluate_recall(std::span<const std::string> corpus, const RecallSubmission& submission) {
  std::vector<std::string> normalized_segments;
  std::vector<std::vector<std::string>> token_segments;
  for (const auto& seg : corpus) {
    normalized_segments.push_back(text::normalize_key(seg));
    token_segments.push_back(filtered_tokens(seg));
  }

  RecallResult result;
  struct Group {
    RecalledExpression expr;
    std::vector<int> difficulties;
  };
  std::vector<Group> groups;
  std::map<std::string, std::size_t> group_of;

  for (const auto& item : submission.items) {
    check_rating(item.confidence, "confidence");
    check_rating(item.difficulty, "difficulty");
    const auto norm = normalize_recall_item(item.expression);
    bool exact = false;
    if (!norm.empty()) {
      exact = std::any_of(normalized_segments.begin(), normalized_segments.end(),
                          [&](const std::string& seg) { return seg.find(norm) != std::string::npos; });
    }
    const bool fuzzy = !exact && !norm.empty() && fuzzy_occurs(token_bag(norm), token_segments);
    if (!exact && !fuzzy) {
      result.rejected.push_back(item.expression);
      continue;
    }
    if (fuzzy) result.flagged_for_review.push_back(item.expression);

    const auto key = merge_key(norm);
    auto [it, inserted] = group_of.emplace(key, groups.size());
    if (inserted) {
      Group g;
      g.expr.expression = norm;
      g.expr.confidence = item.confidence;
      groups.push_back(std::move(g));
    }
    auto& g = groups[it->second];
    g.expr.variants.push_back(item.expression);
    g.expr.confidence = std::max(g.expr.confidence, item.confidence);
    g.expr.flagged = g.expr.flagged || fuzzy;
    g.difficulties.push_back(item.difficulty);
  }

  double conf_sum = 0.0;
  double diff_sum = 0.0;
  for (auto& g : groups) {
    double d = 0.0;
    for (int v : g.difficulties) d += v;
    g.expr.difficulty = d / static_cast<double>(g.difficulties.size());
    conf_sum += g.expr.confidence;
    diff_sum += g.expr.difficulty;
    result.valid_items.push_back(std::move(g.expr));
  }
  result.recall_quantity = result.valid_items.size();
  if (result.recall_quantity > 0) {
    result.mean_confidence = conf_sum / static_cast<double>(result.recall_quantity);
    result.mean_difficulty = diff_sum / static_cast<double>(result.recall_quantity);
  }
  return result;
}

RecallResult validate_recall(const core::Session& session, std::span<const LogEvent> events,
                             const RecallSubmission& submission) {
  if (session.state() != core::SessionState::RecallTest) {
    throw Error(Errc::wrong_state, "recall submissions are accepted only during the recall test");
  }
  if (submission.submitted_within_seconds < 0) throw Error(Errc::protocol_error, "negative submission time");
  if (submission.submitted_within_seconds > session.config().recall_test_seconds) {
    throw Error(Errc::over_time, "submitted after " + std::to_string(submission.submitted_within_seconds) +
                                     " s; budget is " + std::to_string(session.config().recall_test_seconds) + " s");
  }
  const auto messages = session.messages();
  const auto corpus = recall_corpus(messages, events);
  return evaluate_recall(corpus, submission);
}

}  // namespace chatlearn::metrics
