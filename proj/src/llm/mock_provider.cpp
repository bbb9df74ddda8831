#include "chatlearn/llm/mock_provider.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "chatlearn/error.hpp"
#include "chatlearn/text/utf8.hpp"

namespace chatlearn::llm {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<double> normalized(std::vector<double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  const double norm = std::sqrt(sum);
  if (norm == 0.0) throw Error(Errc::zero_vector, "scripted embedding is all zero");
  for (double& x : v) x /= norm;
  return v;
}

std::vector<std::string> match_list(const nlohmann::json& m) {
  if (m.is_string()) return {m.get<std::string>()};
  return m.get<std::vector<std::string>>();
}

}  // namespace

std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::vector<double> hashed_unit_vector(std::string_view normalized_text, std::size_t dimension) {
  std::uint64_t state = fnv1a64(normalized_text);
  std::vector<double> v(dimension);
  for (double& x : v) {
    // 53 random bits mapped onto [-1, 1).
    x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
  }
  double sum = 0.0;
  for (double x : v) sum += x * x;
  if (sum == 0.0) {
    v.assign(dimension, 0.0);
    v[0] = 1.0;
    return v;
  }
  return normalized(std::move(v));
}

MockProvider::MockProvider(MockProvider&& other) noexcept {
  std::lock_guard lock(other.mu_);
  rules_ = std::move(other.rules_);
  embeddings_ = std::move(other.embeddings_);
  prompts_ = std::move(other.prompts_);
}

MockProvider& MockProvider::operator=(MockProvider&& other) noexcept {
  if (this != &other) {
    std::scoped_lock lock(mu_, other.mu_);
    rules_ = std::move(other.rules_);
    embeddings_ = std::move(other.embeddings_);
    prompts_ = std::move(other.prompts_);
  }
  return *this;
}

MockProvider MockProvider::from_jsonl(std::string_view script) {
  MockProvider mock;
  std::istringstream in{std::string(script)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = text::trim(line);
    if (trimmed.empty() || trimmed.front() == '#') continue;
    try {
      const auto j = nlohmann::json::parse(trimmed);
      std::optional<int> times;
      if (j.contains("times")) times = j.at("times").get<int>();
      if (j.contains("embed")) {
        const auto key = j.at("embed").get<std::string>();
        if (j.contains("fail")) {
          mock.fail_embedding(key);
        } else {
          mock.set_embedding(key, j.at("vector").get<std::vector<double>>());
        }
      } else if (j.contains("fail")) {
        mock.add_failure(match_list(j.at("match")), j.at("fail").get<std::string>() == "timeout", times);
      } else {
        mock.add_reply(match_list(j.at("match")), j.at("reply").get<std::string>(), times);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::bad_config, "mock script line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return mock;
}

MockProvider MockProvider::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::bad_config, "cannot open mock script " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return from_jsonl(buf.str());
}

void MockProvider::add_reply(std::vector<std::string> match, std::string reply, std::optional<int> times) {
  std::lock_guard lock(mu_);
  rules_.push_back({std::move(match), Outcome::Reply, std::move(reply), times});
}

void MockProvider::add_failure(std::vector<std::string> match, bool timeout, std::optional<int> times) {
  std::lock_guard lock(mu_);
  rules_.push_back({std::move(match), timeout ? Outcome::Timeout : Outcome::Transport, {}, times});
}

void MockProvider::set_embedding(std::string_view text, std::vector<double> values) {
  if (values.size() > kDimension) throw Error(Errc::dimension_mismatch, "scripted embedding exceeds dimension 64");
  values.resize(kDimension, 0.0);
  std::lock_guard lock(mu_);
  embeddings_[text::normalize_key(text)] = {normalized(std::move(values)), false};
}

void MockProvider::fail_embedding(std::string_view text) {
  std::lock_guard lock(mu_);
  embeddings_[text::normalize_key(text)] = {{}, true};
}

std::string MockProvider::complete(const std::string& prompt, const DecodingParams&, std::chrono::milliseconds) {
  std::lock_guard lock(mu_);
  prompts_.push_back(prompt);
  for (auto& rule : rules_) {
    if (rule.remaining && *rule.remaining <= 0) continue;
    bool all = true;
    for (const auto& m : rule.match) {
      if (prompt.find(m) == std::string::npos) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    if (rule.remaining) --*rule.remaining;
    switch (rule.outcome) {
      case Outcome::Reply: return rule.reply;
      case Outcome::Transport: throw TransportError("mock: scripted transport failure");
      case Outcome::Timeout: throw Error(Errc::timeout, "mock: scripted timeout");
    }
  }
  throw TransportError("mock: no scripted reply matches prompt");
}

std::vector<double> MockProvider::embed(const std::string& text, std::chrono::milliseconds) {
  const auto key = text::normalize_key(text);
  std::lock_guard lock(mu_);
  if (auto it = embeddings_.find(key); it != embeddings_.end()) {
    if (it->second.fail) throw TransportError("mock: scripted embedding failure");
    return it->second.values;
  }
  return hashed_unit_vector(key, kDimension);
}

std::vector<std::string> MockProvider::prompts() const {
  std::lock_guard lock(mu_);
  return prompts_;
}

}  // namespace chatlearn::llm
