#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "chatlearn/llm/http_provider.hpp"

#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "chatlearn/error.hpp"

namespace chatlearn::llm {

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::move(fallback);
}

}  // namespace

HttpProviderOptions HttpProviderOptions::from_env() {
  HttpProviderOptions o;
  o.base_url = env_or("LLM_BASE_URL", "https://api.openai.com/v1");
  o.chat_model = env_or("LLM_CHAT_MODEL", "gpt-4o");
  o.embed_model = env_or("LLM_EMBED_MODEL", "text-embedding-3-large");
  o.api_key = env_or("LLM_API_KEY", "");
  return o;
}

HttpProvider::HttpProvider(HttpProviderOptions options) : options_(std::move(options)) {
  const auto scheme_end = options_.base_url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::bad_config, "LLM_BASE_URL lacks a scheme");
  const auto path_start = options_.base_url.find('/', scheme_end + 3);
  origin_ = options_.base_url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : options_.base_url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

std::string HttpProvider::post(const std::string& endpoint, const std::string& body,
                               std::chrono::milliseconds timeout) {
  httplib::Client client(origin_);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  const auto start = std::chrono::steady_clock::now();
  auto res = client.Post(path_prefix_ + endpoint, headers, body, "application/json");
  if (!res) {
    const auto err = res.error();
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= timeout)) {
      throw Error(Errc::timeout, "provider timed out after " + std::to_string(timeout.count()) + " ms");
    }
    throw TransportError("provider transport error: " + httplib::to_string(err));
  }
  if (res->status == 429 || res->status >= 500) {
    throw TransportError("provider returned HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw Error(Errc::provider_unavailable, "provider returned HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::string HttpProvider::complete(const std::string& prompt, const DecodingParams& params,
                                   std::chrono::milliseconds timeout) {
  nlohmann::json req = {
      {"model", options_.chat_model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", params.temperature},
      {"top_p", params.top_p},
  };
  if (params.max_tokens) req["max_tokens"] = *params.max_tokens;
  if (params.seed) req["seed"] = *params.seed;

  const auto body = post("/chat/completions", req.dump(), timeout);
  const auto j = nlohmann::json::parse(body, nullptr, false);
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::provider_unavailable, "malformed chat-completions response");
  }
}

std::vector<double> HttpProvider::embed(const std::string& text, std::chrono::milliseconds timeout) {
  const nlohmann::json req = {{"model", options_.embed_model}, {"input", text}};
  const auto body = post("/embeddings", req.dump(), timeout);
  const auto j = nlohmann::json::parse(body, nullptr, false);
  try {
    return j.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::embedding_failure, "malformed embeddings response");
  }
}

}  // namespace chatlearn::llm
