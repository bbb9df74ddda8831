#include "chatlearn/service/config.hpp"

#include <cstdlib>
#include <fstream>

#include "chatlearn/error.hpp"
#include "chatlearn/llm/http_provider.hpp"
#include "chatlearn/llm/mock_provider.hpp"

namespace chatlearn::service {

namespace fs = std::filesystem;

namespace {

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

template <typename T>
T field(const nlohmann::json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::invalid_config, std::string("config field '") + key + "' has the wrong type");
  }
}

}  // namespace

ServiceConfig ServiceConfig::from_json(const nlohmann::json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw Error(Errc::invalid_config, "config must be a JSON object");
  ServiceConfig c;
  c.bind = field<std::string>(j, "bind", c.bind);
  const int port = field<int>(j, "port", c.port);
  if (port < 0 || port > 65535) throw Error(Errc::invalid_config, "port out of range");
  c.port = static_cast<std::uint16_t>(port);
  if (j.contains("data_dir") && !j["data_dir"].is_null()) {
    c.data_dir = resolve(base_dir, field<std::string>(j, "data_dir", ""));
  }
  if (auto it = j.find("session_defaults"); it != j.end()) {
    c.session_defaults = core::SessionConfig::from_json(*it);
  }
  if (auto it = j.find("provider"); it != j.end()) {
    const auto& p = *it;
    if (!p.is_object()) throw Error(Errc::invalid_config, "provider must be an object");
    c.provider.kind = field<std::string>(p, "kind", c.provider.kind);
    if (p.contains("mock_script")) c.provider.mock_script = resolve(base_dir, field<std::string>(p, "mock_script", ""));
    c.provider.timeout_ms = field<int>(p, "timeout_ms", c.provider.timeout_ms);
    c.provider.max_in_flight = field<int>(p, "max_in_flight", c.provider.max_in_flight);
    c.provider.temperature = field<double>(p, "temperature", c.provider.temperature);
  }
  if (c.provider.kind != "mock" && c.provider.kind != "http") {
    throw Error(Errc::invalid_config, "provider.kind must be mock or http");
  }
  if (c.provider.timeout_ms <= 0) throw Error(Errc::invalid_config, "provider.timeout_ms must be positive");
  if (c.provider.max_in_flight < 1 || c.provider.max_in_flight > static_cast<int>(llm::Gateway::kMaxInFlightLimit)) {
    throw Error(Errc::invalid_config, "provider.max_in_flight out of range");
  }
  return c;
}

ServiceConfig ServiceConfig::load(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::io_error, "cannot open config " + file.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_config, std::string("config is not valid JSON: ") + e.what());
  }
  auto c = from_json(j, file.parent_path());
  c.apply_env();
  return c;
}

void ServiceConfig::apply_env() {
  if (const char* kind = std::getenv("LLM_PROVIDER"); kind && *kind) {
    provider.kind = kind;
    if (provider.kind != "mock" && provider.kind != "http") {
      throw Error(Errc::invalid_config, "LLM_PROVIDER must be mock or http");
    }
  }
  if (const char* script = std::getenv("LLM_MOCK_SCRIPT"); script && *script) provider.mock_script = script;
}

std::unique_ptr<llm::Gateway> make_gateway(const ProviderConfig& config) {
  llm::GatewayOptions options;
  options.timeout = std::chrono::milliseconds(config.timeout_ms);
  options.max_in_flight = static_cast<std::size_t>(config.max_in_flight);
  options.decoding.temperature = config.temperature;
  if (config.kind == "http") {
    auto http = std::make_shared<llm::HttpProvider>(llm::HttpProviderOptions::from_env());
    return std::make_unique<llm::Gateway>(http, http, options);
  }
  auto mock = std::make_shared<llm::MockProvider>(config.mock_script ? llm::MockProvider::from_file(*config.mock_script)
                                                                     : llm::MockProvider{});
  return std::make_unique<llm::Gateway>(mock, mock, options);
}

}  // namespace chatlearn::service
