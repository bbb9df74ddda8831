#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "chatlearn/core/session.hpp"
#include "chatlearn/llm/gateway.hpp"

namespace chatlearn::service {

struct ProviderConfig {
  std::string kind = "mock";  // "mock" | "http"
  std::optional<std::filesystem::path> mock_script;
  int timeout_ms = 15000;
  int max_in_flight = 8;
  double temperature = 0.0;
};

/// Server configuration file (JSON):
///   {"bind": "127.0.0.1", "port": 8080, "data_dir": "sessions",
///    "session_defaults": {...SessionConfig...},
///    "provider": {"kind": "mock", "mock_script": "mock.jsonl", "timeout_ms": 15000,
///                 "max_in_flight": 8, "temperature": 0}}
/// Relative paths resolve against the config file's directory. LLM_PROVIDER
/// and LLM_MOCK_SCRIPT override the provider section.
struct ServiceConfig {
  std::string bind = "127.0.0.1";
  std::uint16_t port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> data_dir;
  core::SessionConfig session_defaults;
  ProviderConfig provider;

  static ServiceConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static ServiceConfig load(const std::filesystem::path& file);
  void apply_env();
};

/// Builds the gateway for a provider section.
std::unique_ptr<llm::Gateway> make_gateway(const ProviderConfig& config);

}  // namespace chatlearn::service
