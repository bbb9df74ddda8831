// chatlearn: run the chat server, replay scripted sessions, print reports.

#include <csignal>
#include <iostream>
#include <pthread.h>

#include "CLI11.hpp"
#include "chatlearn/core/clock.hpp"
#include "chatlearn/error.hpp"
#include "chatlearn/metrics/report.hpp"
#include "chatlearn/service/config.hpp"
#include "chatlearn/service/replay.hpp"
#include "chatlearn/service/runtime.hpp"
#include "chatlearn/service/server.hpp"

namespace cs = chatlearn::service;

namespace {

int exit_code(chatlearn::Errc code) {
  switch (code) {
    case chatlearn::Errc::invalid_config:
    case chatlearn::Errc::bad_config:
    case chatlearn::Errc::script_invalid:
      return 2;
    case chatlearn::Errc::step_failure:
      return 3;
    case chatlearn::Errc::port_in_use:
      return 4;
    default:
      return 1;
  }
}

int serve(const std::string& config_path) {
  // Block shutdown signals before any thread starts so sigwait sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const auto config = cs::ServiceConfig::load(config_path);
  auto gateway = cs::make_gateway(config.provider);
  chatlearn::SystemClock clock;
  cs::SessionRegistry registry(*gateway, clock, config.session_defaults, config.data_dir);
  const auto recovered = registry.recover();
  chatlearn::assist::AssistEngine engine(*gateway);
  cs::Hub hub(registry, engine);
  cs::Server server(hub, config.bind, config.port);
  const auto port = server.start();
  std::cout << "listening on " << config.bind << ":" << port << " (" << recovered << " sessions recovered)"
            << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  std::cout << "stopped" << std::endl;
  return 0;
}

int replay(const std::string& script_path, const std::string& out_dir) {
  const auto script = cs::TranscriptScript::load(script_path);
  const auto outcome = cs::replay(script, out_dir);
  std::cout << "session written to " << outcome.session_dir.string() << "\n\n" << outcome.report.to_table();
  return 0;
}

int report(const std::string& session_dir, bool json) {
  const auto dir = cs::read_session_directory(session_dir);
  const auto r = chatlearn::metrics::compute_report(dir.state, dir.events, dir.recall);
  if (json) {
    std::cout << r.to_json().dump(2) << "\n";
  } else {
    std::cout << "session " << dir.id << " (" << chatlearn::core::to_string(dir.config.condition) << ")\n\n"
              << r.to_table();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ChatLearn chat platform"};
  app.require_subcommand(1);

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the WebSocket chat server");
  serve_cmd->add_option("--config", config_path, "Server config (JSON)")->required()->check(CLI::ExistingFile);

  std::string script_path;
  std::string out_dir;
  auto* replay_cmd = app.add_subcommand("replay", "Replay a scripted session with the mock provider");
  replay_cmd->add_option("--script", script_path, "Transcript script (JSON)")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::string session_dir;
  bool json = false;
  auto* report_cmd = app.add_subcommand("report", "Print the metrics report of a finished session");
  report_cmd->add_option("--session", session_dir, "Session directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_flag("--json", json, "Print JSON instead of a table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;  // usage errors share the invalid-input code
  }

  try {
    if (*serve_cmd) return serve(config_path);
    if (*replay_cmd) return replay(script_path, out_dir);
    return report(session_dir, json);
  } catch (const chatlearn::Error& e) {
    std::cerr << "error: " << chatlearn::to_string(e.code()) << ": " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
