#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "chatlearn/assist/engine.hpp"
#include "chatlearn/service/frame.hpp"
#include "chatlearn/service/runtime.hpp"

namespace chatlearn::service {

/// One connected participant. Implementations must deliver frames in the
/// order `send` is called.
class Peer {
 public:
  virtual ~Peer() = default;
  virtual void send(const WireFrame& frame) = 0;
  /// Ends the connection after pending frames are flushed.
  virtual void close() = 0;
};

/// Routes frames between the two participants of a session and onto the
/// assist, review and metrics machinery. Transport-agnostic: the WebSocket
/// server and the replay harness both drive it.
class Hub {
 public:
  Hub(SessionRegistry& registry, assist::AssistEngine& engine) : registry_(registry), engine_(engine) {}

  /// Decodes and handles one raw frame; malformed input yields a
  /// protocol-error frame to `peer`.
  void handle_text(const std::shared_ptr<Peer>& peer, std::string_view raw);
  void handle(const std::shared_ptr<Peer>& peer, const WireFrame& frame);

  /// Frees the peer's role so it can reconnect.
  void disconnect(const Peer* peer);

  /// Active->Closed outside the frame protocol (replay Close step, admin).
  void close_session(const std::string& token);

 private:
  struct Binding {
    std::string token;
    core::Sender role;
  };
  struct Seats {
    std::weak_ptr<Peer> nns;
    std::weak_ptr<Peer> ns;
  };

  void hello(const std::shared_ptr<Peer>& peer, const WireFrame& frame);
  void dispatch(const std::shared_ptr<Peer>& peer, const Binding& who, SessionRuntime& rt, const WireFrame& frame);
  void broadcast(const std::string& token, const WireFrame& frame);
  void send_to(const std::string& token, core::Sender role, const WireFrame& frame);
  void push_cards(const std::string& token, std::string_view trigger, const std::vector<review::ReviewCard>& cards);

  SessionRegistry& registry_;
  assist::AssistEngine& engine_;

  std::mutex mu_;
  std::map<const Peer*, Binding> bindings_;
  std::map<std::string, Seats> seats_;
};

}  // namespace chatlearn::service
