#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "chatlearn/service/hub.hpp"

namespace chatlearn::service {

/// WebSocket front end for a Hub. One text message per frame. Network I/O
/// runs on a single thread; frame handling runs on a small worker pool,
/// serialized per connection.
class Server {
 public:
  Server(Hub& hub, std::string bind_address, std::uint16_t port, std::size_t workers = 2);
  ~Server();

  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting. Returns the bound port. Throws
  /// Error(port_in_use) when the address is taken.
  std::uint16_t start();
  /// Idempotent. A stopped server cannot be restarted.
  void stop();

  std::uint16_t port() const noexcept;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chatlearn::service
