#include "chatlearn/service/server.hpp"

#include <deque>
#include <thread>

#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/strand.hpp>
#include <boost/asio/thread_pool.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/websocket.hpp>

#include "chatlearn/error.hpp"

namespace chatlearn::service {

namespace net = boost::asio;
namespace beast = boost::beast;
namespace websocket = beast::websocket;
using tcp = net::ip::tcp;

namespace {

constexpr std::size_t kMaxFrameBytes = 1 << 20;

class Connection final : public Peer, public std::enable_shared_from_this<Connection> {
 public:
  Connection(tcp::socket socket, Hub& hub, net::thread_pool& pool)
      : ws_(std::move(socket)), hub_(hub), work_(net::make_strand(pool)) {}

  void run() {
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.read_message_max(kMaxFrameBytes);
    ws_.async_accept([self = shared_from_this()](beast::error_code ec) {
      if (!ec) self->read();
    });
  }

  void send(const WireFrame& frame) override {
    net::post(ws_.get_executor(), [self = shared_from_this(), text = encode(frame)]() mutable {
      if (self->closed_) return;
      self->queue_.push_back(std::move(text));
      if (self->queue_.size() == 1) self->write();
    });
  }

  void close() override {
    net::post(ws_.get_executor(), [self = shared_from_this()] {
      self->closing_ = true;
      if (self->queue_.empty()) self->shutdown();
    });
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        net::post(self->work_, [self] { self->hub_.disconnect(self.get()); });
        return;
      }
      std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      net::post(self->work_, [self, text = std::move(text)] {
        self->hub_.handle_text(self, text);
      });
      self->read();
    });
  }

  void write() {
    ws_.text(true);
    ws_.async_write(net::buffer(queue_.front()), [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->queue_.clear();
        return;
      }
      self->queue_.pop_front();
      if (!self->queue_.empty()) {
        self->write();
      } else if (self->closing_) {
        self->shutdown();
      }
    });
  }

  void shutdown() {
    if (closed_) return;
    closed_ = true;
    ws_.async_close(websocket::close_code::normal, [self = shared_from_this()](beast::error_code) {});
  }

  websocket::stream<beast::tcp_stream> ws_;
  Hub& hub_;
  net::strand<net::thread_pool::executor_type> work_;
  beast::flat_buffer buffer_;
  // Touched only on the socket's strand.
  std::deque<std::string> queue_;
  bool closing_ = false;
  bool closed_ = false;
};

}  // namespace

struct Server::Impl {
  Impl(Hub& h, std::string a, std::uint16_t p, std::size_t workers)
      : hub(h), address(std::move(a)), requested_port(p), pool(workers == 0 ? 1 : workers), acceptor(ioc) {}

  void accept() {
    acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
      if (ec) return;  // acceptor closed
      std::make_shared<Connection>(std::move(socket), hub, pool)->run();
      accept();
    });
  }

  Hub& hub;
  std::string address;
  std::uint16_t requested_port;
  std::uint16_t bound_port = 0;
  // Declaration order matters: connections die with ioc and still hold
  // strands on pool.
  net::thread_pool pool;
  net::io_context ioc;
  tcp::acceptor acceptor;
  std::thread io_thread;
  bool started = false;
  bool stopped = false;
};

Server::Server(Hub& hub, std::string bind_address, std::uint16_t port, std::size_t workers)
    : impl_(std::make_unique<Impl>(hub, std::move(bind_address), port, workers)) {}

Server::~Server() { stop(); }

std::uint16_t Server::start() {
  auto& s = *impl_;
  if (s.started) return s.bound_port;
  beast::error_code ec;
  const auto address = net::ip::make_address(s.address, ec);
  if (ec) throw Error(Errc::invalid_config, "bad bind address '" + s.address + "'");
  const tcp::endpoint endpoint(address, s.requested_port);
  s.acceptor.open(endpoint.protocol(), ec);
  if (!ec) s.acceptor.set_option(net::socket_base::reuse_address(true), ec);
  if (!ec) s.acceptor.bind(endpoint, ec);
  if (!ec) s.acceptor.listen(net::socket_base::max_listen_connections, ec);
  if (ec) {
    if (ec == net::error::address_in_use) {
      throw Error(Errc::port_in_use, "port " + std::to_string(s.requested_port) + " is in use");
    }
    throw Error(Errc::io_error, "cannot listen on " + s.address + ": " + ec.message());
  }
  s.bound_port = s.acceptor.local_endpoint().port();
  s.accept();
  s.io_thread = std::thread([&s] { s.ioc.run(); });
  s.started = true;
  return s.bound_port;
}

void Server::stop() {
  auto& s = *impl_;
  if (s.stopped) return;
  s.stopped = true;
  if (s.started) {
    net::post(s.ioc, [&s] {
      beast::error_code ignored;
      s.acceptor.close(ignored);
    });
    s.ioc.stop();
    if (s.io_thread.joinable()) s.io_thread.join();
  }
  s.pool.join();
}

std::uint16_t Server::port() const noexcept { return impl_->bound_port; }

}  // namespace chatlearn::service
