#pragma once

#include <httplib.h>

#include <stdexcept>
#include <string>
#include <thread>

namespace wmsmon::testing {

/// httplib server on an ephemeral loopback port, running on its own thread
/// for the lifetime of the object. Register routes before calling start().
class MockServer {
 public:
  MockServer() = default;
  MockServer(const MockServer&) = delete;
  MockServer& operator=(const MockServer&) = delete;
  ~MockServer() { stop(); }

  httplib::Server& server() { return server_; }

  /// Binds `port`, or any free port when 0.
  void start(int port = 0) {
    if (port == 0) {
      port_ = server_.bind_to_any_port("127.0.0.1");
    } else {
      port_ = server_.bind_to_port("127.0.0.1", port) ? port : -1;
    }
    if (port_ <= 0) throw std::runtime_error("mock server: bind failed");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

  int port() const { return port_; }
  std::string base_url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace wmsmon::testing
