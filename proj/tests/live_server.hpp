#pragma once

#include <httplib.h>

#include <stdexcept>
#include <thread>

#include "fdnl2sql/service/server.hpp"

namespace testsupport {

/// A Service mounted on an ephemeral localhost port for the lifetime of
/// the object.
class LiveServer {
 public:
  explicit LiveServer(fdnl2sql::service::Service& svc) {
    svc.mount(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    if (port_ <= 0) throw std::runtime_error("cannot bind a test port");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LiveServer() {
    server_.stop();
    thread_.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port_);
    c.set_read_timeout(30, 0);
    return c;
  }
  int port() const { return port_; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace testsupport
