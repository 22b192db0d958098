#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "gyrocond/service/service_host.hpp"

namespace gyrocond::service {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  std::filesystem::path assets;  // static files; empty serves a stub page
};

/// One TCP port, three faces, chosen by the first byte a client sends:
///   '{'  newline-delimited JSON protocol
///   HTTP GET /ws with an upgrade: the same protocol, one message per frame
///   any other HTTP GET: static assets
class Server {
 public:
  Server(ServiceHost& host, ServerOptions opts);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Bind and start serving on a background thread.
  void start();
  void stop();
  unsigned short port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Content type by file extension.
std::string mime_type(const std::filesystem::path& p);

}  // namespace gyrocond::service
