#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <string>
#include <thread>

#include "qguard/engine.hpp"

namespace httplib {
class Server;
}

namespace qguard {

// HTTP moderation service over an Engine:
//   POST /v1/guard   {text?, image_b64?, media_type?, threshold?, method?, include_report?}
//   POST /v1/reload  re-reads the configured question file
//   GET  /v1/health  cheap status; ?deep=true also probes the backend
class GatewayServer {
 public:
  explicit GatewayServer(Engine& engine);
  ~GatewayServer();

  GatewayServer(const GatewayServer&) = delete;
  GatewayServer& operator=(const GatewayServer&) = delete;

  // Binds the engine's configured listen address and serves on a background
  // thread. A port of 0 picks an ephemeral port (see port()).
  bool start();
  void stop();

  // Blocking variant for `guard serve`.
  bool run();

  int port() const { return port_; }
  std::string host() const { return host_; }

 private:
  void setup_routes();
  bool bind();

  Engine& engine_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  std::string host_;
  int port_ = 0;
  std::chrono::steady_clock::time_point started_;
};

}  // namespace qguard
