#pragma once

#include <memory>
#include <string>

#include "swarmnav/bridge.hpp"

namespace swarmnav {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8765;   // 0 picks a free port
  double steps_per_second = 30.0;  // at speed 1
  double min_broadcast_hz = 10.0;  // state cadence while paused or finished
};

/// WebSocket endpoint around a LiveSession. Network I/O runs on one thread,
/// the simulation loop on another; commands cross through the session queue.
class BridgeServer {
 public:
  BridgeServer(LiveSession& live, ServerOptions options = {});
  ~BridgeServer();
  BridgeServer(const BridgeServer&) = delete;
  BridgeServer& operator=(const BridgeServer&) = delete;

  /// Binds and starts both threads. Throws Error when the port is unavailable.
  void start();
  void stop();
  /// Blocks until stop() is called from another thread.
  void wait();
  unsigned short port() const;
  std::size_t client_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace swarmnav
