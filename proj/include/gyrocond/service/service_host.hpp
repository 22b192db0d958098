#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>

#include "gyrocond/system/protocol.hpp"

namespace gyrocond::service {

struct HostOptions {
  model::GyroParams params;
  std::uint64_t seed = 1;
  system::SupervisorOptions supervisor;
  double speed = 1.0;     // simulated seconds per wall second
  double chunk_s = 0.01;  // simulated time advanced per step
  system::ScenarioRunner runner;
};

/// Owns the simulated device on one thread and paces it against the wall
/// clock. Connections talk to it only through the command queue; replies and
/// frames come back through each connection's sink.
class ServiceHost {
 public:
  /// Called on the host thread with one complete message (no newline).
  using Sink = std::function<void(std::string message, bool is_frame)>;

  explicit ServiceHost(HostOptions opts);
  ~ServiceHost();
  ServiceHost(const ServiceHost&) = delete;
  ServiceHost& operator=(const ServiceHost&) = delete;

  void start();
  void stop();

  std::uint64_t connect(Sink sink);
  void disconnect(std::uint64_t conn);
  void submit(std::uint64_t conn, std::string line);

 private:
  struct Command {
    enum class Kind { Connect, Line, Disconnect } kind;
    std::uint64_t conn = 0;
    std::string text;
    Sink sink;
  };
  struct Connection {
    std::unique_ptr<system::ProtocolSession> session;
    Sink sink;
  };

  void run();
  void process(Command& cmd);
  void route_frames();

  HostOptions opts_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Command> queue_;
  bool running_ = false;
  std::uint64_t next_conn_ = 1;
  std::thread thread_;

  // Host thread only.
  std::unique_ptr<system::Supervisor> sup_;
  std::map<std::uint64_t, Connection> conns_;
};

}  // namespace gyrocond::service
