#include "gyrocond/service/service_host.hpp"

#include <chrono>
#include <cmath>

namespace gyrocond::service {

using Clock = std::chrono::steady_clock;

ServiceHost::ServiceHost(HostOptions opts) : opts_(std::move(opts)) {}

ServiceHost::~ServiceHost() { stop(); }

void ServiceHost::start() {
  std::lock_guard lock(mu_);
  if (running_) return;
  running_ = true;
  thread_ = std::thread([this] { run(); });
}

void ServiceHost::stop() {
  {
    std::lock_guard lock(mu_);
    if (!running_) return;
    running_ = false;
  }
  cv_.notify_all();
  if (thread_.joinable()) thread_.join();
}

std::uint64_t ServiceHost::connect(Sink sink) {
  std::uint64_t id;
  {
    std::lock_guard lock(mu_);
    id = next_conn_++;
    queue_.push_back({Command::Kind::Connect, id, {}, std::move(sink)});
  }
  cv_.notify_all();
  return id;
}

void ServiceHost::disconnect(std::uint64_t conn) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back({Command::Kind::Disconnect, conn, {}, {}});
  }
  cv_.notify_all();
}

void ServiceHost::submit(std::uint64_t conn, std::string line) {
  {
    std::lock_guard lock(mu_);
    queue_.push_back({Command::Kind::Line, conn, std::move(line), {}});
  }
  cv_.notify_all();
}

void ServiceHost::process(Command& cmd) {
  switch (cmd.kind) {
    case Command::Kind::Connect:
      conns_[cmd.conn] = Connection{std::make_unique<system::ProtocolSession>(*sup_, opts_.runner),
                                    std::move(cmd.sink)};
      break;
    case Command::Kind::Line: {
      auto it = conns_.find(cmd.conn);
      if (it == conns_.end()) break;
      const auto reply = it->second.session->handle_line(cmd.text);
      it->second.sink(reply.dump(), false);
      break;
    }
    case Command::Kind::Disconnect: {
      auto it = conns_.find(cmd.conn);
      if (it == conns_.end()) break;
      const auto taps = it->second.session->subscriptions();
      conns_.erase(it);
      for (const auto& [tap, dec] : taps) {
        bool held = false;
        for (const auto& [id, c] : conns_) held = held || c.session->subscriptions().count(tap) != 0;
        if (!held) sup_->kernel().unsubscribe(tap);
      }
      break;
    }
  }
}

void ServiceHost::route_frames() {
  for (const auto& frame : sup_->kernel().drain_frames()) {
    const system::Tap tap = system::tap_from_name(frame.tap);
    std::string text;
    for (auto& [id, c] : conns_) {
      if (c.session->subscriptions().count(tap) == 0) continue;
      if (text.empty()) text = system::frame_message(frame).dump();
      c.sink(text, true);
    }
  }
}

void ServiceHost::run() {
  sup_ = std::make_unique<system::Supervisor>(opts_.params, opts_.seed, opts_.supervisor);
  const auto step_ticks = static_cast<std::uint64_t>(std::llround(opts_.chunk_s * system::kPhysicsRate));
  const auto period = std::chrono::duration_cast<Clock::duration>(
      std::chrono::duration<double>(opts_.chunk_s / opts_.speed));
  auto next = Clock::now();

  for (;;) {
    std::deque<Command> batch;
    {
      std::unique_lock lock(mu_);
      cv_.wait_until(lock, next, [this] { return !running_ || !queue_.empty(); });
      if (!running_) break;
      batch.swap(queue_);
    }
    for (auto& cmd : batch) process(cmd);

    const auto now = Clock::now();
    if (now >= next) {
      sup_->advance_ticks(step_ticks);
      route_frames();
      next += period;
      if (Clock::now() - next > std::chrono::seconds(1)) next = Clock::now();
    }
  }
  conns_.clear();
  sup_.reset();
}

}  // namespace gyrocond::service
