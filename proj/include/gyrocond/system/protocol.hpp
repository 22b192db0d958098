#pragma once

#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "gyrocond/system/supervisor.hpp"

namespace gyrocond::system {

inline constexpr int kProtocolVersion = 1;

/// Runs a named scenario with a JSON config and returns its report. Injected
/// so the device library does not depend on the scenario library.
using ScenarioRunner = std::function<nlohmann::json(const std::string& name, const nlohmann::json& config)>;

/// Error response for a request that never reached dispatch.
nlohmann::json error_response(const nlohmann::json& id, const std::string& code, const std::string& message);

/// Frame message delivered to subscribers.
nlohmann::json frame_message(const TapFrame& frame);

/// One client connection. Requests are {v, id, op, args}; every request gets
/// exactly one response {v, id, ok, result | error: {code, message}}.
class ProtocolSession {
 public:
  ProtocolSession(Supervisor& sup, ScenarioRunner runner = {});

  nlohmann::json handle(const nlohmann::json& msg);
  /// Parse one newline-free JSON text; unparsable input yields a malformed
  /// error response with a null id.
  nlohmann::json handle_line(std::string_view line);

  /// Subscribed taps and their decimation (0 = default).
  const std::map<Tap, int>& subscriptions() const { return subs_; }

 private:
  nlohmann::json dispatch(const std::string& op, const nlohmann::json& args);

  Supervisor& sup_;
  ScenarioRunner runner_;
  std::set<std::string> seen_ids_;
  std::map<Tap, int> subs_;
};

}  // namespace gyrocond::system
