#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrocond/system/kernel.hpp"

namespace gyrocond::system {

enum class StartupPhase : int { None = 0, Config = 1, WaitLock = 2, Settle = 3, Null = 4, Ready = 5 };

const char* phase_name(StartupPhase p);

struct StatusWord {
  bool pll_locked = false;
  bool agc_settled = false;
  bool secondary_nulled = false;
  bool config_fault = false;
  bool clip_fault = false;
  bool watchdog_expired = false;
  bool ready = false;
  bool output_clamped = false;
  std::optional<double> lock_time_ms;    // wait-lock phase completed
  std::optional<double> settle_time_ms;  // settle phase completed
  std::optional<double> turn_on_time_ms;
  StartupPhase phase = StartupPhase::None;
  StartupPhase fault_phase = StartupPhase::None;
  std::string fault_message;

  std::uint32_t bits() const;
  nlohmann::json to_json() const;
};

/// Register writes applied during the configuration phase, in order.
using RegisterWrites = std::vector<std::pair<std::string, std::uint32_t>>;

struct SupervisorOptions {
  double phase_timeout_s = 1.0;
  RegisterWrites config;
};

/// Startup sequencing, 1 ms status polling, watchdog kicking and capture on
/// top of the kernel. All register traffic uses the scan chain.
class Supervisor {
 public:
  static constexpr std::uint64_t kPollTicks = 1'000;  // 1 ms

  Supervisor(const model::GyroParams& params, std::uint64_t seed, SupervisorOptions opts = {});

  /// Advance simulated time, polling every millisecond.
  void advance(double seconds);
  void advance_ticks(std::uint64_t n);
  /// Advance until ready or a startup fault, at most `max_s`.
  bool run_startup(double max_s = 5.0);

  const StatusWord& status() const { return status_; }
  Kernel& kernel() { return *kernel_; }
  const Kernel& kernel() const { return *kernel_; }
  double time_s() const { return kernel_->time_s(); }

  void write_register(const std::string& name, std::uint32_t value);
  void write_real(const std::string& name, double v);
  std::uint32_t read_register(const std::string& name);
  double read_real(const std::string& name);
  regmap::SelfcheckReport selfcheck();

  /// Lossless capture; simulation advances (with polling) until complete.
  TraceBuffer capture(const CaptureRequest& req);
  /// Split form: arm now, let other work advance time, then complete.
  void start_capture(const CaptureRequest& req);
  TraceBuffer complete_capture();

  void set_environment(model::AngularRate rate, double temp_c);

  /// Called every `period_ticks` while time advances, with the simulated
  /// time. Scenarios use it for time-varying rate and temperature.
  using Stimulus = std::function<void(Supervisor&, double t_s)>;
  void set_stimulus(Stimulus fn, std::uint64_t period_ticks = 100);
  void clear_stimulus() { stimulus_ = nullptr; }

  // Test hooks.
  void force_nco_frequency(std::optional<double> f_hz);
  void set_kicks_enabled(bool on) { kicks_ = on; }

  /// Power-on reset: fresh sensor state, registers at reset, startup again.
  void reset();

 private:
  void poll();
  void begin_startup();
  void enter_phase(StartupPhase p);
  void fault(StartupPhase p, const std::string& message);

  model::GyroParams params_;
  std::uint64_t seed_;
  SupervisorOptions opts_;
  std::unique_ptr<Kernel> kernel_;
  StatusWord status_;
  double phase_start_s_ = 0.0;
  bool startup_fault_ = false;
  bool kicks_ = true;
  std::uint64_t since_poll_ = 0;
  CaptureRequest capture_req_;
  Stimulus stimulus_;
  std::uint64_t stimulus_period_ = 100;
};

}  // namespace gyrocond::system
