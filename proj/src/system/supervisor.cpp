#include "gyrocond/system/supervisor.hpp"

#include <cmath>

#include "gyrocond/error.hpp"

namespace gyrocond::system {

const char* phase_name(StartupPhase p) {
  switch (p) {
    case StartupPhase::None: return "none";
    case StartupPhase::Config: return "config";
    case StartupPhase::WaitLock: return "wait-lock";
    case StartupPhase::Settle: return "settle";
    case StartupPhase::Null: return "null";
    case StartupPhase::Ready: return "ready";
  }
  return "?";
}

std::uint32_t StatusWord::bits() const {
  using namespace status_bit;
  std::uint32_t b = 0;
  b |= static_cast<std::uint32_t>(pll_locked) << kPllLocked;
  b |= static_cast<std::uint32_t>(agc_settled) << kAgcSettled;
  b |= static_cast<std::uint32_t>(secondary_nulled) << kSecondaryNulled;
  b |= static_cast<std::uint32_t>(config_fault) << kConfigFault;
  b |= static_cast<std::uint32_t>(clip_fault) << kClipFault;
  b |= static_cast<std::uint32_t>(watchdog_expired) << kWatchdogExpired;
  b |= static_cast<std::uint32_t>(ready) << kReady;
  b |= static_cast<std::uint32_t>(output_clamped) << kOutputClamped;
  return b;
}

nlohmann::json StatusWord::to_json() const {
  nlohmann::json j{{"pll_locked", pll_locked},
                   {"agc_settled", agc_settled},
                   {"secondary_nulled", secondary_nulled},
                   {"config_fault", config_fault},
                   {"clip_fault", clip_fault},
                   {"watchdog_expired", watchdog_expired},
                   {"ready", ready},
                   {"output_clamped", output_clamped},
                   {"phase", phase_name(phase)},
                   {"fault_phase", phase_name(fault_phase)}};
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); };
  j["lock_time_ms"] = opt(lock_time_ms);
  j["settle_time_ms"] = opt(settle_time_ms);
  j["turn_on_time_ms"] = opt(turn_on_time_ms);
  if (!fault_message.empty()) j["fault_message"] = fault_message;
  return j;
}

Supervisor::Supervisor(const model::GyroParams& params, std::uint64_t seed, SupervisorOptions opts)
    : params_(params), seed_(seed), opts_(std::move(opts)) {
  reset();
}

void Supervisor::reset() {
  kernel_ = std::make_unique<Kernel>(params_, seed_);
  status_ = StatusWord{};
  startup_fault_ = false;
  since_poll_ = 0;
  kicks_ = true;
  begin_startup();
}

void Supervisor::fault(StartupPhase p, const std::string& message) {
  startup_fault_ = true;
  status_.fault_phase = p;
  status_.fault_message = message;
  status_.phase = StartupPhase::None;
}

void Supervisor::enter_phase(StartupPhase p) {
  status_.phase = p;
  phase_start_s_ = time_s();
}

void Supervisor::begin_startup() {
  enter_phase(StartupPhase::Config);
  try {
    for (const auto& [name, value] : opts_.config) kernel_->scan().write(name, value);
    kernel_->scan().write("pll.enable", 1);
  } catch (const Error& e) {
    fault(StartupPhase::Config, e.what());
    poll();
    return;
  }
  enter_phase(StartupPhase::WaitLock);
  poll();
}

void Supervisor::poll() {
  Kernel& k = *kernel_;
  if (kicks_) k.kick();
  const auto& cs = k.chain().status();
  const double now = time_s();

  if (!startup_fault_) {
    try {
      switch (status_.phase) {
        case StartupPhase::WaitLock:
          if (cs.pll_locked) {
            k.scan().write("agc.enable", 1);
            status_.lock_time_ms = std::round(now * 1e3);
            enter_phase(StartupPhase::Settle);
          }
          break;
        case StartupPhase::Settle:
          if (cs.agc_settled) {
            status_.settle_time_ms = std::round(now * 1e3);
            if (k.device_config().chain.mode == dsp::LoopMode::Closed) {
              k.scan().write("rebal.enable", 1);
              enter_phase(StartupPhase::Null);
            } else {
              enter_phase(StartupPhase::Ready);
              status_.turn_on_time_ms = std::round(now * 1e3);
            }
          }
          break;
        case StartupPhase::Null:
          if (cs.secondary_nulled) {
            enter_phase(StartupPhase::Ready);
            status_.turn_on_time_ms = std::round(now * 1e3);
          }
          break;
        default: break;
      }
    } catch (const Error& e) {
      fault(status_.phase, e.what());
    }
    if (!startup_fault_ && status_.phase != StartupPhase::Ready &&
        status_.phase != StartupPhase::None && now - phase_start_s_ > opts_.phase_timeout_s) {
      fault(status_.phase, std::string("timeout in phase ") + phase_name(status_.phase));
    }
  }

  status_.pll_locked = cs.pll_locked;
  status_.agc_settled = cs.agc_settled;
  status_.secondary_nulled = cs.secondary_nulled;
  status_.output_clamped = cs.output_clamped;
  status_.clip_fault = k.front_end().flags().any();
  status_.watchdog_expired = k.watchdog_expired();
  status_.config_fault = startup_fault_ || k.scan().config_fault();
  status_.ready = status_.phase == StartupPhase::Ready && status_.pll_locked &&
                  status_.agc_settled && !status_.watchdog_expired;

  const auto turn_on = status_.turn_on_time_ms ? static_cast<std::uint32_t>(*status_.turn_on_time_ms) : 0u;
  k.publish_registers(status_.bits(), turn_on, static_cast<std::uint32_t>(status_.fault_phase));
}

void Supervisor::advance_ticks(std::uint64_t n) {
  Kernel& k = *kernel_;
  for (std::uint64_t i = 0; i < n; ++i) {
    if (stimulus_ && k.ticks() % stimulus_period_ == 0) stimulus_(*this, k.time_s());
    k.tick();
    if (++since_poll_ == kPollTicks) {
      since_poll_ = 0;
      poll();
    }
  }
}

void Supervisor::advance(double seconds) {
  advance_ticks(static_cast<std::uint64_t>(std::llround(seconds * kPhysicsRate)));
}

bool Supervisor::run_startup(double max_s) {
  const auto limit = kernel_->ticks() + static_cast<std::uint64_t>(std::llround(max_s * kPhysicsRate));
  while (!status_.ready && !startup_fault_ && kernel_->ticks() < limit) advance_ticks(kPollTicks);
  return status_.ready;
}

void Supervisor::write_register(const std::string& name, std::uint32_t value) {
  kernel_->scan().write(name, value);
}

void Supervisor::write_real(const std::string& name, double v) {
  kernel_->scan().write_real(name, v);
}

std::uint32_t Supervisor::read_register(const std::string& name) { return kernel_->scan().read(name); }

double Supervisor::read_real(const std::string& name) { return kernel_->scan().read_real(name); }

regmap::SelfcheckReport Supervisor::selfcheck() { return kernel_->scan().selfcheck(); }

void Supervisor::start_capture(const CaptureRequest& req) {
  kernel_->start_capture(req);
  capture_req_ = req;
}

TraceBuffer Supervisor::complete_capture() {
  Kernel& k = *kernel_;
  if (!k.capture_active()) throw Error("no-capture", "no capture is armed");
  const double fs = tap_info(capture_req_.tap).native_rate_hz / capture_req_.decimation;
  const auto limit =
      k.ticks() + static_cast<std::uint64_t>(std::llround((capture_req_.count / fs + 1.0) * kPhysicsRate));
  while (!k.capture_complete() && k.ticks() < limit) advance_ticks(1);
  return k.finish_capture(0.0);
}

TraceBuffer Supervisor::capture(const CaptureRequest& req) {
  start_capture(req);
  return complete_capture();
}

void Supervisor::set_environment(model::AngularRate rate, double temp_c) {
  kernel_->model().set_environment(rate, temp_c);
}

void Supervisor::set_stimulus(Stimulus fn, std::uint64_t period_ticks) {
  if (period_ticks == 0) throw Error("out-of-range", "stimulus period must be >= 1 tick");
  stimulus_ = std::move(fn);
  stimulus_period_ = period_ticks;
}

void Supervisor::force_nco_frequency(std::optional<double> f_hz) {
  kernel_->chain().pll().force_frequency(f_hz);
}

}  // namespace gyrocond::system
