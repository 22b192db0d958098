#include "gyrocond/dsp/pll.hpp"

#include <cmath>

#include "gyrocond/error.hpp"

namespace gyrocond::dsp {

LockDetector::LockDetector(double threshold, long dwell_samples)
    : threshold_(threshold), dwell_(dwell_samples < 1 ? 1 : dwell_samples) {}

bool LockDetector::update(double error, bool qualified) {
  const double mag = std::abs(error);
  if (!qualified || !(mag <= 2.0 * threshold_)) {
    locked_ = false;
    run_ = 0;
    return locked_;
  }
  if (mag < threshold_) {
    if (run_ < dwell_) ++run_;
    if (run_ >= dwell_) locked_ = true;
  } else {
    run_ = 0;  // inside the hysteresis band: keep state, restart the dwell
  }
  return locked_;
}

void LockDetector::reset() {
  run_ = 0;
  locked_ = false;
}

PhaseLockLoop::PhaseLockLoop(const PllConfig& cfg) { configure(cfg); reset(); }

void PhaseLockLoop::configure(const PllConfig& cfg) {
  if (!(cfg.fs > 0.0) || !(cfg.f_nominal > 0.0) || !(cfg.f_nominal < cfg.fs / 2.0)) {
    throw Error("out-of-range", "PLL nominal frequency must lie inside (0, fs/2)");
  }
  if (!(cfg.lock_threshold_rad > 0.0)) {
    throw Error("out-of-range", "lock threshold must be positive");
  }
  const bool corner_changed = cfg.pd_corner_hz != cfg_.pd_corner_hz || cfg.fs != cfg_.fs;
  const bool lock_changed = cfg.lock_threshold_rad != cfg_.lock_threshold_rad ||
                            cfg.lock_dwell_s != cfg_.lock_dwell_s || cfg.fs != cfg_.fs;
  cfg_ = cfg;
  nominal_fw_ = frequency_word(cfg_.f_nominal, cfg_.fs);
  if (corner_changed || !configured_) {
    const double y_pd = pd_lpf_.value();
    const double y_ip = ip_lpf_.value();
    pd_lpf_ = OnePoleLowpass(cfg_.pd_corner_hz, cfg_.fs);
    ip_lpf_ = OnePoleLowpass(cfg_.pd_corner_hz, cfg_.fs);
    pd_lpf_.reset(y_pd);
    ip_lpf_.reset(y_ip);
  }
  pi_.set_gains(cfg_.kp, cfg_.ki);
  pi_.set_limits(-cfg_.pull_range_hz, cfg_.pull_range_hz);
  if (lock_changed || !configured_) {
    lock_ = LockDetector(cfg_.lock_threshold_rad, std::lround(cfg_.lock_dwell_s * cfg_.fs));
  }
  configured_ = true;
  if (!enabled_) nco_.fw = nominal_fw_;
}

void PhaseLockLoop::set_enabled(bool enabled) {
  if (enabled == enabled_) return;
  enabled_ = enabled;
  pi_.reset(0.0);
  lock_.reset();
  if (!enabled_) nco_.fw = nominal_fw_;
}

void PhaseLockLoop::force_frequency(std::optional<double> f_hz) {
  if (f_hz) {
    forced_fw_ = frequency_word(*f_hz, cfg_.fs);
    nco_.fw = *forced_fw_;
  } else {
    forced_fw_.reset();
  }
}

void PhaseLockLoop::reset() {
  nco_ = NcoState{0, nominal_fw_};
  pd_lpf_.reset();
  ip_lpf_.reset();
  pi_.reset(0.0);
  lock_.reset();
  forced_fw_.reset();
  enabled_ = false;
  frozen_ = false;
  last_ = PllOutput{};
  last_.fw = nominal_fw_;
}

PllOutput PhaseLockLoop::step(double centered_primary) {
  const NcoOutput ref = reference();
  PllOutput out;
  out.pd_filtered = pd_lpf_.push(centered_primary * ref.cos);
  const double ip = ip_lpf_.push(centered_primary * ref.sin);
  out.phase_error = std::atan2(out.pd_filtered, ip);
  out.amplitude = 2.0 * std::hypot(out.pd_filtered, ip);

  if (enabled_ && !frozen_) {
    const double df = pi_.update(out.phase_error);
    nco_.fw = frequency_word(cfg_.f_nominal + df, cfg_.fs);
  }
  if (forced_fw_) nco_.fw = *forced_fw_;

  // A loop with no gain cannot track, so it never reports lock.
  const bool loop_active = cfg_.kp != 0.0 || cfg_.ki != 0.0;
  const bool qualified = enabled_ && loop_active && out.amplitude >= cfg_.min_lock_amplitude_v;
  out.locked = lock_.update(out.phase_error, qualified);
  out.fw = nco_.fw;

  nco_.phase += nco_.fw;
  last_ = out;
  return out;
}

}  // namespace gyrocond::dsp
