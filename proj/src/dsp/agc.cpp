#include "gyrocond/dsp/agc.hpp"

#include <algorithm>

#include "gyrocond/error.hpp"

namespace gyrocond::dsp {

AmplitudeControl::AmplitudeControl(const AgcConfig& cfg) {
  configure(cfg);
  reset();
}

void AmplitudeControl::configure(const AgcConfig& cfg) {
  if (!(cfg.setpoint_v > 0.0)) throw Error("out-of-range", "AGC setpoint must be positive");
  if (!(cfg.drive_limit_v > 0.0)) throw Error("out-of-range", "AGC drive limit must be positive");
  if (!(cfg.carrier_gain > 0.0)) throw Error("out-of-range", "AGC carrier gain must be positive");
  const bool corner_changed = !configured_ || cfg.corner_hz != cfg_.corner_hz || cfg.fs != cfg_.fs;
  cfg_ = cfg;
  if (corner_changed) {
    const double y = lpf_.value();
    lpf_ = TwoPoleLowpass(cfg_.corner_hz, cfg_.fs);
    lpf_.reset(y);
  }
  pi_.set_gains(cfg_.kp, cfg_.ki);
  pi_.set_limits(-cfg_.drive_limit_v, cfg_.drive_limit_v);
  if (!enabled_) drive_ = std::clamp(cfg_.startup_drive_v, -cfg_.drive_limit_v, cfg_.drive_limit_v);
  configured_ = true;
}

void AmplitudeControl::set_enabled(bool enabled) {
  if (enabled == enabled_) return;
  enabled_ = enabled;
  if (enabled_) {
    pi_.reset(drive_);
  } else {
    drive_ = std::clamp(cfg_.startup_drive_v, -cfg_.drive_limit_v, cfg_.drive_limit_v);
  }
}

void AmplitudeControl::reset() {
  lpf_.reset();
  pi_.reset(0.0);
  enabled_ = false;
  frozen_ = false;
  amplitude_ = 0.0;
  drive_ = std::clamp(cfg_.startup_drive_v, -cfg_.drive_limit_v, cfg_.drive_limit_v);
}

double AmplitudeControl::step(double centered_primary, const NcoOutput& ref) {
  amplitude_ = 2.0 * lpf_.push(centered_primary * ref.sin) / cfg_.carrier_gain;
  if (enabled_ && !frozen_) drive_ = pi_.update(cfg_.setpoint_v - amplitude_);
  return drive_;
}

}  // namespace gyrocond::dsp
