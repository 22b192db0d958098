#pragma once

#include "gyrocond/dsp/nco.hpp"
#include "gyrocond/dsp/pi_controller.hpp"

namespace gyrocond::dsp {

struct IqSample {
  double i = 0.0;
  double q = 0.0;
};

/// i = 2 v sin, q = 2 v cos; the factor 2 restores amplitude after low-pass.
inline IqSample demod_iq(double centered_secondary, const NcoOutput& ref) {
  return {2.0 * centered_secondary * ref.sin, 2.0 * centered_secondary * ref.cos};
}

/// control = -(i_cmd sin + q_cmd cos) on the given carrier.
inline double rebalance_modulate(double i_cmd, double q_cmd, const NcoOutput& carrier) {
  return -(i_cmd * carrier.sin + q_cmd * carrier.cos);
}

struct RebalanceConfig {
  double kp = 148.0;
  double ki = 4.65;  // per demod-rate sample
  double limit_v = 2.0;
};

/// Two PI loops driving the demodulated i/q toward zero.
class RebalanceLoop {
 public:
  explicit RebalanceLoop(const RebalanceConfig& cfg) { configure(cfg); }

  void configure(const RebalanceConfig& cfg) {
    cfg_ = cfg;
    i_pi_.set_gains(cfg.kp, cfg.ki);
    q_pi_.set_gains(cfg.kp, cfg.ki);
    i_pi_.set_limits(-cfg.limit_v, cfg.limit_v);
    q_pi_.set_limits(-cfg.limit_v, cfg.limit_v);
  }
  const RebalanceConfig& config() const { return cfg_; }

  IqSample update(const IqSample& demod) {
    if (enabled_ && !frozen_) {
      cmd_.i = i_pi_.update(demod.i);
      cmd_.q = q_pi_.update(demod.q);
    }
    return cmd_;
  }

  void set_enabled(bool enabled) {
    if (enabled == enabled_) return;
    enabled_ = enabled;
    i_pi_.reset();
    q_pi_.reset();
    cmd_ = {};
  }
  bool enabled() const { return enabled_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  const IqSample& command() const { return cmd_; }
  void reset() {
    enabled_ = false;
    frozen_ = false;
    i_pi_.reset();
    q_pi_.reset();
    cmd_ = {};
  }

 private:
  RebalanceConfig cfg_;
  PiController i_pi_;
  PiController q_pi_;
  IqSample cmd_;
  bool enabled_ = false;
  bool frozen_ = false;
};

}  // namespace gyrocond::dsp
