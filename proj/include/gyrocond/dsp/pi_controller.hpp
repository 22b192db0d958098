#pragma once

namespace gyrocond::dsp {

/// Per-sample PI controller with output clamp. The integrator does not
/// accumulate in the direction that would push a clamped output further
/// out of range.
class PiController {
 public:
  PiController() = default;
  PiController(double kp, double ki, double lo, double hi);

  double update(double error);

  void set_gains(double kp, double ki) {
    kp_ = kp;
    ki_ = ki;
  }
  void set_limits(double lo, double hi);
  /// Preload the integrator (bumpless transfer).
  void reset(double integrator = 0.0);

  double output() const { return output_; }
  double integrator() const { return integrator_; }
  bool clamped() const { return clamped_; }
  double kp() const { return kp_; }
  double ki() const { return ki_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double kp_ = 0.0;
  double ki_ = 0.0;
  double lo_ = -1.0;
  double hi_ = 1.0;
  double integrator_ = 0.0;
  double output_ = 0.0;
  bool clamped_ = false;
};

}  // namespace gyrocond::dsp
