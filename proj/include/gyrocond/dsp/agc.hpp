#pragma once

#include "gyrocond/dsp/filters.hpp"
#include "gyrocond/dsp/nco.hpp"
#include "gyrocond/dsp/pi_controller.hpp"

namespace gyrocond::dsp {

struct AgcConfig {
  double fs = 250'000.0;
  double setpoint_v = 1.0;  // pickoff amplitude
  double carrier_gain = 1.0;  // front-end gain at the carrier, divided out of the estimate
  double kp = 8.9;          // V drive per V amplitude error
  double ki = 8.4e-4;       // per sample
  double corner_hz = 200.0;
  double startup_drive_v = 1.5;
  double drive_limit_v = 2.4;
};

/// Amplitude regulation of the primary mode. The estimate is
/// A = 2 * LPF(v * sin) / carrier_gain against the PLL reference; the drive amplitude is
/// PI(setpoint - A), clamped symmetrically so the loop can also brake.
/// While disabled the drive amplitude is the fixed startup value.
class AmplitudeControl {
 public:
  explicit AmplitudeControl(const AgcConfig& cfg);

  void configure(const AgcConfig& cfg);
  const AgcConfig& config() const { return cfg_; }

  /// Returns the drive amplitude command in volts.
  double step(double centered_primary, const NcoOutput& ref);

  /// Enabling preloads the integrator with the current drive (bumpless).
  void set_enabled(bool enabled);
  bool enabled() const { return enabled_; }
  void set_frozen(bool frozen) { frozen_ = frozen; }

  double amplitude() const { return amplitude_; }
  double drive() const { return drive_; }
  const PiController& controller() const { return pi_; }
  void reset();

 private:
  AgcConfig cfg_;
  TwoPoleLowpass lpf_;
  PiController pi_;
  bool enabled_ = false;
  bool frozen_ = false;
  bool configured_ = false;
  double amplitude_ = 0.0;
  double drive_ = 0.0;
};

}  // namespace gyrocond::dsp
