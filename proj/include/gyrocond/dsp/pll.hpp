#pragma once

#include <cstdint>
#include <optional>

#include "gyrocond/dsp/filters.hpp"
#include "gyrocond/dsp/nco.hpp"
#include "gyrocond/dsp/pi_controller.hpp"

namespace gyrocond::dsp {

struct PllConfig {
  double fs = 250'000.0;
  double f_nominal = 15'000.0;
  double pd_corner_hz = 500.0;
  double kp = 64.0;             // Hz per rad
  double ki = 0.0402;           // Hz per rad per sample
  double pull_range_hz = 1'000.0;
  double lock_threshold_rad = 0.05;
  double lock_dwell_s = 0.010;
  double min_lock_amplitude_v = 0.05;
};

/// Declares lock after |error| < threshold for `dwell` consecutive samples;
/// drops it as soon as |error| > 2 * threshold.
class LockDetector {
 public:
  LockDetector() = default;
  LockDetector(double threshold, long dwell_samples);

  bool update(double error, bool qualified = true);
  bool locked() const { return locked_; }
  void reset();

 private:
  double threshold_ = 0.05;
  long dwell_ = 1;
  long run_ = 0;
  bool locked_ = false;
};

struct PllOutput {
  std::uint32_t fw = 0;
  double pd_filtered = 0.0;  // LPF(centered * cos), V
  double phase_error = 0.0;  // rad
  double amplitude = 0.0;    // V, magnitude of the filtered products
  bool locked = false;
};

/// NCO + multiplier phase detector + PI loop filter. The detector products
/// against both NCO outputs are low-passed; the phase error is their
/// four-quadrant angle, so loop gain does not depend on pickoff amplitude.
class PhaseLockLoop {
 public:
  explicit PhaseLockLoop(const PllConfig& cfg);

  /// Replace tunables; loop state is kept.
  void configure(const PllConfig& cfg);
  const PllConfig& config() const { return cfg_; }

  NcoOutput reference() const { return SineTable::instance().lookup(nco_.phase); }
  std::uint32_t phase() const { return nco_.phase; }
  std::uint32_t fw() const { return nco_.fw; }
  std::uint32_t nominal_fw() const { return nominal_fw_; }

  /// Detect against the current reference, update the frequency word, then
  /// advance the NCO.
  PllOutput step(double centered_primary);

  /// Disabled: NCO free-runs at nominal, integrator cleared, not locked.
  void set_enabled(bool enabled);
  bool enabled() const { return enabled_; }
  /// Hold the loop: NCO keeps its current word, nothing integrates.
  void set_frozen(bool frozen) { frozen_ = frozen; }

  /// Test hook: override the frequency word while set.
  void force_frequency(std::optional<double> f_hz);
  void set_phase(std::uint32_t phase) { nco_.phase = phase; }

  const PllOutput& last() const { return last_; }
  void reset();

 private:
  PllConfig cfg_;
  NcoState nco_;
  std::uint32_t nominal_fw_ = 0;
  OnePoleLowpass pd_lpf_;
  OnePoleLowpass ip_lpf_;
  PiController pi_;
  LockDetector lock_;
  std::optional<std::uint32_t> forced_fw_;
  bool enabled_ = false;
  bool frozen_ = false;
  bool configured_ = false;
  PllOutput last_;
};

}  // namespace gyrocond::dsp
