#pragma once

#include <cstdint>

#include "gyrocond/dsp/agc.hpp"
#include "gyrocond/dsp/compensation.hpp"
#include "gyrocond/dsp/demod.hpp"
#include "gyrocond/dsp/filters.hpp"
#include "gyrocond/dsp/pll.hpp"

namespace gyrocond::dsp {

enum class LoopMode : int { Open = 0, Closed = 1 };

struct ChainConfig {
  double fs_fast = 250'000.0;
  PllConfig pll;
  AgcConfig agc;
  RebalanceConfig rebal;
  bool pll_enable = false;
  bool agc_enable = false;
  bool rebal_enable = false;
  // Carrier advance compensating loop delay (DAC hold, anti-alias lag).
  double phase_trim_rad = 0.0;
  LoopMode mode = LoopMode::Closed;
  double scale_open_dps_per_v = 5'400.0;
  double scale_closed_dps_per_v = 6'000.0;
  double channel_corner_hz = 46.0;  // system -3 dB point lands at 50 Hz
  bool comp_enable = true;
  CompensationPoly comp;
  OutputConfig output;
  double settle_tolerance = 0.01;  // fraction of setpoint
  double settle_dwell_s = 0.020;
  double null_threshold_v = 0.002;
  double null_dwell_s = 0.005;

  void validate() const;
};

/// Latest value at every named tap.
struct ChainTaps {
  std::uint32_t primary_adc = 0;
  double pd_error = 0.0;
  std::uint32_t nco_fw = 0;
  double agc_gain = 0.0;  // drive amplitude command, V
  double demod_i = 0.0;
  double demod_q = 0.0;
  double rate_raw_open = 0.0;    // deg/s at the demod rate
  double rate_raw_closed = 0.0;  // deg/s at the demod rate
  double rate_filtered = 0.0;
  double rate_filtered_open = 0.0;
  double rate_filtered_closed = 0.0;
  double rate_compensated = 0.0;
  double output_volts = 2.5;
  bool new_demod = false;   // this step produced a demod-rate sample
  bool new_output = false;  // this step produced an output-rate sample
};

struct ChainStatus {
  bool pll_locked = false;
  bool agc_settled = false;
  bool secondary_nulled = false;
  bool output_clamped = false;  // sticky
};

struct ChainDrive {
  double drive_v = 0.0;
  double control_v = 0.0;
};

/// The conditioning chain at the fast rate. Each step consumes one pair of
/// ADC samples and produces the electrode voltages for the next hold period.
class ConditioningChain {
 public:
  explicit ConditioningChain(const ChainConfig& cfg);

  /// Apply a new configuration between steps. Loop state is kept; enable
  /// transitions take effect here.
  void configure(const ChainConfig& cfg);
  const ChainConfig& config() const { return cfg_; }

  ChainDrive step(std::uint32_t primary_code, double centered_primary,
                  double centered_secondary, double temp_c);

  /// Safe state: loops frozen, electrode commands zero.
  void set_safe(bool safe);
  bool safe() const { return safe_; }

  const ChainTaps& taps() const { return taps_; }
  const ChainStatus& status() const { return status_; }
  PhaseLockLoop& pll() { return pll_; }
  const PhaseLockLoop& pll() const { return pll_; }
  const AmplitudeControl& agc() const { return agc_; }
  const RebalanceLoop& rebalance() const { return rebal_; }
  double output_rate() const { return plan_.output_rate(); }
  double demod_rate() const { return plan_.boxcar_rate(); }

  void reset();

 private:
  void apply_enables();

  ChainConfig cfg_;
  DecimationPlan plan_;
  PhaseLockLoop pll_;
  AmplitudeControl agc_;
  RebalanceLoop rebal_;
  std::uint32_t carrier_offset_ = 0;
  BoxcarDecimator box_i_;
  BoxcarDecimator box_q_;
  OutputDecimator out_open_;
  OutputDecimator out_closed_;
  LockDetector settle_;
  LockDetector null_;
  OnePoleLowpass null_i_;
  OnePoleLowpass null_q_;
  ChainTaps taps_;
  ChainStatus status_;
  bool safe_ = false;
  bool configured_ = false;
};

/// Carrier advance that cancels the DAC zero-order hold (half a fast period)
/// and the phase lag of the discrete anti-alias pole at `f_hz`.
double nominal_phase_trim(double f_hz, double fs_fast, double physics_rate,
                          double aa_coefficient);

}  // namespace gyrocond::dsp
