#pragma once

#include <cstdint>

#include "gyrocond/afe/front_end.hpp"
#include "gyrocond/dsp/chain.hpp"
#include "gyrocond/model/gyro_model.hpp"
#include "gyrocond/regmap/register_file.hpp"

namespace gyrocond::system {

inline constexpr double kPhysicsRate = 1.0e6;
inline constexpr double kFastRate = 250'000.0;

/// Everything the registers configure.
struct DeviceConfig {
  afe::FrontEndConfig afe;
  dsp::ChainConfig chain;
  double watchdog_timeout_ms = 100.0;
  bool watchdog_enable = true;
};

struct RateScales {
  double open_dps_per_v = 0.0;
  double closed_dps_per_v = 0.0;
};

/// Rate per volt of demodulated i (open loop) and of rebalance command i
/// (closed loop) for the nominal sensor, including the anti-alias gain and
/// the DAC hold at the drive frequency.
RateScales nominal_rate_scales(const model::GyroParams& p, double setpoint_v,
                               double aa_corner_hz = kFastRate / 4.0);

/// Carrier phase advance for the nominal sensor and front end.
double default_phase_trim(const model::GyroParams& p);

/// Default device configuration for a nominal sensor (registers at reset).
DeviceConfig default_device_config(const model::GyroParams& nominal = {});

/// The device register map. Reset values come from default_device_config.
regmap::RegisterFile make_register_file(const model::GyroParams& nominal = {});

/// Decode the live image. Enables and tunables map one to one.
DeviceConfig decode_registers(const regmap::RegisterFile& file);

/// status.flags bit positions.
namespace status_bit {
inline constexpr int kPllLocked = 0;
inline constexpr int kAgcSettled = 1;
inline constexpr int kSecondaryNulled = 2;
inline constexpr int kConfigFault = 3;
inline constexpr int kClipFault = 4;
inline constexpr int kWatchdogExpired = 5;
inline constexpr int kReady = 6;
inline constexpr int kOutputClamped = 7;
}  // namespace status_bit

}  // namespace gyrocond::system
