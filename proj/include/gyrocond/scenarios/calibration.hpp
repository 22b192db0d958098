#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrocond/dsp/compensation.hpp"
#include "gyrocond/scenarios/measure.hpp"

namespace gyrocond::scenarios {

struct CalibrationOptions {
  std::vector<double> temps_c{-40.0, 25.0, 85.0};
  double level_dps = 50.0;  // stimuli are -level, 0, +level
  double settle_s = 0.0;    // 0: 0.3 s closed loop, 1.2 s open loop
  double average_s = 1.0;
  bool ideal_converters = false;
};

struct CalibrationPoint {
  double temp_c = 0.0;
  double offset_dps = 0.0;  // raw reading at zero rate
  double gain = 1.0;        // true rate per raw unit
};

/// Trimmed compensation polynomials for one loop mode.
struct Calibration {
  dsp::LoopMode mode = dsp::LoopMode::Closed;
  dsp::CompensationPoly poly;
  std::vector<CalibrationPoint> points;

  /// comp.enable and the six polynomial registers.
  system::RegisterWrites registers() const;
  nlohmann::json to_json() const;
  static Calibration from_json(const nlohmann::json& j);
};

/// Coefficients c0 + c1 T + c2 T^2 through one, two or three points exactly.
std::array<double, 3> interpolating_poly(const std::vector<double>& ts, const std::vector<double>& ys);

/// Two-point trim (offset and gain from -level/0/+level) at each
/// temperature, then polynomials through the per-temperature trims. The raw
/// channel is read with compensation disabled.
Calibration calibrate(const model::GyroParams& params, std::uint64_t seed,
                      const system::RegisterWrites& base, const CalibrationOptions& opts = {});

struct NoiseCalibration {
  double target_dps_rthz = 0.09;
  double pickoff_noise = 0.0;
  double density_dps_rthz = 0.0;
  double duration_s = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::pair<double, double>> iterations;  // (pickoff_noise, density)

  nlohmann::json to_json() const;
};

/// Bisection on pickoff_noise with paired runs (same seed) until the zero-rate
/// density is within `rel_tol` of the target. With `trim`, every candidate is
/// calibrated at its own noise level before the density is measured.
NoiseCalibration calibrate_noise(const model::GyroParams& params, std::uint64_t seed,
                                 const system::RegisterWrites& writes, double target_dps_rthz = 0.09,
                                 double duration_s = 10.0, double rel_tol = 0.002,
                                 const std::optional<CalibrationOptions>& trim = std::nullopt);

}  // namespace gyrocond::scenarios
