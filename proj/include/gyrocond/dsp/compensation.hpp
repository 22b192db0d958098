#pragma once

#include <array>

namespace gyrocond::dsp {

/// offset(T) = o0 + o1 T + o2 T^2 (deg/s), gain(T) = g0 + g1 T + g2 T^2.
struct CompensationPoly {
  double o0 = 0.0, o1 = 0.0, o2 = 0.0;
  double g0 = 1.0, g1 = 0.0, g2 = 0.0;

  double offset(double temp_c) const { return o0 + (o1 + o2 * temp_c) * temp_c; }
  double gain(double temp_c) const { return g0 + (g1 + g2 * temp_c) * temp_c; }

  /// Smallest gain over [t_min, t_max], checking the endpoints and the
  /// vertex when it lies inside.
  double min_gain(double t_min = -40.0, double t_max = 125.0) const;
  bool gain_positive(double t_min = -40.0, double t_max = 125.0) const {
    return min_gain(t_min, t_max) > 0.0;
  }

  static CompensationPoly identity() { return {}; }
};

/// rate = (raw - offset(T)) * gain(T)
inline double compensate(double raw, double temp_c, const CompensationPoly& poly) {
  return (raw - poly.offset(temp_c)) * poly.gain(temp_c);
}

enum class OutputRange : int { Dps75 = 0, Dps150 = 1, Dps300 = 2 };

double range_limit_dps(OutputRange range);
/// Throws out-of-range for codes other than 0, 1, 2.
OutputRange range_from_code(int code);

struct OutputConfig {
  OutputRange range = OutputRange::Dps75;
  double sensitivity_v_per_dps = 0.005;
  double null_v = 2.5;
};

struct FormattedOutput {
  double volts = 0.0;
  bool clamped = false;
};

/// volts = null + sensitivity * rate, clamped to the range endpoints.
FormattedOutput output_format(double rate_dps, const OutputConfig& cfg);

}  // namespace gyrocond::dsp
