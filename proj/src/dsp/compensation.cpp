#include "gyrocond/dsp/compensation.hpp"

#include <algorithm>

#include "gyrocond/error.hpp"

namespace gyrocond::dsp {

double CompensationPoly::min_gain(double t_min, double t_max) const {
  double m = std::min(gain(t_min), gain(t_max));
  if (g2 != 0.0) {
    const double vertex = -g1 / (2.0 * g2);
    if (vertex > t_min && vertex < t_max) m = std::min(m, gain(vertex));
  }
  return m;
}

double range_limit_dps(OutputRange range) {
  switch (range) {
    case OutputRange::Dps75: return 75.0;
    case OutputRange::Dps150: return 150.0;
    case OutputRange::Dps300: return 300.0;
  }
  return 75.0;
}

OutputRange range_from_code(int code) {
  if (code < 0 || code > 2) throw Error("out-of-range", "range code must be 0, 1 or 2");
  return static_cast<OutputRange>(code);
}

FormattedOutput output_format(double rate_dps, const OutputConfig& cfg) {
  const double limit = range_limit_dps(cfg.range);
  const double lo = cfg.null_v - cfg.sensitivity_v_per_dps * limit;
  const double hi = cfg.null_v + cfg.sensitivity_v_per_dps * limit;
  const double v = cfg.null_v + cfg.sensitivity_v_per_dps * rate_dps;
  FormattedOutput out;
  if (v > hi) {
    out.volts = hi;
    out.clamped = true;
  } else if (v < lo) {
    out.volts = lo;
    out.clamped = true;
  } else {
    out.volts = v;
  }
  return out;
}

}  // namespace gyrocond::dsp
