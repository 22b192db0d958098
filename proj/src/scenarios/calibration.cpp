#include "gyrocond/scenarios/calibration.hpp"

#include <array>
#include <cmath>

#include "gyrocond/analysis/fit.hpp"
#include "gyrocond/error.hpp"
#include "gyrocond/regmap/register_file.hpp"

namespace gyrocond::scenarios {

using nlohmann::json;
using system::Tap;

std::array<double, 3> interpolating_poly(const std::vector<double>& ts, const std::vector<double>& ys) {
  if (ts.size() != ys.size() || ts.empty() || ts.size() > 3) {
    throw Error("degenerate-fit", "polynomial trim needs one to three points");
  }
  // Expand the Lagrange basis into monomial coefficients.
  std::array<double, 3> c{};
  const std::size_t n = ts.size();
  for (std::size_t i = 0; i < n; ++i) {
    std::array<double, 3> basis{1.0, 0.0, 0.0};
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      if (ts[i] == ts[j]) throw Error("degenerate-fit", "calibration temperatures must be distinct");
      // basis *= (T - ts[j])
      basis = {-ts[j] * basis[0], basis[0] - ts[j] * basis[1], basis[1] - ts[j] * basis[2]};
      denom *= ts[i] - ts[j];
    }
    for (int k = 0; k < 3; ++k) c[k] += ys[i] * basis[k] / denom;
  }
  return c;
}

system::RegisterWrites Calibration::registers() const {
  using regmap::encode_f32;
  return {{"comp.enable", 1u},
          {"comp.o0", encode_f32(poly.o0)},
          {"comp.o1", encode_f32(poly.o1)},
          {"comp.o2", encode_f32(poly.o2)},
          {"comp.g0", encode_f32(poly.g0)},
          {"comp.g1", encode_f32(poly.g1)},
          {"comp.g2", encode_f32(poly.g2)}};
}

json Calibration::to_json() const {
  json pts = json::array();
  for (const auto& p : points) {
    pts.push_back({{"temp_c", p.temp_c}, {"offset_dps", p.offset_dps}, {"gain", p.gain}});
  }
  return {{"mode", mode == dsp::LoopMode::Open ? "open" : "closed"},
          {"poly",
           {{"o0", poly.o0}, {"o1", poly.o1}, {"o2", poly.o2}, {"g0", poly.g0}, {"g1", poly.g1}, {"g2", poly.g2}}},
          {"points", pts}};
}

Calibration Calibration::from_json(const json& j) {
  try {
    Calibration c;
    const std::string mode = j.at("mode").get<std::string>();
    if (mode != "open" && mode != "closed") throw Error("malformed", "calibration mode must be open or closed");
    c.mode = mode == "open" ? dsp::LoopMode::Open : dsp::LoopMode::Closed;
    const json& p = j.at("poly");
    c.poly = {p.at("o0").get<double>(), p.at("o1").get<double>(), p.at("o2").get<double>(),
              p.at("g0").get<double>(), p.at("g1").get<double>(), p.at("g2").get<double>()};
    if (j.contains("points")) {
      for (const auto& pt : j.at("points")) {
        c.points.push_back({pt.at("temp_c").get<double>(), pt.at("offset_dps").get<double>(),
                            pt.at("gain").get<double>()});
      }
    }
    return c;
  } catch (const json::exception& e) {
    throw Error("malformed", std::string("calibration file: ") + e.what());
  }
}

Calibration calibrate(const model::GyroParams& params, std::uint64_t seed, const system::RegisterWrites& base,
                      const CalibrationOptions& opts) {
  if (!(opts.level_dps > 0.0) || !(opts.average_s > 0.0)) {
    throw Error("out-of-range", "calibration level and averaging time must be positive");
  }
  Calibration cal;
  std::vector<double> temps;
  std::vector<double> offsets;
  std::vector<double> gains;
  const double span = 2.0 * opts.level_dps + 50.0;

  for (double temp : opts.temps_c) {
    DeviceSpec spec;
    spec.params = params;
    spec.seed = seed;
    spec.writes = base;
    spec.writes.emplace_back("comp.enable", 0u);
    spec.temp_c = temp;
    spec.ideal_converters = opts.ideal_converters;
    auto sup = start_device(spec);
    cal.mode = sup->kernel().device_config().chain.mode;
    const double settle = opts.settle_s > 0.0 ? opts.settle_s : (cal.mode == dsp::LoopMode::Open ? 1.2 : 0.3);

    std::vector<double> rates{-opts.level_dps, 0.0, opts.level_dps};
    std::vector<double> raw;
    for (double r : rates) {
      set_rate(*sup, r);
      sup->advance(settle);
      raw.push_back(average_output(*sup, Tap::RateFiltered, opts.average_s, -span, span));
    }
    const auto line = analysis::fit_line(rates, raw);
    if (!(std::abs(line.slope) > 0.0)) throw Error("calibration-failed", "raw channel does not respond to rate");
    CalibrationPoint p{temp, line.intercept, 1.0 / line.slope};
    cal.points.push_back(p);
    temps.push_back(temp);
    offsets.push_back(p.offset_dps);
    gains.push_back(p.gain);
  }

  const auto o = interpolating_poly(temps, offsets);
  const auto g = interpolating_poly(temps, gains);
  cal.poly = {o[0], o[1], o[2], g[0], g[1], g[2]};
  if (!cal.poly.gain_positive()) {
    throw Error("calibration-failed", "trimmed gain polynomial is not positive over -40..125 C");
  }
  return cal;
}

json NoiseCalibration::to_json() const {
  json it = json::array();
  for (const auto& [n, d] : iterations) it.push_back({{"pickoff_noise_v_rthz", n}, {"density_dps_rthz", d}});
  return {{"target_dps_rthz", target_dps_rthz},
          {"pickoff_noise_v_rthz", pickoff_noise},
          {"density_dps_rthz", density_dps_rthz},
          {"duration_s", duration_s},
          {"seed", seed},
          {"band_hz", {kNoiseBandLoHz, kNoiseBandHiHz}},
          {"iterations", it}};
}

NoiseCalibration calibrate_noise(const model::GyroParams& params, std::uint64_t seed,
                                 const system::RegisterWrites& writes, double target, double duration_s,
                                 double rel_tol, const std::optional<CalibrationOptions>& trim) {
  if (!(target > 0.0)) throw Error("out-of-range", "noise target must be positive");
  NoiseCalibration out;
  out.target_dps_rthz = target;
  out.duration_s = duration_s;
  out.seed = seed;

  auto density = [&](double noise) {
    DeviceSpec spec;
    spec.params = params;
    spec.params.pickoff_noise = noise;
    spec.seed = seed;
    spec.writes = writes;
    if (trim) {
      for (auto& w : calibrate(spec.params, seed, writes, *trim).registers()) spec.writes.push_back(w);
    }
    auto sup = start_device(spec);
    sup->advance(0.3);
    const double d = measure_noise(*sup, duration_s).density_dps_rthz;
    out.iterations.emplace_back(noise, d);
    return d;
  };

  double n0 = params.pickoff_noise > 0.0 ? params.pickoff_noise : 1e-5;
  const double d0 = density(n0);
  const double guess = n0 * target / d0;
  double lo = guess * 0.9;
  double hi = guess * 1.1;
  double d_lo = density(lo);
  while (d_lo > target) {
    hi = lo;
    lo *= 0.5;
    d_lo = density(lo);
  }
  double d_hi = density(hi);
  while (d_hi < target) {
    lo = hi;
    hi *= 2.0;
    d_hi = density(hi);
  }

  double best = std::abs(d_lo - target) < std::abs(d_hi - target) ? lo : hi;
  double best_d = best == lo ? d_lo : d_hi;
  for (int i = 0; i < 30 && std::abs(best_d - target) > rel_tol * target; ++i) {
    const double mid = std::sqrt(lo * hi);
    const double d = density(mid);
    if (std::abs(d - target) < std::abs(best_d - target)) {
      best = mid;
      best_d = d;
    }
    (d < target ? lo : hi) = mid;
  }
  out.pickoff_noise = best;
  out.density_dps_rthz = best_d;
  return out;
}

}  // namespace gyrocond::scenarios
