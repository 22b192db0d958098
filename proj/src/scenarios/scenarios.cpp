#include "gyrocond/scenarios/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "gyrocond/analysis/fit.hpp"
#include "gyrocond/error.hpp"
#include "gyrocond/system/register_set.hpp"

namespace gyrocond::scenarios {

using nlohmann::json;
using system::Supervisor;
using system::Tap;

namespace {

constexpr double kPi = std::numbers::pi;

const Bound kTurnOn{std::nullopt, 500.0, "datasheet: Turn On Time"};
const Bound kSensitivity{4.95, 5.05, "datasheet: Sensitivity"};
const Bound kNull{2.495, 2.505, "datasheet: Null (typ 2.50 V)"};
const Bound kNonLinearity{std::nullopt, 0.20, "datasheet: Non Linearity"};
const Bound kNoiseDensity{0.04, 0.13, "datasheet: Rate Noise Dens."};
const Bound kBandwidth{25.0, 75.0, "datasheet: 3 dB Bandwidth"};
const Bound kBandwidthDesign{45.0, 55.0, "design: 50 Hz bandwidth"};
const Bound kSensMin{4.80, std::nullopt, "datasheet: Sensitivity Over Temperature"};
const Bound kSensMax{std::nullopt, 5.20, "datasheet: Sensitivity Over Temperature"};

double initial_temp(const ScenarioConfig& cfg) {
  return cfg.temperature ? cfg.temperature->temp_at(0.0) : model::kReferenceTempC;
}

double initial_rate(const ScenarioConfig& cfg) { return cfg.stimulus ? cfg.stimulus->rate_at(0.0) : 0.0; }

std::optional<std::uint32_t> find_write(const system::RegisterWrites& w, const std::string& name) {
  std::optional<std::uint32_t> v;
  for (const auto& [n, raw] : w) {
    if (n == name) v = raw;
  }
  return v;
}

DeviceSpec spec_for(const PreparedDevice& dev, const ScenarioConfig& cfg) {
  DeviceSpec s;
  s.params = dev.params;
  s.seed = cfg.seed;
  s.writes = dev.writes;
  s.temp_c = initial_temp(cfg);
  s.rate_dps = initial_rate(cfg);
  s.ideal_converters = cfg.param("ideal_converters", 0.0) != 0.0;
  return s;
}

MetricsReport new_report(const std::string& name, const ScenarioConfig& cfg, const PreparedDevice* dev) {
  MetricsReport r;
  r.scenario = name;
  r.seed = cfg.seed;
  r.details["config"] = cfg.to_json();
  if (dev) {
    r.details["loop_mode"] = dev->mode == dsp::LoopMode::Open ? "open" : "closed";
    if (dev->calibration) {
      r.details["calibration"] = dev->calibration->to_json();
      r.files.push_back({"calibration.json", dev->calibration->to_json().dump(2) + "\n"});
    }
  }
  return r;
}

double settle_time(const PreparedDevice& dev, const ScenarioConfig& cfg) {
  return cfg.param("settle_s", dev.mode == dsp::LoopMode::Open ? 1.2 : 0.25);
}

double nominal_sensitivity(const PreparedDevice& dev) {
  if (auto raw = find_write(dev.writes, "out.sensitivity_v_per_dps")) return regmap::decode_f32(*raw);
  return dsp::OutputConfig{}.sensitivity_v_per_dps;
}

double to_db(double ratio) { return 20.0 * std::log10(ratio); }

}  // namespace

PreparedDevice prepare(const ScenarioConfig& cfg, std::optional<dsp::LoopMode> mode) {
  PreparedDevice dev;
  dev.params = cfg.gyro_params();
  dev.writes = cfg.register_writes();
  if (mode) dev.writes.emplace_back("loop.mode", static_cast<std::uint32_t>(*mode));
  if (auto m = find_write(dev.writes, "loop.mode")) {
    dev.mode = *m == 0 ? dsp::LoopMode::Open : dsp::LoopMode::Closed;
  }

  if (cfg.calibration_file && !mode) {
    std::ifstream in(*cfg.calibration_file);
    if (!in) throw Error("io", "cannot read calibration file " + *cfg.calibration_file);
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error("malformed", "calibration file is not valid JSON");
    if (j.contains("calibration")) j = j.at("calibration");
    dev.calibration = Calibration::from_json(j);
    if (dev.calibration->mode != dev.mode) {
      throw Error("malformed", "calibration file was made for the other loop mode");
    }
  } else if (cfg.calibrate) {
    CalibrationOptions opts;
    opts.temps_c = cfg.param_list("calibration_temps_c", opts.temps_c);
    opts.ideal_converters = cfg.param("ideal_converters", 0.0) != 0.0;
    dev.calibration = calibrate(dev.params, cfg.seed, dev.writes, opts);
  }
  if (dev.calibration) {
    for (auto& w : dev.calibration->registers()) dev.writes.push_back(w);
  }
  return dev;
}

MetricsReport run_lock(const ScenarioConfig& cfg) {
  const PreparedDevice dev = prepare(cfg);
  MetricsReport r = new_report("lock", cfg, &dev);
  const DeviceSpec spec = spec_for(dev, cfg);

  system::SupervisorOptions opts;
  opts.config = spec.writes;
  Supervisor sup(spec.params, spec.seed, opts);
  sup.kernel().front_end().set_ideal(spec.ideal_converters);
  sup.set_environment(model::AngularRate::deg_per_s(spec.rate_dps), spec.temp_c);
  const double f_nom = system::default_device_config().chain.pll.f_nominal;

  system::CaptureRequest req;
  req.tap = Tap::NcoFw;
  req.count = 500;
  req.decimation = 250;
  req.lo = f_nom - 1000.0;
  req.hi = f_nom + 1000.0;
  sup.start_capture(req);
  const bool ready = sup.run_startup(cfg.param("max_startup_s", 3.0));
  const auto startup_trace = sup.complete_capture();
  r.files.push_back({"lock_trace.csv", trace_csv(startup_trace)});

  const auto& st = sup.status();
  r.details["status"] = st.to_json();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!ready) {
    r.details["fault"] = {{"phase", system::phase_name(st.fault_phase)}, {"message", st.fault_message}};
  }
  r.add("lock_time_ms", st.lock_time_ms.value_or(nan), "ms");
  r.add("settle_time_ms", st.settle_time_ms.value_or(nan), "ms");
  r.add("turn_on_time_ms", st.turn_on_time_ms.value_or(nan), "ms", kTurnOn);

  double f_meas = nan;
  if (ready) f_meas = mean_nco_frequency(sup, cfg.param("frequency_average_s", 0.1), f_nom);
  const double f_res = model::effective_resonance(dev.params.f1, dev.params.tc_f, spec.temp_c);
  r.add("locked_frequency_hz", f_meas, "Hz");
  r.add("resonance_frequency_hz", f_res, "Hz");
  r.add("freq_error_ppm", std::abs(f_meas - f_res) / f_res * 1e6, "ppm",
        Bound{std::nullopt, cfg.param("freq_error_bound_ppm", 100.0), "design: PLL tracks the resonance"});
  return r;
}

MetricsReport run_linearity(const ScenarioConfig& cfg) {
  PreparedDevice dev = prepare(cfg);
  // Widest output range so the end points of the sweep never clamp.
  dev.writes.emplace_back("out.range", 2u);
  MetricsReport r = new_report("linearity", cfg, &dev);

  const double range = cfg.param("range_dps", 75.0);
  const int n = static_cast<int>(cfg.param("points", 11));
  const double dwell = cfg.param("dwell_s", 2.0);
  const double settle = settle_time(dev, cfg);
  if (!(range > 0.0) || n < 3 || !(dwell > 0.0) || dwell * 1000.0 > system::kCaptureCapacity) {
    throw Error("out-of-range", "linearity needs range > 0, at least 3 points and 0 < dwell <= 32 s");
  }
  auto sup = start_device(spec_for(dev, cfg));
  require_ready(*sup);

  const double sens_nom = nominal_sensitivity(dev);
  const double null_v = dsp::OutputConfig{}.null_v;
  const double half = sens_nom * range * 1.3 + 0.05;
  std::vector<double> rates;
  std::vector<double> volts;
  for (int i = 0; i < n; ++i) {
    const double rate = -range + 2.0 * range * i / (n - 1);
    set_rate(*sup, rate);
    sup->advance(settle);
    rates.push_back(rate);
    volts.push_back(average_output(*sup, Tap::OutputVolts, dwell, null_v - half, null_v + half));
  }
  const auto fit = analysis::fit_line(rates, volts);
  const double fs_v = range * sens_nom;

  std::vector<std::vector<double>> rows;
  for (int i = 0; i < n; ++i) {
    rows.push_back({rates[i], volts[i], volts[i] - (fit.intercept + fit.slope * rates[i])});
  }
  r.files.push_back({"linearity.csv", table_csv({"rate_dps", "mean_v", "residual_v"}, rows)});
  r.details["full_scale_dps"] = range;
  r.details["full_scale_v"] = fs_v;
  r.add("sensitivity_mv_per_dps", fit.slope * 1e3, "mV/dps", kSensitivity);
  r.add("null_v", fit.intercept, "V", kNull);
  r.add("nonlinearity_pct_fs", fit.max_abs_residual / fs_v * 100.0, "%FS", kNonLinearity);
  r.add("max_residual_v", fit.max_abs_residual, "V");
  return r;
}

MetricsReport run_noise(const ScenarioConfig& cfg) {
  const PreparedDevice dev = prepare(cfg);
  MetricsReport r = new_report("noise", cfg, &dev);
  const double duration = cfg.duration_s.value_or(cfg.param("duration_s", 20.0));
  if (!(duration >= 5.0)) throw Error("out-of-range", "noise duration must be at least 5 s");

  DeviceSpec spec = spec_for(dev, cfg);
  spec.rate_dps = 0.0;
  auto sup = start_device(spec);
  require_ready(*sup);
  sup->advance(cfg.param("settle_s", 0.3));
  const NoiseMeasurement m = measure_noise(*sup, duration);

  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < m.psd.freqs.size(); ++k) rows.push_back({m.psd.freqs[k], m.psd.density[k]});
  r.files.push_back({"noise_trace.csv", trace_csv(m.trace)});
  r.files.push_back({"psd.csv", table_csv({"freq_hz", "psd_dps2_per_hz"}, rows)});
  r.details["band_hz"] = {kNoiseBandLoHz, kNoiseBandHiHz};
  r.details["segment_len"] = kNoiseSegment;
  r.details["segments"] = m.psd.segments;
  r.add("rate_noise_density_dps_rthz", m.density_dps_rthz, "dps/rtHz", kNoiseDensity);
  r.add("mean_rate_dps", m.mean_dps, "dps");
  r.add("duration_s", duration, "s");
  return r;
}

MetricsReport run_bandwidth(const ScenarioConfig& cfg) {
  auto freqs = cfg.param_list("freqs_hz", {1, 10, 20, 30, 40, 45, 50, 55, 60, 70, 80, 100, 150, 200});
  for (double f : freqs) {
    if (!(f > 0.0 && f < 500.0)) throw Error("out-of-range", "bandwidth frequencies must lie in (0, 500) Hz");
  }
  std::sort(freqs.begin(), freqs.end());
  const PreparedDevice dev = prepare(cfg);
  MetricsReport r = new_report("bandwidth", cfg, &dev);
  const double amp = cfg.param("amplitude_dps", 20.0);
  const double settle = cfg.param("settle_s", 0.3);
  const double min_record = cfg.param("min_record_s", 2.0);
  if (!(amp > 0.0)) throw Error("out-of-range", "amplitude must be positive");

  auto sup = start_device(spec_for(dev, cfg));
  require_ready(*sup);
  const double fs = system::tap_info(Tap::RateCompensated).native_rate_hz;

  std::vector<std::vector<double>> rows;
  std::vector<double> response_db;
  json points = json::array();
  for (double f : freqs) {
    const double t_start = sup->time_s();
    sup->set_stimulus([amp, f, t_start](Supervisor& s, double t) {
      set_rate(s, amp * std::sin(2.0 * kPi * f * (t - t_start)));
    });
    sup->advance(settle);
    const double record_s = std::max(min_record, 5.0 / f);
    const int count = std::min(system::kCaptureCapacity, static_cast<int>(std::lround(record_s * fs)));
    const double t_cap = sup->time_s();
    const auto v = record(*sup, Tap::RateCompensated, count, -amp * 1.5 - 10.0, amp * 1.5 + 10.0);
    sup->clear_stimulus();
    set_rate(*sup, 0.0);
    const auto tone = analysis::fit_tone(v, fs, f, t_cap - t_start);
    const double db = to_db(tone.amplitude / amp);
    const double phase_deg = tone.phase * 180.0 / kPi;
    response_db.push_back(db);
    rows.push_back({f, db, phase_deg});
    points.push_back({{"freq_hz", f}, {"response_db", db}, {"phase_deg", phase_deg}});
    sup->advance(0.1);
  }

  double f3db = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t k = 0; k < freqs.size(); ++k) {
    if (response_db[k] < -3.0) {
      if (k > 0) {
        const double a = response_db[k - 1];
        const double b = response_db[k];
        f3db = freqs[k - 1] + (freqs[k] - freqs[k - 1]) * (-3.0 - a) / (b - a);
      }
      break;
    }
  }
  r.files.push_back({"response.csv", table_csv({"freq_hz", "response_db", "phase_deg"}, rows)});
  r.details["points"] = points;
  r.add("f3db_hz", f3db, "Hz", kBandwidth);
  r.add("f3db_vs_design_hz", f3db, "Hz", kBandwidthDesign);
  r.add("passband_db", response_db.front(), "dB",
        freqs.front() <= 5.0 ? std::optional<Bound>(Bound{-0.1, 0.1, "design: passband gain"}) : std::nullopt);
  return r;
}

MetricsReport run_temp_sweep(const ScenarioConfig& cfg) {
  const PreparedDevice dev = prepare(cfg);
  MetricsReport r = new_report("temp_sweep", cfg, &dev);
  const double t_min = cfg.param("t_min", -40.0);
  const double t_max = cfg.param("t_max", 85.0);
  const double t_step = cfg.param("t_step", 25.0);
  const double level = cfg.param("level_dps", 50.0);
  const double average = cfg.param("average_s", 0.5);
  const double settle = settle_time(dev, cfg);
  const bool compare = cfg.param("compare_uncompensated", 1.0) != 0.0;
  if (!(t_step > 0.0) || !(t_max >= t_min) || t_min < model::kMinTempC || t_max > model::kMaxTempC) {
    throw Error("out-of-range", "temperature sweep needs t_step > 0 and -55 <= t_min <= t_max <= 150");
  }
  std::vector<double> temps;
  for (int i = 0;; ++i) {
    const double t = t_min + i * t_step;
    if (t > t_max + 1e-9) break;
    temps.push_back(t);
  }

  const double sens_nom = nominal_sensitivity(dev);
  const double null_nom = dsp::OutputConfig{}.null_v;
  const double half = sens_nom * level * 1.3 + 0.05;

  struct Sweep {
    std::vector<double> sens;
    std::vector<double> nulls;
    int failures = 0;
    json points = json::array();
  };
  auto sweep = [&](bool compensated) {
    Sweep s;
    for (double t : temps) {
      DeviceSpec spec = spec_for(dev, cfg);
      if (!compensated) spec.writes.emplace_back("comp.enable", 0u);
      spec.temp_c = t;
      spec.rate_dps = 0.0;
      try {
        auto sup = start_device(spec);
        sup->advance(settle);
        const double v0 = average_output(*sup, Tap::OutputVolts, average, null_nom - half, null_nom + half);
        set_rate(*sup, level);
        sup->advance(settle);
        const double vp = average_output(*sup, Tap::OutputVolts, average, null_nom - half, null_nom + half);
        set_rate(*sup, -level);
        sup->advance(settle);
        const double vm = average_output(*sup, Tap::OutputVolts, average, null_nom - half, null_nom + half);
        const double sens = (vp - vm) / (2.0 * level) * 1e3;
        s.sens.push_back(sens);
        s.nulls.push_back(v0);
        s.points.push_back({{"temp_c", t}, {"null_v", v0}, {"sensitivity_mv_per_dps", sens}});
      } catch (const Error& e) {
        ++s.failures;
        s.points.push_back({{"temp_c", t}, {"error", e.what()}});
      }
    }
    return s;
  };
  auto spread = [](const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  auto extreme = [](const std::vector<double>& v, bool want_max) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return want_max ? *std::max_element(v.begin(), v.end()) : *std::min_element(v.begin(), v.end());
  };

  const Sweep comp = sweep(true);
  r.details["points"] = comp.points;
  r.add("sensitivity_min_mv_per_dps", extreme(comp.sens, false), "mV/dps", kSensMin);
  r.add("sensitivity_max_mv_per_dps", extreme(comp.sens, true), "mV/dps", kSensMax);
  r.add("sensitivity_drift_mv_per_dps", spread(comp.sens), "mV/dps");
  r.add("null_drift_v", spread(comp.nulls), "V");
  r.add("failed_points", comp.failures, "count", Bound{std::nullopt, 0.0, "design: ready at every temperature"});

  std::vector<std::vector<double>> table;
  std::size_t ci = 0;
  for (const auto& p : comp.points) {
    if (p.contains("error")) continue;
    table.push_back({p.at("temp_c").get<double>(), comp.nulls[ci], comp.sens[ci]});
    ++ci;
  }
  r.files.push_back({"temp_sweep.csv", table_csv({"temp_c", "null_v", "sensitivity_mv_per_dps"}, table)});

  if (compare) {
    const Sweep raw = sweep(false);
    r.details["uncompensated_points"] = raw.points;
    r.add("uncompensated_sensitivity_drift_mv_per_dps", spread(raw.sens), "mV/dps");
    r.add("uncompensated_null_drift_v", spread(raw.nulls), "V");
  }
  return r;
}

MetricsReport run_closed_loop(const ScenarioConfig& cfg) {
  const double rate = cfg.param("rate_dps", 50.0);
  const double average = cfg.param("average_s", 1.0);
  if (rate == 0.0) throw Error("out-of-range", "closed-loop comparison needs a non-zero rate");
  MetricsReport r;
  r.scenario = "closed_loop";
  r.seed = cfg.seed;
  r.details["config"] = cfg.to_json();

  struct Result {
    double x2_amp = 0.0;
    double rate = 0.0;
  };
  auto run_mode = [&](dsp::LoopMode mode, const char* tag) {
    const PreparedDevice dev = prepare(cfg, mode);
    if (dev.calibration) r.details[std::string("calibration_") + tag] = dev.calibration->to_json();
    DeviceSpec spec = spec_for(dev, cfg);
    spec.rate_dps = 0.0;
    auto sup = start_device(spec);
    set_rate(*sup, rate);
    sup->advance(mode == dsp::LoopMode::Open ? 1.2 : 0.3);
    const double f = mean_nco_frequency(*sup, 0.02, dev.params.f1);
    // Expected open-loop amplitude sets the capture range.
    const double x1 = dsp::AgcConfig{}.setpoint_v / dev.params.g_pickoff;
    const double w = 2.0 * kPi * dev.params.f1;
    const double q2 = std::isfinite(dev.params.q2) ? dev.params.q2 : 1e6;
    const double span = 2.0 * 2.0 * dev.params.kappa * std::abs(rate) * kPi / 180.0 * x1 * q2 / w + 1e-9;
    const auto x2 = record(*sup, Tap::X2, 16'384, -span, span);
    const auto tone = analysis::fit_tone(x2, system::kPhysicsRate, f);
    Result res;
    res.x2_amp = tone.amplitude;
    res.rate = average_output(*sup, Tap::RateCompensated, average, -std::abs(rate) * 2 - 20, std::abs(rate) * 2 + 20);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < x2.size(); i += 4) rows.push_back({static_cast<double>(i) / system::kPhysicsRate, x2[i]});
    r.files.push_back({std::string("x2_") + tag + ".csv", table_csv({"t_s", "x2_m"}, rows)});
    return res;
  };
  const Result open = run_mode(dsp::LoopMode::Open, "open");
  const Result closed = run_mode(dsp::LoopMode::Closed, "closed");

  r.add("x2_amplitude_open_m", open.x2_amp, "m");
  r.add("x2_amplitude_closed_m", closed.x2_amp, "m");
  r.add("suppression_db", to_db(open.x2_amp / closed.x2_amp), "dB",
        Bound{40.0, std::nullopt, "design: secondary vibration compensated"});
  r.add("rate_open_dps", open.rate, "dps");
  r.add("rate_closed_dps", closed.rate, "dps");
  r.add("rate_agreement_pct", std::abs(open.rate - closed.rate) / std::abs(rate) * 100.0, "%",
        Bound{std::nullopt, 1.0, "design: open and closed loop readouts agree"});
  return r;
}

MetricsReport run_calibrate(const ScenarioConfig& cfg) {
  ScenarioConfig c = cfg;
  c.calibration_file.reset();
  c.calibrate = true;
  const PreparedDevice dev = prepare(c);
  MetricsReport r = new_report("calibrate", cfg, &dev);
  const auto& p = dev.calibration->poly;
  r.add("o0", p.o0, "dps");
  r.add("o1", p.o1, "dps/C");
  r.add("o2", p.o2, "dps/C^2");
  r.add("g0", p.g0, "");
  r.add("g1", p.g1, "1/C");
  r.add("g2", p.g2, "1/C^2");

  const double level = cfg.param("verify_dps", 50.0);
  DeviceSpec spec = spec_for(dev, cfg);
  spec.temp_c = model::kReferenceTempC;
  spec.rate_dps = 0.0;
  auto sup = start_device(spec);
  set_rate(*sup, level);
  sup->advance(settle_time(dev, cfg));
  const double reading = average_output(*sup, Tap::RateCompensated, 1.0, -2 * level - 20, 2 * level + 20);
  r.add("verify_reading_dps", reading, "dps", Bound{level - 0.1, level + 0.1, "design: two-point calibration"});
  return r;
}

MetricsReport run_noise_calibration(const ScenarioConfig& cfg) {
  ScenarioConfig base = cfg;
  base.calibrate = false;
  base.calibration_file.reset();
  const PreparedDevice dev = prepare(base);
  CalibrationOptions trim;
  trim.temps_c = cfg.param_list("calibration_temps_c", {model::kReferenceTempC});
  MetricsReport r = new_report("noise_calibration", cfg, &dev);
  const double target = cfg.param("target_dps_rthz", 0.09);
  const double duration = cfg.duration_s.value_or(cfg.param("duration_s", 10.0));
  const double rel_tol = cfg.param("rel_tol", 0.002);
  const NoiseCalibration nc = calibrate_noise(dev.params, cfg.seed, dev.writes, target, duration, rel_tol, trim);
  r.details["noise_calibration"] = nc.to_json();
  r.files.push_back({"noise_calibration.json", nc.to_json().dump(2) + "\n"});
  r.add("pickoff_noise_v_rthz", nc.pickoff_noise, "V/rtHz");
  r.add("rate_noise_density_dps_rthz", nc.density_dps_rthz, "dps/rtHz",
        Bound{target * 0.99, target * 1.01, "datasheet: Rate Noise Dens. (typ)"});
  r.add("iterations", static_cast<double>(nc.iterations.size()), "count");
  return r;
}

MetricsReport run_trace(const ScenarioConfig& cfg) {
  const PreparedDevice dev = prepare(cfg);
  MetricsReport r = new_report("trace", cfg, &dev);
  std::string tap_name = "output_volts";
  if (cfg.params.contains("tap")) {
    if (!cfg.params.at("tap").is_string()) throw Error("malformed", "param 'tap' must be a string");
    tap_name = cfg.params.at("tap").get<std::string>();
  }
  const Tap tap = system::tap_from_name(tap_name);
  const int dec = static_cast<int>(cfg.param("decimation", 1));
  const double duration = cfg.duration_s.value_or(1.0);
  const auto& info = system::tap_info(tap);
  const double count = std::floor(duration * info.native_rate_hz / std::max(dec, 1));
  if (count < 1 || count > system::kCaptureCapacity) {
    throw Error("out-of-range", "trace duration gives a sample count outside 1..32768");
  }

  auto sup = start_device(spec_for(dev, cfg));
  const double t0 = sup->time_s();
  const auto stim = cfg.stimulus;
  const auto temp = cfg.temperature;
  sup->set_stimulus([stim, temp, t0](Supervisor& s, double t) {
    const double rel = t - t0;
    const double rate = stim ? stim->rate_at(rel) : 0.0;
    const double tc = temp ? temp->temp_at(rel) : s.kernel().model().state().temp;
    s.set_environment(model::AngularRate::deg_per_s(rate), tc);
  });
  system::CaptureRequest req;
  req.tap = tap;
  req.count = static_cast<int>(count);
  req.decimation = dec;
  if (cfg.params.contains("lo") || cfg.params.contains("hi")) {
    req.lo = cfg.param("lo", info.lo);
    req.hi = cfg.param("hi", info.hi);
  }
  const auto trace = sup->capture(req);
  sup->clear_stimulus();
  const auto v = trace.values();
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double m = analysis::mean(v);
  double var = 0.0;
  for (double x : v) var += (x - m) * (x - m);
  r.files.push_back({"trace.csv", trace_csv(trace)});
  r.details["status"] = sup->status().to_json();
  r.add("mean", m, info.unit);
  r.add("min", *lo, info.unit);
  r.add("max", *hi, info.unit);
  r.add("std", std::sqrt(var / v.size()), info.unit);
  r.add("samples", static_cast<double>(v.size()), "count");
  return r;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"lock",        "linearity", "noise",
                                              "bandwidth",   "temp_sweep", "closed_loop",
                                              "calibrate",   "noise_calibration", "trace"};
  return names;
}

MetricsReport run_scenario(const std::string& name, const ScenarioConfig& cfg) {
  const std::string n = name.empty() ? cfg.scenario : name;
  if (n == "lock") return run_lock(cfg);
  if (n == "linearity") return run_linearity(cfg);
  if (n == "noise") return run_noise(cfg);
  if (n == "bandwidth") return run_bandwidth(cfg);
  if (n == "temp_sweep") return run_temp_sweep(cfg);
  if (n == "closed_loop") return run_closed_loop(cfg);
  if (n == "calibrate") return run_calibrate(cfg);
  if (n == "noise_calibration") return run_noise_calibration(cfg);
  if (n == "trace") return run_trace(cfg);
  throw Error("unknown-scenario", "unknown scenario '" + n + "'");
}

}  // namespace gyrocond::scenarios
