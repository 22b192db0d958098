#include "gyrocond/system/register_set.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace gyrocond::system {

using regmap::Access;
using regmap::decode_f32;
using regmap::encode_f32;
using regmap::FieldValidator;
using regmap::Kind;
using regmap::RegisterDescriptor;

namespace {

constexpr double kPi = std::numbers::pi;

double aa_coefficient(double corner_hz) { return 1.0 - std::exp(-2.0 * kPi * corner_hz / kPhysicsRate); }

double aa_magnitude(double f_hz, double corner_hz) {
  const double a = aa_coefficient(corner_hz);
  const double w = 2.0 * kPi * f_hz / kPhysicsRate;
  const double r = 1.0 - a;
  return a / std::hypot(1.0 - r * std::cos(w), r * std::sin(w));
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Real-valued register: finite and inside (lo, hi) or [lo, hi].
FieldValidator real_in(double lo, double hi, bool lo_open = false) {
  return [=](std::uint32_t raw) -> std::optional<std::string> {
    const double v = decode_f32(raw);
    if (!std::isfinite(v)) return "value must be finite";
    if (lo_open ? !(v > lo) : !(v >= lo)) {
      return std::string("value must be ") + (lo_open ? "> " : ">= ") + fmt(lo);
    }
    if (!(v <= hi)) return "value must be <= " + fmt(hi);
    return std::nullopt;
  };
}

FieldValidator uint_in(std::uint32_t lo, std::uint32_t hi) {
  return [=](std::uint32_t v) -> std::optional<std::string> {
    if (v < lo || v > hi) return "value must lie in " + std::to_string(lo) + ".." + std::to_string(hi);
    return std::nullopt;
  };
}

RegisterDescriptor reg_uint(std::string name, std::uint32_t addr, int width, std::uint32_t reset,
                            std::string desc, FieldValidator v = {}, std::string unit = "") {
  return {std::move(name), addr, width, Access::RW, reset, std::move(desc), Kind::Unsigned,
          std::move(unit), std::move(v)};
}

RegisterDescriptor reg_bool(std::string name, std::uint32_t addr, bool reset, std::string desc) {
  return {std::move(name), addr, 1, Access::RW, reset ? 1u : 0u, std::move(desc), Kind::Bool, "", {}};
}

RegisterDescriptor reg_real(std::string name, std::uint32_t addr, double reset, std::string unit,
                            std::string desc, FieldValidator v) {
  return {std::move(name), addr, 32, Access::RW, encode_f32(reset), std::move(desc), Kind::Float,
          std::move(unit), std::move(v)};
}

RegisterDescriptor reg_ro(std::string name, std::uint32_t addr, int width, Kind kind,
                          std::string unit, std::string desc) {
  return {std::move(name), addr, width, Access::RO, 0, std::move(desc), kind, std::move(unit), {}};
}

}  // namespace

RateScales nominal_rate_scales(const model::GyroParams& p, double setpoint_v, double aa_corner_hz) {
  const double w = 2.0 * kPi * p.f1;
  const double deg = 180.0 / kPi;
  const double x = kPi * p.f1 / kFastRate;
  const double hold_gain = std::sin(x) / x;
  const double aa = aa_magnitude(p.f1, aa_corner_hz);
  RateScales s;
  s.open_dps_per_v = w / (2.0 * p.kappa * p.q2 * setpoint_v * aa) * deg;
  s.closed_dps_per_v = p.g_drive * hold_gain * p.g_pickoff / (2.0 * p.kappa * p.mass * w * setpoint_v) * deg;
  return s;
}

double default_phase_trim(const model::GyroParams& p) {
  return dsp::nominal_phase_trim(p.f1, kFastRate, kPhysicsRate, aa_coefficient(kFastRate / 4.0));
}

DeviceConfig default_device_config(const model::GyroParams& nominal) {
  DeviceConfig c;
  c.chain.fs_fast = kFastRate;
  c.chain.pll.fs = kFastRate;
  c.chain.agc.fs = kFastRate;
  c.chain.phase_trim_rad = default_phase_trim(nominal);
  c.chain.agc.carrier_gain = aa_magnitude(nominal.f1, kFastRate / 4.0);
  const RateScales s = nominal_rate_scales(nominal, c.chain.agc.setpoint_v);
  c.chain.scale_open_dps_per_v = s.open_dps_per_v;
  c.chain.scale_closed_dps_per_v = s.closed_dps_per_v;
  return c;
}

regmap::RegisterFile make_register_file(const model::GyroParams& nominal) {
  const DeviceConfig d = default_device_config(nominal);
  const auto& ch = d.chain;
  const double nyq = kFastRate / 2.0;
  std::vector<RegisterDescriptor> r;

  // AFE
  r.push_back(reg_uint("afe.pga_primary", 0x00, 3, 0, "primary PGA gain code, gain = 2^code"));
  r.push_back(reg_uint("afe.pga_secondary", 0x01, 3, 5, "secondary PGA gain code, gain = 2^code"));
  r.push_back(reg_uint("afe.adc_bits", 0x02, 5, 12, "ADC resolution", uint_in(8, 16), "bit"));
  r.push_back(reg_uint("afe.drive_dac_bits", 0x03, 5, 12, "drive DAC resolution", uint_in(8, 16), "bit"));
  r.push_back(
      reg_uint("afe.control_dac_bits", 0x04, 5, 16, "control DAC resolution", uint_in(8, 16), "bit"));
  r.push_back(reg_bool("afe.drive_enable", 0x05, true, "drive DAC enable"));
  r.push_back(reg_bool("afe.control_enable", 0x06, true, "control DAC enable"));
  r.push_back(reg_ro("afe.clip_flags", 0x07, 5, Kind::Unsigned, "",
                     "sticky clip flags: adc_p, adc_s, pga_p, pga_s, dac"));

  // PLL
  r.push_back(reg_bool("pll.enable", 0x10, false, "PLL loop enable"));
  r.push_back(reg_real("pll.f_nominal_hz", 0x11, ch.pll.f_nominal, "Hz", "NCO centre frequency",
                       real_in(0.0, nyq, true)));
  r.push_back(reg_real("pll.pd_corner_hz", 0x12, ch.pll.pd_corner_hz, "Hz",
                       "phase detector low-pass corner", real_in(0.0, nyq, true)));
  r.push_back(reg_real("pll.kp", 0x13, ch.pll.kp, "Hz/rad", "loop filter proportional gain",
                       real_in(0.0, 1e6)));
  r.push_back(reg_real("pll.ki", 0x14, ch.pll.ki, "Hz/rad/sample", "loop filter integral gain",
                       real_in(0.0, 1e6)));
  r.push_back(reg_real("pll.lock_threshold_rad", 0x15, ch.pll.lock_threshold_rad, "rad",
                       "lock threshold", real_in(0.0, kPi, true)));
  r.push_back(reg_uint("pll.lock_dwell_ms", 0x16, 8, 10, "lock dwell", uint_in(1, 255), "ms"));
  r.push_back(reg_real("pll.phase_trim_rad", 0x17, ch.phase_trim_rad, "rad",
                       "drive/rebalance carrier phase advance", real_in(-kPi, kPi)));
  r.push_back(reg_real("pll.pull_range_hz", 0x18, ch.pll.pull_range_hz, "Hz",
                       "loop filter output clamp", real_in(0.0, nyq, true)));
  r.push_back(reg_ro("pll.fw", 0x19, 32, Kind::Unsigned, "", "NCO frequency word"));

  // AGC
  r.push_back(reg_bool("agc.enable", 0x20, false, "AGC loop enable"));
  r.push_back(reg_real("agc.setpoint_v", 0x21, ch.agc.setpoint_v, "V", "primary pickoff amplitude",
                       real_in(0.0, 2.5, true)));
  r.push_back(reg_real("agc.kp", 0x22, ch.agc.kp, "V/V", "proportional gain", real_in(0.0, 1e6)));
  r.push_back(reg_real("agc.ki", 0x23, ch.agc.ki, "V/V/sample", "integral gain", real_in(0.0, 1e6)));
  r.push_back(reg_real("agc.corner_hz", 0x24, ch.agc.corner_hz, "Hz", "amplitude estimate corner",
                       real_in(0.0, nyq, true)));
  r.push_back(reg_real("agc.startup_drive_v", 0x25, ch.agc.startup_drive_v, "V",
                       "drive amplitude before AGC enable", real_in(-2.5, 2.5)));
  r.push_back(reg_real("agc.drive_limit_v", 0x26, ch.agc.drive_limit_v, "V", "drive amplitude clamp",
                       real_in(0.0, 2.5, true)));
  r.push_back(reg_ro("agc.amplitude_v", 0x27, 32, Kind::Float, "V", "amplitude estimate"));
  r.push_back(reg_real("agc.carrier_gain", 0x28, ch.agc.carrier_gain, "V/V",
                       "front-end gain at the carrier", real_in(0.0, 2.0, true)));

  // Loop mode and rebalance
  r.push_back(reg_uint("loop.mode", 0x30, 1, 1, "0 open loop, 1 closed loop"));
  r.push_back(reg_bool("rebal.enable", 0x31, false, "rebalance loop enable"));
  r.push_back(reg_real("rebal.kp", 0x32, ch.rebal.kp, "V/V", "proportional gain", real_in(0.0, 1e6)));
  r.push_back(reg_real("rebal.ki", 0x33, ch.rebal.ki, "V/V/sample", "integral gain", real_in(0.0, 1e6)));
  r.push_back(reg_real("rebal.limit_v", 0x34, ch.rebal.limit_v, "V", "command clamp",
                       real_in(0.0, 2.5, true)));

  // Rate path
  r.push_back(reg_real("rate.scale_open", 0x38, ch.scale_open_dps_per_v, "dps/V",
                       "open-loop readout scale", real_in(-1e7, 1e7)));
  r.push_back(reg_real("rate.scale_closed", 0x39, ch.scale_closed_dps_per_v, "dps/V",
                       "closed-loop readout scale", real_in(-1e7, 1e7)));
  r.push_back(reg_real("filt.channel_corner_hz", 0x3A, ch.channel_corner_hz, "Hz",
                       "output channel filter corner", real_in(0.0, 450.0, true)));

  // Compensation
  r.push_back(reg_bool("comp.enable", 0x40, true, "temperature compensation enable"));
  r.push_back(reg_real("comp.o0", 0x41, 0.0, "dps", "offset constant", real_in(-1e4, 1e4)));
  r.push_back(reg_real("comp.o1", 0x42, 0.0, "dps/C", "offset linear", real_in(-1e4, 1e4)));
  r.push_back(reg_real("comp.o2", 0x43, 0.0, "dps/C^2", "offset quadratic", real_in(-1e4, 1e4)));
  r.push_back(reg_real("comp.g0", 0x44, 1.0, "", "gain constant", real_in(-1e4, 1e4)));
  r.push_back(reg_real("comp.g1", 0x45, 0.0, "1/C", "gain linear", real_in(-1e4, 1e4)));
  r.push_back(reg_real("comp.g2", 0x46, 0.0, "1/C^2", "gain quadratic", real_in(-1e4, 1e4)));

  // Output
  r.push_back(reg_uint("out.range", 0x50, 2, 0, "0 +/-75, 1 +/-150, 2 +/-300 dps", uint_in(0, 2)));
  r.push_back(reg_real("out.sensitivity_v_per_dps", 0x51, 0.005, "V/dps", "output scale",
                       real_in(0.0, 1.0, true)));
  r.push_back(reg_real("out.null_v", 0x52, 2.5, "V", "output at zero rate", real_in(0.0, 5.0)));

  r.push_back(reg_ro("temp.reading_c", 0x58, 32, Kind::Float, "C", "die temperature"));

  // Supervisor
  r.push_back(reg_uint("sup.watchdog_timeout_ms", 0x60, 16, 100, "watchdog timeout", uint_in(1, 65535),
                       "ms"));
  r.push_back(reg_bool("sup.watchdog_enable", 0x61, true, "watchdog enable"));

  // Status
  r.push_back(reg_ro("status.flags", 0x70, 8, Kind::Unsigned, "",
                     "locked, settled, nulled, config_fault, clip_fault, watchdog, ready, out_clamped"));
  r.push_back(reg_ro("status.turn_on_ms", 0x71, 16, Kind::Unsigned, "ms", "time from reset to ready"));
  r.push_back(reg_ro("status.fault_phase", 0x72, 3, Kind::Unsigned, "",
                     "0 none, 1 config, 2 wait-lock, 3 settle, 4 null"));

  regmap::RegisterFile file(std::move(r));
  file.add_set_validator("comp", [](const regmap::ImageView& v) -> std::optional<std::string> {
    dsp::CompensationPoly p{v.real("comp.o0"), v.real("comp.o1"), v.real("comp.o2"),
                            v.real("comp.g0"), v.real("comp.g1"), v.real("comp.g2")};
    if (!p.gain_positive()) return "gain(T) must stay positive over -40..125 C";
    return std::nullopt;
  });
  file.add_set_validator("agc", [](const regmap::ImageView& v) -> std::optional<std::string> {
    if (std::abs(v.real("agc.startup_drive_v")) > v.real("agc.drive_limit_v")) {
      return "startup drive exceeds the drive limit";
    }
    return std::nullopt;
  });
  return file;
}

DeviceConfig decode_registers(const regmap::RegisterFile& f) {
  DeviceConfig d;
  auto u = [&](const char* n) { return f.live(n); };
  auto b = [&](const char* n) { return f.live(n) != 0; };
  auto x = [&](const char* n) { return f.live_real(n); };

  d.afe.pga_primary.gain_code = static_cast<int>(u("afe.pga_primary"));
  d.afe.pga_secondary.gain_code = static_cast<int>(u("afe.pga_secondary"));
  d.afe.adc_primary.bits = static_cast<int>(u("afe.adc_bits"));
  d.afe.adc_secondary.bits = d.afe.adc_primary.bits;
  d.afe.dac_drive.bits = static_cast<int>(u("afe.drive_dac_bits"));
  d.afe.dac_control.bits = static_cast<int>(u("afe.control_dac_bits"));
  d.afe.drive_enable = b("afe.drive_enable");
  d.afe.control_enable = b("afe.control_enable");

  auto& c = d.chain;
  c.fs_fast = kFastRate;
  c.pll.fs = kFastRate;
  c.agc.fs = kFastRate;
  c.pll_enable = b("pll.enable");
  c.pll.f_nominal = x("pll.f_nominal_hz");
  c.pll.pd_corner_hz = x("pll.pd_corner_hz");
  c.pll.kp = x("pll.kp");
  c.pll.ki = x("pll.ki");
  c.pll.lock_threshold_rad = x("pll.lock_threshold_rad");
  c.pll.lock_dwell_s = u("pll.lock_dwell_ms") * 1e-3;
  c.pll.pull_range_hz = x("pll.pull_range_hz");
  c.phase_trim_rad = x("pll.phase_trim_rad");

  c.agc_enable = b("agc.enable");
  c.agc.setpoint_v = x("agc.setpoint_v");
  c.agc.kp = x("agc.kp");
  c.agc.ki = x("agc.ki");
  c.agc.corner_hz = x("agc.corner_hz");
  c.agc.startup_drive_v = x("agc.startup_drive_v");
  c.agc.drive_limit_v = x("agc.drive_limit_v");
  c.agc.carrier_gain = x("agc.carrier_gain");

  c.mode = u("loop.mode") ? dsp::LoopMode::Closed : dsp::LoopMode::Open;
  c.rebal_enable = b("rebal.enable");
  c.rebal.kp = x("rebal.kp");
  c.rebal.ki = x("rebal.ki");
  c.rebal.limit_v = x("rebal.limit_v");

  c.scale_open_dps_per_v = x("rate.scale_open");
  c.scale_closed_dps_per_v = x("rate.scale_closed");
  c.channel_corner_hz = x("filt.channel_corner_hz");

  c.comp_enable = b("comp.enable");
  c.comp = {x("comp.o0"), x("comp.o1"), x("comp.o2"), x("comp.g0"), x("comp.g1"), x("comp.g2")};

  c.output.range = dsp::range_from_code(static_cast<int>(u("out.range")));
  c.output.sensitivity_v_per_dps = x("out.sensitivity_v_per_dps");
  c.output.null_v = x("out.null_v");

  d.watchdog_timeout_ms = u("sup.watchdog_timeout_ms");
  d.watchdog_enable = b("sup.watchdog_enable");
  return d;
}

}  // namespace gyrocond::system
