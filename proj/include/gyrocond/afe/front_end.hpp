#pragma once

#include <cstdint>

#include "gyrocond/afe/converters.hpp"

namespace gyrocond::afe {

struct FrontEndConfig {
  AdcConfig adc_primary;
  AdcConfig adc_secondary;
  PgaConfig pga_primary{0};
  PgaConfig pga_secondary{5};
  DacConfig dac_drive;
  DacConfig dac_control{16, 5.0, 250'000.0};
  bool drive_enable = true;
  bool control_enable = true;

  void validate(double physics_rate_hz) const;
};

/// Sticky clip/saturation flags, cleared only by reset.
struct ClipFlags {
  bool adc_primary = false;
  bool adc_secondary = false;
  bool pga_primary = false;
  bool pga_secondary = false;
  bool dac = false;

  bool any() const { return adc_primary || adc_secondary || pga_primary || pga_secondary || dac; }
  std::uint32_t bits() const;
};

/// First-order low-pass, exact discretization of the continuous pole.
class AntiAliasFilter {
 public:
  AntiAliasFilter(double corner_hz, double rate_hz);
  double push(double x) { return y_ += a_ * (x - y_); }
  double value() const { return y_; }
  double coefficient() const { return a_; }
  void reset() { y_ = 0.0; }

 private:
  double a_;
  double y_ = 0.0;
};

struct AdcSample {
  std::uint32_t primary = 0;
  std::uint32_t secondary = 0;
  // Input-referred pickoff voltages the conditioning chain consumes.
  double primary_v = 0.0;
  double secondary_v = 0.0;
};

/// Behavioral analog front end. Pickoff voltages are amplified, low-passed at
/// fs/4 in the continuous domain (physics rate), biased to mid-scale and
/// converted. The two drive DACs are bipolar around mid-scale.
class FrontEnd {
 public:
  FrontEnd(const FrontEndConfig& cfg, double physics_rate_hz);

  /// Replace the configuration; filter state is kept.
  void configure(const FrontEndConfig& cfg);
  const FrontEndConfig& config() const { return cfg_; }

  /// Feed one physics-rate sample of both pickoffs.
  void sense(double primary_v, double secondary_v);

  /// Convert the current anti-aliased signals.
  AdcSample sample();

  /// Input-referred pickoff voltage corresponding to an ADC code.
  double centered_primary(std::uint32_t code) const;
  double centered_secondary(std::uint32_t code) const;

  /// Quantize a requested bipolar electrode voltage through the DAC; returns
  /// the voltage actually applied.
  double set_drive(double v);
  double set_control(double v);
  double drive_v() const { return drive_v_; }
  double control_v() const { return control_v_; }
  std::uint32_t drive_code() const { return drive_code_; }
  std::uint32_t control_code() const { return control_code_; }

  /// Zero both electrode voltages (mid-scale codes).
  void safe_state();

  /// Test hook: converters pass values through unquantized (codes are still
  /// produced, ranges and clip flags still apply).
  void set_ideal(bool on) { ideal_ = on; }
  bool ideal() const { return ideal_; }

  const ClipFlags& flags() const { return flags_; }
  void reset();

  double anti_alias_corner_hz() const { return aa_corner_; }

 private:
  double convert_bipolar(double v, const DacConfig& dac, bool enabled, std::uint32_t& code);
  static double centered(std::uint32_t code, const AdcConfig& adc, const PgaConfig& pga);

  FrontEndConfig cfg_;
  double physics_rate_;
  double aa_corner_;
  AntiAliasFilter aa_primary_;
  AntiAliasFilter aa_secondary_;
  ClipFlags flags_;
  double drive_v_ = 0.0;
  double control_v_ = 0.0;
  std::uint32_t drive_code_ = 0;
  std::uint32_t control_code_ = 0;
  bool ideal_ = false;
};

}  // namespace gyrocond::afe
