#include "gyrocond/afe/front_end.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gyrocond/error.hpp"

namespace gyrocond::afe {

void FrontEndConfig::validate(double physics_rate_hz) const {
  adc_primary.validate(physics_rate_hz);
  adc_secondary.validate(physics_rate_hz);
  dac_drive.validate(physics_rate_hz);
  dac_control.validate(physics_rate_hz);
  pga_primary.validate();
  pga_secondary.validate();
  if (adc_primary.fs != adc_secondary.fs || dac_drive.fs != adc_primary.fs ||
      dac_control.fs != adc_primary.fs) {
    throw Error("out-of-range", "all converters must share one sample rate");
  }
}

std::uint32_t ClipFlags::bits() const {
  return (adc_primary ? 1u : 0u) | (adc_secondary ? 2u : 0u) | (pga_primary ? 4u : 0u) |
         (pga_secondary ? 8u : 0u) | (dac ? 16u : 0u);
}

AntiAliasFilter::AntiAliasFilter(double corner_hz, double rate_hz)
    : a_(1.0 - std::exp(-2.0 * std::numbers::pi * corner_hz / rate_hz)) {}

FrontEnd::FrontEnd(const FrontEndConfig& cfg, double physics_rate_hz)
    : cfg_(cfg),
      physics_rate_(physics_rate_hz),
      aa_corner_(cfg.adc_primary.fs / 4.0),
      aa_primary_(aa_corner_, physics_rate_hz),
      aa_secondary_(aa_corner_, physics_rate_hz) {
  cfg_.validate(physics_rate_hz);
  reset();
}

void FrontEnd::configure(const FrontEndConfig& cfg) {
  cfg.validate(physics_rate_);
  if (cfg.adc_primary.fs != cfg_.adc_primary.fs) {
    throw Error("out-of-range", "converter sample rate is fixed at construction");
  }
  cfg_ = cfg;
  // Re-quantize held outputs with the new DAC settings.
  set_drive(drive_v_);
  set_control(control_v_);
}

void FrontEnd::sense(double primary_v, double secondary_v) {
  aa_primary_.push(pga_apply(primary_v, cfg_.pga_primary, cfg_.adc_primary.vref,
                             &flags_.pga_primary));
  aa_secondary_.push(pga_apply(secondary_v, cfg_.pga_secondary, cfg_.adc_secondary.vref,
                               &flags_.pga_secondary));
}

AdcSample FrontEnd::sample() {
  AdcSample s;
  s.primary = adc_convert(aa_primary_.value() + cfg_.adc_primary.vref / 2.0, cfg_.adc_primary,
                          &flags_.adc_primary);
  s.secondary = adc_convert(aa_secondary_.value() + cfg_.adc_secondary.vref / 2.0,
                            cfg_.adc_secondary, &flags_.adc_secondary);
  if (ideal_) {
    const auto exact = [](double v, const AdcConfig& adc, const PgaConfig& pga) {
      return std::clamp(v, -adc.vref / 2.0, adc.vref / 2.0) / pga.gain();
    };
    s.primary_v = exact(aa_primary_.value(), cfg_.adc_primary, cfg_.pga_primary);
    s.secondary_v = exact(aa_secondary_.value(), cfg_.adc_secondary, cfg_.pga_secondary);
  } else {
    s.primary_v = centered_primary(s.primary);
    s.secondary_v = centered_secondary(s.secondary);
  }
  return s;
}

double FrontEnd::centered(std::uint32_t code, const AdcConfig& adc, const PgaConfig& pga) {
  const auto mid = static_cast<std::int64_t>(1u << (adc.bits - 1));
  return static_cast<double>(static_cast<std::int64_t>(code) - mid) * adc.lsb() / pga.gain();
}

double FrontEnd::centered_primary(std::uint32_t code) const {
  return centered(code, cfg_.adc_primary, cfg_.pga_primary);
}

double FrontEnd::centered_secondary(std::uint32_t code) const {
  return centered(code, cfg_.adc_secondary, cfg_.pga_secondary);
}

double FrontEnd::convert_bipolar(double v, const DacConfig& dac, bool enabled,
                                 std::uint32_t& code) {
  const std::uint32_t mid = 1u << (dac.bits - 1);
  if (!enabled) {
    code = mid;
    return 0.0;
  }
  const double full = static_cast<double>(1u << dac.bits);
  double c = std::floor((v + dac.vref / 2.0) / dac.vref * full + 0.5);
  const double top = static_cast<double>(dac.max_code());
  if (!(c >= 0.0)) {
    flags_.dac = true;
    c = 0.0;
  } else if (c > top) {
    flags_.dac = true;
    c = top;
  }
  code = static_cast<std::uint32_t>(c);
  if (ideal_) return std::clamp(v, -dac.vref / 2.0, dac_convert(dac.max_code(), dac) - dac.vref / 2.0);
  return dac_convert(code, dac) - dac.vref / 2.0;
}

double FrontEnd::set_drive(double v) {
  drive_v_ = convert_bipolar(v, cfg_.dac_drive, cfg_.drive_enable, drive_code_);
  return drive_v_;
}

double FrontEnd::set_control(double v) {
  control_v_ = convert_bipolar(v, cfg_.dac_control, cfg_.control_enable, control_code_);
  return control_v_;
}

void FrontEnd::safe_state() {
  drive_code_ = 1u << (cfg_.dac_drive.bits - 1);
  control_code_ = 1u << (cfg_.dac_control.bits - 1);
  drive_v_ = 0.0;
  control_v_ = 0.0;
}

void FrontEnd::reset() {
  aa_primary_.reset();
  aa_secondary_.reset();
  flags_ = ClipFlags{};
  safe_state();
}

}  // namespace gyrocond::afe
