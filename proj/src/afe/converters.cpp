#include "gyrocond/afe/converters.hpp"

#include <cmath>
#include <string>

#include "gyrocond/error.hpp"

namespace gyrocond::afe {

namespace {

void validate_converter(int bits, double vref, double fs, double physics_rate_hz,
                        const char* what) {
  if (bits < 8 || bits > 16) {
    throw Error("out-of-range", std::string(what) + " resolution must be 8..16 bits");
  }
  if (!(vref > 0.0) || !std::isfinite(vref)) {
    throw Error("out-of-range", std::string(what) + " vref must be positive");
  }
  if (!(fs > 0.0)) {
    throw Error("out-of-range", std::string(what) + " sample rate must be positive");
  }
  const double ratio = physics_rate_hz / fs;
  if (std::abs(ratio - std::round(ratio)) > 1e-9 || ratio < 1.0) {
    throw Error("out-of-range", std::string(what) + " sample rate must divide the physics rate");
  }
}

}  // namespace

void AdcConfig::validate(double physics_rate_hz) const {
  validate_converter(bits, vref, fs, physics_rate_hz, "ADC");
}

double AdcConfig::lsb() const { return vref / static_cast<double>(1u << bits); }

void DacConfig::validate(double physics_rate_hz) const {
  validate_converter(bits, vref, fs, physics_rate_hz, "DAC");
}

double DacConfig::lsb() const { return vref / static_cast<double>(1u << bits); }

void PgaConfig::validate() const {
  if (gain_code < 0 || gain_code > 7) {
    throw Error("out-of-range", "PGA gain code must be 0..7");
  }
}

double PgaConfig::gain() const { return std::ldexp(1.0, gain_code); }

NoiseSource::NoiseSource(double density_v_rthz, double fs_hz, std::uint64_t seed)
    : density_(0.0), fs_(fs_hz), sigma_(0.0), rng_(seed) {
  if (!(fs_hz > 0.0)) throw Error("out-of-range", "noise sample rate must be positive");
  set_density(density_v_rthz);
}

void NoiseSource::set_density(double density_v_rthz) {
  if (!(density_v_rthz >= 0.0) || !std::isfinite(density_v_rthz)) {
    throw Error("out-of-range", "noise density must be finite and non-negative");
  }
  density_ = density_v_rthz;
  sigma_ = density_ * std::sqrt(fs_ / 2.0);
}

double NoiseSource::sample() { return sigma_ * normal_(rng_); }

double noise_sample(NoiseSource& source) { return source.sample(); }

std::uint32_t adc_convert(double v, const AdcConfig& cfg, bool* clipped, NoiseSource* noise) {
  if (noise != nullptr) v += noise->sample();
  const double full = static_cast<double>(1u << cfg.bits);
  const double top = full - 1.0;
  double code = std::floor(v / cfg.vref * full + 0.5);
  if (!(code >= 0.0)) {  // also catches NaN
    if (clipped != nullptr) *clipped = true;
    code = 0.0;
  } else if (code > top) {
    if (clipped != nullptr) *clipped = true;
    code = top;
  }
  return static_cast<std::uint32_t>(code);
}

double dac_convert(std::uint32_t code, const DacConfig& cfg) {
  if (code >= (1u << cfg.bits)) {
    throw Error("out-of-range", "DAC code " + std::to_string(code) + " exceeds " +
                                    std::to_string(cfg.bits) + "-bit range");
  }
  return cfg.vref * static_cast<double>(code) / static_cast<double>(1u << cfg.bits);
}

double pga_apply(double v, const PgaConfig& cfg, double vref, bool* saturated) {
  const double out = v * cfg.gain();
  if (out > vref) {
    if (saturated != nullptr) *saturated = true;
    return vref;
  }
  if (out < -vref) {
    if (saturated != nullptr) *saturated = true;
    return -vref;
  }
  return out;
}

}  // namespace gyrocond::afe
