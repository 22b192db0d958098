#pragma once

#include <cstdint>
#include <random>

namespace gyrocond::afe {

struct AdcConfig {
  int bits = 12;
  double vref = 5.0;
  double fs = 250'000.0;

  // fs must divide the physics rate given here.
  void validate(double physics_rate_hz = 1.0e6) const;
  double lsb() const;
};

struct DacConfig {
  int bits = 12;
  double vref = 5.0;
  double fs = 250'000.0;

  void validate(double physics_rate_hz = 1.0e6) const;
  double lsb() const;
  std::uint32_t max_code() const { return (1u << bits) - 1u; }
};

/// Programmable-gain amplifier: gain = 2^gain_code, gain_code in 0..7.
struct PgaConfig {
  int gain_code = 0;

  void validate() const;
  double gain() const;
};

/// Seeded white Gaussian source. A density of 0 yields exact zeros but still
/// advances the generator, so paired runs that differ only in density see
/// the same underlying sequence.
class NoiseSource {
 public:
  NoiseSource(double density_v_rthz, double fs_hz, std::uint64_t seed);

  double sample();
  double density() const { return density_; }
  double sigma() const { return sigma_; }
  void set_density(double density_v_rthz);

 private:
  double density_;
  double fs_;
  double sigma_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Per-sample sigma = density * sqrt(fs / 2), one-sided PSD = density^2.
double noise_sample(NoiseSource& source);

/// Ideal unipolar SAR conversion: clamp(round(v / vref * 2^bits), 0, 2^bits - 1).
/// `clipped` (if given) is set, never cleared, when the input is out of range.
/// `noise` (if given) is added to v before quantization.
std::uint32_t adc_convert(double v, const AdcConfig& cfg, bool* clipped = nullptr,
                          NoiseSource* noise = nullptr);

/// v = vref * code / 2^bits. Throws out-of-range for code >= 2^bits.
double dac_convert(std::uint32_t code, const DacConfig& cfg);

/// Exact multiplication by 2^gain_code, saturating at +/-vref.
double pga_apply(double v, const PgaConfig& cfg, double vref, bool* saturated = nullptr);

}  // namespace gyrocond::afe
