#pragma once

#include <array>
#include <cstdint>

namespace gyrocond::dsp {

struct NcoOutput {
  double sin = 0.0;
  double cos = 1.0;
};

/// Quarter-wave sine table, 1024 segments per quadrant, linear interpolation.
/// Phase is a 32-bit turn fraction: 2 quadrant bits, 10 index bits, 20
/// interpolation bits.
class SineTable {
 public:
  static constexpr int kSegments = 1024;
  static constexpr int kIndexBits = 10;
  static constexpr int kFracBits = 32 - 2 - kIndexBits;

  static const SineTable& instance();

  NcoOutput lookup(std::uint32_t phase) const;
  double sin(std::uint32_t phase) const;

 private:
  SineTable();
  double quarter(std::uint32_t offset) const;

  std::array<double, kSegments + 1> table_{};
};

struct NcoState {
  std::uint32_t phase = 0;
  std::uint32_t fw = 0;
};

struct NcoStepResult {
  NcoState next;
  NcoOutput out;  // at the phase before advancing
};

/// fw = round(f / fs * 2^32), wrapped into 32 bits.
std::uint32_t frequency_word(double f_hz, double fs_hz);
double word_frequency(std::uint32_t fw, double fs_hz);
/// Phase offset in radians as a 32-bit turn fraction.
std::uint32_t phase_word(double radians);

NcoStepResult nco_step(NcoState nco);

}  // namespace gyrocond::dsp
