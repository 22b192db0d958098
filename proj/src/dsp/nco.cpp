#include "gyrocond/dsp/nco.hpp"

#include <cmath>
#include <numbers>

namespace gyrocond::dsp {

namespace {
constexpr double kTwoPow32 = 4294967296.0;
constexpr std::uint32_t kFracMask = (1u << SineTable::kFracBits) - 1u;
constexpr double kFracScale = 1.0 / static_cast<double>(1u << SineTable::kFracBits);
}  // namespace

SineTable::SineTable() {
  for (int k = 0; k <= kSegments; ++k) {
    table_[static_cast<std::size_t>(k)] =
        std::sin(std::numbers::pi / 2.0 * static_cast<double>(k) / kSegments);
  }
}

const SineTable& SineTable::instance() {
  static const SineTable table;
  return table;
}

double SineTable::quarter(std::uint32_t offset) const {
  // offset in [0, 2^30]; the upper end lands exactly on the last table entry.
  const std::uint32_t index = offset >> kFracBits;
  if (index >= static_cast<std::uint32_t>(kSegments)) return table_[kSegments];
  const std::uint32_t frac = offset & kFracMask;
  const double a = table_[index];
  const double b = table_[index + 1];
  return a + (b - a) * static_cast<double>(frac) * kFracScale;
}

double SineTable::sin(std::uint32_t phase) const {
  constexpr std::uint32_t kQuarterTurn = 1u << 30;
  const std::uint32_t quadrant = phase >> 30;
  const std::uint32_t offset = phase & (kQuarterTurn - 1u);
  switch (quadrant) {
    case 0:
      return quarter(offset);
    case 1:
      return quarter(kQuarterTurn - offset);
    case 2:
      return -quarter(offset);
    default:
      return -quarter(kQuarterTurn - offset);
  }
}

NcoOutput SineTable::lookup(std::uint32_t phase) const {
  return NcoOutput{sin(phase), sin(phase + (1u << 30))};
}

std::uint32_t frequency_word(double f_hz, double fs_hz) {
  const double turns = f_hz / fs_hz;
  const double wrapped = turns - std::floor(turns);
  const double w = std::nearbyint(wrapped * kTwoPow32);
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(w) & 0xffffffffu);
}

double word_frequency(std::uint32_t fw, double fs_hz) {
  return static_cast<double>(fw) / kTwoPow32 * fs_hz;
}

std::uint32_t phase_word(double radians) {
  const double turns = radians / (2.0 * std::numbers::pi);
  const double wrapped = turns - std::floor(turns);
  return static_cast<std::uint32_t>(static_cast<std::uint64_t>(std::nearbyint(wrapped * kTwoPow32)) &
                                    0xffffffffu);
}

NcoStepResult nco_step(NcoState nco) {
  NcoStepResult r;
  r.out = SineTable::instance().lookup(nco.phase);
  r.next = nco;
  r.next.phase = nco.phase + nco.fw;  // wraps modulo 2^32
  return r;
}

}  // namespace gyrocond::dsp
