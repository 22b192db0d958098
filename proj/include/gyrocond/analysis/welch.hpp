#pragma once

#include <span>
#include <vector>

namespace gyrocond::analysis {

struct Psd {
  double df = 0.0;
  std::vector<double> freqs;
  std::vector<double> density;  // one-sided, input^2 / Hz
  int segments = 0;
};

/// Hann-windowed averaged periodogram, one-sided. Throws bad-segmentation
/// unless 2 <= segment_len, samples >= 2 * segment_len and 0 <= overlap < 1.
Psd welch_psd(std::span<const double> samples, double fs, int segment_len, double overlap = 0.5);

/// Mean of sqrt(PSD) over bins with lo <= f <= hi.
double band_mean_sqrt(const Psd& psd, double lo_hz, double hi_hz);

}  // namespace gyrocond::analysis
