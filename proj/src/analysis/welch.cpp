#include "gyrocond/analysis/welch.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "gyrocond/error.hpp"

namespace gyrocond::analysis {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Psd welch_psd(std::span<const double> samples, double fs, int segment_len, double overlap) {
  if (segment_len < 2 || samples.size() < 2 * static_cast<std::size_t>(segment_len) ||
      !(overlap >= 0.0 && overlap < 1.0) || !(fs > 0.0)) {
    throw Error("bad-segmentation", "Welch needs segment_len >= 2, at least two segments, "
                                    "0 <= overlap < 1 and fs > 0");
  }
  const auto n = static_cast<std::size_t>(segment_len);
  const auto step = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(n * (1.0 - overlap))));
  const std::size_t bins = n / 2 + 1;

  std::vector<double> window(n);
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    w2 += window[i] * window[i];
  }

  double* in = fftw_alloc_real(n);
  fftw_complex* out = fftw_alloc_complex(bins);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }

  Psd psd;
  psd.df = fs / static_cast<double>(n);
  psd.density.assign(bins, 0.0);
  psd.freqs.resize(bins);
  for (std::size_t k = 0; k < bins; ++k) psd.freqs[k] = psd.df * static_cast<double>(k);

  for (std::size_t start = 0; start + n <= samples.size(); start += step) {
    for (std::size_t i = 0; i < n; ++i) in[i] = samples[start + i] * window[i];
    fftw_execute(plan);
    for (std::size_t k = 0; k < bins; ++k) {
      psd.density[k] += out[k][0] * out[k][0] + out[k][1] * out[k][1];
    }
    ++psd.segments;
  }

  const double norm = 1.0 / (fs * w2 * psd.segments);
  for (std::size_t k = 0; k < bins; ++k) {
    const bool edge = k == 0 || (n % 2 == 0 && k == bins - 1);
    psd.density[k] *= (edge ? 1.0 : 2.0) * norm;
  }

  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(in);
  fftw_free(out);
  return psd;
}

double band_mean_sqrt(const Psd& psd, double lo_hz, double hi_hz) {
  double sum = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (psd.freqs[k] >= lo_hz && psd.freqs[k] <= hi_hz) {
      sum += std::sqrt(psd.density[k]);
      ++count;
    }
  }
  if (count == 0) throw Error("bad-segmentation", "no PSD bins inside the requested band");
  return sum / count;
}

}  // namespace gyrocond::analysis
