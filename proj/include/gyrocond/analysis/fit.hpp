#pragma once

#include <span>

namespace gyrocond::analysis {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_abs_residual = 0.0;
};

/// Ordinary least squares. Throws degenerate-fit unless there are at least
/// two distinct xs and the spans have equal length.
LineFit fit_line(std::span<const double> xs, std::span<const double> ys);

struct ToneFit {
  double amplitude = 0.0;
  double phase = 0.0;  // rad, y ~ offset + amplitude * sin(2 pi f t + phase)
  double offset = 0.0;
  double in_phase = 0.0;    // sin coefficient
  double quadrature = 0.0;  // cos coefficient
};

/// Least-squares fit of offset + a sin + b cos at a known frequency, with
/// t = t0 + i / fs.
ToneFit fit_tone(std::span<const double> ys, double fs, double f_hz, double t0 = 0.0);

double mean(std::span<const double> v);

}  // namespace gyrocond::analysis
