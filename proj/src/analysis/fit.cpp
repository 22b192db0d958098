#include "gyrocond/analysis/fit.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "gyrocond/error.hpp"

namespace gyrocond::analysis {

double mean(std::span<const double> v) {
  if (v.empty()) throw Error("degenerate-fit", "mean of an empty sequence");
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw Error("degenerate-fit", "line fit needs two or more (x, y) pairs");
  }
  const double mx = mean(xs);
  const double my = mean(ys);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error("degenerate-fit", "line fit needs at least two distinct xs");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    f.max_abs_residual = std::max(f.max_abs_residual, std::abs(ys[i] - (f.intercept + f.slope * xs[i])));
  }
  return f;
}

ToneFit fit_tone(std::span<const double> ys, double fs, double f_hz, double t0) {
  if (ys.size() < 3) throw Error("degenerate-fit", "tone fit needs at least three samples");
  // Normal equations for the basis (1, sin, cos).
  std::array<std::array<double, 3>, 3> a{};
  std::array<double, 3> b{};
  const double w = 2.0 * std::numbers::pi * f_hz;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const double t = t0 + static_cast<double>(i) / fs;
    const std::array<double, 3> phi{1.0, std::sin(w * t), std::cos(w * t)};
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) a[r][c] += phi[r] * phi[c];
      b[r] += phi[r] * ys[i];
    }
  }
  auto det3 = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
           m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det3(a);
  if (!(std::abs(d) > 0.0)) throw Error("degenerate-fit", "tone fit is singular");
  std::array<double, 3> x{};
  for (int k = 0; k < 3; ++k) {
    auto m = a;
    for (int r = 0; r < 3; ++r) m[r][k] = b[r];
    x[k] = det3(m) / d;
  }
  ToneFit f;
  f.offset = x[0];
  f.in_phase = x[1];
  f.quadrature = x[2];
  f.amplitude = std::hypot(x[1], x[2]);
  f.phase = std::atan2(x[2], x[1]);
  return f;
}

}  // namespace gyrocond::analysis
