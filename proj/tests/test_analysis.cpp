#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "error_code.hpp"
#include "gyrocond/analysis/fit.hpp"
#include "gyrocond/analysis/welch.hpp"
#include "oracles.hpp"

using namespace gyrocond::analysis;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("Welch matches a direct DFT bin by bin") {
  CHECK(oracles::welch_vs_dft_error() <= 1e-9);
}

TEST_CASE("Welch integrates to the variance") {
  CHECK(oracles::welch_parseval_error() <= 0.05);
}

TEST_CASE("sine peak integrates to A^2/2") {
  const double fs = 1000.0, f = 125.0, a = 0.7;
  std::vector<double> x(8192);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = a * std::sin(2.0 * kPi * f * i / fs);
  const auto psd = welch_psd(x, fs, 512);
  double power = 0.0;
  for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
    if (std::abs(psd.freqs[k] - f) <= 4.0 * psd.df) power += psd.density[k] * psd.df;
  }
  CHECK(power == doctest::Approx(a * a / 2.0).epsilon(1e-3));
  CHECK(psd.segments == 31);
}

TEST_CASE("zeros in, zeros out; bad segmentation") {
  std::vector<double> z(4096, 0.0);
  const auto psd = welch_psd(z, 1000.0, 256);
  for (double d : psd.density) CHECK(d == 0.0);
  CHECK(error_code([&] { welch_psd(std::span(z).first(300), 1000.0, 256); }) == "bad-segmentation");
  CHECK(error_code([&] { welch_psd(z, 1000.0, 1); }) == "bad-segmentation");
  CHECK(error_code([&] { welch_psd(z, 1000.0, 256, 1.0); }) == "bad-segmentation");
  CHECK(error_code([&] { welch_psd(z, 0.0, 256); }) == "bad-segmentation");
  CHECK(error_code([&] { band_mean_sqrt(psd, 600.0, 700.0); }) == "bad-segmentation");
}

TEST_CASE("band mean of sqrt(PSD)") {
  Psd p;
  p.df = 1.0;
  p.freqs = {0, 1, 2, 3, 4};
  p.density = {100, 4, 9, 16, 100};
  CHECK(band_mean_sqrt(p, 1.0, 3.0) == 3.0);
}

TEST_CASE("line fit against the closed-form oracle") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> xs(500), ys(500);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    xs[i] = u(rng);
    ys[i] = 0.005 * xs[i] + 2.5 + g(rng);
  }
  long double sx = 0, sy = 0, sxy = 0, sxx = 0;
  const long double n = xs.size();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxy += static_cast<long double>(xs[i]) * ys[i];
    sxx += static_cast<long double>(xs[i]) * xs[i];
  }
  const double slope = static_cast<double>((n * sxy - sx * sy) / (n * sxx - sx * sx));
  const double icpt = static_cast<double>((sy - slope * sx) / n);
  const auto f = fit_line(xs, ys);
  CHECK(std::abs(f.slope - slope) <= 1e-9 * std::abs(slope));
  CHECK(std::abs(f.intercept - icpt) <= 1e-9 * std::abs(icpt));
}

TEST_CASE("line fit: collinear, symmetric outliers, degenerate") {
  const std::vector<double> xs{-75, -50, -25, 0, 25, 50, 75};
  std::vector<double> ys;
  for (double x : xs) ys.push_back(2.5 + 0.005 * x);
  auto f = fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(f.max_abs_residual <= 1e-14);

  ys.front() += 0.01;
  ys.back() += 0.01;
  f = fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(0.005).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(2.5 + 0.02 / 7.0).epsilon(1e-12));
  CHECK(f.max_abs_residual == doctest::Approx(0.01 - 0.02 / 7.0).epsilon(1e-9));

  const std::vector<double> same{1, 1, 1};
  CHECK(error_code([&] { fit_line(same, same); }) == "degenerate-fit");
  CHECK(error_code([&] { fit_line(std::span(xs).first(1), std::span(ys).first(1)); }) == "degenerate-fit");
  CHECK(error_code([&] { fit_line(xs, std::span(ys).first(3)); }) == "degenerate-fit");
  CHECK(error_code([] { mean({}); }) == "degenerate-fit");
}

TEST_CASE("tone fit recovers amplitude, phase and offset") {
  const double fs = 1000.0, f = 37.0;
  std::vector<double> y(2000);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 0.4 + 1.3 * std::sin(2.0 * kPi * f * (0.25 + i / fs) + 0.7);
  const auto t = fit_tone(y, fs, f, 0.25);
  CHECK(t.amplitude == doctest::Approx(1.3).epsilon(1e-10));
  CHECK(t.phase == doctest::Approx(0.7).epsilon(1e-10));
  CHECK(t.offset == doctest::Approx(0.4).epsilon(1e-10));
  CHECK(error_code([&] { fit_tone(std::span(y).first(2), fs, f); }) == "degenerate-fit");
}
