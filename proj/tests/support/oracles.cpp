#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "gyrocond/analysis/welch.hpp"
#include "gyrocond/dsp/demod.hpp"
#include "gyrocond/dsp/filters.hpp"
#include "gyrocond/dsp/nco.hpp"
#include "gyrocond/model/gyro_model.hpp"

namespace oracles {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::vector<double> rk4_resonator(double f_hz, double q, double x0, double v0,
                                  const std::function<double(double)>& accel, double dt, int samples,
                                  int substeps) {
  const double w = 2.0 * kPi * f_hz;
  const double c = std::isinf(q) ? 0.0 : w / q;
  const double h = dt / substeps;
  std::vector<double> out;
  out.reserve(samples);
  double x = x0, v = v0;
  for (int n = 0; n < samples; ++n) {
    const double a = accel(n * dt);
    auto dv = [&](double xx, double vv) { return a - c * vv - w * w * xx; };
    for (int k = 0; k < substeps; ++k) {
      const double k1x = v, k1v = dv(x, v);
      const double k2x = v + 0.5 * h * k1v, k2v = dv(x + 0.5 * h * k1x, v + 0.5 * h * k1v);
      const double k3x = v + 0.5 * h * k2v, k3v = dv(x + 0.5 * h * k2x, v + 0.5 * h * k2v);
      const double k4x = v + h * k3v, k4v = dv(x + h * k3x, v + h * k3v);
      x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
      v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    out.push_back(x);
  }
  return out;
}

std::vector<double> zoh_resonator(double f_hz, double q, double x0, double v0,
                                  const std::function<double(double)>& accel, double dt, int samples) {
  const auto m = gyrocond::model::discretize_mode(f_hz, q, dt);
  std::vector<double> out;
  out.reserve(samples);
  double x = x0, v = v0;
  for (int n = 0; n < samples; ++n) {
    m.advance(x, v, accel(n * dt));
    out.push_back(x);
  }
  return out;
}

double max_rel_error(std::span<const double> a, std::span<const double> b) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    err = std::max(err, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  return ref > 0.0 ? err / ref : err;
}

double stepper_vs_rk4_error() {
  const double dt = 1e-6;
  const int n = 10'000;  // 10 ms
  auto none = [](double) { return 0.0; };
  auto sine = [](double t) { return 3.0e-2 * std::sin(2.0 * kPi * 15'010.0 * t); };

  double worst = 0.0;
  auto check = [&](double f, double q, double x0, double v0, const std::function<double(double)>& a) {
    const auto ref = rk4_resonator(f, q, x0, v0, a, dt, n, 100);
    const auto got = zoh_resonator(f, q, x0, v0, a, dt, n);
    worst = std::max(worst, max_rel_error(got, ref));
  };
  check(15'000.0, 5'000.0, 1e-7, 0.0, none);
  check(15'000.0, INFINITY, 0.0, 1e-3, none);
  check(14'900.0, 50.0, 2e-8, 0.0, none);
  check(15'000.0, 5'000.0, 0.0, 0.0, sine);
  return worst;
}

std::vector<double> dft_periodogram(std::span<const double> x, double fs) {
  const std::size_t n = x.size();
  std::vector<double> w(n);
  double w2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * i / n);
    w2 += w[i] * w[i];
  }
  std::vector<double> p(n / 2 + 1);
  for (std::size_t k = 0; k < p.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += x[i] * w[i] * std::polar(1.0, -2.0 * kPi * (k * i % n) / n);
    const bool edge = k == 0 || k == n / 2;
    p[k] = (edge ? 1.0 : 2.0) * std::norm(acc) / (fs * w2);
  }
  return p;
}

double welch_vs_dft_error() {
  const int n = 256;
  const double fs = 1000.0;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g;
  std::vector<double> x(2 * n);
  for (int i = 0; i < 2 * n; ++i) x[i] = g(rng) + 0.5 * std::sin(2.0 * kPi * 60.0 * i / fs);

  const auto psd = gyrocond::analysis::welch_psd(x, fs, n, 0.0);
  const auto a = dft_periodogram(std::span(x).first(n), fs);
  const auto b = dft_periodogram(std::span(x).subspan(n), fs);
  std::vector<double> ref(a.size());
  for (std::size_t k = 0; k < ref.size(); ++k) ref[k] = 0.5 * (a[k] + b[k]);
  return max_rel_error(psd.density, ref);
}

double welch_parseval_error() {
  const double fs = 1000.0;
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<double> x(1 << 16);
  for (auto& v : x) v = g(rng);
  double var = 0.0;
  for (double v : x) var += v * v;
  var /= x.size();
  const auto psd = gyrocond::analysis::welch_psd(x, fs, 1024);
  double total = 0.0;
  for (double d : psd.density) total += d * psd.df;
  return std::abs(total / var - 1.0);
}

double demod_sweep_error() {
  namespace dsp = gyrocond::dsp;
  const double fs = 250'000.0;
  const double amp = 0.8;
  const int n = 125'000;  // 0.5 s
  const auto plan = dsp::default_decimation_plan();
  double worst = 0.0;
  for (int k = 0; k < 8; ++k) {
    const double phi = k * kPi / 4.0;
    dsp::NcoState nco{0, dsp::frequency_word(15'000.0, fs)};
    std::vector<double> is(n), qs(n);
    for (int i = 0; i < n; ++i) {
      const double theta = 2.0 * kPi * (static_cast<double>(nco.phase) / 4294967296.0);
      const auto r = dsp::nco_step(nco);
      nco = r.next;
      const auto iq = dsp::demod_iq(amp * std::sin(theta + phi), r.out);
      is[i] = iq.i;
      qs[i] = iq.q;
    }
    const auto di = dsp::decimate(is, plan);
    const auto dq = dsp::decimate(qs, plan);
    double mi = 0.0, mq = 0.0;
    const int tail = 100;
    for (int j = 0; j < tail; ++j) {
      mi += di[di.size() - 1 - j] / tail;
      mq += dq[dq.size() - 1 - j] / tail;
    }
    worst = std::max({worst, std::abs(mi - amp * std::cos(phi)) / amp, std::abs(mq - amp * std::sin(phi)) / amp});
  }
  return worst;
}

}  // namespace oracles
