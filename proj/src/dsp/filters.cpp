#include "gyrocond/dsp/filters.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "gyrocond/dsp/pi_controller.hpp"
#include "gyrocond/error.hpp"

namespace gyrocond::dsp {

namespace {
constexpr double kPi = std::numbers::pi;

double fold(double f, double rate) {
  double r = std::fmod(std::abs(f), rate);
  if (r > rate / 2.0) r = rate - r;
  return r;
}
}  // namespace

// ---------------------------------------------------------------- PI

PiController::PiController(double kp, double ki, double lo, double hi) : kp_(kp), ki_(ki) {
  set_limits(lo, hi);
}

void PiController::set_limits(double lo, double hi) {
  if (!(lo <= hi)) throw Error("out-of-range", "PI clamp requires lo <= hi");
  lo_ = lo;
  hi_ = hi;
}

void PiController::reset(double integrator) {
  integrator_ = integrator;
  output_ = integrator;
  clamped_ = false;
}

double PiController::update(double error) {
  const double step = ki_ * error;
  const double candidate = integrator_ + step;
  double out = kp_ * error + candidate;
  clamped_ = false;
  if (out > hi_) {
    out = hi_;
    clamped_ = true;
    if (step < 0.0) integrator_ = candidate;
  } else if (out < lo_) {
    out = lo_;
    clamped_ = true;
    if (step > 0.0) integrator_ = candidate;
  } else {
    integrator_ = candidate;
  }
  output_ = out;
  return out;
}

// ---------------------------------------------------------------- basic filters

OnePoleLowpass::OnePoleLowpass(double corner_hz, double fs_hz)
    : a_(1.0 - std::exp(-2.0 * kPi * corner_hz / fs_hz)) {
  if (!(corner_hz > 0.0) || !(fs_hz > 0.0)) {
    throw Error("out-of-range", "low-pass corner and rate must be positive");
  }
}

BoxcarDecimator::BoxcarDecimator(int factor) : factor_(factor) {
  if (factor < 1) throw Error("out-of-range", "boxcar factor must be >= 1");
}

std::optional<double> BoxcarDecimator::push(double x) {
  sum_ += x;
  if (++count_ < factor_) return std::nullopt;
  const double mean = sum_ / factor_;
  sum_ = 0.0;
  count_ = 0;
  return mean;
}

void BoxcarDecimator::reset() {
  count_ = 0;
  sum_ = 0.0;
}

FirDecimator::FirDecimator(std::vector<double> taps, int factor)
    : taps_(std::move(taps)), factor_(factor), history_(taps_.size(), 0.0) {
  if (taps_.empty()) throw Error("out-of-range", "FIR needs at least one tap");
  if (factor < 1) throw Error("out-of-range", "decimation factor must be >= 1");
}

std::optional<double> FirDecimator::push(double x) {
  head_ = (head_ == 0 ? history_.size() : head_) - 1;
  history_[head_] = x;
  if (++phase_ < factor_) return std::nullopt;
  phase_ = 0;
  // history_[head_ + k] holds x[n - k].
  const std::size_t n = taps_.size();
  double acc = 0.0;
  std::size_t idx = head_;
  for (std::size_t k = 0; k < n; ++k) {
    acc += taps_[k] * history_[idx];
    if (++idx == n) idx = 0;
  }
  return acc;
}

void FirDecimator::reset() {
  std::fill(history_.begin(), history_.end(), 0.0);
  head_ = 0;
  phase_ = 0;
}

void Biquad::prime(double x) {
  const double gain = (c_.b0 + c_.b1 + c_.b2) / (1.0 + c_.a1 + c_.a2);
  const double y = gain * x;
  s2_ = c_.b2 * x - c_.a2 * y;
  s1_ = c_.b1 * x - c_.a1 * y + s2_;
}

// ---------------------------------------------------------------- design

std::vector<double> design_lowpass_fir(int num_taps, double cutoff_hz, double fs_hz,
                                       double kaiser_beta) {
  if (num_taps < 1) throw Error("out-of-range", "FIR tap count must be positive");
  if (!(cutoff_hz > 0.0 && cutoff_hz < fs_hz / 2.0)) {
    throw Error("out-of-range", "FIR cutoff must lie inside (0, fs/2)");
  }
  std::vector<double> h(static_cast<std::size_t>(num_taps));
  const double fc = cutoff_hz / fs_hz;
  const double mid = (num_taps - 1) / 2.0;
  const double i0_beta = std::cyl_bessel_i(0.0, kaiser_beta);
  for (int n = 0; n < num_taps; ++n) {
    const double t = n - mid;
    const double sinc = t == 0.0 ? 2.0 * fc : std::sin(2.0 * kPi * fc * t) / (kPi * t);
    const double r = mid > 0.0 ? t / mid : 0.0;
    const double w = std::cyl_bessel_i(0.0, kaiser_beta * std::sqrt(std::max(0.0, 1.0 - r * r))) /
                     i0_beta;
    h[static_cast<std::size_t>(n)] = sinc * w;
  }
  const double sum = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v /= sum;
  return h;
}

BiquadCoeffs design_butterworth_lowpass(double corner_hz, double fs_hz) {
  if (!(corner_hz > 0.0 && corner_hz < fs_hz / 2.0)) {
    throw Error("out-of-range", "channel corner must lie inside (0, fs/2)");
  }
  const double k = std::tan(kPi * corner_hz / fs_hz);
  const double k2 = k * k;
  const double norm = 1.0 / (1.0 + std::numbers::sqrt2 * k + k2);
  BiquadCoeffs c;
  c.b0 = k2 * norm;
  c.b1 = 2.0 * c.b0;
  c.b2 = c.b0;
  c.a1 = 2.0 * (k2 - 1.0) * norm;
  c.a2 = (1.0 - std::numbers::sqrt2 * k + k2) * norm;
  const double dc = (c.b0 + c.b1 + c.b2) / (1.0 + c.a1 + c.a2);
  c.b0 /= dc;
  c.b1 /= dc;
  c.b2 /= dc;
  return c;
}

std::complex<double> fir_response(std::span<const double> taps, double f_hz, double fs_hz) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * kPi * f_hz / fs_hz;
  for (std::size_t k = 0; k < taps.size(); ++k) {
    acc += taps[k] * std::polar(1.0, -w * static_cast<double>(k));
  }
  return acc;
}

std::complex<double> biquad_response(const BiquadCoeffs& c, double f_hz, double fs_hz) {
  const double w = 2.0 * kPi * f_hz / fs_hz;
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return (c.b0 + c.b1 * z1 + c.b2 * z2) / (1.0 + c.a1 * z1 + c.a2 * z2);
}

std::complex<double> boxcar_response(int factor, double f_hz, double fs_hz) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * kPi * f_hz / fs_hz;
  for (int k = 0; k < factor; ++k) acc += std::polar(1.0, -w * k);
  return acc / static_cast<double>(factor);
}

// ---------------------------------------------------------------- plan

double DecimationPlan::output_rate() const { return fs_fast / total_factor(); }

int DecimationPlan::total_factor() const {
  int f = boxcar;
  for (const auto& s : stages) f *= s.factor;
  return f;
}

DecimationPlan default_decimation_plan(double channel_corner_hz) {
  DecimationPlan plan;
  plan.boxcar = 25;
  const double r1 = plan.boxcar_rate();  // 10 kHz
  // Stage 1: pass <= 500 Hz, stop >= 2.5 kHz at 10 kHz.
  plan.stages.push_back(FirStage{2, design_lowpass_fir(31, 1500.0, r1, 8.96)});
  // Stage 2: pass <= 150 Hz, stop >= 500 Hz at 5 kHz.
  plan.stages.push_back(FirStage{5, design_lowpass_fir(83, 325.0, r1 / 2.0, 8.96)});
  plan.channel_corner_hz = channel_corner_hz;
  return plan;
}

OutputDecimator::OutputDecimator(const DecimationPlan& plan) : plan_(plan) {
  for (const auto& s : plan_.stages) stages_.emplace_back(s.taps, s.factor);
  set_channel_corner(plan_.channel_corner_hz);
}

void OutputDecimator::set_channel_corner(double corner_hz) {
  plan_.channel_corner_hz = corner_hz;
  channel_ = Biquad(design_butterworth_lowpass(corner_hz, plan_.output_rate()));
}

std::optional<double> OutputDecimator::push(double x) {
  std::optional<double> v = x;
  for (auto& s : stages_) {
    v = s.push(*v);
    if (!v) return std::nullopt;
  }
  return channel_.push(*v);
}

void OutputDecimator::reset() {
  for (auto& s : stages_) s.reset();
  channel_.reset();
}

std::vector<double> decimate(std::span<const double> input, const DecimationPlan& plan) {
  BoxcarDecimator box(plan.boxcar);
  OutputDecimator out(plan);
  std::vector<double> result;
  result.reserve(input.size() / static_cast<std::size_t>(plan.total_factor()) + 1);
  for (double x : input) {
    if (auto b = box.push(x)) {
      if (auto y = out.push(*b)) result.push_back(*y);
    }
  }
  return result;
}

double plan_tone_gain(const DecimationPlan& plan, double f_hz) {
  double rate = plan.fs_fast;
  double f = fold(f_hz, rate);
  double gain = std::abs(boxcar_response(plan.boxcar, f, rate));
  rate /= plan.boxcar;
  f = fold(f, rate);
  for (const auto& s : plan.stages) {
    gain *= std::abs(fir_response(s.taps, f, rate));
    rate /= s.factor;
    f = fold(f, rate);
  }
  gain *= std::abs(
      biquad_response(design_butterworth_lowpass(plan.channel_corner_hz, rate), f, rate));
  return gain;
}

}  // namespace gyrocond::dsp
