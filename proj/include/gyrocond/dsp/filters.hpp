#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace gyrocond::dsp {

/// y += a (x - y); DC gain exactly 1.
class OnePoleLowpass {
 public:
  OnePoleLowpass() = default;
  OnePoleLowpass(double corner_hz, double fs_hz);

  double push(double x) { return y_ += a_ * (x - y_); }
  double value() const { return y_; }
  void reset(double y = 0.0) { y_ = y; }
  double coefficient() const { return a_; }

 private:
  double a_ = 1.0;
  double y_ = 0.0;
};

/// Two identical one-pole sections in cascade.
class TwoPoleLowpass {
 public:
  TwoPoleLowpass() = default;
  TwoPoleLowpass(double corner_hz, double fs_hz) : a_(corner_hz, fs_hz), b_(corner_hz, fs_hz) {}

  double push(double x) { return b_.push(a_.push(x)); }
  double value() const { return b_.value(); }
  void reset(double y = 0.0) {
    a_.reset(y);
    b_.reset(y);
  }

 private:
  OnePoleLowpass a_;
  OnePoleLowpass b_;
};

/// Exact mean of each block of `factor` inputs.
class BoxcarDecimator {
 public:
  explicit BoxcarDecimator(int factor);

  std::optional<double> push(double x);
  int factor() const { return factor_; }
  void reset();

 private:
  int factor_;
  int count_ = 0;
  double sum_ = 0.0;
};

/// FIR low-pass followed by keep-one-in-`factor`. Only retained outputs are
/// computed.
class FirDecimator {
 public:
  FirDecimator(std::vector<double> taps, int factor);

  std::optional<double> push(double x);
  const std::vector<double>& taps() const { return taps_; }
  int factor() const { return factor_; }
  void reset();

 private:
  std::vector<double> taps_;
  int factor_;
  std::vector<double> history_;  // circular, size = taps
  std::size_t head_ = 0;
  int phase_ = 0;
};

struct BiquadCoeffs {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;
};

/// Transposed direct form II section.
class Biquad {
 public:
  Biquad() = default;
  explicit Biquad(const BiquadCoeffs& c) : c_(c) {}

  double push(double x) {
    const double y = c_.b0 * x + s1_;
    s1_ = c_.b1 * x - c_.a1 * y + s2_;
    s2_ = c_.b2 * x - c_.a2 * y;
    return y;
  }
  void reset() { s1_ = s2_ = 0.0; }
  /// Set the internal state to the steady state for a constant input.
  void prime(double x);
  const BiquadCoeffs& coeffs() const { return c_; }

 private:
  BiquadCoeffs c_;
  double s1_ = 0.0;
  double s2_ = 0.0;
};

/// Kaiser-windowed sinc, normalized so the taps sum to exactly 1 (to rounding).
std::vector<double> design_lowpass_fir(int num_taps, double cutoff_hz, double fs_hz,
                                       double kaiser_beta);

/// Second-order Butterworth via the prewarped bilinear transform, DC gain 1.
BiquadCoeffs design_butterworth_lowpass(double corner_hz, double fs_hz);

std::complex<double> fir_response(std::span<const double> taps, double f_hz, double fs_hz);
std::complex<double> biquad_response(const BiquadCoeffs& c, double f_hz, double fs_hz);
std::complex<double> boxcar_response(int factor, double f_hz, double fs_hz);

struct FirStage {
  int factor = 1;
  std::vector<double> taps;
};

/// fs_fast -> boxcar -> FIR stages -> output rate, then the channel filter
/// that sets the output bandwidth.
struct DecimationPlan {
  double fs_fast = 250'000.0;
  int boxcar = 25;
  std::vector<FirStage> stages;
  double channel_corner_hz = 46.0;

  double boxcar_rate() const { return fs_fast / boxcar; }
  double output_rate() const;
  int total_factor() const;
};

/// Default plan: boxcar 25 (250 kHz -> 10 kHz), FIR /2, FIR /5 -> 1 kHz.
DecimationPlan default_decimation_plan(double channel_corner_hz = 46.0);

/// Stages after the boxcar: FIR decimators and the channel biquad.
class OutputDecimator {
 public:
  explicit OutputDecimator(const DecimationPlan& plan);

  std::optional<double> push(double x);
  void set_channel_corner(double corner_hz);
  void reset();

 private:
  DecimationPlan plan_;
  std::vector<FirDecimator> stages_;
  Biquad channel_;
};

/// Whole plan applied to a stream sampled at fs_fast.
std::vector<double> decimate(std::span<const double> input, const DecimationPlan& plan);

/// Magnitude of the whole plan's response to a tone at the fast rate,
/// including aliasing through each decimation (the tone's folded frequency is
/// tracked stage by stage).
double plan_tone_gain(const DecimationPlan& plan, double f_hz);

}  // namespace gyrocond::dsp
