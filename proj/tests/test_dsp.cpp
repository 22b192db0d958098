#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "error_code.hpp"
#include "gyrocond/analysis/welch.hpp"
#include "gyrocond/dsp/agc.hpp"
#include "gyrocond/dsp/compensation.hpp"
#include "gyrocond/dsp/demod.hpp"
#include "gyrocond/dsp/filters.hpp"
#include "gyrocond/dsp/nco.hpp"
#include "gyrocond/dsp/pll.hpp"
#include "oracles.hpp"

using namespace gyrocond::dsp;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTurn = 4294967296.0;

double db(double g) { return 20.0 * std::log10(g); }
}  // namespace

TEST_CASE("frequency word") {
  CHECK(frequency_word(15'000.0, 250'000.0) == 257'698'038u);
  CHECK(std::abs(word_frequency(257'698'038u, 250'000.0) - 15'000.0) <= 250'000.0 / kTurn);
  CHECK(phase_word(kPi / 2.0) == 1u << 30);
  CHECK(phase_word(-kPi / 2.0) == 3u << 30);
}

TEST_CASE("NCO advances by the frequency word and wraps") {
  NcoState s{0xFFFF'FF00u, 0x200u};
  const auto r = nco_step(s);
  CHECK(r.next.phase == 0x100u);
  CHECK(r.next.fw == 0x200u);
  CHECK(r.out.sin == doctest::Approx(std::sin(2.0 * kPi * 0xFFFF'FF00u / kTurn)).epsilon(1e-6));
}

TEST_CASE("sine table accuracy over every segment") {
  const auto& t = SineTable::instance();
  double worst_norm = 0.0, worst_err = 0.0;
  // Four points per segment across all four quadrants.
  for (std::uint64_t p = 0; p < (1ull << 32); p += 1ull << 18) {
    const auto ph = static_cast<std::uint32_t>(p + 12'345);
    const auto o = t.lookup(ph);
    const double a = 2.0 * kPi * ph / kTurn;
    worst_norm = std::max(worst_norm, std::abs(o.sin * o.sin + o.cos * o.cos - 1.0));
    worst_err = std::max({worst_err, std::abs(o.sin - std::sin(a)), std::abs(o.cos - std::cos(a))});
  }
  CHECK(worst_norm <= 1e-4);
  CHECK(worst_err <= 1e-6);
  CHECK(t.lookup(0).sin == 0.0);
  CHECK(t.lookup(1u << 30).sin == 1.0);
  CHECK(t.lookup(1u << 31).cos == -1.0);
}

TEST_CASE("demodulation recovers A cos(phi), A sin(phi)") {
  CHECK(oracles::demod_sweep_error() <= 1e-3);
  const auto iq = demod_iq(0.0, SineTable::instance().lookup(123'456'789u));
  CHECK(iq.i == 0.0);
  CHECK(iq.q == 0.0);
}

TEST_CASE("rebalance modulation") {
  const NcoOutput c{0.6, 0.8};
  CHECK(rebalance_modulate(0.0, 0.0, c) == 0.0);
  CHECK(rebalance_modulate(1.0, 2.0, c) == doctest::Approx(-(0.6 + 1.6)));
}

TEST_CASE("filters have unit DC gain") {
  const auto fir = design_lowpass_fir(83, 200.0, 2'000.0, 8.0);
  double sum = 0.0;
  for (double t : fir) sum += t;
  CHECK(std::abs(sum - 1.0) <= 1e-12);
  CHECK(std::abs(fir_response(fir, 0.0, 2'000.0) - 1.0) <= 1e-9);

  const auto bq = design_butterworth_lowpass(46.0, 1'000.0);
  CHECK(std::abs(biquad_response(bq, 0.0, 1'000.0) - 1.0) <= 1e-9);
  CHECK(db(std::abs(biquad_response(bq, 46.0, 1'000.0))) == doctest::Approx(-3.0103).epsilon(1e-3));

  OnePoleLowpass lp(100.0, 10'000.0);
  for (int i = 0; i < 10'000; ++i) lp.push(0.7);
  CHECK(lp.value() == doctest::Approx(0.7).epsilon(1e-12));

  const auto plan = default_decimation_plan();
  std::vector<double> dc(250'000, 1.25);
  const auto out = decimate(dc, plan);
  REQUIRE(out.size() == 1000);
  CHECK(std::abs(out.back() - 1.25) <= 1e-9);
  CHECK(plan_tone_gain(plan, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("boxcar is an exact block mean") {
  BoxcarDecimator b(4);
  CHECK_FALSE(b.push(1.0));
  CHECK_FALSE(b.push(2.0));
  CHECK_FALSE(b.push(3.0));
  const auto y = b.push(6.0);
  REQUIRE(y);
  CHECK(*y == 3.0);
  CHECK(error_code([] { BoxcarDecimator(0); }) == "out-of-range");
  CHECK(std::abs(boxcar_response(25, 10'000.0, 250'000.0)) <= 1e-12);
}

TEST_CASE("decimation plan rejects carrier ripple by 80 dB") {
  const auto plan = default_decimation_plan();
  CHECK(plan.output_rate() == 1'000.0);
  CHECK(plan.total_factor() == 250);
  double worst = -1e9;
  for (double f = 14'500.0; f <= 15'500.0; f += 1.0) worst = std::max(worst, db(plan_tone_gain(plan, f)));
  CHECK(worst <= -80.0);
  CHECK(db(plan_tone_gain(plan, 46.0)) == doctest::Approx(-3.0).epsilon(0.02));
}

TEST_CASE("white noise through the plan rolls off 3 dB at the corner") {
  const auto plan = default_decimation_plan();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> x(250'000 * 40);
  for (auto& v : x) v = g(rng);
  const auto y = decimate(x, plan);
  const auto psd = gyrocond::analysis::welch_psd(std::span(y).subspan(100), plan.output_rate(), 1024);
  auto band = [&](double lo, double hi) {
    double s = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
      if (psd.freqs[k] >= lo && psd.freqs[k] <= hi) {
        s += psd.density[k];
        ++n;
      }
    }
    return s / n;
  };
  const double ratio = band(44.0, 48.0) / band(2.0, 10.0);
  // Half power at 46 Hz; the corner frequency itself within 10%.
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.12));
  CHECK(band(41.0, 45.0) / band(2.0, 10.0) > band(47.0, 51.0) / band(2.0, 10.0));
}

TEST_CASE("PI anti-windup") {
  PiController pi(1.0, 0.1, -1.0, 1.0);
  for (int i = 0; i < 1000; ++i) pi.update(10.0);
  CHECK(pi.output() == 1.0);
  CHECK(pi.clamped());
  CHECK(pi.integrator() <= 1.0);
  // Recovers at once when the error reverses.
  const double integ = pi.integrator();
  CHECK(pi.update(-0.5) == doctest::Approx(-0.5 + integ - 0.05));
}

TEST_CASE("AGC integrator does not grow while the drive is clamped") {
  AgcConfig cfg;
  AmplitudeControl agc(cfg);
  agc.set_enabled(true);
  const NcoOutput ref{0.0, 1.0};
  double prev = agc.controller().integrator();
  for (int i = 0; i < 200'000; ++i) {
    agc.step(0.0, ref);
    if (agc.controller().clamped()) REQUIRE(agc.controller().integrator() <= prev + 1e-15);
    prev = agc.controller().integrator();
  }
  CHECK(agc.drive() == cfg.drive_limit_v);
  CHECK(agc.controller().integrator() <= cfg.drive_limit_v);
  CHECK(error_code([&] {
          cfg.setpoint_v = 0.0;
          agc.configure(cfg);
        }) == "out-of-range");
}

TEST_CASE("AGC holds its drive when the amplitude is at the setpoint") {
  AgcConfig cfg;
  cfg.corner_hz = 2'000.0;
  AmplitudeControl agc(cfg);
  // Feed A sin against the same sin reference until the estimate settles.
  NcoState nco{0, frequency_word(15'000.0, cfg.fs)};
  for (int i = 0; i < 50'000; ++i) {
    const auto r = nco_step(nco);
    nco = r.next;
    agc.step(cfg.setpoint_v * r.out.sin, r.out);
  }
  agc.set_enabled(true);
  const double integ = agc.controller().integrator();
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const auto r = nco_step(nco);
    nco = r.next;
    agc.step(cfg.setpoint_v * r.out.sin, r.out);
    worst = std::max(worst, std::abs(agc.controller().integrator() - integ));
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("lock detector dwell and hysteresis") {
  LockDetector d(0.05, 3);
  CHECK_FALSE(d.update(0.01));
  CHECK_FALSE(d.update(0.01));
  CHECK(d.update(0.01));
  CHECK(d.update(0.08));  // inside the band, lock held
  CHECK_FALSE(d.update(0.11));
  CHECK_FALSE(d.update(0.08));
  CHECK_FALSE(d.update(0.01));
  CHECK_FALSE(d.update(0.01));
  CHECK(d.update(0.01));
  CHECK_FALSE(d.update(0.0, false));
  CHECK_FALSE(d.update(NAN));
}

TEST_CASE("PLL locks to a 15.1 kHz oscillator from any initial phase") {
  PllConfig cfg;
  const double f_in = 15'100.0;
  for (int k = 0; k < 4; ++k) {
    PhaseLockLoop pll(cfg);
    pll.set_phase(phase_word(k * kPi / 2.0 + 0.3));
    pll.set_enabled(true);
    const int n = 250'000;
    double fsum = 0.0;
    int fcount = 0;
    for (int i = 0; i < n; ++i) {
      const double v = 0.5 * std::sin(2.0 * kPi * f_in * i / cfg.fs);
      const auto out = pll.step(v);
      if (i >= n - 25'000) {
        fsum += word_frequency(out.fw, cfg.fs);
        ++fcount;
      }
    }
    CAPTURE(k);
    CHECK(pll.last().locked);
    CHECK(std::abs(fsum / fcount - f_in) / f_in <= 1e-4);
    CHECK(std::abs(pll.last().phase_error) < cfg.lock_threshold_rad);
  }
}

TEST_CASE("PLL without loop gain never locks; forced frequency") {
  PllConfig cfg;
  cfg.kp = 0.0;
  cfg.ki = 0.0;
  PhaseLockLoop pll(cfg);
  pll.set_enabled(true);
  for (int i = 0; i < 50'000; ++i) pll.step(0.5 * std::sin(2.0 * kPi * 15'000.0 * i / cfg.fs));
  CHECK_FALSE(pll.last().locked);

  PhaseLockLoop forced(PllConfig{});
  forced.force_frequency(15'750.0);
  forced.step(0.0);
  CHECK(forced.fw() == frequency_word(15'750.0, 250'000.0));
  forced.force_frequency(std::nullopt);
  CHECK(error_code([] {
          PllConfig bad;
          bad.f_nominal = 200'000.0;
          PhaseLockLoop p(bad);
        }) == "out-of-range");
}

TEST_CASE("compensation") {
  const auto id = CompensationPoly::identity();
  for (double raw : {-300.0, -1.5, 0.0, 0.25, 77.0}) {
    for (double t : {-40.0, 25.0, 85.0}) CHECK(compensate(raw, t, id) == raw);
  }
  CompensationPoly p;
  p.o0 = 1.0;
  p.o1 = 0.01;
  p.g0 = 1.02;
  CHECK(compensate(p.offset(60.0), 60.0, p) == 0.0);
  CHECK(compensate(11.6, 60.0, p) == doctest::Approx(10.0 * 1.02));
  CHECK(p.gain_positive());
  p.g2 = -1e-4;
  CHECK_FALSE(p.gain_positive());
  CompensationPoly v;
  v.g0 = 1.0;
  v.g1 = -0.1;
  v.g2 = 0.001;  // vertex at 50 C, gain -1.5 there
  CHECK(v.min_gain() == doctest::Approx(-1.5));
}

TEST_CASE("output formatting") {
  OutputConfig cfg;
  CHECK(output_format(0.0, cfg).volts == 2.5);
  cfg.range = OutputRange::Dps300;
  CHECK(output_format(100.0, cfg).volts == doctest::Approx(3.0).epsilon(1e-15));
  const auto low = output_format(-400.0, cfg);
  CHECK(low.volts == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(low.clamped);
  CHECK_FALSE(output_format(-300.0, cfg).clamped);
  cfg.range = OutputRange::Dps75;
  CHECK(output_format(75.0, cfg).volts == doctest::Approx(2.875));
  CHECK(output_format(80.0, cfg).clamped);
  CHECK(range_limit_dps(range_from_code(1)) == 150.0);
  CHECK(error_code([] { range_from_code(3); }) == "out-of-range");
}
