#include <doctest.h>

#include <cmath>
#include <vector>

#include "error_code.hpp"
#include "gyrocond/afe/converters.hpp"
#include "gyrocond/afe/front_end.hpp"
#include "gyrocond/analysis/welch.hpp"

using namespace gyrocond::afe;

TEST_CASE("adc(dac(k)) == k for every code") {
  for (int bits : {8, 10, 12, 14, 16}) {
    AdcConfig adc{bits, 5.0, 250'000.0};
    DacConfig dac{bits, 5.0, 250'000.0};
    bool clipped = false;
    for (std::uint32_t k = 0; k <= dac.max_code(); ++k) {
      REQUIRE(adc_convert(dac_convert(k, dac), adc, &clipped) == k);
    }
    CHECK_FALSE(clipped);
  }
}

TEST_CASE("12-bit converter examples") {
  const AdcConfig adc;
  const DacConfig dac;
  bool clipped = false;
  CHECK(adc_convert(2.5, adc, &clipped) == 2048);
  CHECK_FALSE(clipped);
  CHECK(adc_convert(6.0, adc, &clipped) == 4095);
  CHECK(clipped);
  clipped = false;
  CHECK(adc_convert(-0.1, adc, &clipped) == 0);
  CHECK(clipped);
  clipped = false;
  CHECK(adc_convert(NAN, adc, &clipped) == 0);
  CHECK(clipped);
  CHECK(dac_convert(4095, dac) == 5.0 * 4095.0 / 4096.0);
  CHECK(dac_convert(0, dac) == 0.0);
  CHECK(dac_convert(2048, dac) == 2.5);
  CHECK(error_code([&] { dac_convert(4096, dac); }) == "out-of-range");
}

TEST_CASE("ADC is monotone with error within half an LSB") {
  const AdcConfig adc;
  const DacConfig dac;
  std::uint32_t prev = 0;
  double worst = 0.0;
  const double top = adc.vref - adc.lsb() / 2.0;
  for (int i = 0; i <= 200'000; ++i) {
    const double v = top * i / 200'000.0;
    const auto code = adc_convert(v, adc);
    REQUIRE(code >= prev);
    prev = code;
    worst = std::max(worst, std::abs(v - dac_convert(code, dac)));
  }
  CHECK(worst <= adc.lsb() / 2.0 + 1e-15);
}

TEST_CASE("converter configuration bounds") {
  CHECK(error_code([] { AdcConfig{7, 5.0, 250'000.0}.validate(); }) == "out-of-range");
  CHECK(error_code([] { AdcConfig{17, 5.0, 250'000.0}.validate(); }) == "out-of-range");
  CHECK(error_code([] { DacConfig{12, 0.0, 250'000.0}.validate(); }) == "out-of-range");
  CHECK(error_code([] { DacConfig{12, 5.0, 300'000.0}.validate(); }) == "out-of-range");
  CHECK(error_code([] { AdcConfig{16, 5.0, 500'000.0}.validate(); }) == "");
  CHECK(error_code([] { PgaConfig{8}.validate(); }) == "out-of-range");
  CHECK(error_code([] { PgaConfig{-1}.validate(); }) == "out-of-range");
}

TEST_CASE("PGA multiplies exactly and saturates at vref") {
  for (int g = 0; g <= 7; ++g) {
    const PgaConfig pga{g};
    bool sat = false;
    CHECK(pga_apply(0.0123, pga, 5.0, &sat) == 0.0123 * (1 << g));
    CHECK_FALSE(sat);
  }
  bool sat = false;
  CHECK(pga_apply(1.0, PgaConfig{3}, 5.0, &sat) == 5.0);
  CHECK(sat);
  sat = false;
  CHECK(pga_apply(-1.0, PgaConfig{3}, 5.0, &sat) == -5.0);
  CHECK(sat);
}

TEST_CASE("noise source sigma and flat density") {
  const double density = 2e-6;
  const double fs = 1.0e6;
  NoiseSource src(density, fs, 99);
  CHECK(src.sigma() == doctest::Approx(density * std::sqrt(fs / 2.0)));

  std::vector<double> x(1 << 18);
  for (auto& v : x) v = noise_sample(src);
  double var = 0.0;
  for (double v : x) var += v * v;
  var /= x.size();
  CHECK(std::sqrt(var) == doctest::Approx(src.sigma()).epsilon(0.02));

  const auto psd = gyrocond::analysis::welch_psd(x, fs, 4096);
  // Four sub-bands across the spectrum, each within 10% of density^2.
  for (int band = 0; band < 4; ++band) {
    const double lo = fs / 2.0 * (0.05 + 0.225 * band);
    const double hi = lo + fs / 2.0 * 0.225;
    double sum = 0.0;
    int n = 0;
    for (std::size_t k = 0; k < psd.freqs.size(); ++k) {
      if (psd.freqs[k] >= lo && psd.freqs[k] < hi) {
        sum += psd.density[k];
        ++n;
      }
    }
    CHECK(sum / n == doctest::Approx(density * density).epsilon(0.10));
  }
}

TEST_CASE("zero density gives zeros and keeps the sequence aligned") {
  NoiseSource quiet(0.0, 1.0e6, 5), loud(1e-6, 1.0e6, 5);
  for (int i = 0; i < 1000; ++i) REQUIRE(quiet.sample() == 0.0);
  quiet.set_density(1e-6);
  for (int i = 0; i < 1000; ++i) loud.sample();
  for (int i = 0; i < 1000; ++i) REQUIRE(quiet.sample() == loud.sample());
  CHECK(error_code([] { NoiseSource(-1.0, 1.0e6, 1); }) == "out-of-range");
}

TEST_CASE("same seed, same noise") {
  NoiseSource a(1e-6, 1.0e6, 123), b(1e-6, 1.0e6, 123), c(1e-6, 1.0e6, 124);
  bool differs = false;
  for (int i = 0; i < 10'000; ++i) {
    const double va = a.sample();
    REQUIRE(va == b.sample());
    differs = differs || va != c.sample();
  }
  CHECK(differs);
}

TEST_CASE("front end DACs are bipolar around mid-scale") {
  FrontEndConfig cfg;
  FrontEnd fe(cfg, 1.0e6);
  CHECK(fe.drive_code() == 2048);
  CHECK(fe.control_code() == 32768);
  CHECK(fe.drive_v() == 0.0);

  const double lsb = cfg.dac_drive.lsb();
  const double requested = 1.0 + 0.3 * lsb;
  const double applied = fe.set_drive(requested);
  CHECK(std::abs(applied - requested) <= lsb / 2.0);
  CHECK(fe.drive_code() == 2048 + static_cast<std::uint32_t>(std::lround(requested / lsb)));
  CHECK_FALSE(fe.flags().dac);

  fe.set_drive(3.0);
  CHECK(fe.drive_code() == 4095);
  CHECK(fe.flags().dac);
  fe.safe_state();
  CHECK(fe.drive_code() == 2048);
  CHECK(fe.control_code() == 32768);
  CHECK(fe.flags().dac);  // sticky until reset
  fe.reset();
  CHECK_FALSE(fe.flags().any());

  cfg.drive_enable = false;
  fe.configure(cfg);
  CHECK(fe.set_drive(1.0) == 0.0);
  CHECK(fe.drive_code() == 2048);
}

TEST_CASE("front end sample path and ideal hook") {
  FrontEndConfig cfg;
  FrontEnd fe(cfg, 1.0e6);
  for (int i = 0; i < 1000; ++i) fe.sense(0.3, 0.01);
  const auto s = fe.sample();
  CHECK(std::abs(s.primary_v - 0.3) <= cfg.adc_primary.lsb());
  CHECK(std::abs(s.secondary_v - 0.01) <= cfg.adc_secondary.lsb() / 32.0);
  CHECK(s.primary == 2048 + static_cast<std::uint32_t>(std::lround(0.3 / cfg.adc_primary.lsb())));

  fe.set_ideal(true);
  const auto e = fe.sample();
  CHECK(e.primary == s.primary);
  CHECK(e.primary_v == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(e.secondary_v == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(fe.set_control(0.123456789) == 0.123456789);

  fe.sense(0.2, 0.2);  // 32 x 0.2 V saturates the secondary PGA
  CHECK(fe.flags().pga_secondary);
}
