#include <doctest.h>

#include <cmath>

#include "error_code.hpp"
#include "gyrocond/analysis/fit.hpp"
#include "gyrocond/system/supervisor.hpp"

using namespace gyrocond;
using namespace gyrocond::system;

namespace {

Supervisor ready_device(std::uint64_t seed = 1, SupervisorOptions opts = {}) {
  Supervisor sup(model::GyroParams{}, seed, opts);
  REQUIRE(sup.run_startup(2.0));
  return sup;
}

// Pickoff amplitude from a fit of the x1 truth tap over 1 ms.
double pickoff_amplitude(Supervisor& sup) {
  CaptureRequest req;
  req.tap = Tap::X1;
  req.count = 1000;
  const auto x = sup.capture(req).values();
  const double f = dsp::word_frequency(sup.kernel().chain().taps().nco_fw, kFastRate);
  const auto& m = sup.kernel().model();
  return analysis::fit_tone(x, kPhysicsRate, f).amplitude * model::pickoff_gain(m.params(), m.state().temp);
}

}  // namespace

TEST_CASE("startup reaches ready inside 500 ms") {
  auto sup = ready_device();
  const auto& st = sup.status();
  CHECK(st.ready);
  CHECK(st.pll_locked);
  CHECK(st.agc_settled);
  CHECK(st.secondary_nulled);
  CHECK(st.phase == StartupPhase::Ready);
  REQUIRE(st.lock_time_ms);
  REQUIRE(st.settle_time_ms);
  REQUIRE(st.turn_on_time_ms);
  CHECK(*st.lock_time_ms <= *st.settle_time_ms);
  CHECK(*st.settle_time_ms <= *st.turn_on_time_ms);
  CHECK(*st.turn_on_time_ms <= 500.0);
  CHECK(sup.read_register("status.turn_on_ms") == static_cast<std::uint32_t>(*st.turn_on_time_ms));
  CHECK((sup.read_register("status.flags") >> status_bit::kReady & 1u) == 1u);

  // Ready stays consistent with its conditions while running.
  for (int i = 0; i < 50; ++i) {
    sup.advance(0.001);
    if (sup.status().ready) {
      REQUIRE(sup.status().pll_locked);
      REQUIRE(sup.status().agc_settled);
    }
  }
}

TEST_CASE("open loop skips the null phase") {
  SupervisorOptions opts;
  opts.config = {{"loop.mode", 0}};
  auto sup = ready_device(2, opts);
  CHECK(sup.status().ready);
  CHECK_FALSE(sup.kernel().chain().rebalance().enabled());
}

TEST_CASE("PLL with zero gains faults in wait-lock") {
  SupervisorOptions opts;
  opts.config = {{"pll.kp", 0}, {"pll.ki", 0}};  // +0.0f
  Supervisor sup(model::GyroParams{}, 1, opts);
  CHECK_FALSE(sup.run_startup(3.0));
  const auto& st = sup.status();
  CHECK(st.fault_phase == StartupPhase::WaitLock);
  CHECK(st.fault_message.find("timeout") != std::string::npos);
  CHECK(st.config_fault);
  CHECK_FALSE(st.ready);
  CHECK(sup.time_s() == doctest::Approx(1.0).epsilon(0.01));
  CHECK(sup.read_register("status.fault_phase") == 2);
}

TEST_CASE("setpoint 0 is rejected in the configuration phase") {
  SupervisorOptions opts;
  opts.config = {{"agc.setpoint_v", regmap::encode_f32(0.0)}};
  Supervisor sup(model::GyroParams{}, 1, opts);
  CHECK_FALSE(sup.run_startup(0.5));
  CHECK(sup.status().fault_phase == StartupPhase::Config);
  CHECK(sup.read_real("agc.setpoint_v") == 1.0);
}

TEST_CASE("watchdog expires 100 ms after the last kick and parks the DACs") {
  auto sup = ready_device();
  Kernel& k = sup.kernel();
  const auto last_kick = k.ticks();  // startup ends on a poll, which kicks
  sup.set_kicks_enabled(false);
  while (!k.watchdog_expired() && k.ticks() < last_kick + 200'000) sup.advance_ticks(1);
  REQUIRE(k.watchdog_expired());
  const auto elapsed = static_cast<long long>(k.ticks() - last_kick);
  CHECK(std::llabs(elapsed - 100'000) <= 1);
  CHECK(k.front_end().drive_code() == 2048);
  CHECK(k.front_end().control_code() == 32768);

  sup.set_kicks_enabled(true);
  sup.advance(0.05);
  CHECK(k.watchdog_expired());  // sticky
  CHECK(sup.status().watchdog_expired);
  CHECK_FALSE(sup.status().ready);
  CHECK(k.front_end().drive_code() == 2048);

  sup.reset();
  CHECK_FALSE(sup.kernel().watchdog_expired());
}

TEST_CASE("watchdog timeout register") {
  SupervisorOptions opts;
  opts.config = {{"sup.watchdog_timeout_ms", 20}};
  Supervisor sup(model::GyroParams{}, 1, opts);
  sup.set_kicks_enabled(false);
  sup.advance(0.019);
  CHECK_FALSE(sup.kernel().watchdog_expired());
  sup.advance(0.002);
  CHECK(sup.kernel().watchdog_expired());
}

TEST_CASE("forcing the NCO 5% off drops lock within a poll plus hysteresis") {
  auto sup = ready_device();
  sup.force_nco_frequency(15'000.0 * 1.05);
  sup.advance(0.003);
  CHECK_FALSE(sup.status().pll_locked);
  CHECK_FALSE(sup.status().ready);
  sup.force_nco_frequency(std::nullopt);
}

TEST_CASE("AGC holds the pickoff amplitude at the setpoint") {
  auto sup = ready_device();
  sup.advance(0.2);
  CHECK(pickoff_amplitude(sup) == doctest::Approx(1.0).epsilon(0.01));

  model::GyroParams linear;
  linear.k3 = 0.0;
  Supervisor one(linear, 3), two(linear, 3, {1.0, {{"agc.setpoint_v", regmap::encode_f32(2.0)}}});
  REQUIRE(one.run_startup(2.0));
  REQUIRE(two.run_startup(2.0));
  one.advance(0.2);
  two.advance(0.2);
  CHECK(pickoff_amplitude(two) / pickoff_amplitude(one) == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("capture") {
  CaptureRequest bad;
  bad.count = kCaptureCapacity + 1;
  CHECK(error_code([&] { bad.validate(); }) == "out-of-range");
  bad.count = 10;
  bad.decimation = 0;
  CHECK(error_code([&] { bad.validate(); }) == "out-of-range");
  bad.decimation = 1;
  bad.lo = 1.0;
  CHECK(error_code([&] { bad.validate(); }) == "malformed");

  auto sup = ready_device();
  CaptureRequest req;
  req.tap = Tap::OutputVolts;
  req.count = kCaptureCapacity + 1;
  CHECK(error_code([&] { sup.capture(req); }) == "out-of-range");
  CHECK(error_code([&] { sup.complete_capture(); }) == "no-capture");

  req.count = 500;
  const auto trace = sup.capture(req);
  REQUIRE(trace.codes.size() == 500);
  CHECK_FALSE(trace.truncated);
  CHECK(trace.fs == 1000.0);
  CHECK(analysis::mean(trace.values()) == doctest::Approx(2.5).epsilon(0.002));
  CHECK(trace.scale == doctest::Approx(5.0 / 65535.0));
  CHECK(trace.to_json().at("codes").size() == 500);
}

TEST_CASE("same seed, same capture") {
  auto run = [] {
    auto sup = ready_device(9);
    sup.set_environment(model::AngularRate::deg_per_s(30.0), 25.0);
    CaptureRequest req;
    req.tap = Tap::RateCompensated;
    req.count = 300;
    return sup.capture(req).codes;
  };
  CHECK(run() == run());
}

TEST_CASE("taps by name") {
  for (const auto& t : tap_catalog()) CHECK(tap_from_name(t.name) == t.id);
  CHECK(tap_catalog().size() == static_cast<std::size_t>(kTapCount));
  CHECK(error_code([] { tap_from_name("nope"); }) == "unknown-tap");
}

TEST_CASE("subscribed taps arrive as frames") {
  auto sup = ready_device();
  Kernel& k = sup.kernel();
  k.subscribe(Tap::OutputVolts);
  k.subscribe(Tap::X2, 100);
  sup.advance(0.1);
  const auto frames = k.drain_frames();
  int volts = 0, x2 = 0;
  for (const auto& f : frames) {
    if (f.tap == "output_volts") {
      ++volts;
      CHECK(f.fs == 1000.0);
      CHECK(f.codes.size() == 20);
    }
    if (f.tap == "x2") {
      ++x2;
      CHECK(f.fs == 10'000.0);
    }
  }
  CHECK(volts >= 4);
  CHECK(x2 >= 4);
  k.unsubscribe(Tap::OutputVolts);
  k.unsubscribe(Tap::X2);
  sup.advance(0.05);
  CHECK(k.drain_frames().empty());

  // Undrained frames are dropped oldest first and counted.
  k.subscribe(Tap::OutputVolts);
  sup.advance(0.020 * (Kernel::kFrameQueueDepth + 10));
  const auto late = k.drain_frames();
  CHECK(late.size() == Kernel::kFrameQueueDepth);
  CHECK(late.front().dropped_before >= 9);
}

TEST_CASE("stimulus runs on schedule") {
  auto sup = ready_device();
  sup.set_stimulus([](Supervisor& s, double t) { s.set_environment(model::AngularRate::deg_per_s(t), 25.0); }, 1000);
  sup.advance(0.01);
  CHECK(sup.kernel().model().state().omega_z ==
        doctest::Approx(model::AngularRate::deg_per_s(sup.time_s() - 0.001).rad_per_s()));
  sup.clear_stimulus();
  CHECK(error_code([&] { sup.set_stimulus([](Supervisor&, double) {}, 0); }) == "out-of-range");
}

TEST_CASE("self-check through the supervisor") {
  auto sup = ready_device();
  CHECK(sup.selfcheck().pass);
  CHECK(sup.status().ready);
}
