#include "gyrocond/scenarios/measure.hpp"

#include <cmath>

#include "gyrocond/analysis/fit.hpp"
#include "gyrocond/error.hpp"

namespace gyrocond::scenarios {

using system::Supervisor;
using system::Tap;

std::unique_ptr<Supervisor> start_device(const DeviceSpec& spec, double max_s) {
  system::SupervisorOptions opts;
  opts.config = spec.writes;
  auto sup = std::make_unique<Supervisor>(spec.params, spec.seed, opts);
  sup->kernel().front_end().set_ideal(spec.ideal_converters);
  sup->set_environment(model::AngularRate::deg_per_s(spec.rate_dps), spec.temp_c);
  if (!sup->run_startup(max_s)) {
    const auto& st = sup->status();
    if (st.fault_phase != system::StartupPhase::None) {
      throw Error("startup-fault", std::string("startup fault in phase ") +
                                       system::phase_name(st.fault_phase) + ": " + st.fault_message);
    }
    throw Error("startup-fault", "device not ready after " + std::to_string(max_s) + " s");
  }
  return sup;
}

void require_ready(const Supervisor& sup) {
  if (!sup.status().ready) throw Error("not-ready", "the device is not ready");
}

void set_rate(Supervisor& sup, double rate_dps) {
  sup.set_environment(model::AngularRate::deg_per_s(rate_dps), sup.kernel().model().state().temp);
}

std::vector<double> record(Supervisor& sup, Tap tap, int count, double lo, double hi, int decimation) {
  system::CaptureRequest req;
  req.tap = tap;
  req.count = count;
  req.decimation = decimation;
  req.lo = lo;
  req.hi = hi;
  const auto trace = sup.capture(req);
  if (trace.truncated) throw Error("capture-truncated", "capture did not complete");
  return trace.values();
}

double average_output(Supervisor& sup, Tap tap, double seconds, double lo, double hi) {
  const int n = static_cast<int>(std::lround(seconds * system::tap_info(tap).native_rate_hz));
  const auto v = record(sup, tap, n, lo, hi);
  return analysis::mean(v);
}

double mean_nco_frequency(Supervisor& sup, double seconds, double f_center) {
  // Undecimated: the detector ripple at twice the carrier would alias.
  const double fs = system::tap_info(Tap::NcoFw).native_rate_hz;
  long remaining = std::lround(seconds * fs);
  double sum = 0.0;
  const long total = remaining;
  while (remaining > 0) {
    const int n = static_cast<int>(std::min<long>(remaining, system::kCaptureCapacity));
    for (double x : record(sup, Tap::NcoFw, n, f_center - 200.0, f_center + 200.0)) sum += x;
    remaining -= n;
  }
  return sum / static_cast<double>(total);
}

NoiseMeasurement measure_noise(Supervisor& sup, double duration_s) {
  const double fs = system::tap_info(Tap::RateCompensated).native_rate_hz;
  if (!(duration_s >= 5.0)) throw Error("out-of-range", "noise duration must be at least 5 s");
  if (duration_s * fs > system::kCaptureCapacity) {
    throw Error("out-of-range", "noise duration exceeds the capture capacity");
  }
  system::CaptureRequest req;
  req.tap = Tap::RateCompensated;
  req.count = static_cast<int>(std::lround(duration_s * fs));
  req.lo = -25.0;
  req.hi = 25.0;
  NoiseMeasurement m;
  m.trace = sup.capture(req);
  if (m.trace.truncated) throw Error("capture-truncated", "capture did not complete");
  const auto v = m.trace.values();
  m.mean_dps = analysis::mean(v);
  m.psd = analysis::welch_psd(v, m.trace.fs, kNoiseSegment, 0.5);
  m.density_dps_rthz = analysis::band_mean_sqrt(m.psd, kNoiseBandLoHz, kNoiseBandHiHz);
  return m;
}

}  // namespace gyrocond::scenarios
