#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "gyrocond/analysis/welch.hpp"
#include "gyrocond/system/supervisor.hpp"

namespace gyrocond::scenarios {

struct DeviceSpec {
  model::GyroParams params;
  std::uint64_t seed = 0;
  system::RegisterWrites writes;  // applied in the configuration phase
  double temp_c = model::kReferenceTempC;
  double rate_dps = 0.0;
  bool ideal_converters = false;  // front-end test hook
};

/// Power up a device and run its startup sequence. Throws startup-fault,
/// naming the phase, unless it becomes ready within `max_s`.
std::unique_ptr<system::Supervisor> start_device(const DeviceSpec& spec, double max_s = 3.0);

/// Throws not-ready unless the status word reports ready.
void require_ready(const system::Supervisor& sup);

/// Change the applied rate, keeping the temperature.
void set_rate(system::Supervisor& sup, double rate_dps);

/// Capture `count` samples of a tap in engineering units, quantized over
/// [lo, hi].
std::vector<double> record(system::Supervisor& sup, system::Tap tap, int count, double lo, double hi,
                           int decimation = 1);

/// Mean of a 1 kHz output-rate tap over `seconds`.
double average_output(system::Supervisor& sup, system::Tap tap, double seconds, double lo, double hi);

/// Mean NCO frequency over `seconds`, in Hz.
double mean_nco_frequency(system::Supervisor& sup, double seconds, double f_center);

inline constexpr double kNoiseBandLoHz = 1.0;
inline constexpr double kNoiseBandHiHz = 20.0;
inline constexpr int kNoiseSegment = 1024;

struct NoiseMeasurement {
  double density_dps_rthz = 0.0;  // mean sqrt(PSD) over 1..20 Hz
  double mean_dps = 0.0;
  analysis::Psd psd;
  system::TraceBuffer trace;
};

/// Zero-rate noise of rate_compensated over `duration_s` (5 s minimum,
/// capture capacity maximum).
NoiseMeasurement measure_noise(system::Supervisor& sup, double duration_s);

}  // namespace gyrocond::scenarios
