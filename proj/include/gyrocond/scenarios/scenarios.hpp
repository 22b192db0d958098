#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gyrocond/scenarios/calibration.hpp"
#include "gyrocond/scenarios/report.hpp"
#include "gyrocond/scenarios/scenario_config.hpp"

namespace gyrocond::scenarios {

/// Sensor parameters and register writes for a calibrated device.
struct PreparedDevice {
  model::GyroParams params;
  system::RegisterWrites writes;  // user overrides, then the trim
  std::optional<Calibration> calibration;
  dsp::LoopMode mode = dsp::LoopMode::Closed;
};

/// Apply overrides and trim: a calibration file if given, else a fresh
/// calibration run unless disabled. `mode` forces loop.mode.
PreparedDevice prepare(const ScenarioConfig& cfg, std::optional<dsp::LoopMode> mode = std::nullopt);

MetricsReport run_lock(const ScenarioConfig& cfg);
MetricsReport run_linearity(const ScenarioConfig& cfg);
MetricsReport run_noise(const ScenarioConfig& cfg);
MetricsReport run_bandwidth(const ScenarioConfig& cfg);
MetricsReport run_temp_sweep(const ScenarioConfig& cfg);
MetricsReport run_closed_loop(const ScenarioConfig& cfg);
MetricsReport run_calibrate(const ScenarioConfig& cfg);
MetricsReport run_noise_calibration(const ScenarioConfig& cfg);
MetricsReport run_trace(const ScenarioConfig& cfg);

const std::vector<std::string>& scenario_names();

/// Dispatch on `name`, or on cfg.scenario when `name` is empty. Throws
/// unknown-scenario.
MetricsReport run_scenario(const std::string& name, const ScenarioConfig& cfg);

}  // namespace gyrocond::scenarios
