#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrocond/model/gyro_model.hpp"
#include "gyrocond/system/supervisor.hpp"

namespace gyrocond::scenarios {

/// Applied yaw rate as a function of time since the stimulus started.
struct RateStimulus {
  enum class Kind { Constant, Step, Sine, Staircase };
  Kind kind = Kind::Constant;
  double rate_dps = 0.0;     // constant
  double from_dps = 0.0;     // step
  double to_dps = 0.0;
  double at_s = 0.0;
  double amplitude_dps = 0.0;  // sine
  double freq_hz = 0.0;
  double offset_dps = 0.0;
  std::vector<double> levels_dps;  // staircase
  double dwell_s = 0.0;

  double rate_at(double t_s) const;
  static RateStimulus from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Die temperature as a function of time.
struct TempProfile {
  enum class Kind { Constant, Ramp, Points };
  Kind kind = Kind::Constant;
  double temp_c = model::kReferenceTempC;
  double from_c = 0.0;  // ramp
  double to_c = 0.0;
  double rate_c_per_s = 0.0;
  std::vector<std::pair<double, double>> points;  // (t_s, temp_c), piecewise linear

  double temp_at(double t_s) const;
  static TempProfile from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Everything a scenario run depends on. The seed is mandatory.
struct ScenarioConfig {
  std::string scenario;
  std::uint64_t seed = 0;
  std::optional<double> duration_s;
  nlohmann::json gyro = nlohmann::json::object();       // GyroParams overrides
  nlohmann::json registers = nlohmann::json::object();  // register name -> value
  std::optional<RateStimulus> stimulus;
  std::optional<TempProfile> temperature;
  nlohmann::json params = nlohmann::json::object();  // scenario-specific knobs
  std::optional<std::string> calibration_file;
  bool calibrate = true;

  /// Throws malformed on unknown keys, missing seed or bad values.
  static ScenarioConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;

  model::GyroParams gyro_params() const;
  /// Register overrides as raw writes, in name order.
  system::RegisterWrites register_writes() const;

  double param(const std::string& key, double fallback) const;
  std::vector<double> param_list(const std::string& key, std::vector<double> fallback) const;
};

/// Apply JSON overrides to gyro parameters. "inf" is accepted for q1, q2.
model::GyroParams apply_gyro_overrides(model::GyroParams p, const nlohmann::json& overrides);

/// Encode one register value from JSON using the register's kind.
std::uint32_t encode_register(const std::string& name, const nlohmann::json& value);

}  // namespace gyrocond::scenarios
