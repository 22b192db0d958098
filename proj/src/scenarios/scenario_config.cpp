#include "gyrocond/scenarios/scenario_config.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "gyrocond/error.hpp"
#include "gyrocond/system/register_set.hpp"

namespace gyrocond::scenarios {

using nlohmann::json;

namespace {

[[noreturn]] void malformed(const std::string& what) { throw Error("malformed", what); }

double num(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) malformed(std::string("'") + key + "' must be a number");
  return j.at(key).get<double>();
}

double num_or(const json& j, const char* key, double fallback) {
  return j.contains(key) ? num(j, key) : fallback;
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) malformed(where + " must be an object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* allowed : keys) known = known || k == allowed;
    if (!known) malformed("unknown key '" + k + "' in " + where);
  }
}

const regmap::RegisterFile& reference_registers() {
  static const regmap::RegisterFile file = system::make_register_file();
  return file;
}

}  // namespace

double RateStimulus::rate_at(double t) const {
  switch (kind) {
    case Kind::Constant: return rate_dps;
    case Kind::Step: return t < at_s ? from_dps : to_dps;
    case Kind::Sine: return offset_dps + amplitude_dps * std::sin(2.0 * std::numbers::pi * freq_hz * t);
    case Kind::Staircase: {
      if (levels_dps.empty()) return 0.0;
      const auto i = static_cast<std::size_t>(std::max(0.0, std::floor(t / dwell_s)));
      return levels_dps[std::min(i, levels_dps.size() - 1)];
    }
  }
  return 0.0;
}

RateStimulus RateStimulus::from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    malformed("stimulus needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  RateStimulus s;
  if (type == "constant") {
    only_keys(j, {"type", "rate_dps"}, "stimulus");
    s.kind = Kind::Constant;
    s.rate_dps = num(j, "rate_dps");
  } else if (type == "step") {
    only_keys(j, {"type", "from_dps", "to_dps", "at_s"}, "stimulus");
    s.kind = Kind::Step;
    s.from_dps = num(j, "from_dps");
    s.to_dps = num(j, "to_dps");
    s.at_s = num(j, "at_s");
  } else if (type == "sine") {
    only_keys(j, {"type", "amplitude_dps", "freq_hz", "offset_dps"}, "stimulus");
    s.kind = Kind::Sine;
    s.amplitude_dps = num(j, "amplitude_dps");
    s.freq_hz = num(j, "freq_hz");
    s.offset_dps = num_or(j, "offset_dps", 0.0);
    if (!(s.freq_hz > 0.0)) malformed("sine freq_hz must be > 0");
  } else if (type == "staircase") {
    only_keys(j, {"type", "levels_dps", "dwell_s"}, "stimulus");
    s.kind = Kind::Staircase;
    if (!j.contains("levels_dps") || !j.at("levels_dps").is_array() || j.at("levels_dps").empty()) {
      malformed("staircase needs a non-empty 'levels_dps' array");
    }
    for (const auto& v : j.at("levels_dps")) {
      if (!v.is_number()) malformed("staircase levels must be numbers");
      s.levels_dps.push_back(v.get<double>());
    }
    s.dwell_s = num(j, "dwell_s");
    if (!(s.dwell_s > 0.0)) malformed("staircase dwell_s must be > 0");
  } else {
    malformed("unknown stimulus type '" + type + "'");
  }
  return s;
}

json RateStimulus::to_json() const {
  switch (kind) {
    case Kind::Constant: return {{"type", "constant"}, {"rate_dps", rate_dps}};
    case Kind::Step: return {{"type", "step"}, {"from_dps", from_dps}, {"to_dps", to_dps}, {"at_s", at_s}};
    case Kind::Sine:
      return {{"type", "sine"}, {"amplitude_dps", amplitude_dps}, {"freq_hz", freq_hz}, {"offset_dps", offset_dps}};
    case Kind::Staircase: return {{"type", "staircase"}, {"levels_dps", levels_dps}, {"dwell_s", dwell_s}};
  }
  return {};
}

double TempProfile::temp_at(double t) const {
  switch (kind) {
    case Kind::Constant: return temp_c;
    case Kind::Ramp: {
      const double span = to_c - from_c;
      const double moved = rate_c_per_s * t;
      if (std::abs(moved) >= std::abs(span)) return to_c;
      return from_c + std::copysign(moved, span);
    }
    case Kind::Points: {
      if (t <= points.front().first) return points.front().second;
      for (std::size_t i = 1; i < points.size(); ++i) {
        if (t <= points[i].first) {
          const auto [t0, y0] = points[i - 1];
          const auto [t1, y1] = points[i];
          return y0 + (y1 - y0) * (t - t0) / (t1 - t0);
        }
      }
      return points.back().second;
    }
  }
  return temp_c;
}

TempProfile TempProfile::from_json(const json& j) {
  if (!j.is_object() || !j.contains("type") || !j.at("type").is_string()) {
    malformed("temperature needs a string 'type'");
  }
  const std::string type = j.at("type").get<std::string>();
  TempProfile p;
  auto guard = [](double t) {
    if (t < model::kMinTempC || t > model::kMaxTempC) malformed("temperature outside [-55, 150] C");
    return t;
  };
  if (type == "constant") {
    only_keys(j, {"type", "temp_c"}, "temperature");
    p.kind = Kind::Constant;
    p.temp_c = guard(num(j, "temp_c"));
  } else if (type == "ramp") {
    only_keys(j, {"type", "from_c", "to_c", "rate_c_per_s"}, "temperature");
    p.kind = Kind::Ramp;
    p.from_c = guard(num(j, "from_c"));
    p.to_c = guard(num(j, "to_c"));
    p.rate_c_per_s = num(j, "rate_c_per_s");
    if (!(p.rate_c_per_s > 0.0)) malformed("ramp rate_c_per_s must be > 0");
  } else if (type == "points") {
    only_keys(j, {"type", "points"}, "temperature");
    p.kind = Kind::Points;
    if (!j.contains("points") || !j.at("points").is_array() || j.at("points").empty()) {
      malformed("points profile needs a non-empty 'points' array of [t_s, temp_c]");
    }
    for (const auto& pt : j.at("points")) {
      if (!pt.is_array() || pt.size() != 2 || !pt[0].is_number() || !pt[1].is_number()) {
        malformed("each temperature point must be [t_s, temp_c]");
      }
      const double t = pt[0].get<double>();
      if (!p.points.empty() && !(t > p.points.back().first)) malformed("temperature point times must increase");
      p.points.emplace_back(t, guard(pt[1].get<double>()));
    }
  } else {
    malformed("unknown temperature type '" + type + "'");
  }
  return p;
}

json TempProfile::to_json() const {
  switch (kind) {
    case Kind::Constant: return {{"type", "constant"}, {"temp_c", temp_c}};
    case Kind::Ramp: return {{"type", "ramp"}, {"from_c", from_c}, {"to_c", to_c}, {"rate_c_per_s", rate_c_per_s}};
    case Kind::Points: {
      json pts = json::array();
      for (const auto& [t, c] : points) pts.push_back({t, c});
      return {{"type", "points"}, {"points", pts}};
    }
  }
  return {};
}

model::GyroParams apply_gyro_overrides(model::GyroParams p, const json& o) {
  if (!o.is_object()) malformed("gyro overrides must be an object");
  for (const auto& [k, v] : o.items()) {
    double x = 0.0;
    if (v.is_string() && v.get<std::string>() == "inf" && (k == "q1" || k == "q2")) {
      x = std::numeric_limits<double>::infinity();
    } else if (v.is_number()) {
      x = v.get<double>();
    } else {
      malformed("gyro override '" + k + "' must be a number");
    }
    if (k == "f1") p.f1 = x;
    else if (k == "f2") p.f2 = x;
    else if (k == "q1") p.q1 = x;
    else if (k == "q2") p.q2 = x;
    else if (k == "kappa") p.kappa = x;
    else if (k == "mass") p.mass = x;
    else if (k == "g_drive") p.g_drive = x;
    else if (k == "g_pickoff") p.g_pickoff = x;
    else if (k == "tc_f") p.tc_f = x;
    else if (k == "tc_g") p.tc_g = x;
    else if (k == "k3") p.k3 = x;
    else if (k == "x_ref") p.x_ref = x;
    else if (k == "pickoff_noise") p.pickoff_noise = x;
    else malformed("unknown gyro parameter '" + k + "'");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    malformed(std::string("invalid gyro parameters: ") + e.what());
  }
  return p;
}

std::uint32_t encode_register(const std::string& name, const json& v) {
  const auto& file = reference_registers();
  const auto& d = file.descriptor(file.index_of(name));
  if (d.access == regmap::Access::RO) throw Error("read-only", name + " is read-only");
  if (d.kind == regmap::Kind::Float) {
    if (!v.is_number()) malformed("register " + name + " takes a number");
    return regmap::encode_f32(v.get<double>());
  }
  if (v.is_boolean()) return v.get<bool>() ? 1u : 0u;
  if (!v.is_number()) malformed("register " + name + " takes a number");
  const double x = v.get<double>();
  if (!(x >= 0.0) || x != std::floor(x) || x > 4294967295.0) {
    throw Error("out-of-range", "register " + name + " takes a non-negative integer");
  }
  return static_cast<std::uint32_t>(x);
}

ScenarioConfig ScenarioConfig::from_json(const json& j) {
  only_keys(j, {"scenario", "seed", "duration_s", "gyro", "registers", "stimulus", "temperature", "params",
                "calibration_file", "calibrate"},
            "scenario config");
  ScenarioConfig c;
  if (j.contains("scenario")) {
    if (!j.at("scenario").is_string()) malformed("'scenario' must be a string");
    c.scenario = j.at("scenario").get<std::string>();
  }
  if (!j.contains("seed") || !j.at("seed").is_number_integer() || j.at("seed").get<std::int64_t>() < 0) {
    malformed("'seed' is mandatory and must be a non-negative integer");
  }
  c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("duration_s")) {
    c.duration_s = num(j, "duration_s");
    if (!(*c.duration_s > 0.0)) malformed("duration_s must be > 0");
  }
  if (j.contains("gyro")) {
    c.gyro = j.at("gyro");
    apply_gyro_overrides({}, c.gyro);
  }
  if (j.contains("registers")) {
    c.registers = j.at("registers");
    c.register_writes();
  }
  if (j.contains("stimulus")) c.stimulus = RateStimulus::from_json(j.at("stimulus"));
  if (j.contains("temperature")) c.temperature = TempProfile::from_json(j.at("temperature"));
  if (j.contains("params")) {
    if (!j.at("params").is_object()) malformed("params must be an object");
    c.params = j.at("params");
  }
  if (j.contains("calibration_file")) {
    if (!j.at("calibration_file").is_string()) malformed("calibration_file must be a string");
    c.calibration_file = j.at("calibration_file").get<std::string>();
  }
  if (j.contains("calibrate")) {
    if (!j.at("calibrate").is_boolean()) malformed("calibrate must be a boolean");
    c.calibrate = j.at("calibrate").get<bool>();
  }
  return c;
}

json ScenarioConfig::to_json() const {
  json j{{"scenario", scenario}, {"seed", seed}, {"gyro", gyro}, {"registers", registers},
         {"params", params},     {"calibrate", calibrate}};
  if (duration_s) j["duration_s"] = *duration_s;
  if (stimulus) j["stimulus"] = stimulus->to_json();
  if (temperature) j["temperature"] = temperature->to_json();
  if (calibration_file) j["calibration_file"] = *calibration_file;
  return j;
}

model::GyroParams ScenarioConfig::gyro_params() const { return apply_gyro_overrides({}, gyro); }

system::RegisterWrites ScenarioConfig::register_writes() const {
  if (!registers.is_object()) malformed("registers must be an object");
  system::RegisterWrites w;
  for (const auto& [name, v] : registers.items()) w.emplace_back(name, encode_register(name, v));
  return w;
}

double ScenarioConfig::param(const std::string& key, double fallback) const {
  if (!params.contains(key)) return fallback;
  if (!params.at(key).is_number()) malformed("param '" + key + "' must be a number");
  return params.at(key).get<double>();
}

std::vector<double> ScenarioConfig::param_list(const std::string& key, std::vector<double> fallback) const {
  if (!params.contains(key)) return fallback;
  const json& v = params.at(key);
  if (!v.is_array() || v.empty()) malformed("param '" + key + "' must be a non-empty array");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) malformed("param '" + key + "' must contain numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

}  // namespace gyrocond::scenarios
