#include "gyrocond/system/protocol.hpp"

#include <cmath>

#include "gyrocond/error.hpp"

namespace gyrocond::system {

using nlohmann::json;

namespace {

std::string id_key(const json& id) { return id.dump(); }

const json& require(const json& args, const char* key) {
  if (!args.is_object() || !args.contains(key)) {
    throw Error("malformed", std::string("missing argument '") + key + "'");
  }
  return args.at(key);
}

std::string require_string(const json& args, const char* key) {
  const json& v = require(args, key);
  if (!v.is_string()) throw Error("malformed", std::string("argument '") + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& args, const char* key) {
  const json& v = require(args, key);
  if (!v.is_number()) throw Error("malformed", std::string("argument '") + key + "' must be a number");
  return v.get<double>();
}

int optional_int(const json& args, const char* key, int fallback) {
  if (!args.is_object() || !args.contains(key)) return fallback;
  const json& v = args.at(key);
  if (!v.is_number_integer()) throw Error("malformed", std::string("argument '") + key + "' must be an integer");
  return v.get<int>();
}

json register_value(const regmap::RegisterDescriptor& d, std::uint32_t raw) {
  json j{{"name", d.name}, {"raw", raw}};
  switch (d.kind) {
    case regmap::Kind::Float: j["value"] = regmap::decode_f32(raw); break;
    case regmap::Kind::Bool: j["value"] = raw != 0; break;
    case regmap::Kind::Unsigned: j["value"] = raw; break;
  }
  return j;
}

std::uint32_t encode_value(const regmap::RegisterDescriptor& d, const json& args) {
  if (args.contains("raw")) {
    const json& r = args.at("raw");
    if (!r.is_number_unsigned() && !(r.is_number_integer() && r.get<std::int64_t>() >= 0)) {
      throw Error("out-of-range", "raw value must be a non-negative integer");
    }
    const auto v = r.get<std::uint64_t>();
    if (v > 0xFFFF'FFFFull) throw Error("out-of-range", "raw value exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
  }
  const json& v = require(args, "value");
  if (d.kind == regmap::Kind::Float) {
    if (!v.is_number()) throw Error("malformed", "value must be a number");
    return regmap::encode_f32(v.get<double>());
  }
  if (v.is_boolean()) return v.get<bool>() ? 1u : 0u;
  if (!v.is_number()) throw Error("malformed", "value must be a number");
  const double x = v.get<double>();
  if (!(x >= 0.0) || x != std::floor(x) || x > 4294967295.0) {
    throw Error("out-of-range", "value must be a non-negative integer that fits the register");
  }
  return static_cast<std::uint32_t>(x);
}

model::AngularRate parse_rate(const json& args) {
  const double v = require_number(args, "rate");
  const std::string unit = require_string(args, "unit");
  if (unit == "dps") return model::AngularRate::deg_per_s(v);
  if (unit == "rad/s") return model::AngularRate::rad_per_s(v);
  throw Error("malformed", "unit must be 'dps' or 'rad/s'");
}

}  // namespace

json error_response(const json& id, const std::string& code, const std::string& message) {
  return {{"v", kProtocolVersion},
          {"type", "response"},
          {"id", id},
          {"ok", false},
          {"error", {{"code", code}, {"message", message}}}};
}

json frame_message(const TapFrame& frame) {
  json j = frame.to_json();
  j["v"] = kProtocolVersion;
  j["type"] = "frame";
  return j;
}

ProtocolSession::ProtocolSession(Supervisor& sup, ScenarioRunner runner)
    : sup_(sup), runner_(std::move(runner)) {}

json ProtocolSession::handle_line(std::string_view line) {
  json msg = json::parse(line.begin(), line.end(), nullptr, false);
  if (msg.is_discarded()) return error_response(nullptr, "malformed", "message is not valid JSON");
  return handle(msg);
}

json ProtocolSession::handle(const json& msg) {
  if (!msg.is_object()) return error_response(nullptr, "malformed", "message must be a JSON object");
  const json id = msg.contains("id") ? msg.at("id") : json();
  if (!id.is_string() && !id.is_number_integer()) {
    return error_response(nullptr, "malformed", "id must be a string or an integer");
  }
  if (!msg.contains("v") || !msg.at("v").is_number_integer()) {
    return error_response(id, "malformed", "missing protocol version 'v'");
  }
  if (msg.at("v").get<int>() != kProtocolVersion) {
    return error_response(id, "unsupported-version", "protocol version must be 1");
  }
  if (!msg.contains("op") || !msg.at("op").is_string()) {
    return error_response(id, "malformed", "missing string 'op'");
  }
  if (!seen_ids_.insert(id_key(id)).second) {
    return error_response(id, "duplicate-id", "id " + id.dump() + " was already used on this connection");
  }
  const json args = msg.contains("args") ? msg.at("args") : json::object();
  if (!args.is_object()) return error_response(id, "malformed", "args must be an object");

  try {
    json result = dispatch(msg.at("op").get<std::string>(), args);
    return {{"v", kProtocolVersion}, {"type", "response"}, {"id", id}, {"ok", true}, {"result", std::move(result)}};
  } catch (const Error& e) {
    return error_response(id, e.code(), e.what());
  } catch (const json::exception& e) {
    return error_response(id, "malformed", e.what());
  } catch (const std::exception& e) {
    return error_response(id, "internal", e.what());
  }
}

json ProtocolSession::dispatch(const std::string& op, const json& args) {
  if (op == "get_status") {
    json s = sup_.status().to_json();
    s["time_s"] = sup_.time_s();
    return s;
  }
  if (op == "get_manifest") return sup_.kernel().registers().manifest();
  if (op == "read_reg") {
    const std::string name = require_string(args, "name");
    const auto& file = sup_.kernel().registers();
    const auto& d = file.descriptor(file.index_of(name));
    return register_value(d, sup_.read_register(name));
  }
  if (op == "write_reg") {
    const std::string name = require_string(args, "name");
    const auto& file = sup_.kernel().registers();
    const auto& d = file.descriptor(file.index_of(name));
    if (d.access == regmap::Access::RO) throw Error("read-only", name + " is read-only");
    sup_.write_register(name, encode_value(d, args));
    return register_value(d, sup_.read_register(name));
  }
  if (op == "selfcheck") return sup_.selfcheck().to_json();
  if (op == "capture") {
    CaptureRequest req;
    req.tap = tap_from_name(require_string(args, "tap"));
    req.count = optional_int(args, "count", 0);
    req.decimation = optional_int(args, "decimation", 1);
    if (args.contains("lo")) req.lo = require_number(args, "lo");
    if (args.contains("hi")) req.hi = require_number(args, "hi");
    return sup_.capture(req).to_json();
  }
  if (op == "subscribe_tap") {
    const Tap t = tap_from_name(require_string(args, "tap"));
    const int dec = optional_int(args, "decimation", 0);
    if (dec < 0) throw Error("out-of-range", "decimation must be >= 1");
    sup_.kernel().subscribe(t, dec);
    subs_[t] = dec;
    const TapInfo& info = tap_info(t);
    return {{"tap", info.name}, {"unit", info.unit}, {"frame_period_s", Kernel::kFramePeriodS}};
  }
  if (op == "unsubscribe_tap") {
    const Tap t = tap_from_name(require_string(args, "tap"));
    sup_.kernel().unsubscribe(t);
    subs_.erase(t);
    return {{"tap", tap_info(t).name}};
  }
  if (op == "set_environment") {
    const double temp = args.contains("temp_c") ? require_number(args, "temp_c") : sup_.kernel().model().state().temp;
    sup_.set_environment(parse_rate(args), temp);
    const auto& st = sup_.kernel().model().state();
    return {{"rate_dps", model::AngularRate::rad_per_s(st.omega_z).deg_per_s()}, {"temp_c", st.temp}};
  }
  if (op == "run_scenario") {
    if (!runner_) throw Error("unsupported", "this service has no scenario runner");
    const std::string name = require_string(args, "name");
    return runner_(name, args.contains("config") ? args.at("config") : json::object());
  }
  if (op == "reset") {
    sup_.reset();
    for (const auto& [t, dec] : subs_) sup_.kernel().subscribe(t, dec);
    json s = sup_.status().to_json();
    s["time_s"] = sup_.time_s();
    return s;
  }
  throw Error("unknown-op", "unknown op '" + op + "'");
}

}  // namespace gyrocond::system
