#include "gyrocond/scenarios/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include "gyrocond/error.hpp"

namespace gyrocond::scenarios {

using nlohmann::json;

bool Bound::contains(double v) const {
  if (!std::isfinite(v)) return false;
  if (min && v < *min) return false;
  if (max && v > *max) return false;
  return true;
}

json Bound::to_json() const {
  json j{{"source", source}};
  j["min"] = min ? json(*min) : json();
  j["max"] = max ? json(*max) : json();
  return j;
}

json Metric::to_json() const {
  json j{{"name", name}, {"unit", unit}};
  j["value"] = std::isfinite(value) ? json(value) : json();
  if (bound) {
    j["bound"] = bound->to_json();
    j["pass"] = pass();
  }
  return j;
}

Metric& MetricsReport::add(std::string name, double value, std::string unit, std::optional<Bound> bound) {
  metrics.push_back(Metric{std::move(name), value, std::move(unit), std::move(bound)});
  return metrics.back();
}

const Metric& MetricsReport::metric(const std::string& name) const {
  for (const auto& m : metrics) {
    if (m.name == name) return m;
  }
  throw Error("unknown-metric", "report has no metric " + name);
}

bool MetricsReport::pass() const {
  for (const auto& m : metrics) {
    if (!m.pass()) return false;
  }
  return true;
}

json MetricsReport::to_json() const {
  json ms = json::array();
  for (const auto& m : metrics) ms.push_back(m.to_json());
  json fs = json::array();
  for (const auto& f : files) fs.push_back(f.file);
  return {{"scenario", scenario}, {"seed", seed},   {"pass", pass()},
          {"metrics", ms},        {"details", details}, {"files", fs}};
}

void MetricsReport::write(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("io", "cannot write " + (dir / name).string());
    out << text;
  };
  put("report.json", to_json().dump(2) + "\n");
  for (const auto& f : files) put(f.file, f.content);
}

std::string format_number(double v) {
  if (!std::isfinite(v)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trace_csv(const system::TraceBuffer& t) {
  std::string s = "tap,fs,scale,offset,unit,count,truncated\n";
  s += t.tap + "," + format_number(t.fs) + "," + format_number(t.scale) + "," + format_number(t.offset) +
       "," + t.unit + "," + std::to_string(t.codes.size()) + "," + (t.truncated ? "1" : "0") + "\n";
  s += "index,code,value\n";
  for (std::size_t i = 0; i < t.codes.size(); ++i) {
    s += std::to_string(i) + "," + std::to_string(t.codes[i]) + "," + format_number(t.value(i)) + "\n";
  }
  return s;
}

std::string table_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
  std::string s;
  for (std::size_t i = 0; i < header.size(); ++i) s += (i ? "," : "") + header[i];
  s += "\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + format_number(row[i]);
    s += "\n";
  }
  return s;
}

}  // namespace gyrocond::scenarios
