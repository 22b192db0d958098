#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrocond/system/kernel.hpp"

namespace gyrocond::scenarios {

/// Acceptance bound and the datasheet row (or design target) it comes from.
struct Bound {
  std::optional<double> min;
  std::optional<double> max;
  std::string source;

  bool contains(double v) const;
  nlohmann::json to_json() const;
};

struct Metric {
  std::string name;
  double value = 0.0;
  std::string unit;
  std::optional<Bound> bound;

  bool pass() const { return !bound || bound->contains(value); }
  nlohmann::json to_json() const;
};

/// A file written next to report.json.
struct Artifact {
  std::string file;
  std::string content;
};

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::vector<Metric> metrics;
  nlohmann::json details = nlohmann::json::object();
  std::vector<Artifact> files;

  Metric& add(std::string name, double value, std::string unit, std::optional<Bound> bound = std::nullopt);
  const Metric& metric(const std::string& name) const;
  bool pass() const;
  nlohmann::json to_json() const;
  /// report.json plus every artifact. Output is a pure function of the
  /// report, so identical runs produce byte-identical files.
  void write(const std::filesystem::path& dir) const;
};

/// Shortest round-trip decimal text for a double.
std::string format_number(double v);

/// Trace CSV: a metadata header (tap, fs, scale, offset, unit, count,
/// truncated), then one row per sample (index, code, value).
std::string trace_csv(const system::TraceBuffer& trace);

/// Plain table CSV with a header row.
std::string table_csv(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows);

}  // namespace gyrocond::scenarios
