#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <pthread.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gyrocond/error.hpp"
#include "gyrocond/scenarios/scenarios.hpp"
#include "gyrocond/service/server.hpp"
#include "gyrocond/system/register_set.hpp"

using nlohmann::json;
namespace sc = gyrocond::scenarios;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gyrocond::Error("io", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw gyrocond::Error("malformed", path + ": " + e.what());
  }
}

std::string bound_text(const sc::Metric& m) {
  if (!m.bound) return "";
  std::string s;
  if (m.bound->min && m.bound->max) {
    s = "[" + sc::format_number(*m.bound->min) + ", " + sc::format_number(*m.bound->max) + "]";
  } else if (m.bound->min) {
    s = ">= " + sc::format_number(*m.bound->min);
  } else if (m.bound->max) {
    s = "<= " + sc::format_number(*m.bound->max);
  }
  return s + "  (" + m.bound->source + ")";
}

void print_report(const sc::MetricsReport& r) {
  std::printf("scenario %s  seed %llu\n", r.scenario.c_str(), static_cast<unsigned long long>(r.seed));
  for (const auto& m : r.metrics) {
    std::printf("  %-4s %-30s %20s %-12s %s\n", m.bound ? (m.pass() ? "PASS" : "FAIL") : "", m.name.c_str(),
                sc::format_number(m.value).c_str(), m.unit.c_str(), bound_text(m).c_str());
  }
  std::printf("%s\n", r.pass() ? "PASS" : "FAIL");
}

int cmd_run(const std::string& scenario, const std::string& config_path, std::optional<std::uint64_t> seed,
            const std::string& out) {
  json j = config_path.empty() ? json::object() : load_json(config_path);
  if (!j.is_object()) throw gyrocond::Error("malformed", "config must be a JSON object");
  j["scenario"] = scenario;
  if (seed) j["seed"] = *seed;
  const auto cfg = sc::ScenarioConfig::from_json(j);
  const auto report = sc::run_scenario(scenario, cfg);
  report.write(out);
  print_report(report);
  std::printf("wrote %s\n", (std::filesystem::path(out) / "report.json").string().c_str());
  return report.pass() ? 0 : 1;
}

gyrocond::system::ScenarioRunner scenario_runner() {
  return [](const std::string& name, const json& config) {
    json j = config.is_null() ? json::object() : config;
    if (!j.is_object()) throw gyrocond::Error("malformed", "config must be an object");
    if (!j.contains("seed")) j["seed"] = 1;
    j["scenario"] = name;
    return sc::run_scenario(name, sc::ScenarioConfig::from_json(j)).to_json();
  };
}

int cmd_serve(const std::string& address, unsigned short port, const std::string& assets, double speed,
              std::uint64_t seed) {
  if (!(speed > 0.0)) throw gyrocond::Error("malformed", "speed must be positive");
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  gyrocond::service::HostOptions ho;
  ho.seed = seed;
  ho.speed = speed;
  ho.runner = scenario_runner();
  gyrocond::service::ServiceHost host(ho);
  host.start();
  gyrocond::service::Server server(host, {address, port, assets});
  server.start();
  std::printf("serving on http://%s:%u (WebSocket /ws, line JSON on the same port)\n", address.c_str(),
              static_cast<unsigned>(server.port()));
  std::fflush(stdout);

  int sig = 0;
  sigwait(&set, &sig);
  server.stop();
  host.stop();
  return 0;
}

int cmd_selfcheck(std::uint64_t seed) {
  gyrocond::system::Supervisor sup({}, seed);
  const auto report = sup.selfcheck();
  std::cout << report.to_json().dump(2) << "\n";
  std::printf("%s\n", report.pass ? "PASS" : "FAIL");
  return report.pass ? 0 : 1;
}

int cmd_manifest(const std::string& out) {
  const auto text = gyrocond::system::make_register_file().manifest().dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    std::ofstream f(out);
    if (!f) throw gyrocond::Error("io", "cannot write " + out);
    f << text;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gyro conditioning chain simulator"};
  app.require_subcommand(1);

  std::string scenario, config_path, out = "out";
  std::uint64_t seed = 1;
  auto* run = app.add_subcommand("run", "run a scenario and write report.json plus artifacts");
  run->add_option("scenario", scenario, "scenario name")->required()->check(CLI::IsMember(sc::scenario_names()));
  run->add_option("--config", config_path, "scenario config (JSON)");
  auto* seed_opt = run->add_option("--seed", seed, "random seed (overrides the config)");
  run->add_option("--out", out, "output directory")->capture_default_str();

  std::string address = "127.0.0.1", assets;
  unsigned short port = 8765;
  double speed = 1.0;
  std::uint64_t serve_seed = 1;
  auto* serve = app.add_subcommand("serve", "start the device service for the console");
  serve->add_option("--port", port, "TCP port, 0 for any free port")->capture_default_str();
  serve->add_option("--address", address, "bind address")->capture_default_str();
  serve->add_option("--assets", assets, "directory of console static files");
  serve->add_option("--speed", speed, "simulated seconds per wall second")->capture_default_str();
  serve->add_option("--seed", serve_seed, "random seed")->capture_default_str();

  std::uint64_t check_seed = 1;
  auto* check = app.add_subcommand("selfcheck", "scan-chain read-back self-check");
  check->add_option("--seed", check_seed, "random seed")->capture_default_str();

  std::string manifest_out;
  auto* manifest = app.add_subcommand("manifest", "print the register manifest");
  manifest->add_option("--out", manifest_out, "write to a file instead of stdout");

  app.add_subcommand("list", "list scenario names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return cmd_run(scenario, config_path, seed_opt->count() ? std::optional<std::uint64_t>(seed) : std::nullopt,
                     out);
    }
    if (serve->parsed()) return cmd_serve(address, port, assets, speed, serve_seed);
    if (check->parsed()) return cmd_selfcheck(check_seed);
    if (manifest->parsed()) return cmd_manifest(manifest_out);
    for (const auto& n : sc::scenario_names()) std::printf("%s\n", n.c_str());
    return 0;
  } catch (const gyrocond::Error& e) {
    std::fprintf(stderr, "error [%s]: %s\n", e.code().c_str(), e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
