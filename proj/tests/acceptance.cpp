#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gyrocond/error.hpp"
#include "gyrocond/regmap/scan_chain.hpp"
#include "gyrocond/scenarios/measure.hpp"
#include "gyrocond/scenarios/scenarios.hpp"
#include "gyrocond/system/register_set.hpp"
#include "oracles.hpp"

using namespace gyrocond;
using namespace gyrocond::scenarios;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

ScenarioConfig seeded(std::uint64_t seed, json extra = json::object()) {
  extra["seed"] = seed;
  return ScenarioConfig::from_json(extra);
}

std::string metric_text(const MetricsReport& r) {
  std::string s;
  for (const auto& m : r.metrics) {
    if (!m.bound) continue;
    if (!s.empty()) s += ", ";
    s += m.name + "=" + format_number(m.value);
  }
  return s;
}

Outcome scenario_outcome(const MetricsReport& r, const fs::path& dir) {
  r.write(dir);
  return {r.pass(), metric_text(r)};
}

std::map<std::string, std::string> read_tree(const fs::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(e.path(), dir).string()] = s.str();
  }
  return files;
}

Outcome turn_on(const fs::path& out) {
  const auto cfg = seeded(1);
  const auto lock = run_lock(cfg);
  lock.write(out / "lock");
  const double turn_on_ms = lock.metric("turn_on_time_ms").value;

  const PreparedDevice dev = prepare(cfg);
  system::SupervisorOptions opts;
  opts.config = dev.writes;
  const auto t0 = std::chrono::steady_clock::now();
  system::Supervisor sup(dev.params, cfg.seed, opts);
  sup.advance_ticks(500'000);
  const double wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const bool pass = lock.metric("turn_on_time_ms").pass() && sup.status().ready && wall_s <= 30.0;
  return {pass, "turn_on_time_ms=" + format_number(turn_on_ms) + ", wall_s for 5e5 ticks=" + fmt("%.2f", wall_s)};
}

Outcome oracle_equivalence() {
  const double stepper = oracles::stepper_vs_rk4_error();
  const double demod = oracles::demod_sweep_error();
  const double parseval = oracles::welch_parseval_error();
  const double dft = oracles::welch_vs_dft_error();
  const bool pass = stepper <= 1e-6 && demod <= 1e-3 && parseval <= 0.05 && dft <= 1e-9;
  return {pass, "stepper=" + fmt("%.2e", stepper) + ", demod=" + fmt("%.2e", demod) +
                    ", parseval=" + fmt("%.2e", parseval) + ", dft=" + fmt("%.2e", dft)};
}

Outcome read_back() {
  auto file = system::make_register_file();
  regmap::ScanChain chain(file);
  const auto check = chain.selfcheck();

  chain.set_test_mode(true);
  std::vector<std::size_t> rw;
  for (std::size_t i = 0; i < file.size(); ++i) {
    if (file.descriptor(i).access == regmap::Access::RW) rw.push_back(i);
  }
  std::mt19937_64 rng(42);
  int mismatches = 0;
  for (int k = 0; k < 10'000; ++k) {
    const auto& d = file.descriptor(rw[rng() % rw.size()]);
    const auto v = static_cast<std::uint32_t>(rng()) & regmap::width_mask(d.width);
    chain.write(d.name, v);
    if (chain.read(d.name) != v) ++mismatches;
  }
  chain.set_test_mode(false);

  const std::string victim = "agc.kp";
  file.inject_stuck_bit(victim, 3, true);
  const auto stuck = chain.selfcheck();
  bool named = !stuck.pass && !stuck.failures.empty();
  for (const auto& f : stuck.failures) named = named && f.register_name == victim;
  file.clear_stuck_bits();

  return {check.pass && mismatches == 0 && named,
          std::string("selfcheck ") + (check.pass ? "pass" : "fail") + " (" + std::to_string(check.patterns) +
              " patterns), round-trip mismatches=" + std::to_string(mismatches) + ", stuck bit " +
              (named ? "named " + victim : "not isolated")};
}

Outcome determinism(const fs::path& out) {
  const auto a = out / "determinism" / "a";
  const auto b = out / "determinism" / "b";
  fs::remove_all(out / "determinism");
  for (const auto& dir : {a, b}) {
    run_lock(seeded(7)).write(dir / "lock");
    run_linearity(seeded(7)).write(dir / "linearity");
  }
  const auto fa = read_tree(a);
  const auto fb = read_tree(b);
  int differing = 0;
  for (const auto& [name, text] : fa) {
    auto it = fb.find(name);
    if (it == fb.end() || it->second != text) ++differing;
  }
  const bool pass = !fa.empty() && fa.size() == fb.size() && differing == 0;
  return {pass, std::to_string(fa.size()) + " files compared, " + std::to_string(differing) + " differ"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("acceptance suite");
  std::string out = "acceptance_out";
  app.add_option("--out", out, "output directory for scenario reports");
  CLI11_PARSE(app, argc, argv);
  const fs::path root(out);
  fs::create_directories(root);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"turn-on", [&] { return turn_on(root); }},
      {"sensitivity/null/nonlinearity", [&] { return scenario_outcome(run_linearity(seeded(1)), root / "linearity"); }},
      {"noise", [&] { return scenario_outcome(run_noise(seeded(1)), root / "noise"); }},
      {"bandwidth", [&] { return scenario_outcome(run_bandwidth(seeded(1)), root / "bandwidth"); }},
      {"over-temperature", [&] { return scenario_outcome(run_temp_sweep(seeded(1)), root / "temp_sweep"); }},
      {"closed-loop suppression", [&] { return scenario_outcome(run_closed_loop(seeded(1)), root / "closed_loop"); }},
      {"oracle equivalence", oracle_equivalence},
      {"read-back", read_back},
      {"determinism", [&] { return determinism(root); }},
  };

  int passed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const Error& e) {
      o = {false, "error [" + e.code() + "]: " + e.what()};
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    passed += o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria pass\n", passed, criteria.size());
  return passed == static_cast<int>(criteria.size()) ? 0 : 1;
}
