#include <doctest.h>

#include <random>
#include <set>
#include <vector>

#include "error_code.hpp"
#include "gyrocond/regmap/register_file.hpp"
#include "gyrocond/regmap/scan_chain.hpp"
#include "gyrocond/system/register_set.hpp"

using namespace gyrocond::regmap;
using gyrocond::system::make_register_file;

namespace {

std::vector<std::uint32_t> decode(const RegisterFile& f, const std::vector<bool>& image) {
  std::vector<std::uint32_t> v(f.size(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int b = 0; b < f.descriptor(i).width; ++b) {
      if (image[f.offset(i) + b]) v[i] |= 1u << b;
    }
  }
  return v;
}

std::vector<std::uint32_t> reset_values(const RegisterFile& f) {
  std::vector<std::uint32_t> v;
  for (const auto& d : f.descriptors()) v.push_back(d.reset_value);
  return v;
}

}  // namespace

TEST_CASE("image after reset equals the reset values") {
  auto file = make_register_file();
  ScanChain chain(file);
  CHECK(decode(file, chain.read_image()) == reset_values(file));

  // Raw TDO stream of the first shift after reset.
  chain.reset_tap();
  CHECK(chain.state() == TapState::Reset);
  chain.tap_step(0, 0);
  chain.tap_step(1, 0);
  chain.tap_step(0, 0);
  REQUIRE(chain.state() == TapState::Shift);
  std::vector<bool> stream;
  for (std::size_t i = 0; i < file.chain_length(); ++i) stream.push_back(chain.tap_step(0, 0) != 0);
  CHECK(decode(file, stream) == reset_values(file));
}

TEST_CASE("chain order is address order and lengths add up") {
  const auto file = make_register_file();
  std::size_t expected = 0;
  for (std::size_t i = 0; i < file.size(); ++i) {
    CHECK(file.offset(i) == expected);
    expected += file.descriptor(i).width;
    if (i > 0) CHECK(file.descriptor(i - 1).address < file.descriptor(i).address);
  }
  CHECK(file.chain_length() == expected);

  RegisterFile small({{"b", 2, 4, Access::RW, 3, "", Kind::Unsigned, "", {}},
                      {"a", 1, 2, Access::RW, 1, "", Kind::Unsigned, "", {}}});
  CHECK(small.descriptor(0).name == "a");
  CHECK(small.offset(small.index_of("b")) == 2);
}

TEST_CASE("read-modify-write is the identity") {
  auto file = make_register_file();
  ScanChain chain(file);
  const auto before = chain.read_image();
  for (const auto& d : file.descriptors()) {
    if (d.access == Access::RW) chain.write(d.name, chain.read(d.name));
  }
  CHECK(chain.read_image() == before);
  CHECK_FALSE(chain.config_fault());
}

TEST_CASE("10k random write/read round-trips") {
  auto file = make_register_file();
  ScanChain chain(file);
  chain.set_test_mode(true);
  std::vector<std::size_t> rw;
  for (std::size_t i = 0; i < file.size(); ++i) {
    if (file.descriptor(i).access == Access::RW) rw.push_back(i);
  }
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int k = 0; k < 10'000; ++k) {
    const auto& d = file.descriptor(rw[rng() % rw.size()]);
    const auto v = static_cast<std::uint32_t>(rng()) & width_mask(d.width);
    chain.write(d.name, v);
    if (chain.read(d.name) != v) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("write errors") {
  auto file = make_register_file();
  ScanChain chain(file);
  CHECK(error_code([&] { chain.write("status.flags", 1); }) == "read-only");
  CHECK(error_code([&] { chain.write("no.such", 1); }) == "unknown-register");
  CHECK(error_code([&] { chain.read("no.such"); }) == "unknown-register");
  CHECK(error_code([&] { chain.write("out.range", 4); }) == "out-of-range");
  CHECK_FALSE(chain.config_fault());

  CHECK(error_code([&] { chain.write("out.range", 3); }) == "validator");
  CHECK(chain.config_fault());
  CHECK(chain.last_error().find("0..2") != std::string::npos);
  CHECK(chain.read("out.range") == 0);

  chain.clear_fault();
  CHECK(error_code([&] { chain.write_real("comp.g0", -1.0); }) == "validator");
  CHECK(chain.last_error().find("gain(T)") != std::string::npos);
  CHECK(chain.read_real("comp.g0") == 1.0);
  CHECK(error_code([&] { chain.write_real("agc.setpoint_v", 0.0); }) == "validator");

  // Test mode bypasses validators.
  chain.set_test_mode(true);
  CHECK(error_code([&] { chain.write("out.range", 3); }) == "");
  CHECK(chain.read("out.range") == 3);
}

TEST_CASE("commit hook fires only on a change outside test mode") {
  auto file = make_register_file();
  ScanChain chain(file);
  int commits = 0;
  chain.on_commit([&] { ++commits; });
  chain.write("out.range", 0);
  CHECK(commits == 0);
  chain.write("out.range", 2);
  CHECK(commits == 1);
  chain.set_test_mode(true);
  chain.write("out.range", 1);
  CHECK(commits == 1);
}

TEST_CASE("self-check passes and restores the image") {
  auto file = make_register_file();
  ScanChain chain(file);
  chain.write("out.range", 2);
  chain.write_real("pll.kp", 50.0);
  const auto before = chain.read_image();
  const auto report = chain.selfcheck(7, 64);
  CHECK(report.pass);
  CHECK(report.failures.empty());
  CHECK(report.patterns == 32 + 64);
  CHECK(chain.read_image() == before);
  CHECK_FALSE(chain.test_mode());
  CHECK(report.to_json().at("pass") == true);
}

TEST_CASE("a stuck bit is reported by register name") {
  auto file = make_register_file();
  ScanChain chain(file);
  file.inject_stuck_bit("pll.lock_dwell_ms", 6, true);
  const auto report = chain.selfcheck();
  CHECK_FALSE(report.pass);
  REQUIRE_FALSE(report.failures.empty());
  std::set<std::string> names;
  for (const auto& f : report.failures) names.insert(f.register_name);
  CHECK(names == std::set<std::string>{"pll.lock_dwell_ms"});
  CHECK((report.failures.front().actual & (1u << 6)) != 0);

  file.clear_stuck_bits();
  CHECK(chain.selfcheck().pass);
  CHECK(error_code([&] { file.inject_stuck_bit("pll.lock_dwell_ms", 8, true); }) == "out-of-range");
}

TEST_CASE("TAP replay is deterministic") {
  std::mt19937_64 rng(99);
  std::vector<std::pair<int, int>> seq(20'000);
  for (auto& s : seq) s = {static_cast<int>(rng() % 4 == 0), static_cast<int>(rng() & 1)};

  auto replay = [&] {
    auto file = make_register_file();
    ScanChain chain(file);
    chain.set_test_mode(true);
    std::vector<int> tdo;
    for (const auto& [tms, tdi] : seq) tdo.push_back(chain.tap_step(tms, tdi));
    return std::make_pair(tdo, file.live_values());
  };
  const auto a = replay();
  const auto b = replay();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}

TEST_CASE("five tms=1 steps reach RESET from every state") {
  const std::vector<std::vector<int>> paths{{}, {0}, {0, 1}, {0, 1, 0}, {0, 1, 0, 1}};
  const TapState expect[] = {TapState::Reset, TapState::Idle, TapState::Capture, TapState::Shift,
                             TapState::Update};
  for (std::size_t k = 0; k < paths.size(); ++k) {
    auto file = make_register_file();
    ScanChain chain(file);
    chain.reset_tap();
    for (int tms : paths[k]) chain.tap_step(tms, 0);
    CAPTURE(k);
    REQUIRE(chain.state() == expect[k]);
    for (int i = 0; i < 5; ++i) chain.tap_step(1, 0);
    CHECK(chain.state() == TapState::Reset);
  }
}

TEST_CASE("TAP reset restores register reset values") {
  auto file = make_register_file();
  ScanChain chain(file);
  chain.write("out.range", 2);
  chain.reset_tap();
  CHECK(file.live("out.range") == 0);
  CHECK(std::string(to_string(chain.state())) == "RESET");
}

TEST_CASE("manifest lists every register") {
  const auto file = make_register_file();
  const auto m = file.manifest();
  CHECK(m.at("version") == 1);
  CHECK(m.at("chain_length") == file.chain_length());
  REQUIRE(m.at("registers").size() == file.size());
  std::set<std::uint32_t> addresses;
  for (const auto& r : m.at("registers")) {
    for (const char* key : {"name", "address", "width", "access", "reset", "kind", "unit", "description"}) {
      CHECK(r.contains(key));
    }
    addresses.insert(r.at("address").get<std::uint32_t>());
    if (r.at("kind") == "f32") CHECK(r.contains("reset_real"));
  }
  CHECK(addresses.size() == file.size());
  CHECK(m.at("registers").at(file.index_of("afe.adc_bits")).at("reset") == 12);
}

TEST_CASE("float encoding round-trips") {
  for (double v : {0.0, 1.0, -2.5, 15'000.0, 1e-6}) {
    CHECK(decode_f32(encode_f32(v)) == static_cast<double>(static_cast<float>(v)));
  }
  CHECK(width_mask(32) == 0xFFFF'FFFFu);
  CHECK(width_mask(3) == 7u);
}
