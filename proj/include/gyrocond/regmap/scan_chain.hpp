#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrocond/regmap/register_file.hpp"

namespace gyrocond::regmap {

enum class TapState { Reset, Idle, Capture, Shift, Update };

const char* to_string(TapState s);

struct SelfcheckFailure {
  std::string register_name;
  std::string pattern;
  std::uint32_t expected = 0;
  std::uint32_t actual = 0;
};

struct SelfcheckReport {
  bool pass = true;
  int patterns = 0;
  std::vector<SelfcheckFailure> failures;

  nlohmann::json to_json() const;
};

/// Reduced five-state TAP over a single chain.
///
///   RESET   --0--> IDLE        --1--> RESET
///   IDLE    --1--> CAPTURE     --0--> IDLE
///   CAPTURE --0--> SHIFT       --1--> UPDATE
///   SHIFT   --0--> SHIFT (one bit: tdo = chain LSB, tdi enters the far end)
///   SHIFT   --1--> UPDATE (commit, validators run)
///   UPDATE  --0--> IDLE        --1--> CAPTURE
///
/// Five consecutive tms=1 steps reach RESET from any state.
class ScanChain {
 public:
  explicit ScanChain(RegisterFile& file);

  int tap_step(int tms, int tdi);
  TapState state() const { return state_; }
  /// Bit presented on tdo before the next clock (0 outside SHIFT).
  int tdo() const;

  /// Full-chain transactions built from tap_step only.
  std::vector<bool> read_image();
  /// Returns the validation error when the commit was rejected.
  std::optional<std::string> write_image(const std::vector<bool>& image);

  /// Errors: unknown-register, read-only, out-of-range (width), validator.
  void write(const std::string& name, std::uint32_t value);
  std::uint32_t read(const std::string& name);
  void write_real(const std::string& name, double v) { write(name, encode_f32(v)); }
  double read_real(const std::string& name) { return decode_f32(read(name)); }

  /// Walking ones and `random_patterns` seeded patterns over every RW
  /// register at once; RO registers must read back unchanged; the original
  /// image is restored afterwards. Runs in test mode.
  SelfcheckReport selfcheck(std::uint64_t seed = 0x5EED'C0DEull, int random_patterns = 64);

  /// Test mode: validators bypassed.
  void set_test_mode(bool on) { test_mode_ = on; }
  bool test_mode() const { return test_mode_; }

  bool config_fault() const { return config_fault_; }
  const std::string& last_error() const { return last_error_; }
  void clear_fault();

  /// Called after every successful commit outside test mode.
  void on_commit(std::function<void()> cb) { on_commit_ = std::move(cb); }

  /// Return to RESET via five tms=1 steps.
  void reset_tap();
  RegisterFile& file() { return file_; }
  const RegisterFile& file() const { return file_; }

 private:
  void go_idle();
  void load_shift_register();
  void store_shift_register();
  void do_update();

  RegisterFile& file_;
  // Shift register as a ring: logical bit j lives at (head_ + j) mod length.
  std::vector<std::uint8_t> bits_;
  std::size_t head_ = 0;
  std::optional<std::string> last_commit_error_;
  TapState state_ = TapState::Reset;
  int tms_ones_ = 0;
  bool test_mode_ = false;
  bool config_fault_ = false;
  std::string last_error_;
  std::function<void()> on_commit_;
};

}  // namespace gyrocond::regmap
