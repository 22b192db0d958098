#include "gyrocond/regmap/scan_chain.hpp"

#include <random>

#include "gyrocond/error.hpp"

namespace gyrocond::regmap {

const char* to_string(TapState s) {
  switch (s) {
    case TapState::Reset: return "RESET";
    case TapState::Idle: return "IDLE";
    case TapState::Capture: return "CAPTURE";
    case TapState::Shift: return "SHIFT";
    case TapState::Update: return "UPDATE";
  }
  return "?";
}

nlohmann::json SelfcheckReport::to_json() const {
  nlohmann::json f = nlohmann::json::array();
  for (const auto& x : failures) {
    f.push_back({{"register", x.register_name},
                 {"pattern", x.pattern},
                 {"expected", x.expected},
                 {"actual", x.actual}});
  }
  return {{"pass", pass}, {"patterns", patterns}, {"failures", f}};
}

ScanChain::ScanChain(RegisterFile& file) : file_(file) {
  bits_.assign(file_.chain_length(), 0);
}

int ScanChain::tdo() const {
  if (state_ != TapState::Shift || bits_.empty()) return 0;
  return bits_[head_];
}

void ScanChain::load_shift_register() {
  file_.capture();
  const std::size_t n = file_.chain_length();
  bits_.resize(n);
  for (std::size_t p = 0; p < n; ++p) bits_[p] = file_.shadow_bit(p) ? 1 : 0;
  head_ = 0;
}

void ScanChain::store_shift_register() {
  const std::size_t n = bits_.size();
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t p = head_ + j;
    if (p >= n) p -= n;
    file_.set_shadow_bit(j, bits_[p] != 0);
  }
}

void ScanChain::do_update() {
  store_shift_register();
  const std::vector<std::uint32_t> before = file_.live_values();
  const auto err = file_.commit(test_mode_);
  last_commit_error_ = err;
  if (err) {
    config_fault_ = true;
    last_error_ = *err;
    return;
  }
  if (!test_mode_ && on_commit_ && file_.live_values() != before) on_commit_();
}

int ScanChain::tap_step(int tms, int tdi) {
  int out = 0;
  tms_ones_ = tms ? tms_ones_ + 1 : 0;
  if (tms_ones_ >= 5) {
    if (state_ != TapState::Reset) {
      state_ = TapState::Reset;
      file_.reset();
      config_fault_ = false;
      last_error_.clear();
      if (on_commit_) on_commit_();
    }
    return 0;
  }
  switch (state_) {
    case TapState::Reset:
      if (!tms) state_ = TapState::Idle;
      break;
    case TapState::Idle:
      if (tms) {
        state_ = TapState::Capture;
        load_shift_register();
      }
      break;
    case TapState::Capture:
      if (tms) {
        state_ = TapState::Update;
        do_update();
      } else {
        state_ = TapState::Shift;
      }
      break;
    case TapState::Shift:
      if (tms) {
        state_ = TapState::Update;
        do_update();
      } else if (!bits_.empty()) {
        out = bits_[head_];
        bits_[head_] = static_cast<std::uint8_t>(tdi ? 1 : 0);
        if (++head_ == bits_.size()) head_ = 0;
      }
      break;
    case TapState::Update:
      if (tms) {
        state_ = TapState::Capture;
        load_shift_register();
      } else {
        state_ = TapState::Idle;
      }
      break;
  }
  return out;
}

void ScanChain::go_idle() {
  switch (state_) {
    case TapState::Idle: return;
    case TapState::Reset:
    case TapState::Update: tap_step(0, 0); return;
    case TapState::Capture:
    case TapState::Shift:
      tap_step(1, 0);
      tap_step(0, 0);
      return;
  }
}

void ScanChain::reset_tap() {
  for (int i = 0; i < 5; ++i) tap_step(1, 0);
}

void ScanChain::clear_fault() {
  config_fault_ = false;
  last_error_.clear();
}

std::vector<bool> ScanChain::read_image() {
  go_idle();
  tap_step(1, 0);  // CAPTURE
  tap_step(0, 0);  // SHIFT
  const std::size_t n = file_.chain_length();
  std::vector<bool> image(n);
  for (std::size_t j = 0; j < n; ++j) {
    const int bit = tdo();
    image[j] = bit != 0;
    tap_step(0, bit);
  }
  tap_step(1, 0);  // UPDATE (image unchanged)
  tap_step(0, 0);  // IDLE
  return image;
}

std::optional<std::string> ScanChain::write_image(const std::vector<bool>& image) {
  if (image.size() != file_.chain_length()) {
    throw Error("out-of-range", "image length does not match the chain");
  }
  go_idle();
  tap_step(1, 0);
  tap_step(0, 0);
  for (std::size_t j = 0; j < image.size(); ++j) tap_step(0, image[j] ? 1 : 0);
  tap_step(1, 0);
  const auto err = last_commit_error_;
  tap_step(0, 0);
  return err;
}

void ScanChain::write(const std::string& name, std::uint32_t value) {
  const std::size_t idx = file_.index_of(name);
  const auto& d = file_.descriptor(idx);
  if (d.access == Access::RO) throw Error("read-only", "register " + name + " is read-only");
  if ((value & ~width_mask(d.width)) != 0) {
    throw Error("out-of-range", "value does not fit the " + std::to_string(d.width) +
                                    "-bit register " + name);
  }
  const std::size_t lo = file_.offset(idx);
  const std::size_t hi = lo + static_cast<std::size_t>(d.width);
  go_idle();
  tap_step(1, 0);
  tap_step(0, 0);
  for (std::size_t j = 0; j < file_.chain_length(); ++j) {
    int bit = tdo();
    if (j >= lo && j < hi) bit = static_cast<int>((value >> (j - lo)) & 1u);
    tap_step(0, bit);
  }
  tap_step(1, 0);
  const auto err = last_commit_error_;
  tap_step(0, 0);
  if (err) throw Error("validator", *err);
}

std::uint32_t ScanChain::read(const std::string& name) {
  const std::size_t idx = file_.index_of(name);
  const std::size_t lo = file_.offset(idx);
  const auto image = read_image();
  std::uint32_t v = 0;
  for (int b = 0; b < file_.descriptor(idx).width; ++b) {
    if (image[lo + static_cast<std::size_t>(b)]) v |= 1u << b;
  }
  return v;
}

namespace {

std::vector<std::uint32_t> decode_image(const RegisterFile& f, const std::vector<bool>& image) {
  std::vector<std::uint32_t> values(f.size(), 0);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int b = 0; b < f.descriptor(i).width; ++b) {
      if (image[f.offset(i) + static_cast<std::size_t>(b)]) values[i] |= 1u << b;
    }
  }
  return values;
}

std::vector<bool> encode_image(const RegisterFile& f, const std::vector<std::uint32_t>& values) {
  std::vector<bool> image(f.chain_length(), false);
  for (std::size_t i = 0; i < f.size(); ++i) {
    for (int b = 0; b < f.descriptor(i).width; ++b) {
      image[f.offset(i) + static_cast<std::size_t>(b)] = ((values[i] >> b) & 1u) != 0;
    }
  }
  return image;
}

}  // namespace

SelfcheckReport ScanChain::selfcheck(std::uint64_t seed, int random_patterns) {
  SelfcheckReport report;
  const std::vector<std::uint32_t> original = decode_image(file_, read_image());
  const bool was_test = test_mode_;
  test_mode_ = true;

  auto run_pattern = [&](const std::string& label, const std::vector<std::uint32_t>& wanted) {
    ++report.patterns;
    write_image(encode_image(file_, wanted));
    const std::vector<std::uint32_t> got = decode_image(file_, read_image());
    for (std::size_t i = 0; i < file_.size(); ++i) {
      const auto& d = file_.descriptor(i);
      const std::uint32_t expected = d.access == Access::RW ? wanted[i] : original[i];
      if (got[i] != expected) {
        report.pass = false;
        report.failures.push_back({d.name, label, expected, got[i]});
      }
    }
  };

  int max_width = 0;
  for (const auto& d : file_.descriptors()) {
    if (d.access == Access::RW) max_width = std::max(max_width, d.width);
  }
  for (int b = 0; b < max_width; ++b) {
    std::vector<std::uint32_t> wanted = original;
    for (std::size_t i = 0; i < file_.size(); ++i) {
      const auto& d = file_.descriptor(i);
      if (d.access == Access::RW) wanted[i] = b < d.width ? (1u << b) : 0u;
    }
    run_pattern("walking-1 bit " + std::to_string(b), wanted);
  }
  std::mt19937_64 rng(seed);
  for (int k = 0; k < random_patterns; ++k) {
    std::vector<std::uint32_t> wanted = original;
    for (std::size_t i = 0; i < file_.size(); ++i) {
      const auto& d = file_.descriptor(i);
      if (d.access == Access::RW) wanted[i] = static_cast<std::uint32_t>(rng()) & width_mask(d.width);
    }
    run_pattern("random " + std::to_string(k), wanted);
  }

  write_image(encode_image(file_, original));
  const std::vector<std::uint32_t> restored = decode_image(file_, read_image());
  for (std::size_t i = 0; i < file_.size(); ++i) {
    if (restored[i] != original[i]) {
      report.pass = false;
      report.failures.push_back({file_.descriptor(i).name, "restore", original[i], restored[i]});
    }
  }
  test_mode_ = was_test;
  return report;
}

}  // namespace gyrocond::regmap
