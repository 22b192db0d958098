#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace gyrocond::regmap {

enum class Access { RW, RO };
enum class Kind { Unsigned, Bool, Float };

/// Returns an error message when the value is rejected.
using FieldValidator = std::function<std::optional<std::string>(std::uint32_t)>;

struct RegisterDescriptor {
  std::string name;
  std::uint32_t address = 0;
  int width = 1;
  Access access = Access::RW;
  std::uint32_t reset_value = 0;
  std::string description;
  Kind kind = Kind::Unsigned;
  std::string unit;
  FieldValidator validator;
};

std::uint32_t encode_f32(double v);
double decode_f32(std::uint32_t bits);
std::uint32_t width_mask(int width);

/// Read access to a candidate image, by register name.
class ImageView {
 public:
  ImageView(const class RegisterFile& file, const std::vector<std::uint32_t>& values)
      : file_(file), values_(values) {}
  std::uint32_t raw(const std::string& name) const;
  double real(const std::string& name) const { return decode_f32(raw(name)); }

 private:
  const RegisterFile& file_;
  const std::vector<std::uint32_t>& values_;
};

/// Validator across several registers, run on the whole candidate image.
using SetValidator = std::function<std::optional<std::string>(const ImageView&)>;

struct StuckBit {
  std::size_t index = 0;
  int bit = 0;
  bool value = false;
};

/// Ordered descriptors with live and shadow values. Live values change only
/// through commit() (and hardware-side updates of RO registers).
class RegisterFile {
 public:
  RegisterFile() = default;

  /// Descriptors may be given in any order; chain order is address order.
  explicit RegisterFile(std::vector<RegisterDescriptor> descriptors);

  void add_set_validator(std::string name, SetValidator v);

  std::size_t size() const { return desc_.size(); }
  const std::vector<RegisterDescriptor>& descriptors() const { return desc_; }
  const RegisterDescriptor& descriptor(std::size_t index) const { return desc_[index]; }
  /// Throws unknown-register.
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const { return by_name_.count(name) != 0; }

  std::size_t chain_length() const { return chain_length_; }
  /// Chain position of bit 0 of register `index`.
  std::size_t offset(std::size_t index) const { return offsets_[index]; }

  std::uint32_t live(std::size_t index) const { return live_[index]; }
  std::uint32_t live(const std::string& name) const { return live_[index_of(name)]; }
  double live_real(const std::string& name) const { return decode_f32(live(name)); }
  const std::vector<std::uint32_t>& live_values() const { return live_; }

  /// Hardware-side update of a read-only register (status, flags, readings).
  void set_hardware(const std::string& name, std::uint32_t value);
  void set_hardware(std::size_t index, std::uint32_t value);

  void reset();
  void capture();
  bool shadow_bit(std::size_t pos) const;
  void set_shadow_bit(std::size_t pos, bool bit);
  std::vector<std::uint32_t>& shadow() { return shadow_; }
  const std::vector<std::uint32_t>& shadow() const { return shadow_; }

  /// Validate the shadow image and commit RW registers atomically.
  /// Returns the first validation error; nothing is committed on error.
  std::optional<std::string> commit(bool bypass_validators = false);
  std::optional<std::string> validate(const std::vector<std::uint32_t>& image) const;

  /// Fault hook: one live storage bit reads back as `value`.
  void inject_stuck_bit(const std::string& name, int bit, bool value);
  void clear_stuck_bits() { stuck_.clear(); }

  /// Monotonic count of successful commits.
  std::uint64_t generation() const { return generation_; }

  nlohmann::json manifest() const;

 private:
  std::uint32_t apply_stuck(std::size_t index, std::uint32_t v) const;

  std::vector<RegisterDescriptor> desc_;
  std::map<std::string, std::size_t> by_name_;
  std::vector<std::size_t> offsets_;
  std::vector<std::size_t> owner_;  // chain position -> register index
  std::size_t chain_length_ = 0;
  std::vector<std::uint32_t> live_;
  std::vector<std::uint32_t> shadow_;
  std::vector<std::pair<std::string, SetValidator>> set_validators_;
  std::vector<StuckBit> stuck_;
  std::uint64_t generation_ = 0;
};

}  // namespace gyrocond::regmap
