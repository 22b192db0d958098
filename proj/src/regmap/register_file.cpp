#include "gyrocond/regmap/register_file.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include "gyrocond/error.hpp"

namespace gyrocond::regmap {

std::uint32_t encode_f32(double v) { return std::bit_cast<std::uint32_t>(static_cast<float>(v)); }

double decode_f32(std::uint32_t bits) { return static_cast<double>(std::bit_cast<float>(bits)); }

std::uint32_t width_mask(int width) {
  return width >= 32 ? 0xFFFF'FFFFu : ((1u << width) - 1u);
}

std::uint32_t ImageView::raw(const std::string& name) const {
  return values_[file_.index_of(name)];
}

RegisterFile::RegisterFile(std::vector<RegisterDescriptor> descriptors)
    : desc_(std::move(descriptors)) {
  std::sort(desc_.begin(), desc_.end(),
            [](const auto& a, const auto& b) { return a.address < b.address; });
  std::set<std::uint32_t> addresses;
  for (std::size_t i = 0; i < desc_.size(); ++i) {
    const auto& d = desc_[i];
    if (d.width < 1 || d.width > 32) {
      throw Error("out-of-range", "register " + d.name + " width must be 1..32");
    }
    if (!addresses.insert(d.address).second) {
      throw Error("duplicate-address", "register " + d.name + " reuses an address");
    }
    if (!by_name_.emplace(d.name, i).second) {
      throw Error("duplicate-name", "register name " + d.name + " is not unique");
    }
    if ((d.reset_value & ~width_mask(d.width)) != 0) {
      throw Error("out-of-range", "register " + d.name + " reset value exceeds its width");
    }
    offsets_.push_back(chain_length_);
    for (int b = 0; b < d.width; ++b) owner_.push_back(i);
    chain_length_ += static_cast<std::size_t>(d.width);
  }
  live_.resize(desc_.size());
  shadow_.resize(desc_.size());
  reset();
}

void RegisterFile::add_set_validator(std::string name, SetValidator v) {
  set_validators_.emplace_back(std::move(name), std::move(v));
}

std::size_t RegisterFile::index_of(const std::string& name) const {
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) throw Error("unknown-register", "no register named " + name);
  return it->second;
}

std::uint32_t RegisterFile::apply_stuck(std::size_t index, std::uint32_t v) const {
  for (const auto& s : stuck_) {
    if (s.index != index) continue;
    const std::uint32_t m = 1u << s.bit;
    v = s.value ? (v | m) : (v & ~m);
  }
  return v;
}

void RegisterFile::set_hardware(const std::string& name, std::uint32_t value) {
  set_hardware(index_of(name), value);
}

void RegisterFile::set_hardware(std::size_t index, std::uint32_t value) {
  live_[index] = apply_stuck(index, value & width_mask(desc_[index].width));
}

void RegisterFile::reset() {
  for (std::size_t i = 0; i < desc_.size(); ++i) {
    live_[i] = apply_stuck(i, desc_[i].reset_value);
    shadow_[i] = live_[i];
  }
}

void RegisterFile::capture() { shadow_ = live_; }

bool RegisterFile::shadow_bit(std::size_t pos) const {
  const std::size_t r = owner_[pos];
  return ((shadow_[r] >> (pos - offsets_[r])) & 1u) != 0;
}

void RegisterFile::set_shadow_bit(std::size_t pos, bool bit) {
  const std::size_t r = owner_[pos];
  const std::uint32_t m = 1u << (pos - offsets_[r]);
  shadow_[r] = bit ? (shadow_[r] | m) : (shadow_[r] & ~m);
}

std::optional<std::string> RegisterFile::validate(const std::vector<std::uint32_t>& image) const {
  for (std::size_t i = 0; i < desc_.size(); ++i) {
    const auto& d = desc_[i];
    if (d.access != Access::RW || !d.validator) continue;
    if (auto err = d.validator(image[i])) return d.name + ": " + *err;
  }
  const ImageView view(*this, image);
  for (const auto& [name, v] : set_validators_) {
    if (auto err = v(view)) return name + ": " + *err;
  }
  return std::nullopt;
}

std::optional<std::string> RegisterFile::commit(bool bypass_validators) {
  // RO registers take their live values in the candidate image.
  std::vector<std::uint32_t> candidate = shadow_;
  for (std::size_t i = 0; i < desc_.size(); ++i) {
    if (desc_[i].access == Access::RO) candidate[i] = live_[i];
  }
  if (!bypass_validators) {
    if (auto err = validate(candidate)) return err;
  }
  for (std::size_t i = 0; i < desc_.size(); ++i) {
    if (desc_[i].access == Access::RW) live_[i] = apply_stuck(i, candidate[i]);
  }
  ++generation_;
  return std::nullopt;
}

void RegisterFile::inject_stuck_bit(const std::string& name, int bit, bool value) {
  const std::size_t i = index_of(name);
  if (bit < 0 || bit >= desc_[i].width) throw Error("out-of-range", "stuck bit outside register");
  stuck_.push_back({i, bit, value});
  live_[i] = apply_stuck(i, live_[i]);
}

nlohmann::json RegisterFile::manifest() const {
  nlohmann::json regs = nlohmann::json::array();
  for (const auto& d : desc_) {
    nlohmann::json r{{"name", d.name},
                     {"address", d.address},
                     {"width", d.width},
                     {"access", d.access == Access::RW ? "RW" : "RO"},
                     {"reset", d.reset_value},
                     {"kind", d.kind == Kind::Float  ? "f32"
                              : d.kind == Kind::Bool ? "bool"
                                                     : "uint"},
                     {"unit", d.unit},
                     {"description", d.description}};
    if (d.kind == Kind::Float) r["reset_real"] = decode_f32(d.reset_value);
    regs.push_back(std::move(r));
  }
  return nlohmann::json{{"version", 1}, {"chain_length", chain_length_}, {"registers", regs}};
}

}  // namespace gyrocond::regmap
