#include "gyrocond/system/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gyrocond/error.hpp"

namespace gyrocond::system {

namespace {
constexpr double kPi = std::numbers::pi;
}

const std::vector<TapInfo>& tap_catalog() {
  static const std::vector<TapInfo> taps{
      {Tap::X1, "x1", "m", kPhysicsRate, -2e-6, 2e-6},
      {Tap::X2, "x2", "m", kPhysicsRate, -2e-7, 2e-7},
      {Tap::PrimaryPickoffAdc, "primary_pickoff_adc", "code", kFastRate, 0.0, 65535.0},
      {Tap::PdError, "pd_error", "rad", kFastRate, -kPi, kPi},
      {Tap::NcoFw, "nco_fw", "Hz", kFastRate, 14'000.0, 16'000.0},
      {Tap::AgcGain, "agc_gain", "V", kFastRate, -2.5, 2.5},
      {Tap::DemodI, "demod_i", "V", kFastRate / 25.0, -2.5, 2.5},
      {Tap::DemodQ, "demod_q", "V", kFastRate / 25.0, -2.5, 2.5},
      {Tap::RateFiltered, "rate_filtered", "dps", 1'000.0, -400.0, 400.0},
      {Tap::RateCompensated, "rate_compensated", "dps", 1'000.0, -400.0, 400.0},
      {Tap::OutputVolts, "output_volts", "V", 1'000.0, 0.0, 5.0},
  };
  return taps;
}

const TapInfo& tap_info(Tap t) { return tap_catalog()[static_cast<std::size_t>(t)]; }

Tap tap_from_name(const std::string& name) {
  for (const auto& t : tap_catalog()) {
    if (name == t.name) return t.id;
  }
  throw Error("unknown-tap", "no tap named " + name);
}

void CaptureRequest::validate() const {
  if (count < 1 || count > kCaptureCapacity) {
    throw Error("out-of-range", "capture count must lie in 1.." + std::to_string(kCaptureCapacity));
  }
  if (decimation < 1) throw Error("out-of-range", "capture decimation must be >= 1");
  if (lo.has_value() != hi.has_value()) throw Error("malformed", "range override needs lo and hi");
  if (lo && !(*hi > *lo)) throw Error("out-of-range", "range override needs hi > lo");
}

std::uint16_t quantize16(double v, double offset, double scale) {
  const double c = std::nearbyint((v - offset) / scale);
  if (!(c > 0.0)) return 0;
  if (c >= 65535.0) return 65535;
  return static_cast<std::uint16_t>(c);
}

std::vector<double> TraceBuffer::values() const {
  std::vector<double> v(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i) v[i] = value(i);
  return v;
}

nlohmann::json TraceBuffer::to_json() const {
  return {{"tap", tap},     {"unit", unit},         {"fs", fs},
          {"scale", scale}, {"offset", offset},     {"requested", requested},
          {"count", codes.size()}, {"truncated", truncated}, {"codes", codes}};
}

nlohmann::json TapFrame::to_json() const {
  return {{"tap", tap},   {"t0", t0},         {"fs", fs},       {"scale", scale},
          {"offset", offset}, {"codes", codes}, {"dropped", dropped_before}};
}

Kernel::Kernel(const model::GyroParams& params, std::uint64_t seed)
    : model_(params, seed),
      afe_(afe::FrontEndConfig{}, kPhysicsRate),
      chain_(default_device_config().chain),
      regs_(make_register_file()),
      scan_(regs_) {
  scan_.on_commit([this] { apply_registers(); });
  apply_registers();
}

void Kernel::apply_registers() {
  cfg_ = decode_registers(regs_);
  afe_.configure(cfg_.afe);
  chain_.configure(cfg_.chain);
}

void Kernel::publish_registers(std::uint32_t status_flags, std::uint32_t turn_on_ms,
                               std::uint32_t fault_phase) {
  regs_.set_hardware("afe.clip_flags", afe_.flags().bits());
  regs_.set_hardware("pll.fw", chain_.taps().nco_fw);
  regs_.set_hardware("agc.amplitude_v", regmap::encode_f32(chain_.agc().amplitude()));
  regs_.set_hardware("temp.reading_c", regmap::encode_f32(model_.state().temp));
  regs_.set_hardware("status.flags", status_flags);
  regs_.set_hardware("status.turn_on_ms", std::min<std::uint32_t>(turn_on_ms, 0xFFFF));
  regs_.set_hardware("status.fault_phase", fault_phase);
}

void Kernel::tick() {
  const auto r = model_.step(afe_.drive_v(), afe_.control_v());
  afe_.sense(r.primary_pickoff, r.secondary_pickoff);
  ++ticks_;
  const bool observing = capture_.has_value() || !subs_.empty();
  if (observing) {
    on_sample(Tap::X1, r.state.x1);
    on_sample(Tap::X2, r.state.x2);
  }

  if (++fast_phase_ == kTicksPerFast) {
    fast_phase_ = 0;
    const afe::AdcSample s = afe_.sample();
    const dsp::ChainDrive d =
        chain_.step(s.primary, s.primary_v, s.secondary_v, model_.state().temp);
    afe_.set_drive(d.drive_v);
    afe_.set_control(d.control_v);
    if (observing) {
      const auto& t = chain_.taps();
      on_sample(Tap::PrimaryPickoffAdc, t.primary_adc);
      on_sample(Tap::PdError, t.pd_error);
      on_sample(Tap::NcoFw, dsp::word_frequency(t.nco_fw, kFastRate));
      on_sample(Tap::AgcGain, t.agc_gain);
      if (t.new_demod) {
        on_sample(Tap::DemodI, t.demod_i);
        on_sample(Tap::DemodQ, t.demod_q);
      }
      if (t.new_output) {
        on_sample(Tap::RateFiltered, t.rate_filtered);
        on_sample(Tap::RateCompensated, t.rate_compensated);
        on_sample(Tap::OutputVolts, t.output_volts);
      }
    }
  }

  if (cfg_.watchdog_enable && !watchdog_expired_) {
    const auto limit = static_cast<std::uint64_t>(std::llround(cfg_.watchdog_timeout_ms * 1e-3 * kPhysicsRate));
    if (++watchdog_count_ >= limit) {
      watchdog_expired_ = true;
      enter_safe_state();
    }
  }

  if (!subs_.empty() && ticks_ >= next_frame_tick_) emit_frames();
}

void Kernel::run_ticks(std::uint64_t n) {
  for (std::uint64_t i = 0; i < n; ++i) tick();
}

double Kernel::tap_value(Tap t) const {
  const auto& c = chain_.taps();
  switch (t) {
    case Tap::X1: return model_.state().x1;
    case Tap::X2: return model_.state().x2;
    case Tap::PrimaryPickoffAdc: return c.primary_adc;
    case Tap::PdError: return c.pd_error;
    case Tap::NcoFw: return dsp::word_frequency(c.nco_fw, kFastRate);
    case Tap::AgcGain: return c.agc_gain;
    case Tap::DemodI: return c.demod_i;
    case Tap::DemodQ: return c.demod_q;
    case Tap::RateFiltered: return c.rate_filtered;
    case Tap::RateCompensated: return c.rate_compensated;
    case Tap::OutputVolts: return c.output_volts;
  }
  return 0.0;
}

void Kernel::on_sample(Tap t, double v) {
  if (capture_ && capture_->req.tap == t) {
    auto& c = *capture_;
    if (static_cast<int>(c.buf.codes.size()) < c.req.count) {
      if (c.phase == 0) c.buf.codes.push_back(quantize16(v, c.buf.offset, c.buf.scale));
      if (++c.phase == c.req.decimation) c.phase = 0;
    }
  }
  for (auto& s : subs_) {
    if (s.tap != t) continue;
    if (s.phase == 0) {
      if (s.pending.codes.empty()) s.pending.t0 = time_s();
      s.pending.codes.push_back(quantize16(v, s.offset, s.scale));
    }
    if (++s.phase == s.decimation) s.phase = 0;
  }
}

void Kernel::start_capture(const CaptureRequest& req) {
  req.validate();
  const TapInfo& info = tap_info(req.tap);
  ActiveCapture c;
  c.req = req;
  c.buf.tap = info.name;
  c.buf.unit = info.unit;
  c.buf.fs = info.native_rate_hz / req.decimation;
  const double lo = req.lo.value_or(info.lo);
  const double hi = req.hi.value_or(info.hi);
  c.buf.offset = lo;
  c.buf.scale = (hi - lo) / 65535.0;
  c.buf.requested = req.count;
  c.buf.codes.reserve(static_cast<std::size_t>(req.count));
  capture_ = std::move(c);
}

TraceBuffer Kernel::finish_capture(double deadline_s) {
  if (!capture_) throw Error("no-capture", "no capture is armed");
  const auto limit = ticks_ + static_cast<std::uint64_t>(std::llround(deadline_s * kPhysicsRate));
  while (static_cast<int>(capture_->buf.codes.size()) < capture_->req.count && ticks_ < limit) tick();
  TraceBuffer out = std::move(capture_->buf);
  out.truncated = static_cast<int>(out.codes.size()) < out.requested;
  capture_.reset();
  return out;
}

TraceBuffer Kernel::capture(const CaptureRequest& req) {
  start_capture(req);
  const double fs = tap_info(req.tap).native_rate_hz / req.decimation;
  return finish_capture(req.count / fs + 1.0);
}

void Kernel::subscribe(Tap t, int decimation) {
  const TapInfo& info = tap_info(t);
  if (decimation <= 0) {
    decimation = std::max(1, static_cast<int>(std::ceil(info.native_rate_hz * kFramePeriodS / 200.0)));
  }
  unsubscribe(t);
  Subscription s;
  s.tap = t;
  s.decimation = decimation;
  s.offset = info.lo;
  s.scale = (info.hi - info.lo) / 65535.0;
  s.pending.tap = info.name;
  s.pending.fs = info.native_rate_hz / decimation;
  s.pending.scale = s.scale;
  s.pending.offset = s.offset;
  subs_.push_back(std::move(s));
  if (next_frame_tick_ <= ticks_) {
    next_frame_tick_ = ticks_ + static_cast<std::uint64_t>(kFramePeriodS * kPhysicsRate);
  }
}

void Kernel::unsubscribe(Tap t) {
  subs_.erase(std::remove_if(subs_.begin(), subs_.end(), [t](const auto& s) { return s.tap == t; }),
              subs_.end());
}

void Kernel::emit_frames() {
  next_frame_tick_ = ticks_ + static_cast<std::uint64_t>(kFramePeriodS * kPhysicsRate);
  for (auto& s : subs_) {
    if (s.pending.codes.empty()) continue;
    frames_.push_back(s.pending);
    s.pending.codes.clear();
    while (frames_.size() > kFrameQueueDepth) {
      frames_.pop_front();
      ++dropped_;
    }
  }
}

std::vector<TapFrame> Kernel::drain_frames() {
  std::vector<TapFrame> out(frames_.begin(), frames_.end());
  frames_.clear();
  if (!out.empty()) {
    out.front().dropped_before = dropped_;
    dropped_ = 0;
  }
  return out;
}

void Kernel::kick() {
  if (!watchdog_expired_) watchdog_count_ = 0;
}

void Kernel::enter_safe_state() {
  chain_.set_safe(true);
  afe_.safe_state();
}

}  // namespace gyrocond::system
