#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "gyrocond/afe/front_end.hpp"
#include "gyrocond/dsp/chain.hpp"
#include "gyrocond/model/gyro_model.hpp"
#include "gyrocond/regmap/register_file.hpp"
#include "gyrocond/regmap/scan_chain.hpp"
#include "gyrocond/system/register_set.hpp"

namespace gyrocond::system {

enum class Tap : int {
  X1,
  X2,
  PrimaryPickoffAdc,
  PdError,
  NcoFw,
  AgcGain,
  DemodI,
  DemodQ,
  RateFiltered,
  RateCompensated,
  OutputVolts,
};
inline constexpr int kTapCount = 11;

struct TapInfo {
  Tap id;
  const char* name;
  const char* unit;
  double native_rate_hz;
  // Default 16-bit capture range.
  double lo;
  double hi;
};

const std::vector<TapInfo>& tap_catalog();
const TapInfo& tap_info(Tap t);
/// Throws unknown-tap.
Tap tap_from_name(const std::string& name);

inline constexpr int kCaptureCapacity = 32'768;  // 512 Kib of 16-bit words

struct CaptureRequest {
  Tap tap = Tap::OutputVolts;
  int count = 0;
  int decimation = 1;
  std::optional<double> lo;  // range override
  std::optional<double> hi;

  /// Throws out-of-range for count outside 1..32768 or decimation < 1.
  void validate() const;
};

/// Samples quantized to 16 bits: value = offset + scale * code.
struct TraceBuffer {
  std::string tap;
  std::string unit;
  double fs = 0.0;
  double scale = 1.0;
  double offset = 0.0;
  std::vector<std::uint16_t> codes;
  int requested = 0;
  bool truncated = false;

  double value(std::size_t i) const { return offset + scale * codes[i]; }
  std::vector<double> values() const;
  nlohmann::json to_json() const;
};

std::uint16_t quantize16(double v, double offset, double scale);

/// One streaming frame: samples of one tap gathered over a frame period.
struct TapFrame {
  std::string tap;
  double t0 = 0.0;  // simulated time of the first sample, s
  double fs = 0.0;
  double scale = 1.0;
  double offset = 0.0;
  std::vector<std::uint16_t> codes;
  std::uint64_t dropped_before = 0;  // frames dropped since the previous delivered one

  nlohmann::json to_json() const;
};

struct Subscription {
  Tap tap;
  int decimation = 1;
  double scale = 1.0;
  double offset = 0.0;
  int phase = 0;
  TapFrame pending;
};

/// The simulated device: sensor model, front end, conditioning chain and
/// register map, advanced one physics tick at a time.
class Kernel {
 public:
  static constexpr int kTicksPerFast = static_cast<int>(kPhysicsRate / kFastRate);
  static constexpr std::size_t kFrameQueueDepth = 64;
  static constexpr double kFramePeriodS = 0.020;

  Kernel(const model::GyroParams& params, std::uint64_t seed);
  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  void tick();
  void run_ticks(std::uint64_t n);

  std::uint64_t ticks() const { return ticks_; }
  double time_s() const { return static_cast<double>(ticks_) / kPhysicsRate; }

  model::GyroModel& model() { return model_; }
  const model::GyroModel& model() const { return model_; }
  afe::FrontEnd& front_end() { return afe_; }
  const afe::FrontEnd& front_end() const { return afe_; }
  dsp::ConditioningChain& chain() { return chain_; }
  const dsp::ConditioningChain& chain() const { return chain_; }
  regmap::RegisterFile& registers() { return regs_; }
  regmap::ScanChain& scan() { return scan_; }
  const DeviceConfig& device_config() const { return cfg_; }

  /// Latest value of a tap in engineering units.
  double tap_value(Tap t) const;

  /// Arm a capture; it fills inside tick() without loss.
  void start_capture(const CaptureRequest& req);
  bool capture_active() const { return capture_.has_value(); }
  bool capture_complete() const {
    return capture_ && static_cast<int>(capture_->buf.codes.size()) >= capture_->req.count;
  }
  /// Run until the armed capture completes or `deadline_s` of simulated time
  /// passes, then return it (truncated if incomplete).
  TraceBuffer finish_capture(double deadline_s);
  TraceBuffer capture(const CaptureRequest& req);

  void subscribe(Tap t, int decimation = 0);
  void unsubscribe(Tap t);
  std::vector<TapFrame> drain_frames();

  // Watchdog.
  void kick();
  bool watchdog_expired() const { return watchdog_expired_; }

  /// Safe state: electrode voltages zero, loops frozen.
  void enter_safe_state();

  /// Decode the live register image and reconfigure front end and chain.
  void apply_registers();

  /// Publish hardware-side register values (flags, readings).
  void publish_registers(std::uint32_t status_flags, std::uint32_t turn_on_ms,
                         std::uint32_t fault_phase);

 private:
  struct ActiveCapture {
    CaptureRequest req;
    TraceBuffer buf;
    int phase = 0;
  };

  void on_sample(Tap t, double v);
  void emit_frames();

  model::GyroModel model_;
  afe::FrontEnd afe_;
  dsp::ConditioningChain chain_;
  regmap::RegisterFile regs_;
  regmap::ScanChain scan_;
  DeviceConfig cfg_;

  std::uint64_t ticks_ = 0;
  int fast_phase_ = 0;

  std::optional<ActiveCapture> capture_;
  std::vector<Subscription> subs_;
  std::deque<TapFrame> frames_;
  std::uint64_t dropped_ = 0;
  std::uint64_t next_frame_tick_ = 0;

  std::uint64_t watchdog_count_ = 0;
  bool watchdog_expired_ = false;
};

}  // namespace gyrocond::system
