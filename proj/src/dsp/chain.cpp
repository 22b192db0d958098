#include "gyrocond/dsp/chain.hpp"

#include <cmath>
#include <numbers>

#include "gyrocond/error.hpp"

namespace gyrocond::dsp {

void ChainConfig::validate() const {
  if (!(fs_fast > 0.0)) throw Error("out-of-range", "fast rate must be positive");
  if (std::abs(pll.fs - fs_fast) > 0.0 || std::abs(agc.fs - fs_fast) > 0.0) {
    throw Error("out-of-range", "PLL and AGC must run at the fast rate");
  }
  if (!(agc.setpoint_v > 0.0)) throw Error("out-of-range", "AGC setpoint must be positive");
  if (!(rebal.limit_v > 0.0)) throw Error("out-of-range", "rebalance limit must be positive");
  if (!(channel_corner_hz > 0.0)) throw Error("out-of-range", "channel corner must be positive");
  if (comp_enable && !comp.gain_positive()) {
    throw Error("validator", "compensation gain(T) must stay positive over -40..125 C");
  }
  if (!std::isfinite(phase_trim_rad)) throw Error("out-of-range", "phase trim must be finite");
}

ConditioningChain::ConditioningChain(const ChainConfig& cfg)
    : cfg_(cfg),
      plan_(default_decimation_plan(cfg.channel_corner_hz)),
      pll_(cfg.pll),
      agc_(cfg.agc),
      rebal_(cfg.rebal),
      box_i_(plan_.boxcar),
      box_q_(plan_.boxcar),
      out_open_(plan_),
      out_closed_(plan_) {
  cfg_.validate();
  configure(cfg);
}

void ConditioningChain::configure(const ChainConfig& cfg) {
  cfg.validate();
  const bool corner_changed = cfg.channel_corner_hz != plan_.channel_corner_hz;
  const bool detectors_changed = !configured_ || cfg.settle_tolerance != cfg_.settle_tolerance ||
                                 cfg.settle_dwell_s != cfg_.settle_dwell_s ||
                                 cfg.null_threshold_v != cfg_.null_threshold_v ||
                                 cfg.null_dwell_s != cfg_.null_dwell_s;
  cfg_ = cfg;
  pll_.configure(cfg_.pll);
  agc_.configure(cfg_.agc);
  rebal_.configure(cfg_.rebal);
  if (corner_changed) {
    plan_.channel_corner_hz = cfg_.channel_corner_hz;
    out_open_.set_channel_corner(cfg_.channel_corner_hz);
    out_closed_.set_channel_corner(cfg_.channel_corner_hz);
  }
  carrier_offset_ = phase_word(cfg_.phase_trim_rad + std::numbers::pi / 2.0);
  if (detectors_changed) {
    settle_ = LockDetector(cfg_.settle_tolerance, std::lround(cfg_.settle_dwell_s * cfg_.fs_fast));
    null_ = LockDetector(cfg_.null_threshold_v, std::lround(cfg_.null_dwell_s * plan_.boxcar_rate()));
    null_i_ = OnePoleLowpass(200.0, plan_.boxcar_rate());
    null_q_ = OnePoleLowpass(200.0, plan_.boxcar_rate());
  }
  configured_ = true;
  apply_enables();
}

void ConditioningChain::apply_enables() {
  pll_.set_enabled(cfg_.pll_enable);
  agc_.set_enabled(cfg_.agc_enable);
  rebal_.set_enabled(cfg_.rebal_enable && cfg_.mode == LoopMode::Closed);
}

void ConditioningChain::set_safe(bool safe) {
  safe_ = safe;
  pll_.set_frozen(safe);
  agc_.set_frozen(safe);
  rebal_.set_frozen(safe);
}

void ConditioningChain::reset() {
  pll_.reset();
  agc_.reset();
  rebal_.reset();
  box_i_.reset();
  box_q_.reset();
  out_open_.reset();
  out_closed_.reset();
  settle_.reset();
  null_.reset();
  null_i_.reset();
  null_q_.reset();
  taps_ = ChainTaps{};
  status_ = ChainStatus{};
  safe_ = false;
  apply_enables();
}

ChainDrive ConditioningChain::step(std::uint32_t primary_code, double centered_primary,
                                   double centered_secondary, double temp_c) {
  taps_.new_demod = false;
  taps_.new_output = false;
  taps_.primary_adc = primary_code;

  const NcoOutput ref = pll_.reference();
  const NcoOutput carrier = SineTable::instance().lookup(pll_.phase() + carrier_offset_);

  const double drive_amp = agc_.step(centered_primary, ref);
  const PllOutput p = pll_.step(centered_primary);
  taps_.pd_error = p.phase_error;
  taps_.nco_fw = p.fw;
  taps_.agc_gain = drive_amp;
  status_.pll_locked = p.locked;

  const double rel_err = (agc_.amplitude() - cfg_.agc.setpoint_v) / cfg_.agc.setpoint_v;
  status_.agc_settled = settle_.update(rel_err, agc_.enabled() && p.locked);

  const IqSample iq = demod_iq(centered_secondary, ref);
  const auto bi = box_i_.push(iq.i);
  const auto bq = box_q_.push(iq.q);
  if (bi && bq) {
    taps_.new_demod = true;
    taps_.demod_i = *bi;
    taps_.demod_q = *bq;
    const IqSample cmd = rebal_.update({*bi, *bq});
    const double mag = std::hypot(null_i_.push(*bi), null_q_.push(*bq));
    status_.secondary_nulled = null_.update(mag, rebal_.enabled() && !safe_);

    taps_.rate_raw_open = *bi * cfg_.scale_open_dps_per_v;
    taps_.rate_raw_closed = cmd.i * cfg_.scale_closed_dps_per_v;
    const auto fo = out_open_.push(taps_.rate_raw_open);
    const auto fc = out_closed_.push(taps_.rate_raw_closed);
    if (fo && fc) {
      taps_.new_output = true;
      taps_.rate_filtered_open = *fo;
      taps_.rate_filtered_closed = *fc;
      taps_.rate_filtered = cfg_.mode == LoopMode::Closed ? *fc : *fo;
      taps_.rate_compensated =
          cfg_.comp_enable ? compensate(taps_.rate_filtered, temp_c, cfg_.comp) : taps_.rate_filtered;
      const FormattedOutput out = output_format(taps_.rate_compensated, cfg_.output);
      taps_.output_volts = out.volts;
      status_.output_clamped = status_.output_clamped || out.clamped;
    }
  }

  ChainDrive d;
  if (safe_) return d;
  d.drive_v = drive_amp * carrier.sin;
  if (rebal_.enabled()) {
    const IqSample& cmd = rebal_.command();
    d.control_v = rebalance_modulate(cmd.i, cmd.q, carrier);
  }
  return d;
}

double nominal_phase_trim(double f_hz, double fs_fast, double physics_rate,
                          double aa_coefficient) {
  const double w_cont = 2.0 * std::numbers::pi * f_hz;
  const double hold = w_cont / (2.0 * fs_fast);
  const double w = w_cont / physics_rate;
  const double r = 1.0 - aa_coefficient;
  const double aa_lag = std::atan2(r * std::sin(w), 1.0 - r * std::cos(w));
  return hold + aa_lag;
}

}  // namespace gyrocond::dsp
