#include "gyrocond/model/gyro_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "gyrocond/error.hpp"

namespace gyrocond::model {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kDegPerRad = 180.0 / std::numbers::pi;

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

}  // namespace

AngularRate AngularRate::deg_per_s(double v) { return AngularRate(v / kDegPerRad); }

double AngularRate::deg_per_s() const { return rad_s_ * kDegPerRad; }

void GyroParams::validate() const {
  if (!finite_positive(f1) || !finite_positive(f2)) {
    throw Error("out-of-range", "resonances must be positive");
  }
  // Q may be infinite (lossless test double) but must be positive.
  if (!(q1 > 0.0) || !(q2 > 0.0) || std::isnan(q1) || std::isnan(q2)) {
    throw Error("out-of-range", "quality factors must be positive");
  }
  if (!finite_positive(mass)) throw Error("out-of-range", "mass must be positive");
  if (!finite_positive(x_ref)) throw Error("out-of-range", "x_ref must be positive");
  for (double v : {kappa, g_drive, g_pickoff, tc_f, tc_g, k3, pickoff_noise}) {
    if (!std::isfinite(v)) throw Error("out-of-range", "gyro parameters must be finite");
  }
  if (pickoff_noise < 0.0) throw Error("out-of-range", "pickoff noise must be non-negative");
}

double effective_resonance(double f_hz, double tc_f, double temp_c) {
  return f_hz * (1.0 + tc_f * (temp_c - kReferenceTempC));
}

double pickoff_gain(const GyroParams& p, double temp_c) {
  return p.g_pickoff * (1.0 + p.tc_g * (temp_c - kReferenceTempC));
}

double ModeStepper::spectral_radius() const {
  // Eigenvalues of [[a00, a01], [a10, a11]].
  const double tr = a00 + a11;
  const double det = a00 * a11 - a01 * a10;
  const double disc = tr * tr / 4.0 - det;
  if (disc >= 0.0) {
    const double r = std::sqrt(disc);
    return std::max(std::abs(tr / 2.0 + r), std::abs(tr / 2.0 - r));
  }
  return std::sqrt(det);
}

ModeStepper discretize_mode(double f_hz, double q, double dt) {
  const double w = kTwoPi * f_hz;
  const double sigma = std::isinf(q) ? 0.0 : w / (2.0 * q);
  const double wd2 = w * w - sigma * sigma;

  // c ~ cos(wd t), s ~ sin(wd t) / wd, generalized across damping regimes.
  double c = 1.0;
  double s = dt;
  if (wd2 > 0.0) {
    const double wd = std::sqrt(wd2);
    c = std::cos(wd * dt);
    s = std::sin(wd * dt) / wd;
  } else if (wd2 < 0.0) {
    const double wh = std::sqrt(-wd2);
    c = std::cosh(wh * dt);
    s = std::sinh(wh * dt) / wh;
  }
  const double decay = std::exp(-sigma * dt);

  ModeStepper m;
  m.omega = w;
  m.a00 = decay * (c + sigma * s);
  m.a01 = decay * s;
  m.a10 = -decay * w * w * s;
  m.a11 = decay * (c - sigma * s);
  // Gamma = A^-1 (Phi - I) B with B = [0, 1].
  m.b0 = (1.0 - m.a11 - 2.0 * sigma * m.a01) / (w * w);
  m.b1 = m.a01;
  return m;
}

ResonatorStepper derive_stepper(const GyroParams& params, double temp_c, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw Error("out-of-range", "time step must be positive");
  }
  const double f1 = effective_resonance(params.f1, params.tc_f, temp_c);
  const double f2 = effective_resonance(params.f2, params.tc_f, temp_c);
  if (dt * kTwoPi * std::max(f1, f2) >= 0.5) {
    throw Error("out-of-range", "time step does not adequately sample the resonance");
  }
  ResonatorStepper st;
  st.primary = discretize_mode(f1, params.q1, dt);
  st.secondary = discretize_mode(f2, params.q2, dt);
  st.temp_c = temp_c;
  st.dt = dt;
  return st;
}

StepResult step(const GyroState& state, double drive_v, double control_v,
                const ResonatorStepper& stepper, const GyroParams& params,
                PickoffNoise noise) {
  if (!std::isfinite(drive_v) || !std::isfinite(control_v)) {
    throw Error("simulation-fault", "non-finite electrode voltage");
  }
  StepResult r;
  r.state = state;
  GyroState& s = r.state;

  const double w2 = stepper.secondary.omega;
  const double xn = s.x2 / params.x_ref;
  const double f_primary = params.g_drive * drive_v;
  const double f_secondary = 2.0 * params.kappa * params.mass * s.omega_z * s.v1 +
                             params.g_drive * control_v -
                             params.k3 * params.mass * w2 * w2 * xn * xn * s.x2;

  stepper.primary.advance(s.x1, s.v1, f_primary / params.mass);
  stepper.secondary.advance(s.x2, s.v2, f_secondary / params.mass);

  if (!std::isfinite(s.x1) || !std::isfinite(s.v1) || !std::isfinite(s.x2) ||
      !std::isfinite(s.v2)) {
    throw Error("simulation-fault", "gyro state became non-finite");
  }

  const double g = pickoff_gain(params, s.temp);
  r.primary_pickoff = g * s.x1 + (noise.primary != nullptr ? noise.primary->sample() : 0.0);
  r.secondary_pickoff =
      g * s.x2 + (noise.secondary != nullptr ? noise.secondary->sample() : 0.0);
  return r;
}

GyroState set_environment(GyroState state, AngularRate rate, double temp_c) {
  if (!(temp_c >= kMinTempC && temp_c <= kMaxTempC)) {
    throw Error("out-of-range", "temperature " + std::to_string(temp_c) +
                                    " degC outside the [-55, 150] guard band");
  }
  if (!std::isfinite(rate.rad_per_s())) {
    throw Error("out-of-range", "angular rate must be finite");
  }
  state.omega_z = rate.rad_per_s();
  state.temp = temp_c;
  return state;
}

GyroModel::GyroModel(const GyroParams& params, std::uint64_t seed, double dt)
    : params_(params),
      dt_(dt),
      noise_primary_(params.pickoff_noise, 1.0 / dt, split_seed(seed, 1)),
      noise_secondary_(params.pickoff_noise, 1.0 / dt, split_seed(seed, 2)) {
  params_.validate();
  refresh_stepper(true);
}

void GyroModel::refresh_stepper(bool force) {
  if (!force && std::abs(state_.temp - stepper_.temp_c) <= kStepperRefreshC) return;
  stepper_ = derive_stepper(params_, state_.temp, dt_);
  ++derivations_;
}

StepResult GyroModel::step(double drive_v, double control_v) {
  StepResult r = model::step(state_, drive_v, control_v, stepper_, params_,
                             PickoffNoise{&noise_primary_, &noise_secondary_});
  state_ = r.state;
  return r;
}

void GyroModel::set_environment(AngularRate rate, double temp_c) {
  state_ = model::set_environment(state_, rate, temp_c);
  refresh_stepper(false);
}

void GyroModel::set_rate(AngularRate rate) {
  if (!std::isfinite(rate.rad_per_s())) {
    throw Error("out-of-range", "angular rate must be finite");
  }
  state_.omega_z = rate.rad_per_s();
}

}  // namespace gyrocond::model
