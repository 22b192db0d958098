#pragma once

#include <cstdint>

#include "gyrocond/afe/converters.hpp"

namespace gyrocond::model {

inline constexpr double kReferenceTempC = 25.0;
inline constexpr double kMinTempC = -55.0;
inline constexpr double kMaxTempC = 150.0;
/// Stepper is re-derived when the temperature moved more than this since the
/// last derivation.
inline constexpr double kStepperRefreshC = 0.01;
inline constexpr double kPhysicsDt = 1.0e-6;

/// Angular rate with an explicit unit at every construction site.
class AngularRate {
 public:
  constexpr AngularRate() = default;
  static AngularRate rad_per_s(double v) { return AngularRate(v); }
  static AngularRate deg_per_s(double v);

  double rad_per_s() const { return rad_s_; }
  double deg_per_s() const;

 private:
  explicit constexpr AngularRate(double rad_s) : rad_s_(rad_s) {}
  double rad_s_ = 0.0;
};

struct GyroParams {
  double f1 = 15'000.0;          // primary resonance, Hz
  double f2 = 15'000.0;          // secondary resonance, Hz
  double q1 = 5'000.0;
  double q2 = 5'000.0;           // may be +inf (lossless mode)
  double kappa = 0.1;            // Coriolis coupling
  double mass = 1.0;             // normalized modal mass, kg
  double g_drive = 2.0;          // N/V
  double g_pickoff = 1.0e6;      // V/m
  double tc_f = -25.0e-6;        // 1/degC
  double tc_g = -100.0e-6;       // 1/degC
  double k3 = 1.0e-4;            // cubic stiffness fraction at x_ref
  double x_ref = 1.0e-7;         // displacement at which k3 is quoted, m
  // Solved by the noise calibration scenario (calibration/noise_calibration.json)
  // for a rate noise density of 0.09 dps/rtHz.
  double pickoff_noise = 1.5873039372295197e-06;  // V/rtHz, solved by the noise_calibration scenario

  void validate() const;
};

struct GyroState {
  double x1 = 0.0;
  double v1 = 0.0;
  double x2 = 0.0;
  double v2 = 0.0;
  double temp = kReferenceTempC;
  double omega_z = 0.0;  // rad/s
};

/// Exact zero-order-hold discretization of x'' + (w/Q) x' + w^2 x = a for one
/// fixed step. `b0, b1` map a constant acceleration a = F/m over the step.
struct ModeStepper {
  double a00 = 1.0, a01 = 0.0, a10 = 0.0, a11 = 1.0;
  double b0 = 0.0, b1 = 0.0;
  double omega = 0.0;  // effective natural frequency, rad/s

  void advance(double& x, double& v, double accel) const {
    const double xn = a00 * x + a01 * v + b0 * accel;
    const double vn = a10 * x + a11 * v + b1 * accel;
    x = xn;
    v = vn;
  }
  double spectral_radius() const;
};

struct ResonatorStepper {
  ModeStepper primary;
  ModeStepper secondary;
  double temp_c = kReferenceTempC;
  double dt = kPhysicsDt;
};

/// f(T) = f * (1 + tc_f * (T - 25)).
double effective_resonance(double f_hz, double tc_f, double temp_c);
double pickoff_gain(const GyroParams& p, double temp_c);

ModeStepper discretize_mode(double f_hz, double q, double dt);

/// Throws out-of-range when dt <= 0 or dt * 2*pi*f1 >= 0.5.
ResonatorStepper derive_stepper(const GyroParams& params, double temp_c, double dt);

struct PickoffNoise {
  afe::NoiseSource* primary = nullptr;
  afe::NoiseSource* secondary = nullptr;
};

struct StepResult {
  GyroState state;
  double primary_pickoff = 0.0;
  double secondary_pickoff = 0.0;
};

/// One physics step. Forces are held constant over the step; the Coriolis and
/// cubic terms are evaluated from the state at the start of the step.
/// Throws simulation-fault on non-finite inputs or state.
StepResult step(const GyroState& state, double drive_v, double control_v,
                const ResonatorStepper& stepper, const GyroParams& params,
                PickoffNoise noise = {});

/// Throws out-of-range if temp_c is outside [-55, 150].
GyroState set_environment(GyroState state, AngularRate rate, double temp_c);

/// Owning wrapper: keeps the stepper in sync with temperature and owns the
/// seeded pickoff noise sources.
class GyroModel {
 public:
  GyroModel(const GyroParams& params, std::uint64_t seed, double dt = kPhysicsDt);

  StepResult step(double drive_v, double control_v);
  void set_environment(AngularRate rate, double temp_c);
  void set_rate(AngularRate rate);

  const GyroState& state() const { return state_; }
  const GyroParams& params() const { return params_; }
  const ResonatorStepper& stepper() const { return stepper_; }
  double dt() const { return dt_; }
  /// Number of stepper derivations so far (including the initial one).
  int stepper_derivations() const { return derivations_; }
  double pickoff_gain_now() const { return pickoff_gain_; }

 private:
  void refresh_stepper(bool force);

  GyroParams params_;
  double dt_;
  GyroState state_;
  ResonatorStepper stepper_;
  double pickoff_gain_ = 0.0;
  afe::NoiseSource noise_primary_;
  afe::NoiseSource noise_secondary_;
  int derivations_ = 0;
};

}  // namespace gyrocond::model
