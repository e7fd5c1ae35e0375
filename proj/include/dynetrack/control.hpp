#pragma once

// Local-oscillator phase controllers.

namespace dynetrack {

enum class ControllerKind { kHeterodyne, kFixedGain, kKalmanGain };

/// Default heterodyne detuning in units of chi_opt.
inline constexpr double kDefaultDetuningFactor = 50.0;
/// Smallest detuning accepted, in units of chi_opt.
inline constexpr double kMinDetuningFactor = 10.0;
/// Largest heterodyne LO advance per step, Delta * dt.
inline constexpr double kMaxDetuningStep = 0.05;
/// Largest adaptive LO update per step; larger updates abort the trajectory.
inline constexpr double kMaxLoStep = 0.7853981633974483;  // pi/4

struct ControllerSpec {
  ControllerKind kind = ControllerKind::kFixedGain;
  double detuning = 0.0;     ///< Delta (heterodyne)
  double lo_phase0 = 0.0;    ///< Phi(0) (heterodyne)
  double gain = 0.0;         ///< chi (fixed gain), 1/time
  double sigma2_init = 0.0;  ///< initial variance (Kalman gain)
  double demod_rate = 0.0;   ///< heterodyne demodulator decay; 0 selects alpha sqrt(2 kappa)

  static ControllerSpec heterodyne(double detuning, double demod_rate = 0.0,
                                   double lo_phase0 = 0.0) {
    return {ControllerKind::kHeterodyne, detuning, lo_phase0, 0.0, 0.0, demod_rate};
  }
  static ControllerSpec fixed_gain(double chi) {
    return {ControllerKind::kFixedGain, 0.0, 0.0, chi, 0.0, 0.0};
  }
  static ControllerSpec kalman(double sigma2_init) {
    return {ControllerKind::kKalmanGain, 0.0, 0.0, 0.0, sigma2_init, 0.0};
  }
};

/// Checks the controller against the loop parameters it will run with.
void validate(const ControllerSpec& spec, double kappa, double alpha);

/// Swept LO phase: Phi0 + Delta t.
double heterodyne_lo_phase(double t, double detuning, double lo_phase0);

/// One fixed-gain feedback step: Phi + chi I_dt / (2 alpha).
double adaptive_lo_step(double lo_phase, double I_dt, double chi, double alpha);

/// chi_opt = 2 alpha sqrt(kappa).
double optimal_gain(double kappa, double alpha);

/// chi_opt in physical units, 2 sqrt(kappa P / (hbar omega)).
double optimal_gain_physical(double kappa, double power, double omega);

/// Gain kappa / sigma^2 for the squeezed-light stationary variance
/// sqrt(S) / (2 sqrt(N)); reduces to optimal_gain at s = 1.
double squeezed_gain(double kappa, double alpha, double s);

/// Euler step of d(sigma^2)/dt = kappa - 4 alpha^2 sigma^4.
/// Throws StiffnessError if the result is not positive.
double riccati_step(double sigma2, double kappa, double alpha, double dt);

/// Coefficient on I_dt in the estimate update, 2 alpha sigma^2. The
/// equivalent loop gain is chi = 2 alpha * kalman_gain.
double kalman_gain(double sigma2, double alpha);

}  // namespace dynetrack
