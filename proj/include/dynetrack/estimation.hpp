#pragma once

// Phase estimators: the adaptive LO identity, the discrete inverse-variance
// filter, and the heterodyne complex demodulator.

#include <complex>

namespace dynetrack {

/// Estimate implied by an adaptive LO locked in quadrature: Phi - pi/2.
double adaptive_estimate(double lo_phase);

/// Variance of the estimate formed from one window of photocurrent,
/// 1 / (4 alpha^2 delta_t).
double immediate_variance(double alpha, double delta_t);

/// Prior variance after the signal phase diffuses for delta_t.
double inflate_variance(double sigma2, double kappa, double delta_t);

struct Estimate {
  double value = 0.0;
  double variance = 0.0;
};

/// Inverse-variance weighted combination of two independent estimates.
/// A variance of +infinity marks an uninformative input. Throws ConfigError
/// for non-positive variances.
Estimate combine_estimates(double e1, double v1, double e2, double v2);

/// Running state of the discrete filter. Photocurrent can be accumulated into
/// the open window with push() and folded in by filter_update().
struct FilterState {
  double phi_hat = 0.0;
  double sigma2 = 1.0;
  double window_current = 0.0;  ///< integral of I over the open window
  double window_length = 0.0;

  void push(double I_dt, double dt) {
    window_current += I_dt;
    window_length += dt;
  }
};

/// One filter update with an explicit window: the immediate estimate
/// phi_hat + I_window / (2 alpha delta_t) is combined with the prior phi_hat
/// whose variance has been inflated by kappa delta_t. The returned state has
/// an empty window.
FilterState filter_update(const FilterState& state, double I_window, double delta_t,
                          double kappa, double alpha);

/// Folds the accumulated window of `state` in.
FilterState filter_update(const FilterState& state, double kappa, double alpha);

/// Exponentially weighted complex demodulator.
struct DemodState {
  std::complex<double> acc{0.0, 0.0};
  double rate = 1.0;  ///< decay rate lambda
};

/// Decay rate that minimizes the heterodyne tracking error, alpha sqrt(2 kappa).
double default_demod_rate(double kappa, double alpha);

/// acc <- acc + exp(i Phi) I_dt - lambda acc dt.
DemodState demod_step(const DemodState& state, double lo_phase, double I_dt, double dt);

/// arg(acc) in (-pi, pi]. Throws NoSignalError when acc == 0.
double heterodyne_estimate(const DemodState& state);

/// The representative of `angle` (mod 2 pi) nearest to `reference`.
double unwrap_nearest(double angle, double reference);

}  // namespace dynetrack
