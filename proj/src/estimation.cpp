#include "dynetrack/estimation.hpp"

#include <cmath>
#include <limits>

#include "dynetrack/constants.hpp"
#include "dynetrack/errors.hpp"

namespace dynetrack {

double adaptive_estimate(double lo_phase) { return lo_phase - kPi / 2.0; }

double immediate_variance(double alpha, double delta_t) {
  if (!(alpha > 0.0 && delta_t > 0.0)) {
    throw ConfigError("immediate_variance: alpha and delta_t must be positive");
  }
  return 1.0 / (4.0 * alpha * alpha * delta_t);
}

double inflate_variance(double sigma2, double kappa, double delta_t) {
  return sigma2 + kappa * delta_t;
}

Estimate combine_estimates(double e1, double v1, double e2, double v2) {
  if (!(v1 > 0.0 && v2 > 0.0)) {
    throw ConfigError("combine_estimates: variances must be positive");
  }
  const double w1 = 1.0 / v1;
  const double w2 = 1.0 / v2;
  const double v = 1.0 / (w1 + w2);
  // Skip the uninformative side so that inf * 0 never appears.
  if (w2 == 0.0) return {e1, v1};
  if (w1 == 0.0) return {e2, v2};
  return {(e1 * w1 + e2 * w2) * v, v};
}

FilterState filter_update(const FilterState& state, double I_window, double delta_t,
                          double kappa, double alpha) {
  if (!(delta_t > 0.0)) throw ConfigError("filter_update: delta_t must be > 0");
  if (!(state.sigma2 > 0.0)) throw StiffnessError("filter_update: sigma^2 must stay positive");
  const double v_old = inflate_variance(state.sigma2, kappa, delta_t);
  const double v_imm = immediate_variance(alpha, delta_t);
  const double e_imm = state.phi_hat + I_window / (2.0 * alpha * delta_t);
  const Estimate combined = combine_estimates(e_imm, v_imm, state.phi_hat, v_old);
  FilterState next;
  next.phi_hat = combined.value;
  next.sigma2 = combined.variance;
  return next;
}

FilterState filter_update(const FilterState& state, double kappa, double alpha) {
  return filter_update(state, state.window_current, state.window_length, kappa, alpha);
}

double default_demod_rate(double kappa, double alpha) { return alpha * std::sqrt(2.0 * kappa); }

DemodState demod_step(const DemodState& state, double lo_phase, double I_dt, double dt) {
  const std::complex<double> lo{std::cos(lo_phase), std::sin(lo_phase)};
  return {state.acc + lo * I_dt - state.rate * state.acc * dt, state.rate};
}

double heterodyne_estimate(const DemodState& state) {
  if (state.acc == std::complex<double>{0.0, 0.0}) {
    throw NoSignalError("heterodyne_estimate: demodulator accumulator is zero");
  }
  const double a = std::arg(state.acc);
  return a <= -kPi ? kPi : a;
}

double unwrap_nearest(double angle, double reference) {
  return angle + kTwoPi * std::round((reference - angle) / kTwoPi);
}

}  // namespace dynetrack
