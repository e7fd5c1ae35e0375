#include "dynetrack/control.hpp"

#include <cmath>
#include <sstream>

#include "dynetrack/constants.hpp"
#include "dynetrack/errors.hpp"

namespace dynetrack {

void validate(const ControllerSpec& spec, double kappa, double alpha) {
  std::ostringstream msg;
  switch (spec.kind) {
    case ControllerKind::kHeterodyne: {
      const double floor = kMinDetuningFactor * optimal_gain(kappa, alpha);
      if (!(spec.detuning >= floor)) {
        msg << "ControllerSpec.Delta = " << spec.detuning << " violates Delta >= "
            << kMinDetuningFactor << "*chi_opt = " << floor;
      } else if (spec.demod_rate < 0.0) {
        msg << "ControllerSpec.demod_rate = " << spec.demod_rate << " violates lambda >= 0";
      } else {
        return;
      }
      break;
    }
    case ControllerKind::kFixedGain:
      if (spec.gain > 0.0 && std::isfinite(spec.gain)) return;
      msg << "ControllerSpec.chi = " << spec.gain << " violates chi > 0";
      break;
    case ControllerKind::kKalmanGain:
      if (spec.sigma2_init > 0.0 && std::isfinite(spec.sigma2_init)) return;
      msg << "ControllerSpec.sigma2_init = " << spec.sigma2_init << " violates sigma2_init > 0";
      break;
  }
  throw ConfigError(msg.str());
}

double heterodyne_lo_phase(double t, double detuning, double lo_phase0) {
  return lo_phase0 + detuning * t;
}

double adaptive_lo_step(double lo_phase, double I_dt, double chi, double alpha) {
  return lo_phase + chi * I_dt / (2.0 * alpha);
}

double optimal_gain(double kappa, double alpha) { return 2.0 * alpha * std::sqrt(kappa); }

double optimal_gain_physical(double kappa, double power, double omega) {
  if (!(kappa > 0.0 && power > 0.0 && omega > 0.0)) {
    throw ConfigError("optimal_gain_physical: kappa, P and omega must be positive");
  }
  return 2.0 * std::sqrt(kappa * power / (kHbar * omega));
}

double squeezed_gain(double kappa, double alpha, double s) {
  if (!(s > 0.0)) throw ConfigError("squeezed_gain: S must be > 0");
  return optimal_gain(kappa, alpha) / std::sqrt(s);
}

double riccati_step(double sigma2, double kappa, double alpha, double dt) {
  const double next = sigma2 + (kappa - 4.0 * alpha * alpha * sigma2 * sigma2) * dt;
  if (!(next > 0.0)) {
    std::ostringstream msg;
    msg << "riccati_step: sigma^2 went non-positive (" << next << ") at dt = " << dt;
    throw StiffnessError(msg.str());
  }
  return next;
}

double kalman_gain(double sigma2, double alpha) { return 2.0 * alpha * sigma2; }

}  // namespace dynetrack
