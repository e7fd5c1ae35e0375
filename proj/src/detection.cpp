#include "dynetrack/detection.hpp"

#include <cmath>
#include <sstream>

#include "dynetrack/errors.hpp"

namespace dynetrack {

void validate(const NoiseModel& model) {
  if (model.kind == LightKind::kCoherent) return;
  std::ostringstream msg;
  if (!(model.s > 0.0 && model.s <= 1.0)) {
    msg << "NoiseModel.S = " << model.s << " violates 0 < S <= 1";
  } else if (!(model.s_a >= 1.0) || !std::isfinite(model.s_a)) {
    msg << "NoiseModel.S_a = " << model.s_a << " violates S_a >= 1";
  } else if (model.s * model.s_a < 1.0 - 1e-12) {
    msg << "NoiseModel S*S_a = " << model.s * model.s_a << " violates S*S_a >= 1";
  } else {
    return;
  }
  throw ConfigError(msg.str());
}

double noise_power(double theta, const NoiseModel& model) {
  if (model.kind == LightKind::kCoherent) return 1.0;
  if (model.s == model.s_a) return model.s;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  return model.s_a * c * c + model.s * s * s;
}

double photocurrent_increment(double phi, double lo_phase, double alpha,
                              const NoiseModel& model, double dW_shot, double dt) {
  const double theta = lo_phase - phi;
  const double signal = 2.0 * alpha * std::cos(theta) * dt;
  if (model.kind == LightKind::kCoherent) return signal + dW_shot;
  return signal + std::sqrt(noise_power(theta, model)) * dW_shot;
}

}  // namespace dynetrack
