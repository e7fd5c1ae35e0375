#pragma once

// Dyne photocurrent synthesis with coherent or squeezed input light.

namespace dynetrack {

enum class LightKind { kCoherent, kSqueezed };

/// Spectral noise powers of the two field quadratures, normalized so that
/// vacuum (coherent light) has unit power in both.
struct NoiseModel {
  LightKind kind = LightKind::kCoherent;
  double s = 1.0;    ///< phase-quadrature power (squeezed)
  double s_a = 1.0;  ///< amplitude-quadrature power (anti-squeezed)

  static NoiseModel coherent() { return {}; }
  /// Minimum-uncertainty squeezing: s_a = 1/s.
  static NoiseModel squeezed(double s) { return {LightKind::kSqueezed, s, 1.0 / s}; }
  static NoiseModel squeezed(double s, double s_a) { return {LightKind::kSqueezed, s, s_a}; }
};

/// Requires 0 < s <= 1 <= s_a and s * s_a >= 1 for squeezed light.
void validate(const NoiseModel& model);

/// Photocurrent noise power when the LO sits at angle theta = Phi - phi from
/// the true signal phase: s_a cos^2(theta) + s sin^2(theta). Exactly 1 for
/// coherent light and exactly s when s == s_a.
double noise_power(double theta, const NoiseModel& model);

/// Integrated photocurrent over one step:
/// 2 alpha cos(Phi - phi) dt + sqrt(noise_power(Phi - phi)) dW_shot.
double photocurrent_increment(double phi, double lo_phase, double alpha,
                              const NoiseModel& model, double dW_shot, double dt);

}  // namespace dynetrack
