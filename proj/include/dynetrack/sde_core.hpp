#pragma once

// Random streams, Wiener increments and Euler-Maruyama stepping of the
// diffusing signal phase.

#include <cstdint>
#include <random>

namespace dynetrack {

/// Physical and discretization parameters of one simulated ensemble.
///
/// Units are dimensionless by default: kappa = 1 fixes the time unit, so the
/// photon number per coherence time is N = alpha^2 / kappa.
struct SimConfig {
  double kappa = 1.0;    ///< phase-diffusion rate (1/time)
  double alpha = 20.0;   ///< field amplitude, sqrt(photons/time)
  double dt = 1.25e-4;   ///< integrator step
  double t_burn = 0.5;   ///< discarded transient
  double t_meas = 5.0;   ///< recorded duration after burn-in
  std::uint64_t seed = 1;
  std::uint64_t n_traj = 1;
  double phi0 = 0.0;     ///< initial true phase
};

/// Largest allowed dt * rate for any closed-loop rate.
inline constexpr double kMaxStepRate = 0.02;

/// N = alpha^2 / kappa.
double photon_number(const SimConfig& config);

/// alpha = sqrt(N kappa).
double amplitude_for(double photon_number, double kappa);

/// Throws ConfigError when an invariant of SimConfig is broken, including the
/// stiffness guard dt * max(kappa, chi_opt) <= 0.02.
void validate(const SimConfig& config);

/// Independent sub-streams inside one trajectory.
enum class Substream : std::uint32_t {
  kPhase = 0,  ///< drives the true-phase diffusion
  kShot = 1,   ///< drives the photocurrent vacuum noise
};

/// Deterministic Gaussian source keyed by (seed, stream_id, substream).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id,
            Substream substream = Substream::kPhase);

  double standard_normal() { return normal_(engine_); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id,
                      Substream substream = Substream::kPhase);

/// Wiener increment: N(0, dt). Throws ConfigError for dt <= 0.
double gaussian_increment(RngStream& stream, double dt);

/// phi + sqrt(kappa) dW, left unwrapped. Throws ConfigError for kappa < 0.
double step_phase(double phi, double kappa, double dW);

}  // namespace dynetrack
