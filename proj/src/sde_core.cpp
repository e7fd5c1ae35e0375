#include "dynetrack/sde_core.hpp"

#include <cmath>
#include <sstream>

#include "dynetrack/control.hpp"
#include "dynetrack/errors.hpp"

namespace dynetrack {

namespace {

void require(bool ok, const char* field, double value, const char* constraint) {
  if (ok) return;
  std::ostringstream msg;
  msg << "SimConfig." << field << " = " << value << " violates " << constraint;
  throw ConfigError(msg.str());
}

}  // namespace

double photon_number(const SimConfig& config) {
  return config.alpha * config.alpha / config.kappa;
}

double amplitude_for(double photon_number, double kappa) {
  if (!(photon_number > 0.0) || !(kappa > 0.0)) {
    throw ConfigError("photon number and kappa must be positive");
  }
  return std::sqrt(photon_number * kappa);
}

void validate(const SimConfig& config) {
  require(config.kappa > 0.0, "kappa", config.kappa, "kappa > 0");
  require(config.alpha > 0.0, "alpha", config.alpha, "alpha > 0");
  require(config.dt > 0.0, "dt", config.dt, "dt > 0");
  require(config.t_burn > 0.0, "t_burn", config.t_burn, "t_burn > 0");
  require(config.t_meas > 0.0, "t_meas", config.t_meas, "t_meas > 0");
  require(config.n_traj >= 1, "n_traj", static_cast<double>(config.n_traj), "n_traj >= 1");
  require(std::isfinite(config.phi0), "phi0", config.phi0, "finite phi0");
  const double rate = std::max(config.kappa, optimal_gain(config.kappa, config.alpha));
  require(config.dt * rate <= kMaxStepRate, "dt", config.dt,
          "stiffness guard dt*max(kappa, chi_opt) <= 0.02");
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, Substream substream)
    : seed_(seed), stream_id_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32),
                    static_cast<std::uint32_t>(substream)};
  engine_.seed(seq);
}

RngStream make_stream(std::uint64_t seed, std::uint64_t stream_id, Substream substream) {
  return RngStream(seed, stream_id, substream);
}

double gaussian_increment(RngStream& stream, double dt) {
  if (!(dt > 0.0)) throw ConfigError("gaussian_increment: dt must be > 0");
  return std::sqrt(dt) * stream.standard_normal();
}

double step_phase(double phi, double kappa, double dW) {
  if (kappa < 0.0) throw ConfigError("step_phase: kappa must be >= 0");
  return phi + std::sqrt(kappa) * dW;
}

}  // namespace dynetrack
