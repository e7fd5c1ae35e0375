#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dynetrack {

/// Invalid parameter or configuration value. The message names the offending
/// field, its value, and the violated constraint.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Integration step too coarse for the loop dynamics: an LO update exceeded
/// the per-step cap or a variance recursion went non-positive.
class StiffnessError : public std::runtime_error {
 public:
  explicit StiffnessError(const std::string& what, std::int64_t trajectory = -1)
      : std::runtime_error(trajectory < 0 ? what
                                          : "trajectory " + std::to_string(trajectory) + ": " + what),
        trajectory_(trajectory) {}

  std::int64_t trajectory() const noexcept { return trajectory_; }

 private:
  std::int64_t trajectory_;
};

/// Non-finite state encountered during integration.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The heterodyne demodulator holds no signal (accumulator is exactly zero).
class NoSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dynetrack
