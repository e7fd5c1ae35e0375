#pragma once

#include <numbers>

namespace dynetrack {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduced Planck constant, CODATA 2018 exact value (J s).
inline constexpr double kHbar = 1.054571817e-34;

}  // namespace dynetrack
