#pragma once

// Closed-form tracking-error laws, unit conversions and the reference table
// of asymptotic phase-estimation errors.

#include <array>
#include <optional>
#include <ostream>
#include <string>

namespace dynetrack {

/// Stationary MSE of adaptive tracking with coherent light, 1 / (2 sqrt(N)).
double mse_adaptive_coherent(double photon_number);

/// Stationary MSE of heterodyne tracking, 1 / sqrt(2 N).
double mse_heterodyne(double photon_number);

/// Stationary MSE of the fixed-gain loop, chi / (8 alpha^2) + kappa / (2 chi).
double mse_vs_gain(double chi, double kappa, double alpha);

/// Gain mismatch r (either direction) at which adaptive tracking loses its
/// advantage over heterodyne detection: the root 1 + sqrt(2) of (r + 1/r)/2 = sqrt(2).
double gain_mismatch_threshold();

struct SqueezedMse {
  double mse = 0.0;
  /// False when S < 5 N^(-1/3): amplitude noise is no longer negligible and
  /// the value is outside the formula's validity.
  bool moderate = true;
};

/// sqrt(S) / (2 sqrt(N)) at gain chi = kappa / sigma^2.
SqueezedMse mse_adaptive_squeezed(double s, double photon_number);

/// Squeezing below this factor times N^(-1/3) is flagged as not moderate.
inline constexpr double kModerateSqueezingFactor = 5.0;

/// N = P / (hbar omega kappa).
double photons_per_coherence_time(double power, double omega, double kappa);

enum class Mode { kCW, kSingleShot };
enum class Detection { kDyne, kInterferometric };
enum class Source { kCoherent, kNonclassical };
enum class Adaptivity { kAdaptive, kNonadaptive };

/// Asymptotic error law constant / x^(num/den), optionally times log(x).
struct ScalingLaw {
  enum class Form {
    kExact,        ///< constant known
    kScaling,      ///< "~", constant not given
    kConjectured,  ///< "?~", scaling conjectured
    kUnknown,      ///< "?"
  };
  enum class Variable { kN, kMeanPhotons, kPhotons };

  Form form = Form::kUnknown;
  double constant = 1.0;
  int exponent_num = 0;
  int exponent_den = 1;
  Variable variable = Variable::kN;
  bool log_factor = false;

  double exponent() const { return static_cast<double>(exponent_num) / exponent_den; }
  /// Constant for kExact laws, empty otherwise.
  std::optional<double> known_constant() const {
    if (form == Form::kExact) return constant;
    return std::nullopt;
  }
};

struct ScalingEntry {
  Mode mode = Mode::kCW;
  Detection detection = Detection::kDyne;
  Source source = Source::kCoherent;
  Adaptivity adaptivity = Adaptivity::kAdaptive;
  ScalingLaw law;
  bool beats_sql = false;
};

ScalingEntry sql_table(Mode mode, Detection detection, Source source, Adaptivity adaptivity);

/// Compact text form of a law, e.g. "0.5/N^0.5", "~1/N^(2/3)", "?".
std::string to_string(const ScalingLaw& law);

/// Writes the table in its 4x4 layout: one row per (mode, adaptivity), one
/// column per (detection, source). Entries that beat the standard quantum
/// limit are wrapped in underscores.
void write_sql_table_csv(std::ostream& out);

}  // namespace dynetrack
