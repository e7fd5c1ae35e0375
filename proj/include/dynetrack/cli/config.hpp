#pragma once

// Key-value run configuration with per-key provenance, and its translation
// into simulation and sweep specifications.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dynetrack/harness.hpp"

namespace dynetrack::cli {

enum class Provenance { kDefault, kFile, kFlag };

std::string_view to_string(Provenance p);

struct ConfigEntry {
  std::string value;  ///< canonical text form
  Provenance provenance = Provenance::kDefault;
};

/// Every known key with a value; defaults are materialized on construction.
///
/// Keys (default):
///   experiment (gain)       gain | n | squeeze | het-vs-adaptive
///   scheme (adaptive)       adaptive | kalman | heterodyne (heterodyne: simulate only)
///   N (400)                 photons per coherence time, > 0
///   kappa (1)               diffusion rate, > 0
///   seed (1), n_traj (200)
///   gain_ratio (1)          chi / chi_opt for coherent fixed-gain loops
///   noise (coherent)        coherent | squeezed (simulate)
///   S (1), S_a (0)          squeezing; S_a = 0 selects 1/S
///   squeeze_coeff (0)       sweeps: S = coeff * N^squeeze_exponent, 0 = coherent
///   squeeze_exponent (-1/3)
///   step_fraction (0.005)   dt * loop rate
///   het_step_fraction (0.05) Delta * dt
///   burn_in (20), measure (200)  durations in loop times
///   detuning_factor (50)    Delta / chi_opt
///   grid ()                 empty: the experiment's default grid
///   exclude_slips (false), slip_threshold (pi/2)
///   record_trajectories (true), sample_stride (0: automatic)
///   dt (0)                  simulate only; 0 derives dt from step_fraction
class Config {
 public:
  Config();

  /// Parses and validates one value; throws ConfigError naming key, value
  /// and constraint. Unknown keys are errors.
  void set(std::string_view key, std::string_view value, Provenance provenance);

  const ConfigEntry& entry(std::string_view key) const;
  const std::map<std::string, ConfigEntry, std::less<>>& entries() const { return entries_; }

  double number(std::string_view key) const;
  std::uint64_t integer(std::string_view key) const;
  bool flag(std::string_view key) const;
  const std::string& text(std::string_view key) const;

  static const std::vector<std::string>& known_keys();

 private:
  std::map<std::string, ConfigEntry, std::less<>> entries_;
};

/// Applies "key = value" (or "key: value") lines; '#' starts a comment.
/// Duplicate keys and malformed lines are errors reported with line numbers.
void apply_config_text(Config& config, std::string_view text,
                       Provenance provenance = Provenance::kFile);

/// Reads a file and applies it; throws ConfigError when it cannot be read.
void apply_config_file(Config& config, const std::string& path);

/// Grid specification: "a,b,c", "log:a:b:n" or "lin:a:b:n".
std::vector<double> parse_grid(std::string_view spec);

/// Normalizes "het_vs_adaptive" and similar spellings; throws for unknown names.
ExperimentKind parse_experiment(std::string_view name);

/// Grid used when the grid key is empty.
std::vector<double> default_grid(ExperimentKind kind);

/// The single ensemble described by the configuration (simulate).
struct SimulationPlan {
  std::string scheme;
  PointSetup setup;
  double analytic = 0.0;  ///< closed-form MSE, NaN when none applies
};

SimulationPlan to_simulation(const Config& config);

/// Fully validated sweep specification.
SweepSpec to_sweep(const Config& config);

RunOptions to_run_options(const Config& config, unsigned threads);

}  // namespace dynetrack::cli
