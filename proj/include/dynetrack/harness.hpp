#pragma once

// Monte Carlo ensembles of the closed tracking loop, stationary-MSE
// statistics, parameter sweeps and fits.

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dynetrack/control.hpp"
#include "dynetrack/detection.hpp"
#include "dynetrack/sde_core.hpp"

namespace dynetrack {

inline constexpr double kDefaultSlipThreshold = 1.5707963267948966;  // pi/2

/// Wraps an angle to (-pi, pi].
double wrap_angle(double angle);

/// Counts excursions of an unwrapped error series away from its lock point.
///
/// An excursion starts when |e - lock| exceeds the threshold and ends once the
/// error is back within half the threshold of some multiple of 2 pi, which
/// becomes the new lock point. A full 2 pi slip is therefore one excursion.
class SlipCounter {
 public:
  explicit SlipCounter(double threshold = kDefaultSlipThreshold);

  void add(double unwrapped_error);
  std::uint64_t count() const noexcept { return count_; }

 private:
  double threshold_;
  double lock_ = 0.0;
  bool started_ = false;
  bool in_excursion_ = false;
  std::uint64_t count_ = 0;
};

/// Throws ConfigError unless threshold lies in (0, pi].
std::uint64_t count_cycle_slips(std::span<const double> unwrapped_errors,
                                double threshold = kDefaultSlipThreshold);

struct TrajectorySample {
  double t = 0.0;
  double phi = 0.0;       ///< true phase (unwrapped)
  double lo_phase = 0.0;  ///< local-oscillator phase
  double estimate = 0.0;  ///< phase estimate (unwrapped)
  double error = 0.0;     ///< wrap(estimate - phi)
};

/// Post-burn-in summary of one trajectory, plus optionally decimated samples.
struct TrajectoryRecord {
  std::uint64_t trajectory_id = 0;
  std::vector<TrajectorySample> samples;
  double sum_sq_error = 0.0;  ///< sum of wrapped squared errors over all steps
  std::uint64_t n_samples = 0;
  std::vector<double> block_means;  ///< mean squared error per contiguous block
  std::uint64_t slip_count = 0;
  TrajectorySample final_state;

  double mse() const { return n_samples ? sum_sq_error / static_cast<double>(n_samples) : 0.0; }
};

/// Streams unwrapped errors into the squared-error sums, block means and slip
/// count of a TrajectoryRecord.
class ErrorAccumulator {
 public:
  ErrorAccumulator(std::uint64_t expected, std::size_t n_blocks, double slip_threshold);

  void add(double unwrapped_error);
  void finish_into(TrajectoryRecord& record) const;

 private:
  std::uint64_t expected_;
  std::uint64_t seen_ = 0;
  double sum_ = 0.0;
  std::vector<double> block_sums_;
  std::vector<std::uint64_t> block_counts_;
  SlipCounter slips_;
};

/// Builds a record from an explicit error series (synthetic input, replay).
TrajectoryRecord record_from_errors(std::span<const double> unwrapped_errors,
                                    std::size_t n_blocks = 20,
                                    double slip_threshold = kDefaultSlipThreshold);

struct RunOptions {
  bool record_samples = false;
  std::uint64_t sample_stride = 0;  ///< 0: about ten samples per loop time 1/rate
  double slip_threshold = kDefaultSlipThreshold;
  std::size_t n_blocks = 20;
  unsigned threads = 0;  ///< 0: hardware concurrency
  /// Zero every noise increment: the loop then sits on its exact lock point.
  bool deterministic_fixture = false;
};

/// Integrates one closed-loop trajectory over t_burn + t_meas with
/// Euler-Maruyama. Errors are recorded after burn-in only.
///
/// Throws ConfigError for invalid inputs or violated step guards,
/// StiffnessError (carrying the trajectory id) when an adaptive LO update
/// exceeds pi/4, and SimulationError on non-finite state.
TrajectoryRecord run_trajectory(const SimConfig& config, const ControllerSpec& controller,
                                const NoiseModel& noise, std::uint64_t trajectory_id = 0,
                                const RunOptions& options = {});

/// Runs trajectories 0..n_traj-1, possibly concurrently; the result is
/// ordered by trajectory id and independent of the thread count. The
/// exception of the lowest failing trajectory is rethrown.
std::vector<TrajectoryRecord> run_ensemble(const SimConfig& config,
                                           const ControllerSpec& controller,
                                           const NoiseModel& noise,
                                           const RunOptions& options = {});

struct MseResult {
  double mse = 0.0;
  double std_error = 0.0;
  std::uint64_t n_samples = 0;
  std::uint64_t n_trajectories = 0;
  std::uint64_t slip_count = 0;
  std::uint64_t slipped_trajectories = 0;
  SimConfig config;
  ControllerSpec controller;
  NoiseModel noise;
  double wall_seconds = 0.0;
};

/// Pooled mean of wrapped squared errors. The standard error comes from
/// per-trajectory means (or within-trajectory block means for a single
/// record). Slipped trajectories are dropped when exclude_slipped is set.
MseResult estimate_stationary_mse(std::span<const TrajectoryRecord> records,
                                  bool exclude_slipped = false);

/// run_ensemble + estimate_stationary_mse with the configuration echoed.
MseResult simulate_mse(const SimConfig& config, const ControllerSpec& controller,
                       const NoiseModel& noise, const RunOptions& options = {},
                       bool exclude_slipped = false);

/// Step and duration choices, all in units of the loop's own time scale.
struct Discretization {
  double step_fraction = 0.005;  ///< dt * rate
  double detuning_step = kMaxDetuningStep;  ///< Delta * dt for heterodyne
  double burn_in = 20.0;   ///< t_burn * rate
  double measure = 200.0;  ///< t_meas * rate
  double detuning_factor = kDefaultDetuningFactor;  ///< Delta / chi_opt
};

struct PointSetup {
  SimConfig config;
  ControllerSpec controller;
  NoiseModel noise;
};

/// Fixed-gain loop at photon number N; `base` supplies kappa, seed, n_traj
/// and phi0. dt is set from max(chi, chi_opt, kappa), durations from chi.
PointSetup adaptive_point(double photon_number, double chi, const NoiseModel& noise,
                          const SimConfig& base, const Discretization& disc = {});

/// Kalman-gain loop started from variance sigma2_init.
PointSetup kalman_point(double photon_number, double sigma2_init, const NoiseModel& noise,
                        const SimConfig& base, const Discretization& disc = {});

/// Heterodyne detection with detuning disc.detuning_factor * chi_opt and
/// demodulator rate `demod_rate` (0: alpha sqrt(2 kappa)).
PointSetup heterodyne_point(double photon_number, const NoiseModel& noise,
                            const SimConfig& base, const Discretization& disc = {},
                            double demod_rate = 0.0);

enum class ExperimentKind { kGainSweep, kNSweep, kSqueezeSweep, kHetVsAdaptive };

std::string_view to_string(ExperimentKind kind);

/// Squeezing attached to each sweep point: S = coeff * N^exponent (coeff 0
/// selects coherent light); S_a = anti_squeezing, or 1/S when that is 0.
struct SqueezeLaw {
  double coeff = 0.0;
  double exponent = -1.0 / 3.0;
  double anti_squeezing = 0.0;
};

struct SweepSpec {
  ExperimentKind kind = ExperimentKind::kGainSweep;
  /// r = chi/chi_opt (gain), N (n, het-vs-adaptive) or S (squeeze).
  std::vector<double> grid;
  SimConfig base;  ///< kappa, alpha (sets N where N is not swept), seed, n_traj
  Discretization disc;
  ControllerKind adaptive = ControllerKind::kFixedGain;
  double gain_ratio = 1.0;  ///< chi / chi_opt for coherent adaptive points
  SqueezeLaw squeeze;
  bool exclude_slipped = false;
};

/// Throws ConfigError for an empty grid or any grid point whose derived
/// configuration is invalid.
void validate(const SweepSpec& spec);

struct SweepRow {
  std::string scheme;  ///< "adaptive", "kalman" or "heterodyne"
  std::vector<std::pair<std::string, double>> params;
  MseResult result;
  double analytic = 0.0;
  double ratio = 0.0;  ///< simulated / analytic
  std::string error;   ///< non-empty when the point failed

  bool ok() const { return error.empty(); }
};

struct SweepTable {
  SweepSpec spec;
  std::vector<SweepRow> rows;
};

/// Point setups of a sweep, in row order, paired with their scheme names.
std::vector<std::pair<std::string, PointSetup>> sweep_points(const SweepSpec& spec);

/// One row per grid point (two per N for het-vs-adaptive), each with its
/// closed-form prediction. Failed points are recorded and the sweep goes on.
SweepTable run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// CSV with a leading "# manifest_hash=..." line and 17 significant digits.
void write_sweep_csv(std::ostream& out, const SweepTable& table, std::string_view manifest_hash);

struct PowerLawFit {
  double exponent = 0.0;
  double constant = 0.0;
  double residual = 0.0;  ///< norm of log-space residuals
  double exponent_stderr = 0.0;
};

/// Least-squares line through (ln x, ln y). Needs at least three points, all
/// positive, with at least two distinct x.
PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points);

struct SqueezeSearchPoint {
  double s = 0.0;
  double mse = 0.0;
  double std_error = 0.0;
  std::string error;
};

struct SqueezingOptimum {
  double s_opt = 0.0;
  double mse_opt = 0.0;
  double mse_opt_stderr = 0.0;
  double log_s_uncertainty = 0.0;  ///< 1-sigma uncertainty of ln S_opt
  bool ambiguous = false;
  std::string note;
  std::vector<SqueezeSearchPoint> evaluated;
};

struct SqueezeSearchOptions {
  double coarse_step_decades = 0.25;
  double fine_half_width_decades = 0.2;
  int fine_points = 9;
  double min_s = 1e-6;
};

/// Minimizes the simulated MSE of the squeezed loop (gain kappa/sigma^2,
/// pure squeezing) over S in (0, 1]: a descending coarse scan in log S, then
/// a quadratic fit of ln MSE against ln S on a fine grid. Every point reuses
/// the same seeds. Competing minima within error bars set `ambiguous`.
SqueezingOptimum find_optimal_squeezing(double photon_number, const SimConfig& base,
                                        const Discretization& disc = {},
                                        const RunOptions& options = {},
                                        const SqueezeSearchOptions& search = {});

}  // namespace dynetrack
