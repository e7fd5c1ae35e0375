#include "dynetrack/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "dynetrack/analytics.hpp"
#include "dynetrack/constants.hpp"
#include "dynetrack/errors.hpp"
#include "dynetrack/estimation.hpp"

namespace dynetrack {

double wrap_angle(double angle) {
  double w = std::remainder(angle, kTwoPi);  // [-pi, pi]
  if (w <= -kPi) w += kTwoPi;
  return w;
}

// ---------------------------------------------------------------------------
// Slips and error bookkeeping

SlipCounter::SlipCounter(double threshold) : threshold_(threshold) {
  if (!(threshold > 0.0 && threshold <= kPi)) {
    throw ConfigError("slip threshold must lie in (0, pi]");
  }
}

void SlipCounter::add(double e) {
  if (!started_) {
    lock_ = kTwoPi * std::round(e / kTwoPi);
    started_ = true;
  }
  if (!in_excursion_) {
    if (std::abs(e - lock_) > threshold_) {
      ++count_;
      in_excursion_ = true;
    }
    return;
  }
  const double nearest = kTwoPi * std::round(e / kTwoPi);
  if (std::abs(e - nearest) <= 0.5 * threshold_) {
    lock_ = nearest;
    in_excursion_ = false;
  }
}

std::uint64_t count_cycle_slips(std::span<const double> unwrapped_errors, double threshold) {
  SlipCounter counter(threshold);
  for (double e : unwrapped_errors) counter.add(e);
  return counter.count();
}

ErrorAccumulator::ErrorAccumulator(std::uint64_t expected, std::size_t n_blocks,
                                   double slip_threshold)
    : expected_(std::max<std::uint64_t>(expected, 1)),
      block_sums_(std::max<std::size_t>(1, std::min<std::uint64_t>(n_blocks, expected_)), 0.0),
      block_counts_(block_sums_.size(), 0),
      slips_(slip_threshold) {}

void ErrorAccumulator::add(double unwrapped_error) {
  const double w = wrap_angle(unwrapped_error);
  const double sq = w * w;
  sum_ += sq;
  const std::size_t nb = block_sums_.size();
  std::size_t block = static_cast<std::size_t>((seen_ * nb) / expected_);
  if (block >= nb) block = nb - 1;
  block_sums_[block] += sq;
  ++block_counts_[block];
  ++seen_;
  slips_.add(unwrapped_error);
}

void ErrorAccumulator::finish_into(TrajectoryRecord& record) const {
  record.sum_sq_error = sum_;
  record.n_samples = seen_;
  record.slip_count = slips_.count();
  record.block_means.clear();
  for (std::size_t b = 0; b < block_sums_.size(); ++b) {
    if (block_counts_[b] > 0) {
      record.block_means.push_back(block_sums_[b] / static_cast<double>(block_counts_[b]));
    }
  }
}

TrajectoryRecord record_from_errors(std::span<const double> unwrapped_errors,
                                    std::size_t n_blocks, double slip_threshold) {
  ErrorAccumulator acc(unwrapped_errors.size(), n_blocks, slip_threshold);
  for (double e : unwrapped_errors) acc.add(e);
  TrajectoryRecord record;
  acc.finish_into(record);
  if (!unwrapped_errors.empty()) {
    record.final_state.estimate = unwrapped_errors.back();
    record.final_state.error = wrap_angle(unwrapped_errors.back());
  }
  return record;
}

// ---------------------------------------------------------------------------
// Trajectories

namespace {

std::uint64_t steps_for(double duration, double dt) {
  const double n = std::ceil(duration / dt - 1e-9);
  return n < 1.0 ? 1 : static_cast<std::uint64_t>(n);
}

double loop_rate(const SimConfig& config, const ControllerSpec& controller) {
  switch (controller.kind) {
    case ControllerKind::kFixedGain: return controller.gain;
    case ControllerKind::kKalmanGain: return optimal_gain(config.kappa, config.alpha);
    case ControllerKind::kHeterodyne:
      return controller.demod_rate > 0.0 ? controller.demod_rate
                                         : default_demod_rate(config.kappa, config.alpha);
  }
  return 1.0;
}

void check_step_guards(const SimConfig& config, const ControllerSpec& controller) {
  std::ostringstream msg;
  if (controller.kind == ControllerKind::kFixedGain) {
    if (config.dt * controller.gain <= kMaxStepRate) return;
    msg << "dt = " << config.dt << " violates stiffness guard dt*chi <= " << kMaxStepRate
        << " (chi = " << controller.gain << ")";
  } else if (controller.kind == ControllerKind::kHeterodyne) {
    const double lambda = loop_rate(config, controller);
    if (config.dt * controller.detuning > kMaxDetuningStep) {
      msg << "dt = " << config.dt << " violates heterodyne guard Delta*dt <= " << kMaxDetuningStep;
    } else if (config.dt * lambda > kMaxStepRate) {
      msg << "dt = " << config.dt << " violates stiffness guard dt*lambda <= " << kMaxStepRate;
    } else {
      return;
    }
  } else {
    return;
  }
  throw ConfigError(msg.str());
}

void check_lo_step(double delta, std::uint64_t id, double t) {
  if (std::abs(delta) <= kMaxLoStep) return;
  std::ostringstream msg;
  msg << "LO update " << delta << " rad exceeds pi/4 at t = " << t << "; reduce dt";
  throw StiffnessError(msg.str(), static_cast<std::int64_t>(id));
}

}  // namespace

TrajectoryRecord run_trajectory(const SimConfig& config, const ControllerSpec& controller,
                                const NoiseModel& noise, std::uint64_t trajectory_id,
                                const RunOptions& options) {
  validate(config);
  validate(noise);
  validate(controller, config.kappa, config.alpha);
  check_step_guards(config, controller);

  const double dt = config.dt;
  const double kappa = config.kappa;
  const double alpha = config.alpha;
  const std::uint64_t n_burn = steps_for(config.t_burn, dt);
  const std::uint64_t n_meas = steps_for(config.t_meas, dt);
  const std::uint64_t n_total = n_burn + n_meas;
  const double noise_scale = options.deterministic_fixture ? 0.0 : 1.0;

  std::uint64_t stride = options.sample_stride;
  if (stride == 0) {
    stride = static_cast<std::uint64_t>(
        std::max(1.0, std::round(0.1 / (loop_rate(config, controller) * dt))));
  }

  RngStream phase_rng = make_stream(config.seed, trajectory_id, Substream::kPhase);
  RngStream shot_rng = make_stream(config.seed, trajectory_id, Substream::kShot);
  ErrorAccumulator acc(n_meas, options.n_blocks, options.slip_threshold);

  TrajectoryRecord record;
  record.trajectory_id = trajectory_id;
  if (options.record_samples) record.samples.reserve(n_meas / stride + 1);

  double phi = config.phi0;
  double lo = config.phi0 + kPi / 2.0;
  double estimate = config.phi0;
  double sigma2 = controller.sigma2_init;
  DemodState demod{{0.0, 0.0}, loop_rate(config, controller)};
  const bool heterodyne = controller.kind == ControllerKind::kHeterodyne;

  for (std::uint64_t i = 0; i < n_total; ++i) {
    const double t = static_cast<double>(i) * dt;
    if (heterodyne) lo = heterodyne_lo_phase(t, controller.detuning, controller.lo_phase0);

    const double dW_shot = noise_scale * gaussian_increment(shot_rng, dt);
    const double I_dt = photocurrent_increment(phi, lo, alpha, noise, dW_shot, dt);

    switch (controller.kind) {
      case ControllerKind::kFixedGain: {
        const double next = adaptive_lo_step(lo, I_dt, controller.gain, alpha);
        check_lo_step(next - lo, trajectory_id, t);
        lo = next;
        estimate = adaptive_estimate(lo);
        break;
      }
      case ControllerKind::kKalmanGain: {
        const double delta = kalman_gain(sigma2, alpha) * I_dt;
        check_lo_step(delta, trajectory_id, t);
        lo += delta;
        estimate = adaptive_estimate(lo);
        try {
          sigma2 = riccati_step(sigma2, kappa, alpha, dt);
        } catch (const StiffnessError& e) {
          throw StiffnessError(e.what(), static_cast<std::int64_t>(trajectory_id));
        }
        break;
      }
      case ControllerKind::kHeterodyne:
        demod = demod_step(demod, lo, I_dt, dt);
        if (demod.acc != std::complex<double>{0.0, 0.0}) {
          estimate = unwrap_nearest(heterodyne_estimate(demod), estimate);
        }
        break;
    }

    phi = step_phase(phi, kappa, noise_scale * gaussian_increment(phase_rng, dt));

    if (i < n_burn) continue;
    const double err = estimate - phi;
    if (!std::isfinite(err) || !std::isfinite(lo)) {
      std::ostringstream msg;
      msg << "trajectory " << trajectory_id << ": non-finite state at t = " << t + dt;
      throw SimulationError(msg.str());
    }
    acc.add(err);
    const std::uint64_t k = i - n_burn;
    if (options.record_samples && k % stride == 0) {
      record.samples.push_back({t + dt, phi, lo, estimate, wrap_angle(err)});
    }
    if (i + 1 == n_total) record.final_state = {t + dt, phi, lo, estimate, wrap_angle(err)};
  }
  acc.finish_into(record);
  return record;
}

std::vector<TrajectoryRecord> run_ensemble(const SimConfig& config,
                                           const ControllerSpec& controller,
                                           const NoiseModel& noise, const RunOptions& options) {
  validate(config);
  const std::uint64_t n = config.n_traj;
  std::vector<TrajectoryRecord> records(n);
  std::vector<std::exception_ptr> errors(n);

  unsigned workers = options.threads ? options.threads : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(std::clamp<std::uint64_t>(workers, 1, n));

  std::atomic<std::uint64_t> next{0};
  auto work = [&] {
    for (std::uint64_t i = next++; i < n; i = next++) {
      try {
        records[i] = run_trajectory(config, controller, noise, i, options);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return records;
}

// ---------------------------------------------------------------------------
// Statistics

namespace {

double standard_error_of_mean(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
}

}  // namespace

MseResult estimate_stationary_mse(std::span<const TrajectoryRecord> records,
                                  bool exclude_slipped) {
  if (records.empty()) throw ConfigError("estimate_stationary_mse: no records");
  MseResult out;
  double sum = 0.0;
  std::vector<double> means;
  const TrajectoryRecord* last_used = nullptr;
  for (const auto& r : records) {
    out.slip_count += r.slip_count;
    if (r.slip_count > 0) ++out.slipped_trajectories;
    if (exclude_slipped && r.slip_count > 0) continue;
    if (r.n_samples == 0) continue;
    sum += r.sum_sq_error;
    out.n_samples += r.n_samples;
    means.push_back(r.mse());
    last_used = &r;
  }
  if (out.n_samples == 0) {
    throw ConfigError("estimate_stationary_mse: no usable samples after slip exclusion");
  }
  out.n_trajectories = means.size();
  out.mse = sum / static_cast<double>(out.n_samples);
  out.std_error = means.size() >= 2 ? standard_error_of_mean(means)
                                    : standard_error_of_mean(last_used->block_means);
  return out;
}

MseResult simulate_mse(const SimConfig& config, const ControllerSpec& controller,
                       const NoiseModel& noise, const RunOptions& options, bool exclude_slipped) {
  const auto start = std::chrono::steady_clock::now();
  RunOptions opts = options;
  opts.record_samples = false;
  const auto records = run_ensemble(config, controller, noise, opts);
  MseResult out = estimate_stationary_mse(records, exclude_slipped);
  out.config = config;
  out.controller = controller;
  out.noise = noise;
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Point setups

PointSetup adaptive_point(double photon_number, double chi, const NoiseModel& noise,
                          const SimConfig& base, const Discretization& disc) {
  PointSetup p;
  p.config = base;
  p.config.alpha = amplitude_for(photon_number, base.kappa);
  if (!(chi > 0.0)) throw ConfigError("adaptive_point: chi must be > 0");
  const double chi_opt = optimal_gain(base.kappa, p.config.alpha);
  p.config.dt = disc.step_fraction / std::max({chi, chi_opt, base.kappa});
  p.config.t_burn = disc.burn_in / chi;
  p.config.t_meas = disc.measure / chi;
  p.controller = ControllerSpec::fixed_gain(chi);
  p.noise = noise;
  return p;
}

PointSetup kalman_point(double photon_number, double sigma2_init, const NoiseModel& noise,
                        const SimConfig& base, const Discretization& disc) {
  PointSetup p;
  p.config = base;
  p.config.alpha = amplitude_for(photon_number, base.kappa);
  const double chi_opt = optimal_gain(base.kappa, p.config.alpha);
  const double chi_init = 4.0 * p.config.alpha * p.config.alpha * sigma2_init;
  p.config.dt = disc.step_fraction / std::max({chi_opt, chi_init, base.kappa});
  p.config.t_burn = disc.burn_in / chi_opt;
  p.config.t_meas = disc.measure / chi_opt;
  p.controller = ControllerSpec::kalman(sigma2_init);
  p.noise = noise;
  return p;
}

PointSetup heterodyne_point(double photon_number, const NoiseModel& noise, const SimConfig& base,
                            const Discretization& disc, double demod_rate) {
  PointSetup p;
  p.config = base;
  p.config.alpha = amplitude_for(photon_number, base.kappa);
  const double chi_opt = optimal_gain(base.kappa, p.config.alpha);
  const double lambda = demod_rate > 0.0 ? demod_rate : default_demod_rate(base.kappa, p.config.alpha);
  const double detuning = disc.detuning_factor * chi_opt;
  p.config.dt = std::min(disc.detuning_step / detuning,
                         disc.step_fraction / std::max({lambda, chi_opt, base.kappa}));
  p.config.t_burn = disc.burn_in / lambda;
  p.config.t_meas = disc.measure / lambda;
  p.controller = ControllerSpec::heterodyne(detuning, lambda);
  p.noise = noise;
  return p;
}

// ---------------------------------------------------------------------------
// Sweeps

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kGainSweep: return "gain";
    case ExperimentKind::kNSweep: return "n";
    case ExperimentKind::kSqueezeSweep: return "squeeze";
    case ExperimentKind::kHetVsAdaptive: return "het-vs-adaptive";
  }
  return "?";
}

namespace {

struct PlannedPoint {
  std::string scheme;
  std::vector<std::pair<std::string, double>> params;
  PointSetup setup;
  double analytic = 0.0;
};

NoiseModel noise_for(const SqueezeLaw& law, double photon_number) {
  if (law.coeff <= 0.0) return NoiseModel::coherent();
  const double s = law.coeff * std::pow(photon_number, law.exponent);
  return law.anti_squeezing > 0.0 ? NoiseModel::squeezed(s, law.anti_squeezing)
                                  : NoiseModel::squeezed(s);
}

PlannedPoint plan_adaptive(const SweepSpec& spec, double n, const NoiseModel& noise) {
  PlannedPoint p;
  const double alpha = amplitude_for(n, spec.base.kappa);
  const bool squeezed = noise.kind == LightKind::kSqueezed;
  if (spec.adaptive == ControllerKind::kKalmanGain && !squeezed) {
    p.scheme = "kalman";
    p.setup = kalman_point(n, mse_adaptive_coherent(n), noise,
                           spec.base, spec.disc);
    p.analytic = mse_adaptive_coherent(n);
    return p;
  }
  p.scheme = "adaptive";
  const double chi = squeezed ? squeezed_gain(spec.base.kappa, alpha, noise.s)
                              : spec.gain_ratio * optimal_gain(spec.base.kappa, alpha);
  p.setup = adaptive_point(n, chi, noise, spec.base, spec.disc);
  p.analytic = squeezed ? mse_adaptive_squeezed(noise.s, n).mse
                        : mse_vs_gain(chi, spec.base.kappa, alpha);
  return p;
}

std::vector<PlannedPoint> plan_sweep(const SweepSpec& spec) {
  if (spec.grid.empty()) throw ConfigError("SweepSpec.grid must not be empty");
  std::vector<PlannedPoint> plan;
  const double base_n = photon_number(spec.base);
  for (double g : spec.grid) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      std::ostringstream msg;
      msg << "SweepSpec.grid value " << g << " violates grid > 0";
      throw ConfigError(msg.str());
    }
    switch (spec.kind) {
      case ExperimentKind::kGainSweep: {
        const NoiseModel noise = noise_for(spec.squeeze, base_n);
        const double chi = g * optimal_gain(spec.base.kappa, spec.base.alpha);
        PlannedPoint p;
        p.scheme = "adaptive";
        p.params = {{"N", base_n}, {"r", g}, {"chi", chi}};
        p.setup = adaptive_point(base_n, chi, noise, spec.base, spec.disc);
        p.analytic = noise.kind == LightKind::kCoherent
                         ? mse_vs_gain(chi, spec.base.kappa, spec.base.alpha)
                         : std::numeric_limits<double>::quiet_NaN();
        plan.push_back(std::move(p));
        break;
      }
      case ExperimentKind::kNSweep: {
        const NoiseModel noise = noise_for(spec.squeeze, g);
        PlannedPoint p = plan_adaptive(spec, g, noise);
        p.params = {{"N", g}, {"S", noise.s}, {"chi", p.setup.controller.gain}};
        plan.push_back(std::move(p));
        break;
      }
      case ExperimentKind::kSqueezeSweep: {
        if (g > 1.0) throw ConfigError("squeeze sweep grid values are S and must lie in (0, 1]");
        const NoiseModel noise = spec.squeeze.anti_squeezing > 0.0
                                     ? NoiseModel::squeezed(g, spec.squeeze.anti_squeezing)
                                     : NoiseModel::squeezed(g);
        PlannedPoint p = plan_adaptive(spec, base_n, noise);
        p.params = {{"N", base_n}, {"S", noise.s}, {"chi", p.setup.controller.gain}};
        plan.push_back(std::move(p));
        break;
      }
      case ExperimentKind::kHetVsAdaptive: {
        PlannedPoint het;
        het.scheme = "heterodyne";
        het.params = {{"N", g}};
        het.setup = heterodyne_point(g, NoiseModel::coherent(), spec.base, spec.disc);
        het.analytic = mse_heterodyne(g);
        plan.push_back(std::move(het));
        SweepSpec coherent = spec;
        coherent.squeeze.coeff = 0.0;
        PlannedPoint ad = plan_adaptive(coherent, g, NoiseModel::coherent());
        ad.params = {{"N", g}};
        plan.push_back(std::move(ad));
        break;
      }
    }
  }
  return plan;
}

void validate_setup(const PointSetup& p) {
  validate(p.config);
  validate(p.noise);
  validate(p.controller, p.config.kappa, p.config.alpha);
  check_step_guards(p.config, p.controller);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::vector<std::pair<std::string, PointSetup>> sweep_points(const SweepSpec& spec) {
  std::vector<std::pair<std::string, PointSetup>> out;
  for (auto& p : plan_sweep(spec)) out.emplace_back(p.scheme, p.setup);
  return out;
}

void validate(const SweepSpec& spec) {
  validate(spec.base);
  for (const auto& p : plan_sweep(spec)) validate_setup(p.setup);
}

SweepTable run_sweep(const SweepSpec& spec, const RunOptions& options) {
  SweepTable table{spec, {}};
  for (auto& planned : plan_sweep(spec)) {
    SweepRow row;
    row.scheme = planned.scheme;
    row.params = planned.params;
    row.analytic = planned.analytic;
    try {
      validate_setup(planned.setup);
      row.result = simulate_mse(planned.setup.config, planned.setup.controller,
                                planned.setup.noise, options, spec.exclude_slipped);
      row.ratio = row.result.mse / row.analytic;
    } catch (const std::exception& e) {
      row.error = e.what();
      row.result.config = planned.setup.config;
      row.result.controller = planned.setup.controller;
      row.result.noise = planned.setup.noise;
      row.result.mse = std::numeric_limits<double>::quiet_NaN();
      row.ratio = std::numeric_limits<double>::quiet_NaN();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table, std::string_view manifest_hash) {
  out << "# manifest_hash=" << manifest_hash << '\n';
  out << "scheme";
  if (!table.rows.empty()) {
    for (const auto& [name, value] : table.rows.front().params) out << ',' << name;
  }
  out << ",mse,stderr,n_samples,slip_count,analytic_prediction,ratio,error\n";
  for (const auto& row : table.rows) {
    out << row.scheme;
    for (const auto& [name, value] : row.params) out << ',' << format_double(value);
    std::string err = row.error;
    std::replace(err.begin(), err.end(), ',', ';');
    out << ',' << format_double(row.result.mse) << ',' << format_double(row.result.std_error)
        << ',' << row.result.n_samples << ',' << row.result.slip_count << ','
        << format_double(row.analytic) << ',' << format_double(row.ratio) << ',' << err << '\n';
  }
}

// ---------------------------------------------------------------------------
// Fits

PowerLawFit fit_power_law(std::span<const std::pair<double, double>> points) {
  if (points.size() < 3) throw ConfigError("fit_power_law: need at least 3 points");
  const double n = static_cast<double>(points.size());
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    if (!(x > 0.0 && y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) {
      throw ConfigError("fit_power_law: all coordinates must be positive and finite");
    }
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  if (!(sxx > 1e-24)) throw ConfigError("fit_power_law: degenerate input, all x equal");
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  const double intercept = my - fit.exponent * mx;
  fit.constant = std::exp(intercept);
  double rss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = std::log(y) - (intercept + fit.exponent * std::log(x));
    rss += r * r;
  }
  fit.residual = std::sqrt(rss);
  fit.exponent_stderr = points.size() > 2 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  return fit;
}

// ---------------------------------------------------------------------------
// Optimal squeezing

namespace {

/// Least-squares y = c0 + c1 x + c2 x^2 with parameter covariance.
struct QuadraticFit {
  double c[3] = {0.0, 0.0, 0.0};
  double cov[3][3] = {};
  bool ok = false;
};

QuadraticFit fit_quadratic(const std::vector<double>& x, const std::vector<double>& y) {
  QuadraticFit fit;
  const std::size_t n = x.size();
  if (n < 3) return fit;
  double a[3][3] = {}, b[3] = {};
  for (std::size_t i = 0; i < n; ++i) {
    const double row[3] = {1.0, x[i], x[i] * x[i]};
    for (int r = 0; r < 3; ++r) {
      b[r] += row[r] * y[i];
      for (int c = 0; c < 3; ++c) a[r][c] += row[r] * row[c];
    }
  }
  // Invert the 3x3 normal matrix by cofactors.
  const double det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
                     a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
                     a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  if (!(std::abs(det) > 1e-300)) return fit;
  double inv[3][3];
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      const int r1 = (c + 1) % 3, r2 = (c + 2) % 3, c1 = (r + 1) % 3, c2 = (r + 2) % 3;
      inv[r][c] = (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]) / det;
    }
  }
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) fit.c[r] += inv[r][c] * b[c];
  }
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.c[0] + fit.c[1] * x[i] + fit.c[2] * x[i] * x[i]);
    rss += r * r;
  }
  const double s2 = n > 3 ? rss / static_cast<double>(n - 3) : 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) fit.cov[r][c] = s2 * inv[r][c];
  }
  fit.ok = true;
  return fit;
}

}  // namespace

SqueezingOptimum find_optimal_squeezing(double photon_number, const SimConfig& base,
                                        const Discretization& disc, const RunOptions& options,
                                        const SqueezeSearchOptions& search) {
  const double alpha = amplitude_for(photon_number, base.kappa);
  SqueezingOptimum out;

  auto evaluate = [&](double s) {
    SqueezeSearchPoint pt;
    pt.s = s;
    try {
      const NoiseModel noise = NoiseModel::squeezed(s);
      const PointSetup p =
          adaptive_point(photon_number, squeezed_gain(base.kappa, alpha, s), noise, base, disc);
      const MseResult r = simulate_mse(p.config, p.controller, p.noise, options);
      pt.mse = r.mse;
      pt.std_error = r.std_error;
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.mse = std::numeric_limits<double>::infinity();
    }
    out.evaluated.push_back(pt);
    return pt;
  };

  // Coarse descent from S = 1 until two successive points are worse than the best.
  std::vector<SqueezeSearchPoint> coarse;
  std::size_t best = 0;
  int worse = 0;
  for (int k = 0;; ++k) {
    const double s = std::pow(10.0, -search.coarse_step_decades * k);
    if (s < search.min_s) break;
    coarse.push_back(evaluate(s));
    const auto& pt = coarse.back();
    if (pt.mse < coarse[best].mse) {
      best = coarse.size() - 1;
      worse = 0;
    } else if (k > 0) {
      ++worse;
    }
    if (!pt.error.empty() || worse >= 2) break;
  }
  if (!std::isfinite(coarse[best].mse)) {
    throw SimulationError("find_optimal_squeezing: every coarse point failed");
  }

  // Competing local minima within error bars.
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    if (i + 1 >= best && i <= best + 1) continue;
    const bool left_ok = i == 0 || coarse[i].mse < coarse[i - 1].mse;
    const bool right_ok = i + 1 == coarse.size() || coarse[i].mse < coarse[i + 1].mse;
    if (!left_ok || !right_ok) continue;
    const double se = std::hypot(coarse[i].std_error, coarse[best].std_error);
    if (coarse[i].mse - coarse[best].mse < 2.0 * se) {
      out.ambiguous = true;
      std::ostringstream note;
      note << "competing minimum at S = " << coarse[i].s << " within 2 sigma of S = "
           << coarse[best].s << "; ";
      out.note += note.str();
    }
  }

  // Fine grid around the coarse minimum, quadratic in (ln S, ln MSE).
  const double centre = std::log10(coarse[best].s);
  std::vector<double> xs, ys;
  SqueezeSearchPoint fine_best = coarse[best];
  for (int j = 0; j < search.fine_points; ++j) {
    const double frac = search.fine_points > 1 ? 2.0 * j / (search.fine_points - 1) - 1.0 : 0.0;
    const double lg = centre + search.fine_half_width_decades * frac;
    if (lg > 1e-12) continue;
    const SqueezeSearchPoint pt = evaluate(std::pow(10.0, lg));
    if (!pt.error.empty()) continue;
    xs.push_back(std::log(pt.s) - centre * std::log(10.0));
    ys.push_back(std::log(pt.mse));
    if (pt.mse < fine_best.mse) fine_best = pt;
  }

  const QuadraticFit q = fit_quadratic(xs, ys);
  double ln_s = std::log(fine_best.s);
  bool fitted = false;
  if (q.ok && q.c[2] > 0.0) {
    const double vertex = -q.c[1] / (2.0 * q.c[2]);
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (vertex >= *lo && vertex <= *hi) {
      ln_s = vertex + centre * std::log(10.0);
      const double g1 = -1.0 / (2.0 * q.c[2]);
      const double g2 = q.c[1] / (2.0 * q.c[2] * q.c[2]);
      const double var = g1 * g1 * q.cov[1][1] + 2.0 * g1 * g2 * q.cov[1][2] + g2 * g2 * q.cov[2][2];
      out.log_s_uncertainty = std::sqrt(std::max(var, 0.0));
      fitted = true;
    }
  }
  if (!fitted) {
    out.ambiguous = true;
    out.note += "fine-grid fit not convex or vertex outside grid; using grid minimum; ";
    out.log_s_uncertainty = search.fine_half_width_decades * std::log(10.0) /
                            std::max(1, search.fine_points - 1) * 2.0;
  }

  out.s_opt = std::min(1.0, std::exp(ln_s));
  const SqueezeSearchPoint at_opt = evaluate(out.s_opt);
  if (at_opt.error.empty()) {
    out.mse_opt = at_opt.mse;
    out.mse_opt_stderr = at_opt.std_error;
  } else {
    out.mse_opt = fine_best.mse;
    out.mse_opt_stderr = fine_best.std_error;
    out.note += "evaluation at S_opt failed: " + at_opt.error + "; ";
  }
  return out;
}

}  // namespace dynetrack
