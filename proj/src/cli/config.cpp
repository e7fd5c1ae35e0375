#include "dynetrack/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "dynetrack/analytics.hpp"
#include "dynetrack/constants.hpp"
#include "dynetrack/errors.hpp"
#include "dynetrack/estimation.hpp"

namespace dynetrack::cli {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

[[noreturn]] void reject(std::string_view key, std::string_view value, std::string_view constraint) {
  std::ostringstream msg;
  msg << "config key '" << key << "' = '" << value << "' violates " << constraint;
  throw ConfigError(msg.str());
}

bool parse_double(std::string_view text, double& out) {
  const std::string s = trim(text);
  if (s.empty()) return false;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

using Canon = std::function<std::string(std::string_view key, std::string_view value)>;

Canon real(std::function<bool(double)> ok, std::string constraint) {
  return [ok = std::move(ok), constraint = std::move(constraint)](std::string_view key,
                                                                  std::string_view value) {
    double v = 0.0;
    if (!parse_double(value, v) || !std::isfinite(v)) reject(key, value, "a finite real number");
    if (!ok(v)) reject(key, value, constraint);
    return format_double(v);
  };
}

Canon positive(std::string name) {
  return real([](double v) { return v > 0.0; }, name + " > 0");
}

Canon unsigned_integer(std::uint64_t min, std::string constraint) {
  return [min, constraint = std::move(constraint)](std::string_view key, std::string_view value) {
    const std::string s = trim(value);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
      reject(key, value, "an unsigned 64-bit integer");
    }
    if (v < min) reject(key, value, constraint);
    return std::to_string(v);
  };
}

Canon choice(std::vector<std::string> options) {
  return [options = std::move(options)](std::string_view key, std::string_view value) {
    const std::string s = trim(value);
    if (std::find(options.begin(), options.end(), s) == options.end()) {
      std::string allowed = "one of {";
      for (std::size_t i = 0; i < options.size(); ++i) allowed += (i ? ", " : "") + options[i];
      reject(key, value, allowed + "}");
    }
    return s;
  };
}

std::string canon_bool(std::string_view key, std::string_view value) {
  std::string s = trim(value);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return "true";
  if (s == "false" || s == "0" || s == "no" || s == "off") return "false";
  reject(key, value, "a boolean (true/false)");
}

std::string canon_experiment(std::string_view key, std::string_view value) {
  try {
    return std::string(to_string(parse_experiment(value)));
  } catch (const ConfigError&) {
    reject(key, value, "one of {gain, n, squeeze, het-vs-adaptive}");
  }
}

std::string canon_grid(std::string_view key, std::string_view value) {
  const std::string s = trim(value);
  if (s.empty()) return s;
  std::vector<double> grid;
  try {
    grid = parse_grid(s);
  } catch (const ConfigError& e) {
    reject(key, value, e.what());
  }
  std::string out;
  for (std::size_t i = 0; i < grid.size(); ++i) out += (i ? "," : "") + format_double(grid[i]);
  return out;
}

struct KeySpec {
  std::string name;
  std::string default_value;
  Canon canon;
};

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys = {
      {"experiment", "gain", canon_experiment},
      {"scheme", "adaptive", choice({"adaptive", "kalman", "heterodyne"})},
      {"N", "400", positive("N")},
      {"kappa", "1", positive("kappa")},
      {"seed", "1", unsigned_integer(0, "seed >= 0")},
      {"n_traj", "200", unsigned_integer(1, "n_traj >= 1")},
      {"gain_ratio", "1", positive("gain_ratio")},
      {"noise", "coherent", choice({"coherent", "squeezed"})},
      {"S", "1", real([](double v) { return v > 0.0 && v <= 1.0; }, "0 < S <= 1")},
      {"S_a", "0", real([](double v) { return v == 0.0 || v >= 1.0; }, "S_a = 0 (auto) or S_a >= 1")},
      {"squeeze_coeff", "0", real([](double v) { return v >= 0.0; }, "squeeze_coeff >= 0")},
      {"squeeze_exponent", format_double(-1.0 / 3.0), real([](double) { return true; }, "")},
      {"step_fraction", "0.005",
       real([](double v) { return v > 0.0 && v <= kMaxStepRate; }, "0 < step_fraction <= 0.02")},
      {"het_step_fraction", "0.05",
       real([](double v) { return v > 0.0 && v <= kMaxDetuningStep; },
            "0 < het_step_fraction <= 0.05")},
      {"burn_in", "20", positive("burn_in")},
      {"measure", "200", positive("measure")},
      {"detuning_factor", "50",
       real([](double v) { return v >= kMinDetuningFactor; }, "detuning_factor >= 10")},
      {"grid", "", canon_grid},
      {"exclude_slips", "false", canon_bool},
      {"slip_threshold", format_double(kPi / 2.0),
       real([](double v) { return v > 0.0 && v <= kPi; }, "0 < slip_threshold <= pi")},
      {"record_trajectories", "true", canon_bool},
      {"sample_stride", "0", unsigned_integer(0, "sample_stride >= 0")},
      {"dt", "0", real([](double v) { return v >= 0.0; }, "dt >= 0 (0 derives dt)")},
  };
  return keys;
}

const KeySpec& spec_for(std::string_view key) {
  for (const auto& k : schema()) {
    if (k.name == key) return k;
  }
  std::string known;
  for (const auto& k : schema()) known += (known.empty() ? "" : ", ") + k.name;
  throw ConfigError("unknown config key '" + std::string(key) + "' (known keys: " + known + ")");
}

SimConfig base_config(const Config& c) {
  SimConfig base;
  base.kappa = c.number("kappa");
  base.alpha = amplitude_for(c.number("N"), base.kappa);
  base.seed = c.integer("seed");
  base.n_traj = c.integer("n_traj");
  return base;
}

Discretization discretization(const Config& c) {
  Discretization d;
  d.step_fraction = c.number("step_fraction");
  d.detuning_step = c.number("het_step_fraction");
  d.burn_in = c.number("burn_in");
  d.measure = c.number("measure");
  d.detuning_factor = c.number("detuning_factor");
  return d;
}

NoiseModel noise_model(const Config& c) {
  if (c.text("noise") == "coherent") return NoiseModel::coherent();
  const double s = c.number("S");
  const double s_a = c.number("S_a");
  return s_a > 0.0 ? NoiseModel::squeezed(s, s_a) : NoiseModel::squeezed(s);
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kDefault: return "default";
    case Provenance::kFile: return "file";
    case Provenance::kFlag: return "flag";
  }
  return "?";
}

Config::Config() {
  for (const auto& k : schema()) {
    entries_[k.name] = {k.canon(k.name, k.default_value), Provenance::kDefault};
  }
}

void Config::set(std::string_view key, std::string_view value, Provenance provenance) {
  const KeySpec& spec = spec_for(key);
  entries_[spec.name] = {spec.canon(spec.name, value), provenance};
}

const ConfigEntry& Config::entry(std::string_view key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) spec_for(key);  // throws with the list of known keys
  return it->second;
}

double Config::number(std::string_view key) const {
  double v = 0.0;
  parse_double(entry(key).value, v);
  return v;
}

std::uint64_t Config::integer(std::string_view key) const {
  return std::stoull(entry(key).value);
}

bool Config::flag(std::string_view key) const { return entry(key).value == "true"; }

const std::string& Config::text(std::string_view key) const { return entry(key).value; }

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& k : schema()) out.push_back(k.name);
    return out;
  }();
  return names;
}

void apply_config_text(Config& config, std::string_view text, Provenance provenance) {
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    auto sep = body.find('=');
    if (sep == std::string::npos) sep = body.find(':');
    if (sep == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected 'key = value', got '" +
                        body + "'");
    }
    const std::string key = trim(std::string_view(body).substr(0, sep));
    const std::string value = trim(std::string_view(body).substr(sep + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    try {
      config.set(key, value, provenance);
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_config_file(Config& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    apply_config_text(config, buf.str(), Provenance::kFile);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::vector<double> parse_grid(std::string_view spec) {
  const std::string s = trim(spec);
  if (s.empty()) throw ConfigError("grid must not be empty");
  auto number = [&](std::string_view part) {
    double v = 0.0;
    if (!parse_double(part, v) || !std::isfinite(v)) {
      throw ConfigError("grid value '" + std::string(part) + "' is not a finite number");
    }
    return v;
  };
  std::vector<std::string> parts;
  const char delim = (s.rfind("log:", 0) == 0 || s.rfind("lin:", 0) == 0) ? ':' : ',';
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(delim, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  std::vector<double> grid;
  if (delim == ':') {
    if (parts.size() != 4) throw ConfigError("grid '" + s + "' must have the form log:a:b:n or lin:a:b:n");
    const double a = number(parts[1]);
    const double b = number(parts[2]);
    const std::string count = trim(parts[3]);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), n);
    if (count.empty() || ec != std::errc() || ptr != count.data() + count.size() || n < 1) {
      throw ConfigError("grid point count '" + parts[3] + "' must be an integer >= 1");
    }
    const bool log = parts[0] == "log";
    if (log && !(a > 0.0 && b > 0.0)) throw ConfigError("log grid bounds must be > 0");
    if (n == 1 && a != b) throw ConfigError("a one-point grid needs equal bounds");
    for (int i = 0; i < n; ++i) {
      const double f = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
      grid.push_back(log ? std::pow(10.0, std::log10(a) + f * (std::log10(b) - std::log10(a)))
                         : a + f * (b - a));
    }
    // Hit the endpoints exactly.
    grid.front() = a;
    grid.back() = b;
  } else {
    for (const auto& p : parts) grid.push_back(number(p));
  }
  for (double g : grid) {
    if (!(g > 0.0)) throw ConfigError("grid values must be > 0");
  }
  return grid;
}

ExperimentKind parse_experiment(std::string_view name) {
  std::string s = trim(name);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  if (s == "gain") return ExperimentKind::kGainSweep;
  if (s == "n") return ExperimentKind::kNSweep;
  if (s == "squeeze") return ExperimentKind::kSqueezeSweep;
  if (s == "het-vs-adaptive") return ExperimentKind::kHetVsAdaptive;
  throw ConfigError("unknown experiment '" + std::string(name) +
                    "' (expected gain, n, squeeze or het-vs-adaptive)");
}

std::vector<double> default_grid(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kGainSweep: return {0.25, 0.5, 1.0, 2.0, 4.0};
    case ExperimentKind::kNSweep: return {1e2, 1e3, 1e4, 1e5};
    case ExperimentKind::kSqueezeSweep: return parse_grid("log:0.01:1:9");
    case ExperimentKind::kHetVsAdaptive: return {100.0, 400.0, 1600.0};
  }
  return {};
}

SimulationPlan to_simulation(const Config& c) {
  const SimConfig base = base_config(c);
  const Discretization disc = discretization(c);
  const NoiseModel noise = noise_model(c);
  validate(noise);
  const double n = c.number("N");
  const bool coherent = noise.kind == LightKind::kCoherent;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  SimulationPlan plan;
  plan.scheme = c.text("scheme");
  if (plan.scheme == "adaptive") {
    const double r = c.number("gain_ratio");
    const double chi = r * (coherent ? optimal_gain(base.kappa, base.alpha)
                                     : squeezed_gain(base.kappa, base.alpha, noise.s));
    plan.setup = adaptive_point(n, chi, noise, base, disc);
    plan.analytic = coherent   ? mse_vs_gain(chi, base.kappa, base.alpha)
                    : r == 1.0 ? mse_adaptive_squeezed(noise.s, n).mse
                               : nan;
  } else if (plan.scheme == "kalman") {
    plan.setup = kalman_point(n, mse_adaptive_coherent(n), noise, base, disc);
    plan.analytic = coherent ? mse_adaptive_coherent(n) : nan;
  } else {
    plan.setup = heterodyne_point(n, noise, base, disc);
    plan.analytic = coherent ? mse_heterodyne(n) : nan;
  }

  const double dt = c.number("dt");
  if (dt > 0.0) {
    plan.setup.config.dt = dt;
    const double chi = plan.setup.controller.kind == ControllerKind::kFixedGain
                           ? plan.setup.controller.gain
                           : optimal_gain(base.kappa, base.alpha);
    const double rate = std::max(chi, base.kappa);
    if (dt * rate > kMaxStepRate) {
      std::ostringstream msg;
      msg << "config key 'dt' = '" << c.text("dt") << "' violates the stiffness guard dt * max(kappa, chi) <= 0.02 (dt * rate = "
          << dt * rate << ")";
      throw ConfigError(msg.str());
    }
  }
  validate(plan.setup.config);
  validate(plan.setup.controller, plan.setup.config.kappa, plan.setup.config.alpha);
  return plan;
}

SweepSpec to_sweep(const Config& c) {
  SweepSpec spec;
  spec.kind = parse_experiment(c.text("experiment"));
  spec.grid = c.text("grid").empty() ? default_grid(spec.kind) : parse_grid(c.text("grid"));
  spec.base = base_config(c);
  spec.disc = discretization(c);
  const std::string& scheme = c.text("scheme");
  if (scheme == "heterodyne") {
    reject("scheme", scheme, "scheme in {adaptive, kalman} for sweeps (heterodyne is simulate-only)");
  }
  spec.adaptive = scheme == "kalman" ? ControllerKind::kKalmanGain : ControllerKind::kFixedGain;
  spec.gain_ratio = c.number("gain_ratio");
  spec.squeeze.coeff = c.number("squeeze_coeff");
  spec.squeeze.exponent = c.number("squeeze_exponent");
  spec.squeeze.anti_squeezing = c.number("S_a");
  spec.exclude_slipped = c.flag("exclude_slips");
  if (c.number("dt") != 0.0) {
    reject("dt", c.text("dt"), "dt = 0 for sweeps (steps follow step_fraction)");
  }
  validate(spec);
  return spec;
}

RunOptions to_run_options(const Config& c, unsigned threads) {
  RunOptions o;
  o.record_samples = c.flag("record_trajectories");
  o.sample_stride = c.integer("sample_stride");
  o.slip_threshold = c.number("slip_threshold");
  o.threads = threads;
  return o;
}

}  // namespace dynetrack::cli
