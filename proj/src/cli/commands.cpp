#include "dynetrack/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "dynetrack/analytics.hpp"
#include "dynetrack/errors.hpp"
#include "dynetrack/validation.hpp"

namespace fs = std::filesystem;

namespace dynetrack::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void say(const CommandContext& ctx, const std::string& msg) {
  if (ctx.progress) ctx.progress(msg);
}

fs::path prepare_out_dir(const CommandContext& ctx) {
  if (ctx.out_dir.empty()) throw ConfigError("an output directory is required (--out DIR)");
  std::error_code ec;
  fs::create_directories(ctx.out_dir, ec);
  if (ec) throw SimulationError("cannot create output directory '" + ctx.out_dir + "': " + ec.message());
  return ctx.out_dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
  out.close();
  if (!out) throw SimulationError("cannot write '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view controller_name(ControllerKind k) {
  switch (k) {
    case ControllerKind::kHeterodyne: return "heterodyne";
    case ControllerKind::kFixedGain: return "fixed_gain";
    case ControllerKind::kKalmanGain: return "kalman_gain";
  }
  return "?";
}

ordered_json echo(const SimConfig& c, const ControllerSpec& k, const NoiseModel& n) {
  ordered_json j;
  j["kappa"] = c.kappa;
  j["alpha"] = c.alpha;
  j["N"] = photon_number(c);
  j["dt"] = c.dt;
  j["t_burn"] = c.t_burn;
  j["t_meas"] = c.t_meas;
  j["seed"] = c.seed;
  j["n_traj"] = c.n_traj;
  j["phi0"] = c.phi0;
  j["controller"] = {{"kind", controller_name(k.kind)}, {"gain", k.gain},
                     {"sigma2_init", k.sigma2_init}, {"detuning", k.detuning},
                     {"demod_rate", k.demod_rate}};
  j["noise"] = {{"kind", n.kind == LightKind::kCoherent ? "coherent" : "squeezed"},
                {"S", n.s}, {"S_a", n.s_a}};
  return j;
}

ordered_json result_json(const MseResult& r) {
  ordered_json j;
  j["mse"] = r.mse;
  j["stderr"] = r.std_error;
  j["n_samples"] = r.n_samples;
  j["n_trajectories"] = r.n_trajectories;
  j["slip_count"] = r.slip_count;
  j["slipped_trajectories"] = r.slipped_trajectories;
  return j;
}

void finish_manifest(RunManifest& manifest, const fs::path& dir,
                     std::chrono::steady_clock::time_point start) {
  manifest.timestamp = utc_timestamp();
  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_file(dir / "manifest.json", manifest.to_json());
}

std::vector<SweepRow> run_points(const SweepSpec& spec, const RunOptions& opts,
                                 const CommandContext& ctx) {
  std::vector<SweepRow> rows;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    say(ctx, "sweep " + std::string(to_string(spec.kind)) + ": point " + std::to_string(i + 1) +
                 "/" + std::to_string(spec.grid.size()) + " (" + g17(spec.grid[i]) + ")");
    SweepSpec one = spec;
    one.grid = {spec.grid[i]};
    for (auto& row : run_sweep(one, opts).rows) {
      if (!row.ok()) say(ctx, "  point failed: " + row.error);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

double param(const SweepRow& row, std::string_view name) {
  for (const auto& [k, v] : row.params) {
    if (k == name) return v;
  }
  return std::nan("");
}

}  // namespace

int cmd_simulate(RunManifest manifest, const CommandContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  manifest.command = "simulate";
  const SimulationPlan plan = to_simulation(manifest.config);
  const RunOptions opts = to_run_options(manifest.config, ctx.threads);
  const fs::path dir = prepare_out_dir(ctx);
  const std::string hash = manifest.hash();

  say(ctx, "simulate: " + plan.scheme + ", " + std::to_string(plan.setup.config.n_traj) +
               " trajectories, dt=" + g17(plan.setup.config.dt));
  const auto records = run_ensemble(plan.setup.config, plan.setup.controller, plan.setup.noise, opts);
  MseResult result = estimate_stationary_mse(records, manifest.config.flag("exclude_slips"));
  const double ratio = result.mse / plan.analytic;
  say(ctx, "simulate: mse=" + g17(result.mse) + " stderr=" + g17(result.std_error));

  manifest.outputs.clear();
  if (opts.record_samples) {
    std::ostringstream csv;
    csv << "# manifest_hash=" << hash << '\n' << "trajectory,t,phi,lo_phase,estimate,error\n";
    for (const auto& rec : records) {
      for (const auto& s : rec.samples) {
        csv << rec.trajectory_id << ',' << g17(s.t) << ',' << g17(s.phi) << ',' << g17(s.lo_phase)
            << ',' << g17(s.estimate) << ',' << g17(s.error) << '\n';
      }
    }
    write_file(dir / "trajectories.csv", csv.str());
    manifest.outputs.push_back("trajectories.csv");
  }

  const auto& c = plan.setup.config;
  std::ostringstream csv;
  csv << "# manifest_hash=" << hash << '\n'
      << "scheme,N,kappa,chi,S,S_a,dt,mse,stderr,n_samples,n_trajectories,slip_count,"
         "slipped_trajectories,analytic_prediction,ratio\n"
      << plan.scheme << ',' << g17(photon_number(c)) << ',' << g17(c.kappa) << ','
      << g17(plan.setup.controller.gain) << ',' << g17(plan.setup.noise.s) << ','
      << g17(plan.setup.noise.s_a) << ',' << g17(c.dt) << ',' << g17(result.mse) << ','
      << g17(result.std_error) << ',' << result.n_samples << ',' << result.n_trajectories << ','
      << result.slip_count << ',' << result.slipped_trajectories << ',' << g17(plan.analytic)
      << ',' << g17(ratio) << '\n';
  write_file(dir / "mse.csv", csv.str());
  manifest.outputs.push_back("mse.csv");

  ordered_json summary;
  summary["manifest_hash"] = hash;
  summary["scheme"] = plan.scheme;
  summary["config"] = echo(c, plan.setup.controller, plan.setup.noise);
  summary["result"] = result_json(result);
  summary["analytic_prediction"] = plan.analytic;
  summary["ratio"] = ratio;
  summary["tool_version"] = manifest.tool_version;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  manifest.outputs.push_back("summary.json");

  finish_manifest(manifest, dir, start);
  return 0;
}

int cmd_sweep(RunManifest manifest, const CommandContext& ctx) {
  const auto start = std::chrono::steady_clock::now();
  manifest.command = "sweep";
  const SweepSpec spec = to_sweep(manifest.config);
  RunOptions opts = to_run_options(manifest.config, ctx.threads);
  opts.record_samples = false;
  const fs::path dir = prepare_out_dir(ctx);
  const std::string hash = manifest.hash();

  SweepTable table{spec, run_points(spec, opts, ctx)};

  std::ostringstream csv;
  write_sweep_csv(csv, table, hash);
  write_file(dir / "sweep.csv", csv.str());

  ordered_json j;
  j["manifest_hash"] = hash;
  j["experiment"] = to_string(spec.kind);
  j["seed"] = spec.base.seed;
  j["n_traj"] = spec.base.n_traj;
  j["tool_version"] = manifest.tool_version;
  ordered_json rows = ordered_json::array();
  bool failed = false;
  for (const auto& row : table.rows) {
    ordered_json r;
    r["scheme"] = row.scheme;
    for (const auto& [k, v] : row.params) r[k] = v;
    r["config"] = echo(row.result.config, row.result.controller, row.result.noise);
    r["result"] = result_json(row.result);
    r["analytic_prediction"] = row.analytic;
    r["ratio"] = row.ratio;
    if (!row.ok()) r["error"] = row.error;
    failed = failed || !row.ok();
    rows.push_back(r);
  }
  j["rows"] = rows;

  ordered_json fits = ordered_json::object();
  if (spec.kind == ExperimentKind::kNSweep || spec.kind == ExperimentKind::kHetVsAdaptive) {
    std::map<std::string, std::vector<std::pair<double, double>>> by_scheme;
    for (const auto& row : table.rows) {
      if (row.ok()) by_scheme[row.scheme].emplace_back(param(row, "N"), row.result.mse);
    }
    for (const auto& [scheme, pts] : by_scheme) {
      if (pts.size() < 3) continue;
      const PowerLawFit f = fit_power_law(pts);
      fits[scheme + "_mse_vs_N"] = {{"exponent", f.exponent}, {"exponent_stderr", f.exponent_stderr},
                                    {"constant", f.constant}, {"residual", f.residual}};
    }
  }
  if (spec.kind == ExperimentKind::kHetVsAdaptive) {
    ordered_json ratios = ordered_json::array();
    for (std::size_t i = 0; i + 1 < table.rows.size(); i += 2) {
      const SweepRow& het = table.rows[i];
      const SweepRow& ad = table.rows[i + 1];
      if (!het.ok() || !ad.ok()) continue;
      const double ratio = ad.result.mse / het.result.mse;
      const double se = ratio * std::hypot(ad.result.std_error / ad.result.mse,
                                           het.result.std_error / het.result.mse);
      ratios.push_back({{"N", param(het, "N")}, {"adaptive_over_heterodyne", ratio}, {"stderr", se}});
    }
    j["adaptive_over_heterodyne"] = ratios;
  }
  j["fits"] = fits;
  write_file(dir / "sweep.json", j.dump(2) + "\n");

  manifest.outputs = {"sweep.csv", "sweep.json"};
  finish_manifest(manifest, dir, start);
  return failed ? 1 : 0;
}

int cmd_table(RunManifest manifest, const CommandContext& ctx, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  manifest.command = "table";
  std::ostringstream csv;
  csv << "# manifest_hash=" << manifest.hash() << '\n';
  write_sql_table_csv(csv);
  if (ctx.out_dir.empty()) {
    out << csv.str();
    return 0;
  }
  const fs::path dir = prepare_out_dir(ctx);
  write_file(dir / "table.csv", csv.str());
  manifest.outputs = {"table.csv"};
  finish_manifest(manifest, dir, start);
  return 0;
}

std::string embedded_hash(const std::string& path) {
  std::ifstream in(path);
  if (!in) return {};
  std::string first;
  std::getline(in, first);
  constexpr std::string_view prefix = "# manifest_hash=";
  if (first.rfind(prefix, 0) == 0) return first.substr(prefix.size());
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    if (j.is_object() && j.contains("manifest_hash")) return j["manifest_hash"].get<std::string>();
  } catch (const nlohmann::json::exception&) {
  }
  return {};
}

int cmd_validate(const ValidateOptions& options, const CommandContext& ctx, std::ostream& out) {
  if (options.against.empty()) {
    ValidationOptions vo;
    vo.seed = options.seed;
    vo.n_traj = options.n_traj;
    vo.threads = ctx.threads;
    vo.criteria = options.criteria;
    vo.progress = ctx.progress;
    const auto results = run_validation_suite(vo);
    print_validation_report(out, results);
    for (const auto& s : summarize(results)) {
      if (!s.passed) return 1;
    }
    return 0;
  }

  const fs::path src = options.against;
  const std::string text = read_file(src / "manifest.json");
  const RunManifest recorded = RunManifest::from_json(text);
  const std::string stored = nlohmann::json::parse(text).value("manifest_hash", "");
  const std::string hash = recorded.hash();
  if (stored != hash) {
    out << "[FAIL] manifest hash mismatch: recorded " << stored << ", recomputed " << hash << '\n';
    return 1;
  }
  if (recorded.tool_version != tool_version()) {
    out << "[FAIL] manifest was written by version " << recorded.tool_version << ", this is "
        << tool_version() << '\n';
    return 1;
  }
  for (const auto& name : recorded.outputs) {
    const std::string h = embedded_hash((src / name).string());
    if (h != hash) {
      out << "[FAIL] " << name << ": embedded hash '" << h << "' does not match manifest " << hash
          << "; refusing to compare\n";
      return 1;
    }
  }

  CommandContext rerun = ctx;
  rerun.out_dir = ctx.out_dir.empty() ? (src / "rerun").string() : ctx.out_dir;
  if (fs::weakly_canonical(rerun.out_dir) == fs::weakly_canonical(src)) {
    throw ConfigError("validate --against: --out must differ from the compared directory");
  }
  say(ctx, "validate: rerunning " + recorded.command + " into " + rerun.out_dir);
  std::ostringstream ignored;
  if (recorded.command == "simulate") {
    cmd_simulate(recorded, rerun);
  } else if (recorded.command == "sweep") {
    cmd_sweep(recorded, rerun);
  } else if (recorded.command == "table") {
    cmd_table(recorded, rerun, ignored);
  } else {
    throw ConfigError("manifest command '" + recorded.command + "' cannot be rerun");
  }

  bool all = true;
  for (const auto& name : recorded.outputs) {
    const bool same = read_file(src / name) == read_file(fs::path(rerun.out_dir) / name);
    all = all && same;
    out << (same ? "[pass] " : "[FAIL] ") << name << (same ? " byte-identical" : " differs")
        << " (manifest " << hash << ")\n";
  }
  return all ? 0 : 1;
}

}  // namespace dynetrack::cli
