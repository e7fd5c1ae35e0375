#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynetrack/cli/commands.hpp"
#include "dynetrack/errors.hpp"

namespace {

using namespace dynetrack;
using namespace dynetrack::cli;

struct Shared {
  std::string config_path;
  std::string out;
  std::vector<std::string> sets;
  std::string seed;
  std::string n_traj;
  unsigned threads = 0;
  bool quiet = false;
};

void add_shared(CLI::App* cmd, Shared& s) {
  cmd->add_option("--config", s.config_path, "key = value configuration file");
  cmd->add_option("--seed", s.seed, "master seed (u64)");
  cmd->add_option("--out", s.out, "output directory (default: $DYNETRACK_OUT)");
  cmd->add_option("--n-traj", s.n_traj, "trajectories per ensemble");
  cmd->add_option("--set", s.sets, "override any config key: --set key=value")->take_all();
  cmd->add_option("--threads", s.threads, "worker threads (0: all cores)");
  cmd->add_flag("--quiet", s.quiet, "no progress on stderr");
}

RunManifest resolve(const Shared& s, const std::vector<std::pair<std::string, std::string>>& extra) {
  RunManifest m;
  if (!s.config_path.empty()) apply_config_file(m.config, s.config_path);
  for (const auto& kv : s.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    m.config.set(kv.substr(0, eq), kv.substr(eq + 1), Provenance::kFlag);
  }
  if (!s.seed.empty()) m.config.set("seed", s.seed, Provenance::kFlag);
  if (!s.n_traj.empty()) m.config.set("n_traj", s.n_traj, Provenance::kFlag);
  for (const auto& [k, v] : extra) {
    if (!v.empty()) m.config.set(k, v, Provenance::kFlag);
  }
  return m;
}

CommandContext context(const Shared& s, bool out_required) {
  CommandContext ctx;
  ctx.out_dir = s.out;
  if (ctx.out_dir.empty() && out_required) {
    if (const char* env = std::getenv("DYNETRACK_OUT")) ctx.out_dir = env;
  }
  ctx.threads = s.threads;
  if (!s.quiet) ctx.progress = [](const std::string& msg) { std::cerr << msg << std::endl; };
  return ctx;
}

std::vector<int> parse_criteria(const std::string& list) {
  std::vector<int> out;
  std::size_t start = 0;
  while (start <= list.size() && !list.empty()) {
    const auto pos = list.find(',', start);
    const std::string item = list.substr(start, pos - start);
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("--only expects a comma list of criterion numbers, got '" + list + "'");
    }
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive phase tracking: Monte Carlo simulation and closed-form checks"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  Shared sim_opts, sweep_opts, table_opts, val_opts;
  auto* simulate = app.add_subcommand("simulate", "one ensemble: trajectories, MSE and summary");
  add_shared(simulate, sim_opts);

  auto* sweep = app.add_subcommand("sweep", "parameter sweep with closed-form comparison");
  add_shared(sweep, sweep_opts);
  std::string experiment, grid;
  sweep->add_option("--experiment", experiment, "gain | n | squeeze | het-vs-adaptive");
  sweep->add_option("--grid", grid, "a,b,c | log:a:b:n | lin:a:b:n");

  auto* table = app.add_subcommand("table", "reference table of asymptotic error laws (CSV)");
  add_shared(table, table_opts);

  auto* validate = app.add_subcommand("validate", "theory-vs-simulation acceptance checks");
  add_shared(validate, val_opts);
  std::string against, only;
  validate->add_option("--against", against, "rerun the manifest in DIR and compare outputs");
  validate->add_option("--only", only, "comma list of criteria to run");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*simulate) return cmd_simulate(resolve(sim_opts, {}), context(sim_opts, true));
    if (*sweep) {
      return cmd_sweep(resolve(sweep_opts, {{"experiment", experiment}, {"grid", grid}}),
                       context(sweep_opts, true));
    }
    if (*table) return cmd_table(resolve(table_opts, {}), context(table_opts, false), std::cout);
    if (*validate) {
      ValidateOptions vo;
      const RunManifest m = resolve(val_opts, {});
      if (!val_opts.seed.empty()) vo.seed = m.config.integer("seed");
      if (!val_opts.n_traj.empty()) vo.n_traj = m.config.integer("n_traj");
      vo.criteria = parse_criteria(only);
      vo.against = against;
      return cmd_validate(vo, context(val_opts, false), std::cout);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
