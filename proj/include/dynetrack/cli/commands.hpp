#pragma once

// Subcommand implementations behind the dynetrack executable.

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dynetrack/cli/manifest.hpp"

namespace dynetrack::cli {

struct CommandContext {
  std::string out_dir;  ///< empty: standard output where a command allows it
  unsigned threads = 0;
  std::function<void(const std::string&)> progress;  ///< null when quiet
};

/// Writes trajectories.csv, mse.csv, summary.json and manifest.json.
int cmd_simulate(RunManifest manifest, const CommandContext& ctx);

/// Writes sweep.csv, sweep.json and manifest.json. Exit status 1 when any
/// point failed.
int cmd_sweep(RunManifest manifest, const CommandContext& ctx);

/// Reference table CSV to `out` (empty out_dir) or to <out_dir>/table.csv
/// with manifest.json.
int cmd_table(RunManifest manifest, const CommandContext& ctx, std::ostream& out);

struct ValidateOptions {
  std::uint64_t seed = 20021;
  std::uint64_t n_traj = 200;
  std::vector<int> criteria;
  std::string against;  ///< directory of an earlier run to reproduce
};

/// Runs the acceptance suite (report to `out`) or, with `against`, reruns the
/// recorded manifest and compares every output byte for byte. Nonzero exit
/// on any failure or hash mismatch.
int cmd_validate(const ValidateOptions& options, const CommandContext& ctx, std::ostream& out);

/// First "# manifest_hash=" or "\"manifest_hash\"" value in a file, or empty.
std::string embedded_hash(const std::string& path);

}  // namespace dynetrack::cli
