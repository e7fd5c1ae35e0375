#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "dynetrack/cli/commands.hpp"
#include "dynetrack/cli/config.hpp"
#include "dynetrack/cli/manifest.hpp"
#include "dynetrack/errors.hpp"

using namespace dynetrack;
using namespace dynetrack::cli;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("dynetrack_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(ParseConfig, MinimalConfigMaterializesDefaults) {
  Config c;
  apply_config_text(c, "experiment: het_vs_adaptive\nN: 400\n");
  EXPECT_EQ(c.text("experiment"), "het-vs-adaptive");
  EXPECT_EQ(c.entry("N").provenance, Provenance::kFile);
  EXPECT_EQ(c.number("kappa"), 1.0);
  EXPECT_EQ(c.entry("kappa").provenance, Provenance::kDefault);
  EXPECT_EQ(c.integer("n_traj"), 200u);
  const SweepSpec s = to_sweep(c);
  EXPECT_EQ(s.kind, ExperimentKind::kHetVsAdaptive);
  EXPECT_EQ(s.grid, default_grid(ExperimentKind::kHetVsAdaptive));
  const auto points = sweep_points(s);
  // dt follows from the step guard of every point.
  for (const auto& [scheme, p] : points) EXPECT_GT(p.config.dt, 0.0);
}

TEST(ParseConfig, NegativePhotonNumberRejected) {
  Config c;
  try {
    apply_config_text(c, "N = -5\n");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("'N'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("-5"), std::string::npos) << msg;
    EXPECT_NE(msg.find("N > 0"), std::string::npos) << msg;
  }
}

TEST(ParseConfig, UnknownAndDuplicateKeysAreErrors) {
  Config c;
  EXPECT_THROW(apply_config_text(c, "gain = 3\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "N = 3\nN = 4\n"), ConfigError);
  EXPECT_THROW(apply_config_text(c, "just words\n"), ConfigError);
}

TEST(ParseConfig, CommentsAndWhitespace) {
  Config c;
  apply_config_text(c, "# header\n\n  seed =  42   # trailing\nexclude_slips = yes\n");
  EXPECT_EQ(c.integer("seed"), 42u);
  EXPECT_TRUE(c.flag("exclude_slips"));
}

TEST(ParseConfig, FlagOverridesFileAndRecordsProvenance) {
  Config c;
  apply_config_text(c, "seed = 3\nN = 100\n");
  c.set("seed", "9", Provenance::kFlag);
  EXPECT_EQ(c.integer("seed"), 9u);
  EXPECT_EQ(c.entry("seed").provenance, Provenance::kFlag);
  EXPECT_EQ(c.entry("N").provenance, Provenance::kFile);
  RunManifest m;
  m.command = "simulate";
  m.config = c;
  const std::string json = m.to_json();
  EXPECT_NE(json.find("\"provenance\": \"flag\""), std::string::npos);
  const RunManifest back = RunManifest::from_json(json);
  EXPECT_EQ(back.config.entry("seed").provenance, Provenance::kFlag);
  EXPECT_EQ(back.hash(), m.hash());
}

TEST(ParseConfig, StiffnessGuardCited) {
  Config c;
  c.set("dt", "0.01", Provenance::kFlag);
  try {
    to_simulation(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("0.02"), std::string::npos) << e.what();
  }
}

TEST(ParseConfig, SchemeChecks) {
  Config c;
  c.set("scheme", "heterodyne", Provenance::kFlag);
  EXPECT_EQ(to_simulation(c).setup.controller.kind, ControllerKind::kHeterodyne);
  EXPECT_THROW(to_sweep(c), ConfigError);
  EXPECT_THROW(c.set("scheme", "magic", Provenance::kFlag), ConfigError);
}

TEST(ParseGrid, Forms) {
  EXPECT_EQ(parse_grid("0.5, 1,2"), (std::vector<double>{0.5, 1.0, 2.0}));
  EXPECT_EQ(parse_grid("log:100:100000:4"), (std::vector<double>{100.0, 1e3, 1e4, 1e5}));
  EXPECT_EQ(parse_grid("lin:1:2:3"), (std::vector<double>{1.0, 1.5, 2.0}));
  EXPECT_THROW(parse_grid(""), ConfigError);
  EXPECT_THROW(parse_grid("log:0:1:3"), ConfigError);
  EXPECT_THROW(parse_grid("lin:1:2"), ConfigError);
  EXPECT_THROW(parse_grid("1,x"), ConfigError);
  EXPECT_THROW(parse_grid("1,-2"), ConfigError);
}

TEST(ParseExperiment, Spellings) {
  EXPECT_EQ(parse_experiment("het_vs_adaptive"), ExperimentKind::kHetVsAdaptive);
  EXPECT_EQ(parse_experiment("Het-Vs-Adaptive"), ExperimentKind::kHetVsAdaptive);
  EXPECT_EQ(parse_experiment("n"), ExperimentKind::kNSweep);
  EXPECT_THROW(parse_experiment("banana"), ConfigError);
}

TEST(Manifest, HashIgnoresTimestampAndSpelling) {
  RunManifest a, b;
  a.command = b.command = "sweep";
  a.config.set("N", "400", Provenance::kFile);
  b.config.set("N", "4e2", Provenance::kFlag);
  b.timestamp = "2000-01-01T00:00:00Z";
  EXPECT_EQ(a.hash(), b.hash());
  b.config.set("seed", "2", Provenance::kFlag);
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash().size(), 16u);
}

TEST(Commands, TableCell) {
  RunManifest m;
  std::ostringstream out;
  EXPECT_EQ(cmd_table(m, CommandContext{}, out), 0);
  EXPECT_NE(out.str().find("CW,adaptive,0.5/N^0.5,"), std::string::npos);
  EXPECT_EQ(out.str().rfind("# manifest_hash=", 0), 0u);
}

TEST(Commands, SimulateTwiceIsByteIdentical) {
  RunManifest m;
  m.command = "simulate";
  m.config.set("N", "100", Provenance::kFlag);
  m.config.set("n_traj", "4", Provenance::kFlag);
  m.config.set("measure", "20", Provenance::kFlag);
  const fs::path a = scratch("sim_a"), b = scratch("sim_b");
  CommandContext ca, cb;
  ca.out_dir = a.string();
  cb.out_dir = b.string();
  ASSERT_EQ(cmd_simulate(m, ca), 0);
  ASSERT_EQ(cmd_simulate(m, cb), 0);
  for (const char* f : {"trajectories.csv", "mse.csv", "summary.json"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(embedded_hash((a / f).string()), m.hash()) << f;
  }
  EXPECT_EQ(embedded_hash((a / "manifest.json").string()), m.hash());
}

TEST(Commands, ValidateAgainstRerunsAndRefusesMismatch) {
  RunManifest m;
  m.config.set("experiment", "gain", Provenance::kFlag);
  m.config.set("grid", "0.5,2", Provenance::kFlag);
  m.config.set("N", "100", Provenance::kFlag);
  m.config.set("n_traj", "3", Provenance::kFlag);
  m.config.set("measure", "20", Provenance::kFlag);
  const fs::path dir = scratch("sweep");
  CommandContext ctx;
  ctx.out_dir = dir.string();
  ASSERT_EQ(cmd_sweep(m, ctx), 0);

  ValidateOptions vo;
  vo.against = dir.string();
  std::ostringstream report;
  EXPECT_EQ(cmd_validate(vo, CommandContext{}, report), 0) << report.str();
  EXPECT_NE(report.str().find("sweep.csv byte-identical"), std::string::npos);

  // An output stamped with a different hash is refused.
  std::string csv = slurp(dir / "sweep.csv");
  csv.replace(csv.find('=') + 1, 16, "0000000000000000");
  std::ofstream(dir / "sweep.csv", std::ios::binary) << csv;
  std::ostringstream refused;
  EXPECT_NE(cmd_validate(vo, CommandContext{}, refused), 0);
  EXPECT_NE(refused.str().find("refusing"), std::string::npos) << refused.str();
}
