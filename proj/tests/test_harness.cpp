#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "thermovisc/commands.hpp"

using namespace thermovisc;
namespace fs = std::filesystem;

namespace {

int config_error_line(const std::string& text, std::string* msg = nullptr) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    if (msg) *msg = e.what();
    return e.line();
  }
  return -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("thermovisc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(THERMOVISC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kSmallRun =
    "nx = 6\nny = 6\nT = 0.06\ndt = 0.02\neps = 0.2\nbeta0 = 1\nu0_amp = 1\nmu0_amp = 1\nf_y = -1\ndump_every = 1\n";

}  // namespace

TEST(Config, EmptyFileGivesDefaults) {
  const ParsedConfig pc = parse_config("");
  EXPECT_EQ(pc.material.alpha, Material{}.alpha);
  EXPECT_EQ(pc.sim.nx, SimConfig{}.nx);
  EXPECT_EQ(parse_config("# only a comment\n\n   \n").sim.dt, SimConfig{}.dt);
}

TEST(Config, ParsesValuesAndLists) {
  const ParsedConfig pc = parse_config(
      "alpha = 1.5  # trailing comment\nmodel = linear\nload_times = 0, 0.5\nf_y = -1, 2\nheat_enabled = off\n");
  EXPECT_EQ(pc.material.alpha, 1.5);
  EXPECT_EQ(pc.sim.model, Model::Linear);
  EXPECT_EQ(pc.sim.loads.f_y.values.size(), 2u);
  EXPECT_FALSE(pc.sim.heat_enabled);
  EXPECT_EQ(pc.lines.at("f_y"), 4);
}

TEST(Config, AlphaOutsideAdmissibleRange) {
  std::string msg;
  EXPECT_EQ(config_error_line("nx = 8\nalpha = 2.5\n", &msg), 2);
  EXPECT_NE(msg.find("alpha must lie in [1, 2]"), std::string::npos) << msg;
}

TEST(Config, DeterminantExponentTooSmall) {
  std::string msg;
  EXPECT_EQ(config_error_line("p = 4\nq = 3\n", &msg), 2);
  EXPECT_NE(msg.find("q >= p*d/(p-d)"), std::string::npos) << msg;
}

TEST(Config, UnknownDuplicateAndMalformed) {
  std::string msg;
  EXPECT_EQ(config_error_line("nx = 8\n\nbogus = 1\n", &msg), 3);
  EXPECT_NE(msg.find("unknown key 'bogus'"), std::string::npos);
  EXPECT_EQ(config_error_line("dt = 0.1\ndt = 0.2\n"), 2);
  EXPECT_EQ(config_error_line("nx = eight\n"), 1);
  EXPECT_EQ(config_error_line("dt = 1e-2x\n"), 1);
  EXPECT_EQ(config_error_line("T = 0.1\nnu = 0\n"), 2);
  EXPECT_EQ(config_error_line("no equals sign\n"), 1);
  EXPECT_EQ(config_error_line("coupling = sideways\n"), 1);
}

TEST(Config, ResolvedConfigRoundtrips) {
  const ParsedConfig pc = parse_config(kSmallRun);
  const std::string text = resolved_config(pc.material, pc.sim);
  const ParsedConfig back = parse_config(text);
  EXPECT_EQ(resolved_config(back.material, back.sim), text);
  EXPECT_EQ(back.sim.eps, 0.2);
  EXPECT_EQ(back.sim.loads.f_y.values, std::vector<double>{-1.0});
}

TEST(Cli, ValidateDefaultsExitsZero) {
  const fs::path d = scratch("validate");
  std::ofstream(d / "empty.cfg") << "";
  EXPECT_EQ(cli("validate --config " + (d / "empty.cfg").string() + " --out " + (d / "out").string()), 0);
  EXPECT_TRUE(fs::exists(d / "out" / "validate.txt"));
  EXPECT_EQ(slurp(d / "out" / "VERSION"), std::string(kVersion) + "\n");
  EXPECT_EQ(slurp(d / "out" / "config.resolved"), resolved_config(Material{}, SimConfig{}));
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("exit");
  std::ofstream(d / "bad.cfg") << "alpha = 3\n";
  std::ofstream(d / "ok.cfg") << kSmallRun;
  std::ofstream(d / "stiff.cfg") << kSmallRun << "mech_max_iter = 1\n";
  std::ofstream(d / "strict.cfg") << kSmallRun << "scaling_threshold = 1\n";
  const std::string out = " --out " + (d / "o").string();
  EXPECT_EQ(cli("simulate --config " + (d / "bad.cfg").string() + out), 2);
  EXPECT_EQ(cli("simulate --config " + (d / "missing.cfg").string() + out), 2);
  EXPECT_EQ(cli("simulate --config " + (d / "ok.cfg").string() + out + " --alpha 0.5"), 2);
  EXPECT_EQ(cli("linearize-sweep --config " + (d / "ok.cfg").string() + out + " --eps 0.1"), 2);
  EXPECT_EQ(cli("linearize-sweep --config " + (d / "ok.cfg").string() + out + " --eps 0.1,0.2"), 2);
  EXPECT_EQ(cli("frobnicate --config " + (d / "ok.cfg").string() + out), 2);
  EXPECT_EQ(cli("simulate --config " + (d / "stiff.cfg").string() + out), 3);
  EXPECT_EQ(cli("linearize-sweep --config " + (d / "strict.cfg").string() + out + " --eps 0.4,0.2,0.1"), 4);
}

TEST(Cli, SimulateIsByteIdenticalAndDiagnoseAgrees) {
  const fs::path d = scratch("determinism");
  std::ofstream(d / "run.cfg") << kSmallRun;
  const std::string cfg = " --config " + (d / "run.cfg").string();
  ASSERT_EQ(cli("simulate" + cfg + " --out " + (d / "a").string()), 0);
  ASSERT_EQ(cli("simulate" + cfg + " --out " + (d / "b").string()), 0);
  int compared = 0;
  for (const auto& e : fs::recursive_directory_iterator(d / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), d / "a");
    EXPECT_EQ(slurp(e.path()), slurp(d / "b" / rel)) << rel;
    ++compared;
  }
  EXPECT_GE(compared, 10);
  for (const char* f : {"trajectory.csv", "steps.csv", "positivity.csv", "report.txt", "config.resolved", "VERSION"})
    EXPECT_TRUE(fs::exists(d / "a" / f)) << f;
  const std::string csv = slurp(d / "a" / "trajectory.csv");
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,M,Wcpl,Win,E_shifted,diss_cum,theta_min,theta_max,mech_iters,heat_res");

  ASSERT_EQ(cli("diagnose" + cfg + " --out " + (d / "a").string()), 0);
  const std::string diag = slurp(d / "a" / "diagnose.txt");
  EXPECT_NE(diag.find("energy.balance_residual_over_bound: PASS"), std::string::npos) << diag;
  EXPECT_NE(diag.find("positivity.theta_min: PASS"), std::string::npos);
}

TEST(Cli, SweepWritesPerEpsDirectories) {
  const fs::path d = scratch("sweep");
  std::ofstream(d / "run.cfg") << "nx = 6\nny = 6\nT = 0.04\ndt = 0.02\nbeta0 = 1\nu0_amp = 1\nmu0_amp = 1\n";
  const std::string args = "linearize-sweep --config " + (d / "run.cfg").string() + " --eps 0.4,0.2,0.1 --alpha 2";
  const int rc = cli(args + " --out " + (d / "serial").string());
  EXPECT_TRUE(rc == 0 || rc == 4);
  EXPECT_EQ(cli(args + " --parallel 3 --out " + (d / "par").string()), rc);
  for (const char* sub : {"eps_0.4", "eps_0.2", "eps_0.1", "linear"})
    EXPECT_TRUE(fs::exists(d / "serial" / sub / "trajectory.csv")) << sub;
  for (const char* f : {"convergence.csv", "scaling.csv", "scaling.txt"}) {
    ASSERT_TRUE(fs::exists(d / "serial" / f)) << f;
    EXPECT_EQ(slurp(d / "serial" / f), slurp(d / "par" / f)) << f;
  }
}
