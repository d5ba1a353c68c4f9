#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "pvmrigid/harness.hpp"

using namespace pvmrigid;
namespace fs = std::filesystem;

namespace {

RunConfig cfg_for(Command c, std::size_t d, std::uint64_t seed) {
  RunConfig cfg;
  cfg.command = c;
  cfg.dim = d;
  cfg.seed = RngSeed{seed};
  cfg.samples = 200;
  cfg.curves = 30;
  return cfg;
}

const Json* find_check(const Json& report, const std::string& name) {
  for (const auto& v : report["verdicts"])
    if (v.value("check", "") == name) return &v;
  return nullptr;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pvmrigid_test_" + name);
  fs::remove_all(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& stdout_file = {}) {
  std::string cmd = std::string(PVMRIGID_CLI_PATH) + " " + args;
  cmd += stdout_file.empty() ? " > /dev/null" : " > " + stdout_file.string();
  cmd += " 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Harness, CheckBornExitsZero) {
  RunConfig cfg = cfg_for(Command::Check, 3, 42);
  const RunResult r = run(cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["schema_version"], 1);
  EXPECT_EQ(r.report["config"]["readout"], "born");
  EXPECT_NEAR((*find_check(r.report, "H2"))["max_ratio"].get<double>(), 1.0, 1e-4);
  EXPECT_TRUE(r.report["witnesses"].empty());
}

TEST(Harness, CheckUniformFailsH3AtVertexOne) {
  RunConfig cfg = cfg_for(Command::Check, 2, 1);
  cfg.readout = "uniform";
  const RunResult r = run(cfg);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ((*find_check(r.report, "H3"))["status"], "FAIL");
  ASSERT_EQ(r.report["witnesses"].size(), 1u);
  EXPECT_EQ(r.report["witnesses"][0]["location"]["vertex"], 1);
}

TEST(Harness, CheckEscortSquareHasRatioFour) {
  RunConfig cfg = cfg_for(Command::Check, 2, 7);
  cfg.readout = "escort:power:2.0";
  const RunResult r = run(cfg);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NEAR((*find_check(r.report, "H2"))["max_ratio"].get<double>(), 4.0, 1e-2);
}

TEST(Harness, RigidityExitCodes) {
  RunConfig born = cfg_for(Command::Rigidity, 4, 9);
  EXPECT_EQ(run(born).exit_code, 0);
  RunConfig pert = cfg_for(Command::Rigidity, 3, 5);
  pert.readout = "perturbed:0.1";
  const RunResult r = run(pert);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_FALSE(r.report["witnesses"].empty());
  RunConfig simplex = cfg_for(Command::SimplexRigidity, 3, 2);
  simplex.map = "escort:power:2.0";
  const RunResult s = run(simplex);
  EXPECT_EQ(s.exit_code, 1);
  EXPECT_EQ(s.report["witnesses"][0]["kind"], "FisherExpansion");
  simplex.map = "identity";
  EXPECT_EQ(run(simplex).exit_code, 0);
}

TEST(Harness, EscortRigidityReportsLinearFit) {
  RunConfig cfg = cfg_for(Command::Rigidity, 3, 3);
  cfg.readout = "escort:linear:2";
  const RunResult r = run(cfg);
  EXPECT_EQ(r.exit_code, 0);
  EXPECT_EQ(r.report["verdicts"][0]["linear_fit"]["c"], 2.0);
}

TEST(Harness, ScanF) {
  RunConfig cfg = cfg_for(Command::ScanF, 0, 1);
  cfg.generator = "power:1.0";
  cfg.modes = {"markov"};
  const RunResult a = run(cfg);
  EXPECT_EQ(a.exit_code, 0);
  EXPECT_LT(a.report["verdicts"][0]["max_abs_residual"].get<double>(), 1e-15);

  cfg.generator = "power:2.0";
  cfg.modes = {"normalization"};
  cfg.dims = {3, 4};
  const RunResult b = run(cfg);
  EXPECT_EQ(b.exit_code, 1);
  const Json& per_dim = b.report["verdicts"][0]["details"]["per_dim"];
  EXPECT_EQ(per_dim[0]["d"], 3);
  EXPECT_NEAR(per_dim[0]["barycenter_residual"].get<double>(), -2.0 / 3.0, 1e-12);
}

TEST(Harness, ScanFTableGenerator) {
  const fs::path dir = scratch("table");
  fs::create_directories(dir);
  const fs::path csv = dir / "gen.csv";
  std::ofstream(csv) << "t,f\n0,0\n0.5,0.25\n1,1\n";
  RunConfig cfg = cfg_for(Command::ScanF, 0, 1);
  cfg.generator = "table:" + csv.string();
  cfg.modes = {"cauchy"};
  const RunResult r = run(cfg);
  EXPECT_EQ(r.exit_code, 1);  // convex table is not additive
  fs::remove_all(dir);
}

TEST(Harness, ConfigErrorsExitTwo) {
  RunConfig bad = cfg_for(Command::Check, 3, 1);
  bad.readout = "nonsense";
  RunResult r = run(bad);
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_FALSE(r.error.empty());

  bad = cfg_for(Command::Check, 1, 1);
  EXPECT_EQ(run(bad).exit_code, 2);

  bad = cfg_for(Command::ScanF, 0, 1);
  EXPECT_EQ(run(bad).exit_code, 2);  // no generator

  bad = cfg_for(Command::Check, 3, 1);
  bad.curves = 0;
  EXPECT_EQ(run(bad).exit_code, 2);
}

TEST(Harness, DeterministicPayload) {
  RunConfig cfg = cfg_for(Command::Check, 3, 77);
  cfg.readout = "escort:power:2.0";
  const Json a = deterministic_payload(run(cfg).report);
  const Json b = deterministic_payload(run(cfg).report);
  EXPECT_EQ(a.dump(), b.dump());
  EXPECT_FALSE(a.contains("metadata"));
  cfg.seed = RngSeed{78};
  EXPECT_NE(deterministic_payload(run(cfg).report).dump(), a.dump());
}

TEST(Harness, ReportEmbedsConfig) {
  RunConfig cfg = cfg_for(Command::SimplexRigidity, 3, 4);
  cfg.map = "perturbed:0.2";
  const Json j = run(cfg).report;
  EXPECT_EQ(j["config"]["command"], "simplex-rigidity");
  EXPECT_EQ(j["config"]["map"], "perturbed:0.2");
  EXPECT_EQ(j["config"]["seed"], 4);
  EXPECT_TRUE(j["metadata"].contains("timestamp"));
}

TEST(Harness, ExitZeroIffNoFailure) {
  for (const char* spec : {"born", "uniform", "escort:power:2", "permuted:2,1", "step"}) {
    RunConfig cfg = cfg_for(Command::Check, 2, 3);
    cfg.readout = spec;
    const RunResult r = run(cfg);
    bool any_fail = false;
    for (const auto& v : r.report["verdicts"]) any_fail = any_fail || v.value("status", "") == "FAIL";
    EXPECT_EQ(r.exit_code == 0, !any_fail) << spec;
  }
}

TEST(Harness, SeedEnvironmentVariable) {
  ::setenv(kSeedEnvVar, "12345", 1);
  EXPECT_EQ(default_seed().value, 12345u);
  ::setenv(kSeedEnvVar, "0x10", 1);
  EXPECT_EQ(default_seed().value, 16u);
  ::setenv(kSeedEnvVar, "abc", 1);
  EXPECT_THROW(default_seed(), SpecError);
  ::unsetenv(kSeedEnvVar);
  EXPECT_EQ(default_seed().value, kDefaultSeed);
}

TEST(GeodesicDump, WritesOneCsvPerCurve) {
  const fs::path dir = scratch("dump_born");
  RunConfig cfg = cfg_for(Command::GeodesicDump, 2, 1);
  cfg.curves = 3;
  cfg.nodes = 32;
  cfg.out_path = dir.string();
  const RunResult r = run(cfg);
  ASSERT_EQ(r.exit_code, 0) << r.error;
  // 3 Haar pairs, 2 vertex geodesics, 20 circles, 1 basis circle
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.path().extension() == ".csv";
  EXPECT_EQ(files, 26u);

  // the basis circle is the last curve: ratio column is 1
  std::ifstream in(dir / "curve_025.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "s,F_Q,F_cl,ratio,d_FS_nearest_vertex,R_1,R_2");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cols = generators::detail::split(line, ',');
    ASSERT_EQ(cols.size(), 7u);
    EXPECT_NEAR(std::stod(cols[3]), 1.0, 1e-5);
  }
  EXPECT_EQ(rows, 30u);
  fs::remove_all(dir);
}

TEST(GeodesicDump, UniformAndEscortColumns) {
  const fs::path dir = scratch("dump_escort");
  RunConfig cfg = cfg_for(Command::GeodesicDump, 2, 1);
  cfg.curves = 1;
  cfg.nodes = 65;
  cfg.out_path = dir.string();
  cfg.readout = "escort:power:2.0";
  ASSERT_EQ(run(cfg).exit_code, 0);
  std::ifstream in(dir / "curve_023.csv");  // basis circle
  std::string line;
  std::getline(in, line);
  double peak = 0.0, peak_s = 0.0;
  while (std::getline(in, line)) {
    const auto cols = generators::detail::split(line, ',');
    if (std::stod(cols[3]) > peak) {
      peak = std::stod(cols[3]);
      peak_s = std::stod(cols[0]);
    }
  }
  EXPECT_NEAR(peak, 4.0, 1e-4);
  EXPECT_NEAR(peak_s, std::atan(1.0), 1e-12);

  cfg.readout = "uniform";
  ASSERT_EQ(run(cfg).exit_code, 0);
  std::ifstream u(dir / "curve_000.csv");
  std::getline(u, line);
  while (std::getline(u, line)) EXPECT_EQ(std::stod(generators::detail::split(line, ',')[2]), 0.0);
  fs::remove_all(dir);
}

TEST(GeodesicDump, UnwritablePathExitsTwo) {
  RunConfig cfg = cfg_for(Command::GeodesicDump, 2, 1);
  cfg.out_path = "/proc/pvmrigid_no_such_dir";
  EXPECT_EQ(run(cfg).exit_code, 2);
  cfg.out_path.clear();
  EXPECT_EQ(run(cfg).exit_code, 2);
}

// ---- the installed binary

TEST(Cli, ExitCodesMatchContract) {
  EXPECT_EQ(run_cli("check --readout born --d 3 --curves 20 --samples 100 --seed 42"), 0);
  EXPECT_EQ(run_cli("check --readout uniform --d 2 --seed 1"), 1);
  EXPECT_EQ(run_cli("rigidity --readout born --d 4 --seed 9 --curves 20 --samples 200"), 0);
  EXPECT_EQ(run_cli("simplex-rigidity --map escort:power:2.0 --d 3 --seed 2"), 1);
  EXPECT_EQ(run_cli("scan-f --f power:1.0 --mode markov"), 0);
  EXPECT_EQ(run_cli("scan-f --f power:2.0 --mode normalization --dims 3,4"), 1);
  EXPECT_EQ(run_cli("check --readout bogus --d 2"), 2);
  EXPECT_EQ(run_cli("check --d notanumber"), 2);
  EXPECT_EQ(run_cli("frobnicate"), 2);
  EXPECT_EQ(run_cli("scan-f --mode markov"), 2);
  EXPECT_EQ(run_cli("scan-f --f power:2 --dims 3,x"), 2);
}

TEST(Cli, ByteIdenticalReportsExceptMetadata) {
  const fs::path dir = scratch("cli_det");
  fs::create_directories(dir);
  const std::string args = "check --readout escort:power:2.0 --d 2 --seed 7 --curves 20 --samples 100 --out ";
  ASSERT_EQ(run_cli(args + (dir / "a.json").string()), 1);
  ASSERT_EQ(run_cli(args + (dir / "b.json").string()), 1);
  const Json a = Json::parse(slurp(dir / "a.json"));
  const Json b = Json::parse(slurp(dir / "b.json"));
  EXPECT_EQ(deterministic_payload(a).dump(), deterministic_payload(b).dump());
  fs::remove_all(dir);
}

TEST(Cli, SeedFromEnvironmentLandsInReport) {
  const fs::path dir = scratch("cli_env");
  fs::create_directories(dir);
  const fs::path out = dir / "r.json";
  const std::string cmd = std::string("PVMRIGID_SEED=314 ") + PVMRIGID_CLI_PATH +
                          " scan-f --f power:1 --mode linear > " + out.string();
  ASSERT_EQ(WEXITSTATUS(std::system(cmd.c_str())), 0);
  EXPECT_EQ(Json::parse(slurp(out))["config"]["seed"], 314);
  EXPECT_EQ(run_cli("scan-f --f power:1 --mode linear --seed 5", out), 0);
  EXPECT_EQ(Json::parse(slurp(out))["config"]["seed"], 5);
  fs::remove_all(dir);
}

TEST(Cli, GeodesicDumpWritesReportAndCsv) {
  const fs::path dir = scratch("cli_dump");
  ASSERT_EQ(run_cli("geodesic-dump --readout born --d 2 --curves 2 --nodes 16 --out " + dir.string()), 0);
  EXPECT_TRUE(fs::exists(dir / "report.json"));
  EXPECT_TRUE(fs::exists(dir / "curve_000.csv"));
  fs::remove_all(dir);
}
