#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pvmrigid/harness.hpp"

namespace {

using pvmrigid::Command;
using pvmrigid::RunConfig;

struct Flags {
  std::size_t dim = 2;
  std::string readout = "born";
  std::string map = "identity";
  std::string generator;
  std::vector<std::string> modes;
  std::string dims = "3,4,5";
  std::size_t curves = 100;
  std::size_t samples = 1000;
  std::size_t nodes = 64;
  std::size_t grid = 64;
  std::uint64_t seed = 0;
  double tol_eq = pvmrigid::Tolerances{}.eq;
  double tol_ineq = pvmrigid::Tolerances{}.ineq;
  std::string out;
};

std::vector<std::size_t> parse_dims(const std::string& s) {
  std::vector<std::size_t> out;
  for (const std::string& tok : pvmrigid::generators::detail::split(s, ',')) {
    const double v = pvmrigid::generators::detail::parse_double(tok, "--dims");
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
      throw pvmrigid::SpecError("--dims entries must be nonnegative integers");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical checks for PVM readout rigidity"};
  app.require_subcommand(1);
  Flags fl;
  try {
    fl.seed = pvmrigid::default_seed().value;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pvmrigid::exit_code::kUsage;
  }

  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", fl.seed, "RNG seed (default from " + std::string(pvmrigid::kSeedEnvVar) + ")");
    sub->add_option("--tol-eq", fl.tol_eq, "equality tolerance");
    sub->add_option("--tol-ineq", fl.tol_ineq, "inequality tolerance");
    sub->add_option("--out", fl.out, "report path (directory for geodesic-dump)");
  };
  auto dimension = [&](CLI::App* sub) { sub->add_option("--d", fl.dim, "Hilbert space dimension"); };
  auto curve_opts = [&](CLI::App* sub) {
    sub->add_option("--readout", fl.readout, "readout spec");
    sub->add_option("--curves", fl.curves, "Haar geodesic pairs in the suite");
    sub->add_option("--nodes", fl.nodes, "nodes per curve");
  };

  auto* check = app.add_subcommand("check", "run the (H1)-(H3) admissibility checks");
  auto* rigidity = app.add_subcommand("rigidity", "readout rigidity engine");
  auto* simplex = app.add_subcommand("simplex-rigidity", "simplex self-map rigidity engine");
  auto* scan = app.add_subcommand("scan-f", "functional-equation scans of a generator");
  auto* dump = app.add_subcommand("geodesic-dump", "per-node CSV dumps along the curve suite");

  for (auto* sub : {check, rigidity, dump}) {
    common(sub);
    dimension(sub);
    curve_opts(sub);
  }
  for (auto* sub : {check, rigidity}) sub->add_option("--samples", fl.samples, "Haar state samples");
  common(simplex);
  dimension(simplex);
  simplex->add_option("--map", fl.map, "simplex self-map spec");
  simplex->add_option("--samples", fl.samples, "interior probe points");
  common(scan);
  scan->add_option("--f", fl.generator, "generator spec")->required();
  scan->add_option("--mode", fl.modes, "normalization | cauchy | markov | linear (repeatable)");
  scan->add_option("--dims", fl.dims, "comma-separated dimensions for normalization");
  scan->add_option("--grid", fl.grid, "grid nodes per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : pvmrigid::exit_code::kUsage;
  }

  RunConfig cfg;
  if (check->parsed()) cfg.command = Command::Check;
  else if (rigidity->parsed()) cfg.command = Command::Rigidity;
  else if (simplex->parsed()) cfg.command = Command::SimplexRigidity;
  else if (scan->parsed()) cfg.command = Command::ScanF;
  else cfg.command = Command::GeodesicDump;
  cfg.dim = fl.dim;
  cfg.readout = fl.readout;
  cfg.map = fl.map;
  cfg.generator = fl.generator;
  if (!fl.modes.empty()) cfg.modes = fl.modes;
  cfg.curves = fl.curves;
  cfg.samples = fl.samples;
  cfg.nodes = fl.nodes;
  cfg.grid = fl.grid;
  cfg.seed = pvmrigid::RngSeed{fl.seed};
  cfg.tol = {fl.tol_eq, fl.tol_ineq};
  cfg.out_path = fl.out;

  try {
    cfg.dims = parse_dims(fl.dims);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pvmrigid::exit_code::kUsage;
  }

  const pvmrigid::RunResult res = pvmrigid::run(cfg);
  if (!res.error.empty()) {
    std::cerr << "error: " << res.error << '\n';
    return res.exit_code;
  }
  try {
    pvmrigid::write_report(cfg, res.report, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return pvmrigid::exit_code::kUsage;
  }
  return res.exit_code;
}
