#pragma once

// Command dispatch behind the pvmrigid CLI. Every run produces a JSON report
//
//   { schema_version, config, verdicts[], witnesses[], metadata }
//
// where everything except `metadata` is a pure function of the RunConfig.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "pvmrigid/admissibility.hpp"
#include "pvmrigid/common.hpp"
#include "pvmrigid/escort_markov.hpp"
#include "pvmrigid/projective.hpp"
#include "pvmrigid/readout.hpp"
#include "pvmrigid/rigidity.hpp"
#include "pvmrigid/rng.hpp"
#include "pvmrigid/witness.hpp"

namespace pvmrigid {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kSeedEnvVar = "PVMRIGID_SEED";
inline constexpr std::uint64_t kDefaultSeed = 20240601;

enum class Command { Check, Rigidity, SimplexRigidity, ScanF, GeodesicDump };

inline std::string to_string(Command c) {
  switch (c) {
    case Command::Check: return "check";
    case Command::Rigidity: return "rigidity";
    case Command::SimplexRigidity: return "simplex-rigidity";
    case Command::ScanF: return "scan-f";
    case Command::GeodesicDump: return "geodesic-dump";
  }
  return "unknown";
}

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kFail = 1;
inline constexpr int kUsage = 2;
inline constexpr int kInconclusive = 3;
}  // namespace exit_code

struct RunConfig {
  Command command = Command::Check;
  std::size_t dim = 2;
  std::string readout = "born";
  std::string map = "identity";
  std::string generator;
  std::vector<std::string> modes{"normalization", "cauchy", "markov", "linear"};
  std::vector<std::size_t> dims{3, 4, 5};
  std::size_t curves = 100;
  std::size_t samples = 1000;
  std::size_t nodes = 64;
  std::size_t grid = 64;
  RngSeed seed{kDefaultSeed};
  Tolerances tol;
  std::string out_path;  // report file; output directory for geodesic-dump
};

// Seed from PVMRIGID_SEED when set and parseable, else kDefaultSeed.
inline RngSeed default_seed() {
  if (const char* env = std::getenv(kSeedEnvVar)) {
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(env, &pos, 0);
      if (pos == std::string(env).size()) return RngSeed{v};
    } catch (const std::exception&) {
    }
    throw SpecError(std::string(kSeedEnvVar) + " is not an unsigned integer: '" + env + "'");
  }
  return RngSeed{kDefaultSeed};
}

inline Json to_json(const RunConfig& c) {
  Json j{{"command", to_string(c.command)}, {"d", c.dim}};
  switch (c.command) {
    case Command::Check:
    case Command::Rigidity:
    case Command::GeodesicDump:
      j["readout"] = c.readout;
      j["curves"] = c.curves;
      j["nodes"] = c.nodes;
      if (c.command != Command::GeodesicDump) j["samples"] = c.samples;
      break;
    case Command::SimplexRigidity:
      j["map"] = c.map;
      j["samples"] = c.samples;
      break;
    case Command::ScanF:
      j.erase("d");
      j["f"] = c.generator;
      j["modes"] = c.modes;
      j["dims"] = c.dims;
      j["grid"] = c.grid;
      break;
  }
  j["seed"] = c.seed.value;
  j["tol_eq"] = c.tol.eq;
  j["tol_ineq"] = c.tol.ineq;
  return j;
}

// Throws SpecError on anything the command cannot run with.
inline void validate(const RunConfig& c) {
  if (c.command != Command::ScanF && c.dim < 2) throw SpecError("--d must be >= 2");
  if (c.curves < 1 || c.samples < 1) throw SpecError("counts must be >= 1");
  if (c.nodes < 4) throw SpecError("--nodes must be >= 4");
  if (!(c.tol.eq > 0.0) || !(c.tol.ineq > 0.0)) throw SpecError("tolerances must be positive");
  if (c.command == Command::ScanF) {
    if (c.generator.empty()) throw SpecError("scan-f requires --f");
    if (c.modes.empty()) throw SpecError("scan-f requires at least one --mode");
    if (c.grid < 8) throw SpecError("--grid must be >= 8");
    for (std::size_t d : c.dims)
      if (d < 3) throw SpecError("--dims entries must be >= 3");
  }
  if (c.command == Command::SimplexRigidity && c.samples < c.dim)
    throw SpecError("simplex-rigidity needs --samples >= d");
  if (c.command == Command::GeodesicDump && c.out_path.empty())
    throw SpecError("geodesic-dump requires --out <directory>");
}

struct RunResult {
  int exit_code = exit_code::kOk;
  Json report;
  std::string error;  // non-empty on usage / configuration failure
};

namespace detail {

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline Json make_report(const RunConfig& cfg) {
  return Json{{"schema_version", kSchemaVersion},
              {"config", to_json(cfg)},
              {"verdicts", Json::array()},
              {"witnesses", Json::array()},
              {"metadata", Json{{"timestamp", utc_timestamp()},
                                {"rng_algorithm", kRngAlgorithm},
                                {"tool", "pvmrigid"}}}};
}

inline void add_witness(Json& report, const std::string& source, const std::optional<Witness>& w) {
  if (!w) return;
  Json j = to_json(*w);
  j["source"] = source;
  report["witnesses"].push_back(std::move(j));
}

inline CurveSuite suite_for(const RunConfig& cfg) {
  SuiteOptions opt;
  opt.geodesic_pairs = cfg.curves;
  opt.nodes = cfg.nodes;
  return default_suite(cfg.dim, split(cfg.seed, 100), opt);
}

inline std::vector<Ray> samples_for(const RunConfig& cfg) {
  return haar_sample(split(cfg.seed, 200), cfg.samples, cfg.dim);
}

inline void push_admissibility(Json& report, const AdmissibilityReport& a) {
  report["config"]["suite"] = a.suite_provenance;
  Json h1 = to_json(a.h1), h2 = to_json(a.h2), h3 = to_json(a.h3);
  report["verdicts"].push_back(h1);
  report["verdicts"].push_back(h2);
  report["verdicts"].push_back(h3);
  report["verdicts"].push_back(to_json(a.born_dev));
  add_witness(report, "H1", a.h1.witness);
  add_witness(report, "H2", a.h2.witness);
  add_witness(report, "H3", a.h3.witness);
}

}  // namespace detail

// The report without its metadata block; this is what determinism binds.
inline Json deterministic_payload(const Json& report) {
  Json j = report;
  j.erase("metadata");
  return j;
}

inline RunResult run_check(const RunConfig& cfg) {
  RunResult r;
  r.report = detail::make_report(cfg);
  const Readout p = readouts::parse(cfg.readout, cfg.dim);
  const CurveSuite suite = detail::suite_for(cfg);
  const std::vector<Ray> samples = detail::samples_for(cfg);
  const AdmissibilityReport a = check_admissibility(p, suite, samples, cfg.tol);
  detail::push_admissibility(r.report, a);
  r.exit_code = a.all_pass() ? exit_code::kOk : exit_code::kFail;
  return r;
}

inline int exit_for(Conclusion c) {
  switch (c) {
    case Conclusion::IdentityConfirmed:
    case Conclusion::BornConfirmed: return exit_code::kOk;
    case Conclusion::PremiseViolated: return exit_code::kFail;
    case Conclusion::Inconclusive: return exit_code::kInconclusive;
  }
  return exit_code::kInconclusive;
}

inline RunResult run_rigidity(const RunConfig& cfg) {
  RunResult r;
  r.report = detail::make_report(cfg);
  RigidityVerdict v;
  if (cfg.command == Command::SimplexRigidity) {
    const SimplexSelfMap t = maps::parse(cfg.map, cfg.dim);
    v = simplex_rigidity_check(t, cfg.seed, cfg.samples, cfg.tol);
    r.report["verdicts"].push_back(to_json(v));
  } else {
    const CurveSuite suite = detail::suite_for(cfg);
    const std::vector<Ray> samples = detail::samples_for(cfg);
    if (cfg.readout.rfind("escort:", 0) == 0) {
      const EscortGenerator f = generators::parse(std::string_view(cfg.readout).substr(7));
      const EscortRigidityResult e = escort_rigidity_test(f, cfg.dim, suite, samples, cfg.tol);
      v = e.verdict;
      Json vj = to_json(v);
      vj["linear_fit"] = Json{{"c", e.fit.c}, {"max_dev", e.fit.max_dev}, {"pass", e.fit.pass}};
      vj["readout_born_gap"] = e.readout_born_gap;
      r.report["verdicts"].push_back(std::move(vj));
    } else {
      const Readout p = readouts::parse(cfg.readout, cfg.dim);
      v = readout_rigidity_check(p, suite, samples, cfg.tol, {}, cfg.seed);
      r.report["verdicts"].push_back(to_json(v));
    }
    if (v.premises) detail::push_admissibility(r.report, *v.premises);
    // push_admissibility already emitted the premise witnesses
    r.exit_code = exit_for(v.conclusion);
    return r;
  }
  detail::add_witness(r.report, "rigidity", v.witness);
  r.exit_code = exit_for(v.conclusion);
  return r;
}

// Passing scans at a coarse grid are re-run at this resolution before they
// count as passes (normalization excepted, its grid grows like grid^(d-1)).
inline constexpr std::size_t kCertifyGrid = 256;

inline RunResult run_scan_f(const RunConfig& cfg) {
  RunResult r;
  r.report = detail::make_report(cfg);
  const EscortGenerator f = generators::parse(cfg.generator);
  bool all = true;
  for (const std::string& m : cfg.modes) {
    const ScanMode mode = parse_scan_mode(m);
    auto scan = [&](std::size_t grid) {
      switch (mode) {
        case ScanMode::Normalization: return normalization_scan(f, cfg.dims, grid, cfg.tol.eq);
        case ScanMode::Cauchy: return cauchy_scan(f, grid, cfg.tol.eq);
        case ScanMode::Markov: return markov_scan(f, grid, cfg.tol.eq);
        case ScanMode::LinearFit: return linear_fit_scan(f, grid);
      }
      throw SpecError("unhandled scan mode");
    };
    GeneratorScanReport rep = scan(cfg.grid);
    Json j = to_json(rep);
    if (rep.pass && mode != ScanMode::Normalization && cfg.grid < kCertifyGrid) {
      const GeneratorScanReport fine = scan(kCertifyGrid);
      j["certification"] = Json{{"grid", kCertifyGrid},
                                {"status", verdict_string(fine.pass)},
                                {"max_abs_residual", fine.max_abs_residual}};
      if (!fine.pass) {
        j["status"] = verdict_string(false);
        rep.pass = false;
        rep.witness = fine.witness;
      }
    }
    all = all && rep.pass;
    r.report["verdicts"].push_back(std::move(j));
    detail::add_witness(r.report, to_string(mode), rep.witness);
  }
  r.exit_code = all ? exit_code::kOk : exit_code::kFail;
  return r;
}

inline constexpr const char* kDumpHeaderPrefix = "s,F_Q,F_cl,ratio,d_FS_nearest_vertex";

// One CSV per suite curve: interior nodes only (the central stencil needs
// room on both sides). ratio is 0 where F_Q sits below the stationary floor.
inline RunResult run_geodesic_dump(const RunConfig& cfg) {
  namespace fs = std::filesystem;
  RunResult r;
  r.report = detail::make_report(cfg);
  const Readout p = readouts::parse(cfg.readout, cfg.dim);
  const CurveSuite suite = detail::suite_for(cfg);
  const fs::path dir(cfg.out_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());

  Json files = Json::array();
  double max_ratio = 0.0;
  for (std::size_t ci = 0; ci < suite.curves.size(); ++ci) {
    const PureCurve& c = suite.curves[ci];
    char name[32];
    std::snprintf(name, sizeof name, "curve_%03zu.csv", ci);
    const fs::path path = dir / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << kDumpHeaderPrefix;
    for (std::size_t i = 1; i <= cfg.dim; ++i) os << ",R_" << i;
    os << '\n';
    os << std::setprecision(17);
    for (std::size_t k = 1; k + 1 < cfg.nodes; ++k) {
      const double s = c.node(k, cfg.nodes);
      const auto fp = detail::fisher_pair(p, c, s, kDefaultStep);
      const Ray psi = c(s);
      double amax = 0.0;
      for (std::size_t i = 0; i < psi.dim(); ++i) amax = std::max(amax, std::abs(psi[i]));
      const double dv = std::acos(std::min(1.0, amax));
      const OrthantPoint rr = sqrt_readout(p, psi);
      max_ratio = std::max(max_ratio, fp.ratio());
      os << s << ',' << fp.f_q << ',' << fp.f_cl << ',' << fp.ratio() << ',' << dv;
      for (std::size_t i = 0; i < rr.dim(); ++i) os << ',' << rr[i];
      os << '\n';
    }
    if (!os) throw std::runtime_error("write failed for " + path.string());
    files.push_back(Json{{"curve_id", ci}, {"label", c.label}, {"file", name}});
  }
  r.report["config"]["suite"] = suite.provenance;
  r.report["verdicts"].push_back(
      Json{{"check", "geodesic-dump"}, {"curves", suite.size()}, {"max_ratio", max_ratio}, {"files", files}});
  return r;
}

// Runs the command, converting configuration errors into exit code 2.
inline RunResult run(const RunConfig& cfg) {
  try {
    validate(cfg);
    switch (cfg.command) {
      case Command::Check: return run_check(cfg);
      case Command::Rigidity:
      case Command::SimplexRigidity: return run_rigidity(cfg);
      case Command::ScanF: return run_scan_f(cfg);
      case Command::GeodesicDump: return run_geodesic_dump(cfg);
    }
  } catch (const std::exception& e) {
    RunResult r;
    r.exit_code = exit_code::kUsage;
    r.error = e.what();
    return r;
  }
  return RunResult{exit_code::kUsage, {}, "unknown command"};
}

// Report file for every command except geodesic-dump, which keeps a
// report.json next to its CSVs.
inline void write_report(const RunConfig& cfg, const Json& report, std::ostream& fallback) {
  const std::string text = report.dump(2) + "\n";
  if (cfg.out_path.empty()) {
    fallback << text;
    return;
  }
  std::filesystem::path path(cfg.out_path);
  if (cfg.command == Command::GeodesicDump) path /= "report.json";
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write report to " + path.string());
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace pvmrigid
