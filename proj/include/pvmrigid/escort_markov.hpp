#pragma once

// Functional-equation scanners for scalar generators f : [0,1] -> [0, inf).
//
//   normalization:  sum_i f(u_i) = 1 on simplex grids (d >= 3)
//   cauchy:         f(u + v) = f(u) + f(v) on the unit triangle
//   markov:         f(k s) + f((1 - k) s) = f(s)        (split-merge)
//   linear fit:     f(t) = c t, c by least squares through the origin
//
// Each of the first three forces linearity for continuous f; the linear fit
// stands in for the continuity step with an explicit tolerance.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "pvmrigid/admissibility.hpp"
#include "pvmrigid/common.hpp"
#include "pvmrigid/readout.hpp"
#include "pvmrigid/rigidity.hpp"
#include "pvmrigid/witness.hpp"

namespace pvmrigid {

enum class ScanMode { Normalization, Cauchy, Markov, LinearFit };

inline std::string to_string(ScanMode m) {
  switch (m) {
    case ScanMode::Normalization: return "NORMALIZATION";
    case ScanMode::Cauchy: return "CAUCHY";
    case ScanMode::Markov: return "MARKOV";
    case ScanMode::LinearFit: return "LINEAR_FIT";
  }
  return "UNKNOWN";
}

inline ScanMode parse_scan_mode(std::string_view s) {
  if (s == "normalization") return ScanMode::Normalization;
  if (s == "cauchy") return ScanMode::Cauchy;
  if (s == "markov") return ScanMode::Markov;
  if (s == "linear" || s == "linear-fit") return ScanMode::LinearFit;
  throw SpecError("unknown scan mode '" + std::string(s) + "'");
}

struct GeneratorScanReport {
  std::string generator;
  ScanMode mode = ScanMode::Normalization;
  double max_abs_residual = 0.0;
  double residual_at_argmax = 0.0;  // signed
  Json argmax;
  std::optional<double> fitted_c;
  Json grid;
  Json details;
  double tol = 0.0;
  bool pass = true;
  std::optional<Witness> witness;
};

inline Json to_json(const GeneratorScanReport& r) {
  Json j{{"check", "scan-f"},
         {"mode", to_string(r.mode)},
         {"status", verdict_string(r.pass)},
         {"generator", r.generator},
         {"max_abs_residual", r.max_abs_residual},
         {"residual_at_argmax", r.residual_at_argmax},
         {"argmax", r.argmax},
         {"tol", r.tol},
         {"grid", r.grid}};
  if (r.fitted_c) j["fitted_c"] = *r.fitted_c;
  if (!r.details.is_null()) j["details"] = r.details;
  j["witness"] = to_json(r.witness);
  return j;
}

// ---------------------------------------------------------------------------
// Pointwise residuals

inline double cauchy_additivity_residual(const EscortGenerator& f, double u, double v) {
  if (!(u >= 0.0 && v >= 0.0 && u + v <= 1.0 + kInvariantTol))
    throw DomainError("cauchy_additivity_residual: (u, v) outside the unit triangle");
  return f(u + v) - f(u) - f(v);
}

inline double markov_invariance_residual(const EscortGenerator& f, double k, double s) {
  if (!(k >= 0.0 && k <= 1.0)) throw DomainError("markov_invariance_residual: k outside [0,1]");
  if (!(s > 0.0 && s <= 1.0)) throw DomainError("markov_invariance_residual: s outside (0,1]");
  return f(k * s) + f((1.0 - k) * s) - f(s);
}

inline double normalization_residual(const EscortGenerator& f, std::span<const double> u) {
  double s = 0.0;
  for (double x : u) s += f(x);
  return s - 1.0;
}

// ---------------------------------------------------------------------------
// Scans

namespace detail {

// Visits every u = k / n with k a composition of n into d nonnegative parts.
template <class Visit>
void for_each_simplex_grid_point(std::size_t d, std::size_t n, Visit&& visit) {
  std::vector<std::size_t> k(d, 0);
  Vec u(d);
  const double inv = 1.0 / static_cast<double>(n);
  auto rec = [&](auto&& self, std::size_t idx, std::size_t remaining) -> void {
    if (idx + 1 == d) {
      k[idx] = remaining;
      for (std::size_t i = 0; i < d; ++i) u[i] = static_cast<double>(k[i]) * inv;
      visit(std::span<const double>(u));
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      k[idx] = v;
      self(self, idx + 1, remaining - v);
    }
  };
  rec(rec, 0, n);
}

inline double vertex_sum(const EscortGenerator& f, std::size_t d) {
  Vec e(d, 0.0);
  e[0] = 1.0;
  double s = 0.0;
  for (double x : e) s += f(x);
  return s;
}

}  // namespace detail

// sum_i f(u_i) - 1 over the grid {k / grid} of each listed dimension, plus
// the barycenter. Also records what the vertex identities imply:
// f(0) = S_4 - S_3 with S_d = f(1) + (d - 1) f(0), and f(1) = 1 - 2 f(0).
inline GeneratorScanReport normalization_scan(const EscortGenerator& f, std::span<const std::size_t> dims,
                                              std::size_t grid = 64, double tol = 1e-9) {
  if (dims.empty()) throw DomainError("normalization_scan: no dimensions given");
  for (std::size_t d : dims)
    if (d < 3) throw DomainError("normalization_scan: dimensions must be >= 3");
  if (grid < 1) throw DomainError("normalization_scan: grid must be >= 1");

  GeneratorScanReport r;
  r.generator = f.name;
  r.mode = ScanMode::Normalization;
  r.tol = tol;
  r.grid = Json{{"per_axis", grid}, {"dims", Json(std::vector<std::size_t>(dims.begin(), dims.end()))}};
  r.details = Json{{"per_dim", Json::array()}};

  Vec worst_u;
  std::size_t worst_d = 0;
  bool first = true;
  for (std::size_t d : dims) {
    double dim_max = 0.0;
    double dim_signed = 0.0;
    Vec dim_arg;
    std::size_t points = 0;
    auto visit = [&](std::span<const double> u) {
      ++points;
      const double res = normalization_residual(f, u);
      if (std::abs(res) > dim_max || dim_arg.empty()) {
        dim_max = std::abs(res);
        dim_signed = res;
        dim_arg.assign(u.begin(), u.end());
      }
    };
    detail::for_each_simplex_grid_point(d, grid, visit);
    const Vec bary(d, 1.0 / static_cast<double>(d));
    visit(bary);
    const double bary_res = normalization_residual(f, bary);

    r.details["per_dim"].push_back(Json{{"d", d},
                                        {"points", points},
                                        {"max_abs_residual", dim_max},
                                        {"residual_at_argmax", dim_signed},
                                        {"argmax", dim_arg},
                                        {"barycenter_residual", bary_res}});
    if (first || dim_max > r.max_abs_residual) {
      first = false;
      r.max_abs_residual = dim_max;
      r.residual_at_argmax = dim_signed;
      worst_u = dim_arg;
      worst_d = d;
    }
  }
  r.argmax = Json{{"d", worst_d}, {"u", worst_u}};

  const double s3 = detail::vertex_sum(f, 3);
  const double s4 = detail::vertex_sum(f, 4);
  const double f0 = s4 - s3;
  r.details["vertex_f0"] = f0;
  r.details["vertex_f1"] = 1.0 - 2.0 * f0;

  r.pass = r.max_abs_residual <= tol;
  if (!r.pass)
    r.witness = Witness{WitnessKind::Normalization, Json{{"d", worst_d}, {"u", worst_u}},
                        normalization_residual(f, worst_u) + 1.0, 1.0, "sum_i f(u_i) == 1"};
  return r;
}

// f(u + v) - f(u) - f(v) for u = i / (grid - 1), v = j / (grid - 1), i + j < grid.
inline GeneratorScanReport cauchy_scan(const EscortGenerator& f, std::size_t grid = 64, double tol = 1e-9) {
  if (grid < 2) throw DomainError("cauchy_scan: grid must be >= 2");
  GeneratorScanReport r;
  r.generator = f.name;
  r.mode = ScanMode::Cauchy;
  r.tol = tol;
  r.grid = Json{{"per_axis", grid}};
  const double step = 1.0 / static_cast<double>(grid - 1);
  double bu = 0.0;
  double bv = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; i + j < grid; ++j) {
      const double u = static_cast<double>(i) * step;
      const double v = static_cast<double>(j) * step;
      const double res = cauchy_additivity_residual(f, u, v);
      ++pairs;
      if (std::abs(res) > r.max_abs_residual) {
        r.max_abs_residual = std::abs(res);
        r.residual_at_argmax = res;
        bu = u;
        bv = v;
      }
    }
  }
  r.argmax = Json{{"u", bu}, {"v", bv}};
  r.details = Json{{"pairs", pairs}};
  r.pass = r.max_abs_residual <= tol;
  if (!r.pass)
    r.witness = Witness{WitnessKind::Cauchy, Json{{"u", bu}, {"v", bv}}, f(bu + bv), f(bu) + f(bv),
                        "f(u + v) == f(u) + f(v)"};
  return r;
}

// f(k s) + f((1 - k) s) - f(s) for k = i / (grid - 1), s = (j + 1) / grid.
inline GeneratorScanReport markov_scan(const EscortGenerator& f, std::size_t grid = 64, double tol = 1e-9) {
  if (grid < 2) throw DomainError("markov_scan: grid must be >= 2");
  GeneratorScanReport r;
  r.generator = f.name;
  r.mode = ScanMode::Markov;
  r.tol = tol;
  r.grid = Json{{"k_nodes", grid}, {"s_nodes", grid}};
  double bk = 0.0;
  double bs = 1.0;
  for (std::size_t i = 0; i < grid; ++i) {
    for (std::size_t j = 0; j < grid; ++j) {
      const double k = static_cast<double>(i) / static_cast<double>(grid - 1);
      const double s = static_cast<double>(j + 1) / static_cast<double>(grid);
      const double res = markov_invariance_residual(f, k, s);
      if (std::abs(res) > r.max_abs_residual) {
        r.max_abs_residual = std::abs(res);
        r.residual_at_argmax = res;
        bk = k;
        bs = s;
      }
    }
  }
  r.argmax = Json{{"k", bk}, {"s", bs}};
  r.pass = r.max_abs_residual <= tol;
  if (!r.pass)
    r.witness = Witness{WitnessKind::Markov, Json{{"k", bk}, {"s", bs}}, f(bk * bs) + f((1.0 - bk) * bs),
                        f(bs), "f(k s) + f((1 - k) s) == f(s)"};
  return r;
}

struct LinearFit {
  double c = 0.0;
  double max_dev = 0.0;
  double argmax_t = 0.0;
  bool pass = false;
};

// Least-squares slope through the origin on t = j / (grid - 1); pass iff
// max_t |f(t) - c t| <= tol.
inline LinearFit linear_fit_conclusion(const EscortGenerator& f, std::size_t grid = 64, double tol = 1e-6) {
  if (grid < 8) throw DomainError("linear_fit_conclusion: grid must have >= 8 nodes");
  double tf = 0.0;
  double tt = 0.0;
  Vec ts(grid);
  Vec fs(grid);
  for (std::size_t j = 0; j < grid; ++j) {
    ts[j] = static_cast<double>(j) / static_cast<double>(grid - 1);
    fs[j] = f(ts[j]);
    tf += ts[j] * fs[j];
    tt += ts[j] * ts[j];
  }
  LinearFit out;
  out.c = tf / tt;
  for (std::size_t j = 0; j < grid; ++j) {
    const double dev = std::abs(fs[j] - out.c * ts[j]);
    if (dev > out.max_dev) {
      out.max_dev = dev;
      out.argmax_t = ts[j];
    }
  }
  out.pass = out.max_dev <= tol;
  return out;
}

inline GeneratorScanReport linear_fit_scan(const EscortGenerator& f, std::size_t grid = 64, double tol = 1e-6) {
  const LinearFit fit = linear_fit_conclusion(f, grid, tol);
  GeneratorScanReport r;
  r.generator = f.name;
  r.mode = ScanMode::LinearFit;
  r.tol = tol;
  r.grid = Json{{"nodes", grid}};
  r.max_abs_residual = fit.max_dev;
  r.residual_at_argmax = f(fit.argmax_t) - fit.c * fit.argmax_t;
  r.argmax = Json{{"t", fit.argmax_t}};
  r.fitted_c = fit.c;
  r.pass = fit.pass;
  return r;
}

inline std::pair<double, double> replay(const Witness& w, const EscortGenerator& f) {
  switch (w.kind) {
    case WitnessKind::Normalization: {
      const Vec u = vec_from_json(w.location.at("u"));
      return {normalization_residual(f, u) + 1.0, 1.0};
    }
    case WitnessKind::Cauchy: {
      const double u = w.location.at("u").get<double>();
      const double v = w.location.at("v").get<double>();
      return {f(u + v), f(u) + f(v)};
    }
    case WitnessKind::Markov: {
      const double k = w.location.at("k").get<double>();
      const double s = w.location.at("s").get<double>();
      return {f(k * s) + f((1.0 - k) * s), f(s)};
    }
    default: break;
  }
  throw DomainError("replay: witness kind " + to_string(w.kind) + " is not a generator witness");
}

// ---------------------------------------------------------------------------
// Escort-class collapse

struct EscortRigidityResult {
  RigidityVerdict verdict;
  LinearFit fit;
  double readout_born_gap = 0.0;  // max |escort_readout - born_readout|_inf on samples
};

// Runs the readout engine on escort_readout(f). When every premise holds the
// generator must also be linear and the readout must coincide with Born;
// otherwise the verdict is downgraded to INCONCLUSIVE.
inline EscortRigidityResult escort_rigidity_test(const EscortGenerator& f, std::size_t d,
                                                 const CurveSuite& suite, std::span<const Ray> samples,
                                                 const Tolerances& tol = {}, const H1Params& h1 = {},
                                                 std::size_t fit_grid = 64) {
  EscortRigidityResult out;
  const Readout p = readouts::escort(f, d);
  out.verdict = readout_rigidity_check(p, suite, samples, tol, h1);
  out.fit = linear_fit_conclusion(f, fit_grid, std::max(tol.eq, 1e-6));
  for (const Ray& psi : samples)
    out.readout_born_gap =
        std::max(out.readout_born_gap, detail::linf_dist(p(psi).coords(), born_readout(psi).coords()));
  if (out.verdict.conclusion == Conclusion::BornConfirmed &&
      (!out.fit.pass || out.readout_born_gap > tol.eq))
    out.verdict.conclusion = Conclusion::Inconclusive;
  return out;
}

}  // namespace pvmrigid
