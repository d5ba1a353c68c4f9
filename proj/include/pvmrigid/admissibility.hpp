#pragma once

// Sampled verification of the three readout hypotheses:
//
//   (H1) R = sqrt(P) continuous / absolutely continuous along curves
//        -> dyadic chord refinement along every curve of a suite
//   (H2) F_cl(P along curve) <= F_Q(curve)
//        -> central differences at the interior nodes of every curve
//   (H3) P(e_i) = delta_i
//        -> direct evaluation on the basis rays
//
// F_cl always uses the square-root velocity form 4 |dR/ds|^2, which stays
// finite where some probability vanishes.
//
// Universal quantifiers are replaced by finite suites, so a PASS here is a
// sampled statement, never a proof.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pvmrigid/common.hpp"
#include "pvmrigid/projective.hpp"
#include "pvmrigid/readout.hpp"
#include "pvmrigid/rng.hpp"
#include "pvmrigid/simplex.hpp"
#include "pvmrigid/witness.hpp"

namespace pvmrigid {

struct CurveSuite {
  std::vector<PureCurve> curves;
  std::size_t nodes = 64;
  std::string provenance;

  bool empty() const { return curves.empty(); }
  std::size_t size() const { return curves.size(); }
};

struct SuiteOptions {
  std::size_t geodesic_pairs = 100;
  std::size_t great_circles = 20;
  bool vertex_geodesics = true;  // one Haar state -> e_i geodesic per vertex
  bool basis_circles = true;     // cos(s) e_i + sin(s) e_j, s in [0, pi/2]
  std::size_t nodes = 64;
};

inline PureCurve basis_great_circle(std::size_t d, std::size_t i, std::size_t j) {
  return great_circle(Ray::basis(d, i), Ray::basis(d, j), 0.0, kPi / 2.0,
                      "basis-circle(" + std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
}

// Geodesics between independent Haar pairs.
inline std::vector<PureCurve> haar_geodesics(std::size_t d, RngSeed seed, std::size_t n) {
  const RngSeed s = split(seed, 1);
  std::vector<PureCurve> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    out.push_back(geodesic_curve(haar_random_ray(s, 2 * k, d), haar_random_ray(s, 2 * k + 1, d),
                                 "haar-geodesic#" + std::to_string(k)));
  return out;
}

// Geodesics from Haar states to the basis rays, cycling through the vertices.
inline std::vector<PureCurve> vertex_geodesics(std::size_t d, RngSeed seed, std::size_t n) {
  const RngSeed s = split(seed, 2);
  std::vector<PureCurve> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = k % d;
    out.push_back(geodesic_curve(haar_random_ray(s, k, d), Ray::basis(d, i),
                                 "vertex-geodesic(" + std::to_string(i + 1) + ")#" + std::to_string(k)));
  }
  return out;
}

inline std::vector<PureCurve> haar_great_circles(std::size_t d, RngSeed seed, std::size_t n) {
  const RngSeed s = split(seed, 3);
  std::vector<PureCurve> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k)
    out.push_back(great_circle(haar_random_ray(s, 2 * k, d), haar_random_ray(s, 2 * k + 1, d), 0.0,
                               kPi, "haar-circle#" + std::to_string(k)));
  return out;
}

inline CurveSuite default_suite(std::size_t d, RngSeed seed, const SuiteOptions& opt = {}) {
  CurveSuite suite;
  suite.nodes = opt.nodes;
  auto append = [&](std::vector<PureCurve> cs) {
    for (auto& c : cs) suite.curves.push_back(std::move(c));
  };
  append(haar_geodesics(d, seed, opt.geodesic_pairs));
  if (opt.vertex_geodesics) append(vertex_geodesics(d, seed, d));
  append(haar_great_circles(d, seed, opt.great_circles));
  if (opt.basis_circles)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = i + 1; j < d; ++j) suite.curves.push_back(basis_great_circle(d, i, j));
  suite.provenance = std::to_string(opt.geodesic_pairs) + " geodesic-pair + " +
                     (opt.vertex_geodesics ? std::to_string(d) : "0") + " geodesic-to-vertex + " +
                     std::to_string(opt.great_circles) + " great-circle + " +
                     (opt.basis_circles ? std::to_string(d * (d - 1) / 2) : "0") + " basis-circle";
  return suite;
}

// ---------------------------------------------------------------------------
// Classical Fisher information along a curve

// F_cl = 4 |(R(s+h) - R(s-h)) / 2h|^2, R = sqrt_readout(P, .).
inline double classical_fisher_along(const Readout& p, const PureCurve& curve, double s,
                                     double h = kDefaultStep) {
  if (!(h > 0.0)) throw DomainError("classical_fisher_along: step must be positive");
  if (s - h < curve.a || s + h > curve.b)
    throw DomainError("classical_fisher_along: stencil outside curve domain");
  const OrthantPoint rp = sqrt_readout(p, curve(s + h));
  const OrthantPoint rm = sqrt_readout(p, curve(s - h));
  const double v = detail::dist(rp.coords(), rm.coords()) / (2.0 * h);
  return 4.0 * v * v;
}

// ---------------------------------------------------------------------------
// (H3)

struct H3Result {
  bool pass = true;
  Vec residuals;  // per vertex, L-infinity
  std::size_t worst_vertex = 0;
  double max_residual = 0.0;
  std::optional<Witness> witness;
};

inline double h3_residual(const Readout& p, std::size_t i) {
  const SimplexPoint image = p(Ray::basis(p.dim, i));
  return detail::linf_dist(image.coords(), SimplexPoint::vertex(p.dim, i).coords());
}

inline H3Result check_H3(const Readout& p, double tol) {
  H3Result r;
  r.residuals.resize(p.dim);
  for (std::size_t i = 0; i < p.dim; ++i) {
    r.residuals[i] = h3_residual(p, i);
    if (r.residuals[i] > r.max_residual) {
      r.max_residual = r.residuals[i];
      r.worst_vertex = i;
    }
  }
  r.pass = r.max_residual <= tol;
  if (!r.pass) {
    const SimplexPoint image = p(Ray::basis(p.dim, r.worst_vertex));
    r.witness = Witness{WitnessKind::H3,
                        Json{{"vertex", r.worst_vertex + 1}, {"image", to_json(image.coords())}},
                        r.max_residual, tol, "|P(e_i) - delta_i|_inf <= tol"};
  }
  return r;
}

// ---------------------------------------------------------------------------
// (H2)

struct H2Result {
  bool pass = true;
  double max_ratio = 0.0;
  std::size_t argmax_curve = 0;
  double argmax_s = 0.0;
  std::size_t nodes_checked = 0;
  std::size_t nodes_skipped = 0;   // stationary: F_Q below the floor
  std::size_t boundary_nodes = 0;  // R touches the orthant boundary
  std::optional<Witness> witness;
};

namespace detail {

struct FisherPair {
  double f_cl = 0.0;
  double f_q = 0.0;
  double ratio() const { return f_q >= kStationaryFloor ? f_cl / (f_q + 1e-300) : 0.0; }
};

inline FisherPair fisher_pair(const Readout& p, const PureCurve& c, double s, double h) {
  return {classical_fisher_along(p, c, s, h), quantum_fisher(c, s, h)};
}

}  // namespace detail

// PASS iff F_cl <= F_Q (1 + tol) + tol at every non-stationary interior node.
// The reported maximum is refined by golden-section search between the
// neighbouring nodes when the bound fails.
inline H2Result check_H2(const Readout& p, const CurveSuite& suite, double tol,
                         double h = kDefaultStep) {
  if (suite.empty()) throw DomainError("check_H2: empty curve suite");
  H2Result r;
  bool have_violation = false;
  double worst_violation_ratio = -1.0;
  std::size_t viol_curve = 0;
  std::size_t viol_node = 0;

  const std::size_t n = std::max<std::size_t>(suite.nodes, 3);
  for (std::size_t ci = 0; ci < suite.curves.size(); ++ci) {
    const PureCurve& c = suite.curves[ci];
    for (std::size_t k = 1; k + 1 < n; ++k) {
      const double s = c.node(k, n);
      const auto fp = detail::fisher_pair(p, c, s, h);
      if (fp.f_q < kStationaryFloor) {
        ++r.nodes_skipped;
        continue;
      }
      ++r.nodes_checked;
      if (!sqrt_readout(p, c(s)).is_interior()) ++r.boundary_nodes;
      const double ratio = fp.ratio();
      if (ratio > r.max_ratio) {
        r.max_ratio = ratio;
        r.argmax_curve = ci;
        r.argmax_s = s;
      }
      if (fp.f_cl > fp.f_q * (1.0 + tol) + tol && ratio > worst_violation_ratio) {
        have_violation = true;
        worst_violation_ratio = ratio;
        viol_curve = ci;
        viol_node = k;
      }
    }
  }

  if (have_violation) {
    r.pass = false;
    const PureCurve& c = suite.curves[viol_curve];
    const double lo = std::max(c.node(viol_node - 1, n), c.a + h);
    const double hi = std::min(c.node(viol_node + 1, n), c.b - h);
    double s_star = c.node(viol_node, n);
    auto fp = detail::fisher_pair(p, c, s_star, h);
    const auto refined =
        detail::golden_max([&](double s) { return detail::fisher_pair(p, c, s, h).ratio(); }, lo, hi);
    if (refined.value > fp.ratio()) {
      const auto rp = detail::fisher_pair(p, c, refined.x, h);
      if (rp.f_cl > rp.f_q * (1.0 + tol) + tol) {
        s_star = refined.x;
        fp = rp;
      }
    }
    if (fp.ratio() >= r.max_ratio) {
      r.max_ratio = fp.ratio();
      r.argmax_curve = viol_curve;
      r.argmax_s = s_star;
    }
    Json loc = curve_location(c, viol_curve);
    loc["s"] = s_star;
    loc["h"] = h;
    r.witness = Witness{WitnessKind::H2, std::move(loc), fp.f_cl, fp.f_q, "F_cl <= F_Q (1 + tol) + tol"};
  }
  return r;
}

// ---------------------------------------------------------------------------
// (H1)

struct H1Params {
  std::vector<std::size_t> levels{64, 128, 256};  // segments per curve
  // |L_2n - L_n| <= cauchy_tol * max(1, L_2n). Loose on purpose: near a
  // vanishing amplitude the Born path has a tight corner and inscribed
  // lengths converge only like O(h) there.
  double cauchy_tol = 0.1;
  double shrink_factor = 1.5;  // max chord must shrink at least this much
  double chord_floor = 1e-12;  // chords below this count as zero
};

inline Json to_json(const H1Params& p) {
  return Json{{"levels", p.levels},
              {"cauchy_tol", p.cauchy_tol},
              {"shrink_factor", p.shrink_factor},
              {"chord_floor", p.chord_floor}};
}

struct H1Result {
  bool pass = true;
  double worst_gap = 0.0;  // largest adjacent round chord at the finest level
  std::size_t worst_curve = 0;
  std::optional<Witness> witness;
  H1Params params;
};

namespace detail {

struct ChordProfile {
  double total = 0.0;
  double max_chord = 0.0;
  std::size_t max_segment = 0;
};

inline ChordProfile chord_profile(const Readout& p, const PureCurve& c, std::size_t segments) {
  ChordProfile prof;
  OrthantPoint prev = sqrt_readout(p, c(c.a));
  for (std::size_t k = 1; k <= segments; ++k) {
    OrthantPoint cur = sqrt_readout(p, c(c.node(k, segments + 1)));
    const double chord = round_distance(prev, cur);
    prof.total += chord;
    if (chord > prof.max_chord) {
      prof.max_chord = chord;
      prof.max_segment = k - 1;
    }
    prev = std::move(cur);
  }
  return prof;
}

}  // namespace detail

inline H1Result check_H1(const Readout& p, const CurveSuite& suite, const H1Params& params = {}) {
  if (suite.empty()) throw DomainError("check_H1: empty curve suite");
  if (params.levels.size() < 2) throw DomainError("check_H1: need at least two refinement levels");
  H1Result r;
  r.params = params;

  for (std::size_t ci = 0; ci < suite.curves.size(); ++ci) {
    const PureCurve& c = suite.curves[ci];
    std::vector<detail::ChordProfile> profs;
    for (std::size_t n : params.levels) profs.push_back(detail::chord_profile(p, c, n));

    const auto& finest = profs.back();
    if (finest.max_chord > r.worst_gap) {
      r.worst_gap = finest.max_chord;
      r.worst_curve = ci;
    }
    if (!r.pass) continue;

    for (std::size_t l = 1; l < profs.size(); ++l) {
      const auto& coarse = profs[l - 1];
      const auto& fine = profs[l];
      const double dl = std::abs(fine.total - coarse.total);
      const double allowed_dl = params.cauchy_tol * std::max(1.0, fine.total);
      const bool shrinks = coarse.max_chord < params.chord_floor ||
                           fine.max_chord < params.chord_floor ||
                           fine.max_chord * params.shrink_factor <= coarse.max_chord;
      if (!shrinks) {
        const std::size_t segs = params.levels[l];
        Json loc = curve_location(c, ci);
        loc["criterion"] = "shrink";
        loc["segments"] = segs;
        loc["t0"] = c.node(fine.max_segment, segs + 1);
        loc["t1"] = c.node(fine.max_segment + 1, segs + 1);
        r.pass = false;
        r.witness = Witness{WitnessKind::H1, std::move(loc), fine.max_chord,
                            coarse.max_chord / params.shrink_factor,
                            "max chord at 2n <= max chord at n / shrink_factor"};
        break;
      }
      if (dl > allowed_dl) {
        Json loc = curve_location(c, ci);
        loc["criterion"] = "cauchy";
        loc["segments_coarse"] = params.levels[l - 1];
        loc["segments_fine"] = params.levels[l];
        r.pass = false;
        r.witness = Witness{WitnessKind::H1, std::move(loc), dl, allowed_dl,
                            "|L_2n - L_n| <= cauchy_tol * max(1, L_2n)"};
        break;
      }
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Born deviation

struct BornDeviation {
  double max = 0.0;
  std::optional<Ray> argmax;
  std::size_t coordinate = 0;
};

// max over samples and i of | R(psi)_i - |<e_i|psi>| |
inline BornDeviation born_deviation(const Readout& p, std::span<const Ray> samples) {
  if (samples.empty()) throw DomainError("born_deviation: empty sample set");
  BornDeviation out;
  for (const Ray& psi : samples) {
    const OrthantPoint r = sqrt_readout(p, psi);
    for (std::size_t i = 0; i < r.dim(); ++i) {
      const double dev = std::abs(r[i] - std::abs(psi[i]));
      if (dev > out.max || !out.argmax) {
        out.max = dev;
        out.argmax = psi;
        out.coordinate = i;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Combined report

struct AdmissibilityReport {
  std::string readout;
  Json readout_params;
  H1Result h1;
  H2Result h2;
  H3Result h3;
  BornDeviation born_dev;
  Tolerances tol;
  std::string suite_provenance;
  std::size_t curves = 0;
  std::size_t nodes = 0;
  std::size_t samples = 0;

  bool all_pass() const { return h1.pass && h2.pass && h3.pass; }
};

inline AdmissibilityReport check_admissibility(const Readout& p, const CurveSuite& suite,
                                               std::span<const Ray> samples,
                                               const Tolerances& tol = {},
                                               const H1Params& h1 = {}) {
  AdmissibilityReport r;
  r.readout = p.name;
  r.readout_params = p.params;
  r.h1 = check_H1(p, suite, h1);
  r.h2 = check_H2(p, suite, tol.ineq);
  r.h3 = check_H3(p, tol.eq);
  r.born_dev = born_deviation(p, samples);
  r.tol = tol;
  r.suite_provenance = suite.provenance;
  r.curves = suite.size();
  r.nodes = suite.nodes;
  r.samples = samples.size();
  return r;
}

inline const char* verdict_string(bool pass) { return pass ? "PASS" : "FAIL"; }

inline Json to_json(const H1Result& r) {
  return Json{{"check", "H1"},
              {"status", verdict_string(r.pass)},
              {"worst_gap", r.worst_gap},
              {"worst_curve", r.worst_curve},
              {"params", to_json(r.params)},
              {"witness", to_json(r.witness)}};
}

inline Json to_json(const H2Result& r) {
  return Json{{"check", "H2"},
              {"status", verdict_string(r.pass)},
              {"max_ratio", r.max_ratio},
              {"argmax", Json{{"curve_id", r.argmax_curve}, {"s", r.argmax_s}}},
              {"nodes_checked", r.nodes_checked},
              {"nodes_skipped_stationary", r.nodes_skipped},
              {"boundary_nodes", r.boundary_nodes},
              {"witness", to_json(r.witness)}};
}

inline Json to_json(const H3Result& r) {
  return Json{{"check", "H3"},
              {"status", verdict_string(r.pass)},
              {"max_residual", r.max_residual},
              {"worst_vertex", r.worst_vertex + 1},
              {"per_vertex_residual", r.residuals},
              {"witness", to_json(r.witness)}};
}

inline Json to_json(const BornDeviation& b) {
  return Json{{"check", "born_deviation"},
              {"max", b.max},
              {"coordinate", b.coordinate + 1},
              {"argmax", b.argmax ? to_json(*b.argmax) : Json(nullptr)}};
}

inline Json to_json(const AdmissibilityReport& r) {
  return Json{{"readout", r.readout},
              {"readout_params", r.readout_params},
              {"suite", Json{{"provenance", r.suite_provenance}, {"curves", r.curves}, {"nodes", r.nodes}}},
              {"samples", r.samples},
              {"tolerances", Json{{"eq", r.tol.eq}, {"ineq", r.tol.ineq}}},
              {"h1", to_json(r.h1)},
              {"h2", to_json(r.h2)},
              {"h3", to_json(r.h3)},
              {"born_deviation", to_json(r.born_dev)}};
}

// ---------------------------------------------------------------------------
// Witness replay

// Re-evaluates the two sides of an H1 / H2 / H3 witness against `p`.
inline std::pair<double, double> replay(const Witness& w, const Readout& p) {
  switch (w.kind) {
    case WitnessKind::H3: {
      const std::size_t i = w.location.at("vertex").get<std::size_t>() - 1;
      return {h3_residual(p, i), w.rhs};
    }
    case WitnessKind::H2: {
      const PureCurve c = curve_from_location(w.location);
      const double s = w.location.at("s").get<double>();
      const double h = w.location.at("h").get<double>();
      return {classical_fisher_along(p, c, s, h), quantum_fisher(c, s, h)};
    }
    case WitnessKind::H1: {
      const PureCurve c = curve_from_location(w.location);
      if (w.location.at("criterion") == "shrink") {
        const double t0 = w.location.at("t0").get<double>();
        const double t1 = w.location.at("t1").get<double>();
        return {round_distance(sqrt_readout(p, c(t0)), sqrt_readout(p, c(t1))), w.rhs};
      }
      const auto coarse = detail::chord_profile(p, c, w.location.at("segments_coarse").get<std::size_t>());
      const auto fine = detail::chord_profile(p, c, w.location.at("segments_fine").get<std::size_t>());
      return {std::abs(fine.total - coarse.total), w.rhs};
    }
    default: break;
  }
  throw DomainError("replay: witness kind " + to_string(w.kind) + " is not a readout witness");
}

}  // namespace pvmrigid
