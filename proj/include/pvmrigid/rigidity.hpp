#pragma once

// Numerical rigidity engines.
//
// Orthant level: a round-metric 1-Lipschitz self-map of the positive
// spherical orthant that fixes the coordinate vertices satisfies
// Psi(x)_i >= x_i for every i (distance to e_i cannot grow and
// cos d(y, e_i) = y_i), and since both points are unit vectors the
// componentwise inequalities are equalities. So Psi = id.
//
// Simplex level: a Fisher non-expanding, vertex-fixing self-map of the
// simplex conjugates to such an orthant map through the square-root chart.
//
// Readout level: (H2) turns into d_round(R(psi), R(phi)) <= d_FS(psi, phi);
// with (H3) and phi = e_i that gives R(psi)_i >= |<e_i|psi>| and hence the
// Born rule.
//
// Each engine either confirms the conclusion on its samples, names the
// premise that fails with a witness, or reports INCONCLUSIVE when every
// sampled premise holds but the conclusion does not (sampling too coarse).

#include <algorithm>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pvmrigid/admissibility.hpp"
#include "pvmrigid/common.hpp"
#include "pvmrigid/projective.hpp"
#include "pvmrigid/readout.hpp"
#include "pvmrigid/rng.hpp"
#include "pvmrigid/simplex.hpp"
#include "pvmrigid/witness.hpp"

namespace pvmrigid {

enum class Conclusion { IdentityConfirmed, BornConfirmed, PremiseViolated, Inconclusive };

inline std::string to_string(Conclusion c) {
  switch (c) {
    case Conclusion::IdentityConfirmed: return "IDENTITY_CONFIRMED";
    case Conclusion::BornConfirmed: return "BORN_CONFIRMED";
    case Conclusion::PremiseViolated: return "PREMISE_VIOLATED";
    case Conclusion::Inconclusive: return "INCONCLUSIVE";
  }
  return "INCONCLUSIVE";
}

// Numerical content of the readout proof chain, evaluated on a state sample
// (always including the basis rays).
struct ChainDiagnostics {
  double max_contraction_residual = -kPi;  // max_i d_round(R(psi), e_i) - d_FS(psi, e_i)
  Json contraction_argmax;
  double max_dominance_deficit = 0.0;      // max_i |<e_i|psi>| - R(psi)_i
  double born_deviation = 0.0;
  std::size_t states = 0;
};

struct RigidityVerdict {
  Conclusion conclusion = Conclusion::Inconclusive;
  double max_identity_gap = 0.0;
  std::optional<Witness> witness;
  std::string violated_premise;
  std::size_t samples_used = 0;
  RngSeed seed;
  double max_fisher_residual = 0.0;  // simplex engine only
  std::optional<AdmissibilityReport> premises;
  std::optional<ChainDiagnostics> chain;
};

class VertexFixingError : public DomainError {
 public:
  VertexFixingError(std::size_t vertex, double residual)
      : DomainError("map does not fix vertex " + std::to_string(vertex + 1) +
                    " (residual " + std::to_string(residual) + ")"),
        vertex_(vertex),
        residual_(residual) {}

  std::size_t vertex() const { return vertex_; }
  double residual() const { return residual_; }

 private:
  std::size_t vertex_;
  double residual_;
};

// ---------------------------------------------------------------------------
// Orthant level

// (Psi(x)_i - x_i)_i. For a 1-Lipschitz vertex-fixing map every entry is
// >= -tol, and all of them must vanish; an entry < -tol means Psi pushed x
// further from e_i than it was.
inline Vec vertex_dominance_residuals(const OrthantSelfMap& psi_map, const OrthantPoint& x,
                                      double vertex_tol = 1e-9) {
  const std::size_t d = x.dim();
  for (std::size_t i = 0; i < d; ++i) {
    const OrthantPoint e = OrthantPoint::vertex(d, i);
    const double res = detail::linf_dist(psi_map.eval(e).coords(), e.coords());
    if (res > vertex_tol) throw VertexFixingError(i, res);
  }
  const OrthantPoint y = psi_map.eval(x);
  Vec r(d);
  for (std::size_t i = 0; i < d; ++i) r[i] = y[i] - x[i];
  return r;
}

// Witness for d_round(Psi(x), e_i) <= d_round(x, e_i) failing at the most
// negative dominance residual, if any is below -tol.
inline std::optional<Witness> vertex_dominance_witness(const OrthantSelfMap& psi_map,
                                                       const OrthantPoint& x, double tol = 1e-9) {
  const Vec r = vertex_dominance_residuals(psi_map, x, tol);
  const auto it = std::min_element(r.begin(), r.end());
  if (*it >= -tol) return std::nullopt;
  const std::size_t i = static_cast<std::size_t>(it - r.begin());
  const OrthantPoint e = OrthantPoint::vertex(x.dim(), i);
  return Witness{WitnessKind::VertexDominance,
                 Json{{"x", to_json(x.coords())}, {"vertex", i + 1}},
                 round_distance(psi_map.eval(x), e), round_distance(x, e),
                 "d_round(Psi(x), e_i) <= d_round(x, e_i)"};
}

struct LipschitzSearchResult {
  double max_gap = 0.0;  // max of d(Psi x, Psi y) - d(x, y) over visited pairs
  std::optional<Witness> witness;
  std::size_t points = 0;
};

namespace detail {

inline double lipschitz_gap(const OrthantSelfMap& m, const OrthantPoint& x, const OrthantPoint& y) {
  return round_distance(m.eval(x), m.eval(y)) - round_distance(x, y);
}

// Moves coordinate j of x by delta and projects back onto the orthant.
inline OrthantPoint nudge(const OrthantPoint& x, std::size_t j, double delta) {
  Vec v = x.vec();
  v[j] += delta;
  return OrthantPoint::normalized(std::move(v));
}

}  // namespace detail

// Samples n interior points plus all vertices, maximises the expansion gap
// over all pairs, and tightens the best pair by coordinate-wise golden-section
// search. Returns a witness iff the gap exceeds tol.
inline LipschitzSearchResult lipschitz_witness_search(const OrthantSelfMap& psi_map, RngSeed seed,
                                                      std::size_t n, double tol = 1e-9,
                                                      int refine_iters = 40) {
  if (n < 2) throw DomainError("lipschitz_witness_search: need n >= 2");
  const std::size_t d = psi_map.dim;
  std::vector<OrthantPoint> pts;
  pts.reserve(n + d);
  for (std::size_t k = 0; k < n; ++k) pts.push_back(random_interior_orthant_point(split(seed, 11), k, d));
  for (std::size_t i = 0; i < d; ++i) pts.push_back(OrthantPoint::vertex(d, i));
  std::vector<OrthantPoint> images;
  images.reserve(pts.size());
  for (const auto& p : pts) images.push_back(psi_map.eval(p));

  LipschitzSearchResult out;
  out.points = pts.size();
  out.max_gap = -kPi;
  std::size_t bi = 0;
  std::size_t bj = 1;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double gap = round_distance(images[i], images[j]) - round_distance(pts[i], pts[j]);
      if (gap > out.max_gap) {
        out.max_gap = gap;
        bi = i;
        bj = j;
      }
    }
  }

  OrthantPoint x = pts[bi];
  OrthantPoint y = pts[bj];
  if (out.max_gap > tol && refine_iters > 0) {
    // Only the sampled interior points move; vertices stay anchored.
    const double radius = 0.05;
    auto refine = [&](OrthantPoint& moving, const OrthantPoint& other) {
      for (std::size_t j = 0; j < d; ++j) {
        const auto best = detail::golden_max(
            [&](double delta) { return detail::lipschitz_gap(psi_map, detail::nudge(moving, j, delta), other); },
            -radius, radius, refine_iters);
        if (best.value > out.max_gap) {
          moving = detail::nudge(moving, j, best.x);
          out.max_gap = detail::lipschitz_gap(psi_map, moving, other);
        }
      }
    };
    if (bi < n) refine(x, y);
    if (bj < n) refine(y, x);
  }

  if (out.max_gap > tol) {
    out.witness = Witness{WitnessKind::Lipschitz,
                          Json{{"x", to_json(x.coords())}, {"y", to_json(y.coords())}},
                          round_distance(psi_map.eval(x), psi_map.eval(y)), round_distance(x, y),
                          "d_round(Psi x, Psi y) <= d_round(x, y)"};
  }
  return out;
}

inline std::pair<double, double> replay(const Witness& w, const OrthantSelfMap& m) {
  switch (w.kind) {
    case WitnessKind::Lipschitz: {
      const OrthantPoint x(vec_from_json(w.location.at("x")));
      const OrthantPoint y(vec_from_json(w.location.at("y")));
      return {round_distance(m.eval(x), m.eval(y)), round_distance(x, y)};
    }
    case WitnessKind::VertexDominance: {
      const OrthantPoint x(vec_from_json(w.location.at("x")));
      const OrthantPoint e = OrthantPoint::vertex(x.dim(), w.location.at("vertex").get<std::size_t>() - 1);
      return {round_distance(m.eval(x), e), round_distance(x, e)};
    }
    default: break;
  }
  throw DomainError("replay: witness kind " + to_string(w.kind) + " is not an orthant-map witness");
}

// ---------------------------------------------------------------------------
// Simplex level

namespace detail {

inline std::optional<Witness> fisher_expansion_witness(const SimplexSelfMap& t, const SimplexPoint& u,
                                                       const Vec& v, double tol, double& residual) {
  FisherPushforward fp;
  try {
    fp = fisher_pushforward(t, u, v);
  } catch (const DomainError&) {
    residual = -std::numeric_limits<double>::infinity();
    return std::nullopt;
  }
  residual = fp.residual();
  if (residual <= tol * std::max(1.0, fp.original)) return std::nullopt;
  return Witness{WitnessKind::FisherExpansion,
                 Json{{"u", to_json(u.coords())}, {"v", to_json(v)}, {"h", fp.step}},
                 fp.pushed, fp.original, "g_T(u)(dT v, dT v) <= g_u(v, v)"};
}

}  // namespace detail

// Vertex premise, sampled Fisher non-expansion, then the identity gap.
inline RigidityVerdict simplex_rigidity_check(const SimplexSelfMap& t, RngSeed seed, std::size_t n,
                                              const Tolerances& tol = {}) {
  const std::size_t d = t.dim;
  if (n < d) throw DomainError("simplex_rigidity_check: need n >= d samples");
  RigidityVerdict v;
  v.seed = seed;

  // (a) vertex fixing
  double worst_vertex_res = 0.0;
  std::size_t worst_vertex = 0;
  for (std::size_t i = 0; i < d; ++i) {
    const SimplexPoint e = SimplexPoint::vertex(d, i);
    const double res = detail::linf_dist(t.eval(e).coords(), e.coords());
    v.max_identity_gap = std::max(v.max_identity_gap, res);
    if (res > worst_vertex_res) {
      worst_vertex_res = res;
      worst_vertex = i;
    }
  }
  v.samples_used = d;

  // (b) Fisher non-expansion and (c) identity gap on n interior samples
  std::optional<Witness> fisher_witness;
  double worst_fisher = -std::numeric_limits<double>::infinity();
  double worst_gap = 0.0;
  SimplexPoint worst_gap_point = SimplexPoint::barycenter(d);

  auto probe = [&](const SimplexPoint& u, const Vec& dir) {
    double residual = 0.0;
    auto w = detail::fisher_expansion_witness(t, u, dir, tol.ineq, residual);
    if (residual > worst_fisher) {
      worst_fisher = residual;
      if (w) fisher_witness = std::move(w);
    }
  };

  for (std::size_t k = 0; k < n; ++k) {
    const SimplexPoint u = random_interior_point(split(seed, 21), k, d);
    const SimplexTangent dir = random_unit_tangent(split(seed, 22), k, u);
    probe(u, dir.vec());
    const double gap = detail::linf_dist(t.eval(u).coords(), u.coords());
    if (gap > worst_gap) {
      worst_gap = gap;
      worst_gap_point = u;
    }
  }
  v.samples_used += n;
  v.max_identity_gap = std::max(v.max_identity_gap, worst_gap);
  v.max_fisher_residual = worst_fisher;

  if (worst_vertex_res > tol.eq) {
    v.conclusion = Conclusion::PremiseViolated;
    v.violated_premise = "vertex-fixing";
    v.witness = Witness{WitnessKind::VertexFixing,
                        Json{{"vertex", worst_vertex + 1},
                             {"image", to_json(t.eval(SimplexPoint::vertex(d, worst_vertex)).coords())}},
                        worst_vertex_res, tol.eq, "|T(delta_i) - delta_i|_inf <= tol"};
    return v;
  }
  if (fisher_witness) {
    v.conclusion = Conclusion::PremiseViolated;
    v.violated_premise = "fisher-nonexpansion";
    v.witness = std::move(fisher_witness);
    return v;
  }
  if (v.max_identity_gap <= tol.eq) {
    v.conclusion = Conclusion::IdentityConfirmed;
    return v;
  }

  // Premises held on the samples yet T moved a point: look harder. Targeted
  // directions at the worst point first, then fresh random batches.
  {
    const SimplexPoint& u = worst_gap_point;
    const SimplexPoint tu = t.eval(u);
    std::vector<Vec> dirs;
    Vec toward(d);
    for (std::size_t i = 0; i < d; ++i) toward[i] = tu[i] - u[i];
    dirs.push_back(toward);
    for (std::size_t i = 0; i < d; ++i) {
      Vec e(d);
      for (std::size_t j = 0; j < d; ++j) e[j] = (i == j ? 1.0 : 0.0) - u[j];
      dirs.push_back(std::move(e));
    }
    for (auto& dir : dirs) {
      const double g = std::sqrt(fisher_norm_sq(u, dir));
      if (!(g > 0.0)) continue;
      for (double& x : dir) x /= g;
      probe(u, dir);
    }
    v.samples_used += dirs.size();
  }
  for (std::uint64_t round = 1; round <= 4 && !fisher_witness; ++round) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint64_t idx = round * n + k;
      const SimplexPoint u = random_interior_point(split(seed, 21), idx, d);
      probe(u, random_unit_tangent(split(seed, 22), idx, u).vec());
    }
    v.samples_used += n;
  }
  v.max_fisher_residual = worst_fisher;
  if (fisher_witness) {
    v.conclusion = Conclusion::PremiseViolated;
    v.violated_premise = "fisher-nonexpansion";
    v.witness = std::move(fisher_witness);
  } else {
    v.conclusion = Conclusion::Inconclusive;
  }
  return v;
}

inline std::pair<double, double> replay(const Witness& w, const SimplexSelfMap& t) {
  switch (w.kind) {
    case WitnessKind::FisherExpansion: {
      const SimplexPoint u(vec_from_json(w.location.at("u")));
      const Vec v = vec_from_json(w.location.at("v"));
      const auto fp = fisher_pushforward(t, u, v, w.location.at("h").get<double>());
      return {fp.pushed, fp.original};
    }
    case WitnessKind::VertexFixing: {
      const std::size_t i = w.location.at("vertex").get<std::size_t>() - 1;
      const SimplexPoint e = SimplexPoint::vertex(t.dim, i);
      return {detail::linf_dist(t.eval(e).coords(), e.coords()), w.rhs};
    }
    default: break;
  }
  throw DomainError("replay: witness kind " + to_string(w.kind) + " is not a simplex-map witness");
}

// ---------------------------------------------------------------------------
// Readout level

inline ChainDiagnostics readout_chain(const Readout& p, std::span<const Ray> samples) {
  ChainDiagnostics c;
  std::vector<Ray> states(samples.begin(), samples.end());
  for (std::size_t i = 0; i < p.dim; ++i) states.push_back(Ray::basis(p.dim, i));
  c.states = states.size();
  for (const Ray& psi : states) {
    const OrthantPoint r = sqrt_readout(p, psi);
    for (std::size_t i = 0; i < p.dim; ++i) {
      const double lhs = round_distance(r, OrthantPoint::vertex(p.dim, i));
      const double rhs = fs_distance(psi, Ray::basis(p.dim, i));
      if (lhs - rhs > c.max_contraction_residual) {
        c.max_contraction_residual = lhs - rhs;
        c.contraction_argmax = Json{{"state", to_json(psi)}, {"vertex", i + 1}, {"lhs", lhs}, {"rhs", rhs}};
      }
      c.max_dominance_deficit = std::max(c.max_dominance_deficit, std::abs(psi[i]) - r[i]);
      c.born_deviation = std::max(c.born_deviation, std::abs(r[i] - std::abs(psi[i])));
    }
  }
  return c;
}

// Runs (H1)-(H3); on success evaluates the contraction -> dominance ->
// equality chain on the samples.
inline RigidityVerdict readout_rigidity_check(const Readout& p, const CurveSuite& suite,
                                              std::span<const Ray> samples, const Tolerances& tol = {},
                                              const H1Params& h1 = {}, RngSeed seed = {}) {
  if (suite.empty() || samples.empty()) throw DomainError("readout_rigidity_check: empty suite or samples");
  RigidityVerdict v;
  v.seed = seed;
  v.premises = check_admissibility(p, suite, samples, tol, h1);
  v.chain = readout_chain(p, samples);
  v.samples_used = v.chain->states;
  v.max_identity_gap = v.chain->born_deviation;

  const auto& pr = *v.premises;
  if (!pr.h1.pass) {
    v.conclusion = Conclusion::PremiseViolated;
    v.violated_premise = "H1";
    v.witness = pr.h1.witness;
  } else if (!pr.h2.pass) {
    v.conclusion = Conclusion::PremiseViolated;
    v.violated_premise = "H2";
    v.witness = pr.h2.witness;
  } else if (!pr.h3.pass) {
    v.conclusion = Conclusion::PremiseViolated;
    v.violated_premise = "H3";
    v.witness = pr.h3.witness;
  } else if (v.chain->max_contraction_residual <= tol.eq && v.chain->max_dominance_deficit <= tol.eq &&
             v.chain->born_deviation <= tol.eq) {
    v.conclusion = Conclusion::BornConfirmed;
  } else {
    v.conclusion = Conclusion::Inconclusive;
  }
  return v;
}

inline Json to_json(const ChainDiagnostics& c) {
  return Json{{"states", c.states},
              {"max_contraction_residual", c.max_contraction_residual},
              {"contraction_argmax", c.contraction_argmax},
              {"max_dominance_deficit", c.max_dominance_deficit},
              {"born_deviation", c.born_deviation}};
}

inline Json to_json(const RigidityVerdict& v) {
  Json j{{"check", "rigidity"},
         {"conclusion", to_string(v.conclusion)},
         {"violated_premise", v.violated_premise},
         {"max_identity_gap", v.max_identity_gap},
         {"samples_used", v.samples_used},
         {"seed", v.seed.value},
         {"witness", to_json(v.witness)}};
  if (v.chain) j["chain"] = to_json(*v.chain);
  else j["max_fisher_residual"] = v.max_fisher_residual;
  return j;
}

}  // namespace pvmrigid
