#pragma once

// Fisher-Rao geometry on the probability simplex and its square-root chart
// onto the positive spherical orthant.
//
//   fisher_norm_sq(u, v)     = sum_i v_i^2 / u_i            (interior only)
//   sqrt_chart(u)            = (sqrt(u_1), ..., sqrt(u_d))
//   round_distance(x, y)     = arccos(<x, y>)                in [0, pi/2]
//
// Under the chart, 4 |d sqrt_chart . v|^2 = fisher_norm_sq(u, v), so Fisher
// non-expansion of a simplex self-map is round-metric 1-Lipschitz behaviour of
// its conjugate on the orthant.

#include <algorithm>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <utility>

#include "pvmrigid/common.hpp"
#include "pvmrigid/rng.hpp"

namespace pvmrigid {

class SimplexPoint {
 public:
  // Validates nonnegativity and unit sum within kInvariantTol. Negative
  // round-off within tolerance is clamped to zero.
  explicit SimplexPoint(Vec coords) : c_(std::move(coords)) {
    if (c_.empty()) throw DomainError("SimplexPoint: empty coordinate vector");
    double sum = 0.0;
    for (double& x : c_) {
      if (!std::isfinite(x) || x < -kInvariantTol)
        throw DomainError("SimplexPoint: negative or non-finite coordinate");
      if (x < 0.0) x = 0.0;
      sum += x;
    }
    if (std::abs(sum - 1.0) > kInvariantTol)
      throw DomainError("SimplexPoint: coordinates sum to " + std::to_string(sum));
  }

  static SimplexPoint vertex(std::size_t d, std::size_t i) {
    Vec c(d, 0.0);
    c.at(i) = 1.0;
    return SimplexPoint(std::move(c));
  }

  static SimplexPoint barycenter(std::size_t d) {
    return SimplexPoint(Vec(d, 1.0 / static_cast<double>(d)));
  }

  std::size_t dim() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  std::span<const double> coords() const { return c_; }
  const Vec& vec() const { return c_; }

  bool is_interior() const {
    return std::all_of(c_.begin(), c_.end(), [](double x) { return x > 0.0; });
  }

  friend bool operator==(const SimplexPoint&, const SimplexPoint&) = default;

 private:
  Vec c_;
};

class SimplexTangent {
 public:
  explicit SimplexTangent(Vec comps) : v_(std::move(comps)) {
    double sum = 0.0;
    for (double x : v_) sum += x;
    if (std::abs(sum) > kInvariantTol)
      throw DomainError("SimplexTangent: components sum to " + std::to_string(sum));
  }

  std::size_t dim() const { return v_.size(); }
  double operator[](std::size_t i) const { return v_[i]; }
  std::span<const double> comps() const { return v_; }
  const Vec& vec() const { return v_; }

 private:
  Vec v_;
};

class OrthantPoint {
 public:
  explicit OrthantPoint(Vec coords) : c_(std::move(coords)) {
    if (c_.empty()) throw DomainError("OrthantPoint: empty coordinate vector");
    double sq = 0.0;
    for (double& x : c_) {
      if (!std::isfinite(x) || x < -kInvariantTol)
        throw DomainError("OrthantPoint: negative or non-finite coordinate");
      if (x < 0.0) x = 0.0;
      sq += x * x;
    }
    if (std::abs(sq - 1.0) > kInvariantTol)
      throw DomainError("OrthantPoint: squared coordinates sum to " + std::to_string(sq));
  }

  static OrthantPoint vertex(std::size_t d, std::size_t i) {
    Vec c(d, 0.0);
    c.at(i) = 1.0;
    return OrthantPoint(std::move(c));
  }

  // Projects a nonnegative, nonzero vector onto the sphere.
  static OrthantPoint normalized(Vec raw) {
    const double n = detail::norm(raw);
    if (!(n > 0.0)) throw DomainError("OrthantPoint::normalized: zero vector");
    for (double& x : raw) x = std::max(0.0, x) / n;
    const double n2 = detail::norm(raw);
    for (double& x : raw) x /= n2;
    return OrthantPoint(std::move(raw));
  }

  std::size_t dim() const { return c_.size(); }
  double operator[](std::size_t i) const { return c_[i]; }
  std::span<const double> coords() const { return c_; }
  const Vec& vec() const { return c_; }

  bool is_interior() const {
    return std::all_of(c_.begin(), c_.end(), [](double x) { return x > 0.0; });
  }

  friend bool operator==(const OrthantPoint&, const OrthantPoint&) = default;

 private:
  Vec c_;
};

struct SimplexSelfMap {
  std::function<SimplexPoint(const SimplexPoint&)> eval;
  std::string name;
  std::size_t dim = 0;
};

struct OrthantSelfMap {
  std::function<OrthantPoint(const OrthantPoint&)> eval;
  std::string name;
  std::size_t dim = 0;
};

// ---------------------------------------------------------------------------
// Metric and chart

inline double fisher_norm_sq(const SimplexPoint& u, std::span<const double> v) {
  require_same_dim(u.dim(), v.size());
  double g = 0.0;
  for (std::size_t i = 0; i < u.dim(); ++i) {
    if (!(u[i] > 0.0)) throw DomainError("fisher_norm_sq: boundary point (u_i <= 0)");
    g += v[i] * v[i] / u[i];
  }
  return g;
}

inline double fisher_norm_sq(const SimplexPoint& u, const SimplexTangent& v) {
  return fisher_norm_sq(u, v.comps());
}

inline OrthantPoint sqrt_chart(const SimplexPoint& u) {
  Vec x(u.dim());
  std::transform(u.coords().begin(), u.coords().end(), x.begin(),
                 [](double p) { return std::sqrt(p); });
  return OrthantPoint(std::move(x));
}

inline SimplexPoint sqrt_chart_inverse(const OrthantPoint& x) {
  Vec u(x.dim());
  std::transform(x.coords().begin(), x.coords().end(), u.begin(),
                 [](double c) { return c * c; });
  return SimplexPoint(std::move(u));
}

// arccos of the clamped dot product, evaluated as 2 asin(|x - y| / 2) so that
// nearby points keep full relative accuracy. Range [0, pi/2] on the orthant.
inline double round_distance(const OrthantPoint& x, const OrthantPoint& y) {
  require_same_dim(x.dim(), y.dim());
  return detail::angle_from_chord(detail::dist(x.coords(), y.coords()));
}

// Normalised chord ((1-t) x + t y) / |(1-t) x + t y|. On the open orthant this
// is the minimising great-circle arc between x and y (x . y > 0).
inline OrthantPoint orthant_chord_geodesic(const OrthantPoint& x, const OrthantPoint& y, double t) {
  require_same_dim(x.dim(), y.dim());
  if (t < 0.0 || t > 1.0) throw DomainError("orthant_chord_geodesic: t outside [0,1]");
  if (t == 0.0) return x;
  if (t == 1.0) return y;
  Vec z(x.dim());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (1.0 - t) * x[i] + t * y[i];
  if (!(detail::norm(z) > 0.0)) throw DomainError("orthant_chord_geodesic: zero chord");
  return OrthantPoint::normalized(std::move(z));
}

// Moves a point toward the barycenter by eps: (1 - eps) u + eps / d.
// Used to approach closed-simplex points from the interior.
inline SimplexPoint retract_to_interior(const SimplexPoint& u, double eps = 1e-9) {
  const double b = 1.0 / static_cast<double>(u.dim());
  Vec r(u.dim());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (1.0 - eps) * u[i] + eps * b;
  return SimplexPoint(std::move(r));
}

inline OrthantPoint retract_to_interior(const OrthantPoint& x, double eps = 1e-9) {
  return sqrt_chart(retract_to_interior(sqrt_chart_inverse(x), eps));
}

// Psi = sqrt_chart o T o sqrt_chart_inverse.
inline OrthantSelfMap conjugate_to_orthant(SimplexSelfMap t) {
  OrthantSelfMap m;
  m.name = "sqrt-conjugate(" + t.name + ")";
  m.dim = t.dim;
  m.eval = [t = std::move(t)](const OrthantPoint& x) {
    return sqrt_chart(t.eval(sqrt_chart_inverse(x)));
  };
  return m;
}

inline SimplexSelfMap identity_simplex_map(std::size_t d) {
  return {[](const SimplexPoint& u) { return u; }, "identity", d};
}

inline OrthantSelfMap identity_orthant_map(std::size_t d) {
  return {[](const OrthantPoint& x) { return x; }, "identity", d};
}

// ---------------------------------------------------------------------------
// Fisher non-expansion by central differences

struct FisherPushforward {
  double pushed = 0.0;    // g^F_{T(u)}(dT v, dT v)
  double original = 0.0;  // g^F_u(v, v)
  double step = 0.0;      // stencil step actually used
  bool sqrt_convention = false;  // T(u) on the boundary
  double residual() const { return pushed - original; }
};

inline FisherPushforward fisher_pushforward(const SimplexSelfMap& t, const SimplexPoint& u,
                                            std::span<const double> v, double h = kDefaultStep) {
  require_same_dim(u.dim(), v.size());
  if (!u.is_interior()) throw DomainError("fisher_pushforward: u must be interior");
  if (!(h > 0.0)) throw DomainError("fisher_pushforward: step must be positive");

  const std::size_t d = u.dim();
  auto shifted = [&](double step, double sign) {
    Vec w(d);
    for (std::size_t i = 0; i < d; ++i) w[i] = u[i] + sign * step * v[i];
    return w;
  };
  auto inside = [](const Vec& w) {
    return std::all_of(w.begin(), w.end(), [](double x) { return x > 0.0; });
  };

  // Halve the step (at most 10 times) until the stencil stays interior.
  double step = h;
  int halvings = 0;
  while (!(inside(shifted(step, 1.0)) && inside(shifted(step, -1.0)))) {
    if (++halvings > 10) throw DomainError("fisher_pushforward: stencil leaves the simplex");
    step *= 0.5;
  }

  const SimplexPoint plus = t.eval(SimplexPoint(shifted(step, 1.0)));
  const SimplexPoint minus = t.eval(SimplexPoint(shifted(step, -1.0)));
  const SimplexPoint center = t.eval(u);

  FisherPushforward out;
  out.step = step;
  out.original = fisher_norm_sq(u, v);
  if (center.is_interior()) {
    Vec w(d);
    for (std::size_t i = 0; i < d; ++i) w[i] = (plus[i] - minus[i]) / (2.0 * step);
    out.pushed = fisher_norm_sq(center, w);
  } else {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double r = (std::sqrt(plus[i]) - std::sqrt(minus[i])) / (2.0 * step);
      s += r * r;
    }
    out.pushed = 4.0 * s;
    out.sqrt_convention = true;
  }
  return out;
}

// g^F_{T(u)}(dT v, dT v) - g^F_u(v, v); <= tol means non-expansion at (u, v).
inline double fisher_nonexpansion_residual(const SimplexSelfMap& t, const SimplexPoint& u,
                                           const SimplexTangent& v, double h = kDefaultStep) {
  return fisher_pushforward(t, u, v.comps(), h).residual();
}

// ---------------------------------------------------------------------------
// Sampling

// Uniform (flat Dirichlet) point of the open simplex, deterministic in
// (seed, index).
inline SimplexPoint random_interior_point(RngSeed seed, std::uint64_t index, std::size_t d) {
  auto gen = make_stream(seed, index);
  std::exponential_distribution<double> expo(1.0);
  Vec e(d);
  double sum = 0.0;
  for (double& x : e) {
    do {
      x = expo(gen);
    } while (!(x > 0.0));
    sum += x;
  }
  for (double& x : e) x /= sum;
  double resum = 0.0;
  for (double x : e) resum += x;
  for (double& x : e) x /= resum;
  return SimplexPoint(std::move(e));
}

// Gaussian direction projected to the sum-zero plane and scaled to unit
// Fisher length at u.
inline SimplexTangent random_unit_tangent(RngSeed seed, std::uint64_t index, const SimplexPoint& u) {
  auto gen = make_stream(seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t d = u.dim();
  Vec v(d);
  for (double& x : v) x = normal(gen);
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(d);
  for (double& x : v) x -= mean;
  if (!(fisher_norm_sq(u, v) > 0.0)) {
    v.assign(d, 0.0);
    v[0] = 1.0;
    v[d - 1] = -1.0;
  }
  const double scale = 1.0 / std::sqrt(fisher_norm_sq(u, v));
  for (double& x : v) x *= scale;
  // Re-centre after scaling so the sum-zero invariant holds to round-off.
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(d);
  for (double& x : v) x -= mean;
  return SimplexTangent(std::move(v));
}

inline OrthantPoint random_interior_orthant_point(RngSeed seed, std::uint64_t index, std::size_t d) {
  return sqrt_chart(random_interior_point(seed, index, d));
}

}  // namespace pvmrigid
