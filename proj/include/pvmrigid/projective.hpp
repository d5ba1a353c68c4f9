#pragma once

// Pure-state space CP^{d-1}: gauge-fixed rays, Fubini-Study distance and
// geodesics, curve speed and quantum Fisher information F_Q = 4 g_FS.

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>

#include "pvmrigid/common.hpp"
#include "pvmrigid/rng.hpp"

namespace pvmrigid {

// Unit vector in C^d with the largest-modulus amplitude (lowest index on
// ties) real and nonnegative. One canonical representative per ray.
class Ray {
 public:
  static Ray normalized(CVec amps) {
    if (amps.size() < 2) throw DomainError("Ray: dimension must be >= 2");
    double n2 = 0.0;
    for (const Complex& z : amps) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DomainError("Ray: non-finite amplitude");
      n2 += std::norm(z);
    }
    if (!(n2 > 0.0)) throw DomainError("Ray: zero vector");
    const double inv = 1.0 / std::sqrt(n2);
    for (Complex& z : amps) z *= inv;

    std::size_t k = 0;
    double best = std::abs(amps[0]);
    for (std::size_t i = 1; i < amps.size(); ++i) {
      const double m = std::abs(amps[i]);
      if (m > best) {
        best = m;
        k = i;
      }
    }
    const Complex phase = std::conj(amps[k]) / best;
    for (Complex& z : amps) z *= phase;
    amps[k] = Complex(best, 0.0);
    return Ray(std::move(amps));
  }

  static Ray basis(std::size_t d, std::size_t i) {
    if (d < 2) throw DomainError("Ray: dimension must be >= 2");
    CVec a(d, Complex(0.0, 0.0));
    a.at(i) = Complex(1.0, 0.0);
    return Ray(std::move(a));
  }

  std::size_t dim() const { return a_.size(); }
  const Complex& operator[](std::size_t i) const { return a_[i]; }
  std::span<const Complex> amps() const { return a_; }

  // (|<e_i|psi>|)_i
  Vec moduli() const {
    Vec m(a_.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = std::abs(a_[i]);
    return m;
  }

  friend bool operator==(const Ray&, const Ray&) = default;

 private:
  explicit Ray(CVec a) : a_(std::move(a)) {}
  CVec a_;
};

inline Complex overlap(const Ray& psi, const Ray& phi) {
  require_same_dim(psi.dim(), phi.dim());
  Complex s(0.0, 0.0);
  for (std::size_t i = 0; i < psi.dim(); ++i) s += std::conj(psi[i]) * phi[i];
  return s;
}

namespace detail {

// phi multiplied by the phase that makes <psi|phi'> real and >= 0.
inline CVec phase_aligned(const Ray& psi, const Ray& phi) {
  const Complex o = overlap(psi, phi);
  const double m = std::abs(o);
  CVec out(phi.amps().begin(), phi.amps().end());
  if (m > 0.0) {
    const Complex ph = std::conj(o) / m;
    for (Complex& z : out) z *= ph;
  }
  return out;
}

}  // namespace detail

// arccos(|<psi|phi>|), computed through the half-chord between psi and the
// phase-aligned phi for accuracy at small separations. Range [0, pi/2].
inline double fs_distance(const Ray& psi, const Ray& phi) {
  require_same_dim(psi.dim(), phi.dim());
  if (std::abs(overlap(psi, phi)) == 0.0) return kPi / 2.0;
  const CVec aligned = detail::phase_aligned(psi, phi);
  double c2 = 0.0;
  for (std::size_t i = 0; i < aligned.size(); ++i) c2 += std::norm(aligned[i] - psi[i]);
  return detail::angle_from_chord(std::sqrt(c2));
}

// Minimising geodesic from psi (t = 0) to phi (t = 1), parametrised
// proportionally to arc length. At the cut locus (theta = pi/2) the
// phase-alignment convention selects one of the minimisers.
inline Ray fs_geodesic(const Ray& psi, const Ray& phi, double t) {
  require_same_dim(psi.dim(), phi.dim());
  if (t < 0.0 || t > 1.0) throw DomainError("fs_geodesic: t outside [0,1]");
  const double theta = fs_distance(psi, phi);
  if (t == 0.0 || theta == 0.0) return psi;
  if (t == 1.0) return phi;
  const CVec aligned = detail::phase_aligned(psi, phi);
  const double a = std::sin((1.0 - t) * theta);
  const double b = std::sin(t * theta);
  CVec g(psi.dim());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = a * psi[i] + b * aligned[i];
  return Ray::normalized(std::move(g));
}

// ---------------------------------------------------------------------------
// Curves

enum class CurveKind { Geodesic, GreatCircle, Custom };

inline std::string to_string(CurveKind k) {
  switch (k) {
    case CurveKind::Geodesic: return "geodesic";
    case CurveKind::GreatCircle: return "great-circle";
    case CurveKind::Custom: return "custom";
  }
  return "custom";
}

// Enough to rebuild a curve for witness replay. Custom curves are not
// rebuildable from their descriptor.
struct CurveDescriptor {
  CurveKind kind = CurveKind::Custom;
  std::optional<Ray> first;   // geodesic start / great-circle base
  std::optional<Ray> second;  // geodesic end / great-circle direction
};

struct PureCurve {
  std::function<Ray(double)> eval;
  double a = 0.0;
  double b = 1.0;
  std::string label;
  CurveDescriptor descriptor;

  Ray operator()(double s) const { return eval(s); }

  // n equally spaced nodes including both endpoints.
  double node(std::size_t k, std::size_t n) const {
    if (k + 1 == n) return b;
    return a + (b - a) * static_cast<double>(k) / static_cast<double>(n - 1);
  }
};

inline PureCurve geodesic_curve(const Ray& psi, const Ray& phi, std::string label = "geodesic") {
  PureCurve c;
  c.eval = [psi, phi](double t) { return fs_geodesic(psi, phi, t); };
  c.a = 0.0;
  c.b = 1.0;
  c.label = std::move(label);
  c.descriptor = {CurveKind::Geodesic, psi, phi};
  return c;
}

// s -> cos(s) base + sin(s) chi, chi the unit component of `direction`
// orthogonal to base. Unit Fubini-Study speed.
inline PureCurve great_circle(const Ray& base, const Ray& direction, double a = 0.0,
                              double b = kPi, std::string label = "great-circle") {
  require_same_dim(base.dim(), direction.dim());
  const Complex o = overlap(base, direction);
  CVec chi(base.dim());
  double n2 = 0.0;
  for (std::size_t i = 0; i < chi.size(); ++i) {
    chi[i] = direction[i] - o * base[i];
    n2 += std::norm(chi[i]);
  }
  if (!(n2 > 1e-24)) throw DomainError("great_circle: direction parallel to base");
  const double inv = 1.0 / std::sqrt(n2);
  for (Complex& z : chi) z *= inv;

  PureCurve c;
  c.eval = [base, chi](double s) {
    const double cs = std::cos(s);
    const double sn = std::sin(s);
    CVec g(base.dim());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = cs * base[i] + sn * chi[i];
    return Ray::normalized(std::move(g));
  };
  c.a = a;
  c.b = b;
  c.label = std::move(label);
  c.descriptor = {CurveKind::GreatCircle, base, direction};
  return c;
}

inline PureCurve curve_from_descriptor(const CurveDescriptor& desc, double a, double b,
                                       std::string label) {
  if (!desc.first || !desc.second) throw DomainError("curve_from_descriptor: incomplete descriptor");
  switch (desc.kind) {
    case CurveKind::Geodesic: return geodesic_curve(*desc.first, *desc.second, std::move(label));
    case CurveKind::GreatCircle:
      return great_circle(*desc.first, *desc.second, a, b, std::move(label));
    case CurveKind::Custom: break;
  }
  throw DomainError("curve_from_descriptor: custom curves cannot be rebuilt");
}

// Central-difference Fubini-Study speed fs(curve(s+h), curve(s-h)) / 2h.
inline double fs_speed(const PureCurve& curve, double s, double h = kDefaultStep) {
  if (!(h > 0.0)) throw DomainError("fs_speed: step must be positive");
  if (s - h < curve.a || s + h > curve.b) throw DomainError("fs_speed: stencil outside curve domain");
  return fs_distance(curve(s + h), curve(s - h)) / (2.0 * h);
}

// F_Q = 4 g_FS(dpsi/ds, dpsi/ds).
inline double quantum_fisher(const PureCurve& curve, double s, double h = kDefaultStep) {
  const double v = fs_speed(curve, s, h);
  return 4.0 * v * v;
}

// ---------------------------------------------------------------------------
// Sampling

// Unitarily invariant random ray: 2d standard normals -> d complex
// amplitudes -> normalise -> gauge fix. Deterministic in (seed, index).
inline Ray haar_random_ray(RngSeed seed, std::uint64_t index, std::size_t d) {
  if (d < 2) throw DomainError("haar_random_ray: dimension must be >= 2");
  auto gen = make_stream(seed, index);
  std::normal_distribution<double> normal(0.0, 1.0);
  CVec a(d);
  for (Complex& z : a) {
    const double re = normal(gen);
    const double im = normal(gen);
    z = Complex(re, im);
  }
  return Ray::normalized(std::move(a));
}

inline std::vector<Ray> haar_sample(RngSeed seed, std::size_t n, std::size_t d) {
  std::vector<Ray> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(haar_random_ray(seed, i, d));
  return out;
}

}  // namespace pvmrigid
