#pragma once

// Shared vocabulary for the pvmrigid library: vector aliases, error types,
// tolerance defaults and a few small dense-vector helpers.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace pvmrigid {

using Vec = std::vector<double>;
using Complex = std::complex<double>;
using CVec = std::vector<Complex>;

inline constexpr double kPi = std::numbers::pi;

// Invariant tolerance used when validating points built from arithmetic.
inline constexpr double kInvariantTol = 1e-12;

// Absolute floor below which F_Q marks a stationary node.
inline constexpr double kStationaryFloor = 1e-10;

// Default central-difference step.
inline constexpr double kDefaultStep = 1e-5;

// Raised when an argument lies outside the domain of an operation
// (boundary point passed to an interior-only metric, parameter outside a
// curve's interval, degenerate normaliser, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(std::size_t a, std::size_t b)
      : std::invalid_argument("dimension mismatch: " + std::to_string(a) +
                              " vs " + std::to_string(b)) {}
};

// Unparseable readout / generator / map specification.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Tolerances {
  double eq = 1e-9;    // equality checks
  double ineq = 1e-7;  // inequality slack
};

inline void require_same_dim(std::size_t a, std::size_t b) {
  if (a != b) throw DimensionMismatch(a, b);
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

inline double linf_dist(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// Angle between two unit vectors whose chord has length `chord`.
// Equals arccos(dot) but keeps full relative accuracy for small angles.
inline double angle_from_chord(double chord) {
  return 2.0 * std::asin(std::min(1.0, 0.5 * chord));
}

struct GoldenResult {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section search for a maximiser of f on [lo, hi]. Deterministic and
// derivative-free; `iters` bounds the number of bracket contractions.
template <class F>
GoldenResult golden_max(F&& f, double lo, double hi, int iters = 40) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? GoldenResult{c, fc} : GoldenResult{d, fd};
}

}  // namespace detail
}  // namespace pvmrigid
