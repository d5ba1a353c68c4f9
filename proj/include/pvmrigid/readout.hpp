#pragma once

// Catalogue of readout maps P_M : CP^{d-1} -> simplex for the fixed basis
// measurement, escort generators, and the spec-string parsers used by the
// command-line tool.
//
// Readout spec strings:
//   born | uniform | step | permuted:2,1,3 | perturbed:0.1
//   escort:power:2.0 | escort:linear:3.0 | escort:table:<csv path>
// Generator spec strings (scan-f):
//   identity | power:q | linear:c | table:<csv path>
// Simplex self-map spec strings (simplex-rigidity):
//   identity | uniform | permuted:... | perturbed:eps | escort:<generator>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pvmrigid/common.hpp"
#include "pvmrigid/projective.hpp"
#include "pvmrigid/simplex.hpp"
#include "pvmrigid/witness.hpp"

namespace pvmrigid {

// ---------------------------------------------------------------------------
// Escort generators

struct EscortGenerator {
  std::function<double(double)> f;
  std::string name;
  Json params;

  double operator()(double t) const { return f(t); }
};

namespace generators {

inline EscortGenerator power(double q) {
  if (!(q > 0.0) || !std::isfinite(q)) throw SpecError("power generator: exponent must be > 0");
  std::ostringstream nm;
  nm << "power:" << q;
  return {[q](double t) { return std::pow(t, q); }, nm.str(),
          Json{{"kind", "power"}, {"q", q}}};
}

inline EscortGenerator linear(double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw SpecError("linear generator: slope must be > 0");
  std::ostringstream nm;
  nm << "linear:" << c;
  return {[c](double t) { return c * t; }, nm.str(), Json{{"kind", "linear"}, {"c", c}}};
}

inline EscortGenerator identity() {
  return {[](double t) { return t; }, "identity", Json{{"kind", "identity"}}};
}

// Piecewise-linear generator through (t_k, f_k). Nodes must start at (0, 0),
// end at t = 1, and increase strictly in both columns. Monotonicity between
// nodes follows from the interpolation, not from any check.
inline EscortGenerator tabulated(Vec ts, Vec fs, std::string source = "inline") {
  if (ts.size() != fs.size() || ts.size() < 2)
    throw SpecError("table generator: need >= 2 rows with two columns");
  if (ts.front() != 0.0 || fs.front() != 0.0) throw SpecError("table generator: first row must be (0, 0)");
  if (ts.back() != 1.0) throw SpecError("table generator: last t must be 1");
  for (std::size_t k = 1; k < ts.size(); ++k) {
    if (!(ts[k] > ts[k - 1]) || !(fs[k] > fs[k - 1]))
      throw SpecError("table generator: columns must be strictly increasing (row " +
                      std::to_string(k + 1) + ")");
  }
  const std::size_t rows = ts.size();
  auto f = [ts = std::move(ts), fs = std::move(fs)](double t) {
    if (t <= 0.0) return fs.front();
    if (t >= 1.0) return fs.back();
    const auto it = std::upper_bound(ts.begin(), ts.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - ts.begin());
    const double w = (t - ts[k - 1]) / (ts[k] - ts[k - 1]);
    return (1.0 - w) * fs[k - 1] + w * fs[k];
  };
  return {std::move(f), "table:" + source,
          Json{{"kind", "table"}, {"source", source}, {"rows", rows}}};
}

namespace detail {

inline double parse_double(std::string_view s, std::string_view what) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty())
    throw SpecError(std::string(what) + ": cannot parse number '" + std::string(s) + "'");
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string trim(std::string s) {
  const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), ws));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), ws).base(), s.end());
  return s;
}

}  // namespace detail

// Two-column CSV (t, f(t)); a non-numeric first line is treated as a header.
inline EscortGenerator load_table_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError("table generator: cannot open '" + path + "'");
  Vec ts;
  Vec fs;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::trim(line);
    if (line.empty() || line.front() == '#') continue;
    auto cols = detail::split(line, ',');
    if (cols.size() != 2) throw SpecError(path + ":" + std::to_string(lineno) + ": expected two columns");
    try {
      ts.push_back(detail::parse_double(detail::trim(cols[0]), "table t"));
      fs.push_back(detail::parse_double(detail::trim(cols[1]), "table f"));
    } catch (const SpecError&) {
      if (ts.empty() && lineno == 1) continue;  // header
      throw;
    }
  }
  return tabulated(std::move(ts), std::move(fs), path);
}

inline EscortGenerator parse(std::string_view spec) {
  if (spec == "identity") return identity();
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw SpecError("unknown generator spec '" + std::string(spec) + "'");
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view arg = spec.substr(colon + 1);
  if (kind == "power") return power(detail::parse_double(arg, "power generator"));
  if (kind == "linear") return linear(detail::parse_double(arg, "linear generator"));
  if (kind == "table") return load_table_csv(std::string(arg));
  throw SpecError("unknown generator kind '" + std::string(kind) + "'");
}

}  // namespace generators

// ---------------------------------------------------------------------------
// Permutations

// Bijection on {0, ..., d-1}; index i of the readout reports outcome sigma(i).
class Permutation {
 public:
  explicit Permutation(std::vector<std::size_t> sigma) : s_(std::move(sigma)) {
    std::vector<bool> seen(s_.size(), false);
    for (std::size_t v : s_) {
      if (v >= s_.size() || seen[v]) throw SpecError("Permutation: not a bijection");
      seen[v] = true;
    }
  }

  static Permutation identity(std::size_t d) {
    std::vector<std::size_t> s(d);
    std::iota(s.begin(), s.end(), std::size_t{0});
    return Permutation(std::move(s));
  }

  static Permutation swap(std::size_t d, std::size_t i, std::size_t j) {
    auto p = identity(d).s_;
    std::swap(p.at(i), p.at(j));
    return Permutation(std::move(p));
  }

  // "2,1,3" -> sigma = (1, 0, 2)
  static Permutation parse_one_based(std::string_view list) {
    std::vector<std::size_t> s;
    for (const auto& tok : generators::detail::split(list, ',')) {
      const double v = generators::detail::parse_double(generators::detail::trim(tok), "permutation");
      if (v < 1.0 || v != std::floor(v)) throw SpecError("permutation entries are 1-based integers");
      s.push_back(static_cast<std::size_t>(v) - 1);
    }
    return Permutation(std::move(s));
  }

  std::size_t size() const { return s_.size(); }
  std::size_t operator()(std::size_t i) const { return s_[i]; }
  const std::vector<std::size_t>& indices() const { return s_; }

  std::vector<std::size_t> one_based() const {
    std::vector<std::size_t> o(s_);
    for (auto& v : o) ++v;
    return o;
  }

  bool is_identity() const {
    for (std::size_t i = 0; i < s_.size(); ++i)
      if (s_[i] != i) return false;
    return true;
  }

 private:
  std::vector<std::size_t> s_;
};

// ---------------------------------------------------------------------------
// Simplex-level transforms

// T_f(u)_i = f(u_i) / sum_j f(u_j)
inline SimplexPoint escort_map(const EscortGenerator& f, const SimplexPoint& u) {
  Vec w(u.dim());
  double sum = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = f(u[i]);
    if (!std::isfinite(w[i]) || w[i] < 0.0) throw DomainError("escort_map: generator value negative or non-finite");
    sum += w[i];
  }
  if (!(sum > 0.0)) throw DomainError("escort_map: degenerate normaliser");
  for (double& x : w) x /= sum;
  return SimplexPoint(std::move(w));
}

// u <- (1 - eps w(u)) u + eps w(u) / d with w(u) = prod_i (d u_i) in [0, 1].
// The weight vanishes on every face, so vertices are fixed exactly.
inline SimplexPoint perturb_toward_barycenter(double eps, const SimplexPoint& u) {
  if (!(eps >= 0.0 && eps <= 0.5)) throw DomainError("perturbation: eps must lie in [0, 0.5]");
  const double d = static_cast<double>(u.dim());
  double w = 1.0;
  for (double x : u.coords()) w *= d * x;
  const double a = eps * w;
  Vec out(u.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - a) * u[i] + a / d;
  return SimplexPoint(std::move(out));
}

inline SimplexPoint permute(const Permutation& sigma, const SimplexPoint& u) {
  require_same_dim(sigma.size(), u.dim());
  Vec out(u.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = u[sigma(i)];
  return SimplexPoint(std::move(out));
}

// ---------------------------------------------------------------------------
// Readouts

struct Readout {
  std::function<SimplexPoint(const Ray&)> eval;
  std::string name;
  std::size_t dim = 0;
  Json params;

  SimplexPoint operator()(const Ray& psi) const {
    require_same_dim(dim, psi.dim());
    return eval(psi);
  }
};

inline SimplexPoint born_readout(const Ray& psi) {
  Vec p(psi.dim());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(psi[i]);
  return SimplexPoint(std::move(p));
}

inline SimplexPoint uniform_readout(const Ray& psi) { return SimplexPoint::barycenter(psi.dim()); }

inline SimplexPoint permuted_born(const Permutation& sigma, const Ray& psi) {
  require_same_dim(sigma.size(), psi.dim());
  return permute(sigma, born_readout(psi));
}

inline SimplexPoint escort_readout(const EscortGenerator& f, const Ray& psi) {
  return escort_map(f, born_readout(psi));
}

inline SimplexPoint perturbed_born(double eps, const Ray& psi) {
  return perturb_toward_barycenter(eps, born_readout(psi));
}

// Born rounded to the most likely vertex (lowest index on ties). Discontinuous
// across decision boundaries; used as an (H1) counterexample.
inline SimplexPoint step_readout(const Ray& psi) {
  const SimplexPoint p = born_readout(psi);
  const auto it = std::max_element(p.coords().begin(), p.coords().end());
  return SimplexPoint::vertex(p.dim(), static_cast<std::size_t>(it - p.coords().begin()));
}

// R_M(psi) = sqrt(P_M(psi)).
inline OrthantPoint sqrt_readout(const Readout& p, const Ray& psi) { return sqrt_chart(p(psi)); }

namespace readouts {

inline Readout born(std::size_t d) {
  return {born_readout, "born", d, Json{{"kind", "born"}}};
}

inline Readout uniform(std::size_t d) {
  return {uniform_readout, "uniform", d, Json{{"kind", "uniform"}}};
}

inline Readout step(std::size_t d) {
  return {step_readout, "step", d, Json{{"kind", "step"}}};
}

inline Readout permuted(Permutation sigma) {
  const std::size_t d = sigma.size();
  Json params{{"kind", "permuted"}, {"sigma", sigma.one_based()}};
  return {[sigma = std::move(sigma)](const Ray& psi) { return permuted_born(sigma, psi); },
          "permuted", d, std::move(params)};
}

inline Readout escort(EscortGenerator f, std::size_t d) {
  Json params{{"kind", "escort"}, {"generator", f.params}};
  std::string name = "escort:" + f.name;
  return {[f = std::move(f)](const Ray& psi) { return escort_readout(f, psi); }, std::move(name), d,
          std::move(params)};
}

inline Readout perturbed(double eps, std::size_t d) {
  if (!(eps >= 0.0 && eps <= 0.5)) throw SpecError("perturbed readout: eps must lie in [0, 0.5]");
  std::ostringstream nm;
  nm << "perturbed:" << eps;
  return {[eps](const Ray& psi) { return perturbed_born(eps, psi); }, nm.str(), d,
          Json{{"kind", "perturbed"}, {"eps", eps}}};
}

inline Readout parse(std::string_view spec, std::size_t d) {
  if (d < 2) throw SpecError("dimension must be >= 2");
  if (spec == "born") return born(d);
  if (spec == "uniform") return uniform(d);
  if (spec == "step") return step(d);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw SpecError("unknown readout spec '" + std::string(spec) + "'");
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view arg = spec.substr(colon + 1);
  if (kind == "permuted") {
    Permutation sigma = Permutation::parse_one_based(arg);
    if (sigma.size() != d) throw SpecError("permutation size does not match dimension");
    return permuted(std::move(sigma));
  }
  if (kind == "escort") return escort(generators::parse(arg), d);
  if (kind == "perturbed") return perturbed(generators::detail::parse_double(arg, "perturbed readout"), d);
  throw SpecError("unknown readout kind '" + std::string(kind) + "'");
}

}  // namespace readouts

namespace maps {

inline SimplexSelfMap escort(EscortGenerator f, std::size_t d) {
  std::string name = "escort:" + f.name;
  return {[f = std::move(f)](const SimplexPoint& u) { return escort_map(f, u); }, std::move(name), d};
}

inline SimplexSelfMap uniform(std::size_t d) {
  return {[](const SimplexPoint& u) { return SimplexPoint::barycenter(u.dim()); }, "uniform", d};
}

inline SimplexSelfMap perturbed(double eps, std::size_t d) {
  if (!(eps >= 0.0 && eps <= 0.5)) throw SpecError("perturbed map: eps must lie in [0, 0.5]");
  std::ostringstream nm;
  nm << "perturbed:" << eps;
  return {[eps](const SimplexPoint& u) { return perturb_toward_barycenter(eps, u); }, nm.str(), d};
}

inline SimplexSelfMap permuted(Permutation sigma) {
  const std::size_t d = sigma.size();
  return {[sigma = std::move(sigma)](const SimplexPoint& u) { return permute(sigma, u); }, "permuted", d};
}

inline SimplexSelfMap parse(std::string_view spec, std::size_t d) {
  if (d < 2) throw SpecError("dimension must be >= 2");
  if (spec == "identity") return identity_simplex_map(d);
  if (spec == "uniform") return uniform(d);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw SpecError("unknown map spec '" + std::string(spec) + "'");
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view arg = spec.substr(colon + 1);
  if (kind == "escort") return escort(generators::parse(arg), d);
  if (kind == "perturbed") return perturbed(generators::detail::parse_double(arg, "perturbed map"), d);
  if (kind == "permuted") {
    Permutation sigma = Permutation::parse_one_based(arg);
    if (sigma.size() != d) throw SpecError("permutation size does not match dimension");
    return permuted(std::move(sigma));
  }
  throw SpecError("unknown map kind '" + std::string(kind) + "'");
}

}  // namespace maps
}  // namespace pvmrigid
