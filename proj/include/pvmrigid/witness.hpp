#pragma once

// Violation witnesses and the JSON encodings shared by every report.

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "pvmrigid/common.hpp"
#include "pvmrigid/projective.hpp"
#include "pvmrigid/simplex.hpp"

namespace pvmrigid {

using Json = nlohmann::ordered_json;

enum class WitnessKind {
  H1,
  H2,
  H3,
  Lipschitz,
  VertexDominance,
  Normalization,
  Markov,
  Cauchy,
  VertexFixing,
  FisherExpansion,
};

inline std::string to_string(WitnessKind k) {
  switch (k) {
    case WitnessKind::H1: return "H1";
    case WitnessKind::H2: return "H2";
    case WitnessKind::H3: return "H3";
    case WitnessKind::Lipschitz: return "Lipschitz";
    case WitnessKind::VertexDominance: return "VertexDominance";
    case WitnessKind::Normalization: return "Normalization";
    case WitnessKind::Markov: return "Markov";
    case WitnessKind::Cauchy: return "Cauchy";
    case WitnessKind::VertexFixing: return "VertexFixing";
    case WitnessKind::FisherExpansion: return "FisherExpansion";
  }
  return "unknown";
}

// A concrete input at which an inequality fails. `lhs` and `rhs` are the two
// sides of `relation` as evaluated; `location` holds everything needed to
// re-evaluate them.
struct Witness {
  WitnessKind kind = WitnessKind::H1;
  Json location;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string relation;
};

inline Json to_json(const Witness& w) {
  return Json{{"kind", to_string(w.kind)},
              {"relation", w.relation},
              {"lhs", w.lhs},
              {"rhs", w.rhs},
              {"location", w.location}};
}

inline Json to_json(const std::optional<Witness>& w) { return w ? to_json(*w) : Json(nullptr); }

// Rays are stored as [[re, im], ...]; doubles round-trip exactly.
inline Json to_json(const Ray& r) {
  Json a = Json::array();
  for (const Complex& z : r.amps()) a.push_back(Json::array({z.real(), z.imag()}));
  return a;
}

inline Ray ray_from_json(const Json& j) {
  CVec a;
  for (const auto& z : j) a.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
  return Ray::normalized(std::move(a));
}

inline Json to_json(const CurveDescriptor& d) {
  Json j{{"kind", to_string(d.kind)}};
  if (d.first) j["first"] = to_json(*d.first);
  if (d.second) j["second"] = to_json(*d.second);
  return j;
}

inline CurveDescriptor descriptor_from_json(const Json& j) {
  CurveDescriptor d;
  const std::string kind = j.at("kind").get<std::string>();
  d.kind = kind == "geodesic" ? CurveKind::Geodesic
         : kind == "great-circle" ? CurveKind::GreatCircle
                                  : CurveKind::Custom;
  if (j.contains("first")) d.first = ray_from_json(j.at("first"));
  if (j.contains("second")) d.second = ray_from_json(j.at("second"));
  return d;
}

inline Json curve_location(const PureCurve& c, std::size_t id) {
  return Json{{"curve_id", id},
              {"label", c.label},
              {"domain", Json::array({c.a, c.b})},
              {"descriptor", to_json(c.descriptor)}};
}

inline PureCurve curve_from_location(const Json& loc) {
  return curve_from_descriptor(descriptor_from_json(loc.at("descriptor")),
                               loc.at("domain").at(0).get<double>(),
                               loc.at("domain").at(1).get<double>(),
                               loc.at("label").get<std::string>());
}

inline Json to_json(std::span<const double> v) { return Json(Vec(v.begin(), v.end())); }

inline Vec vec_from_json(const Json& j) { return j.get<Vec>(); }

}  // namespace pvmrigid
