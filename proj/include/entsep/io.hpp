#pragma once

// JSON state specs and matrix files, report serialization, CSV tables.
// Parsing is strict: unknown fields are rejected.

#include <entsep/criteria.hpp>
#include <entsep/distill.hpp>
#include <entsep/maps.hpp>
#include <entsep/states.hpp>
#include <entsep/volume.hpp>

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>

namespace entsep {

inline constexpr const char* kVersion = "0.1.0";

using Json = nlohmann::ordered_json;

namespace detail {

inline void allowOnly(const Json& j, std::initializer_list<const char*> keys, const std::string& where) {
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  for (const auto& [k, v] : j.items()) {
    bool known = false;
    for (const char* key : keys) known = known || k == key;
    if (!known) throw InputError(where + ": unknown field '" + k + "'");
  }
}

inline const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw InputError(where + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number()) throw InputError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

inline std::size_t count(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
    throw InputError(where + ": field '" + key + "' must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// State family specs

inline StateFamilySpec specFromJson(const Json& j) {
  const std::string where = "state spec";
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  const Json& fam = detail::field(j, "family", where);
  if (!fam.is_string()) throw InputError(where + ": 'family' must be a string");
  const std::string name = fam.get<std::string>();
  using detail::allowOnly;
  using detail::count;
  using detail::number;
  if (name == "singlet") {
    allowOnly(j, {"family"}, where);
    return {family::Singlet{}};
  }
  if (name == "max-entangled") {
    allowOnly(j, {"family", "d"}, where);
    return {family::MaxEntangled{count(j, "d", where)}};
  }
  if (name == "werner" || name == "isotropic") {
    const bool werner = name == "werner";
    const char* primary = werner ? "beta" : "F";
    allowOnly(j, {"family", "d", primary, "p"}, where);
    if (j.contains(primary) == j.contains("p"))
      throw InputError(where + ": " + name + " needs exactly one of '" + primary + "' or 'p'");
    const std::size_t d = count(j, "d", where);
    const bool usesP = j.contains("p");
    const double value = number(j, usesP ? "p" : primary, where);
    if (werner)
      return {family::Werner{d, usesP ? family::Werner::Param::P : family::Werner::Param::Beta, value}};
    return {family::Isotropic{d, usesP ? family::Isotropic::Param::P : family::Isotropic::Param::F, value}};
  }
  if (name == "two-qubit-example") {
    allowOnly(j, {"family", "p"}, where);
    return {family::TwoQubitExample{number(j, "p", where)}};
  }
  if (name == "stormer") {
    allowOnly(j, {"family", "alpha"}, where);
    return {family::Stormer{number(j, "alpha", where)}};
  }
  if (name == "rho2x4") {
    allowOnly(j, {"family", "b"}, where);
    return {family::Rho2x4{number(j, "b", where)}};
  }
  if (name == "tiles-upb") {
    allowOnly(j, {"family"}, where);
    return {family::TilesUpb{}};
  }
  if (name == "tiles-bound-entangled") {
    allowOnly(j, {"family"}, where);
    return {family::TilesBoundEntangled{}};
  }
  if (name == "mixed-with-noise") {
    allowOnly(j, {"family", "base", "epsilon"}, where);
    auto base = std::make_shared<const StateFamilySpec>(specFromJson(detail::field(j, "base", where)));
    return {family::MixedWithNoise{std::move(base), number(j, "epsilon", where)}};
  }
  if (name == "random") {
    allowOnly(j, {"family", "dA", "dB", "seed"}, where);
    return {family::Random{count(j, "dA", where), count(j, "dB", where), count(j, "seed", where)}};
  }
  throw InputError(where + ": unknown family '" + name + "'");
}

namespace detail {

struct SpecToJson {
  Json operator()(const family::Singlet&) const { return {{"family", "singlet"}}; }
  Json operator()(const family::MaxEntangled& f) const { return {{"family", "max-entangled"}, {"d", f.d}}; }
  Json operator()(const family::Werner& f) const {
    return {{"family", "werner"}, {"d", f.d}, {f.param == family::Werner::Param::P ? "p" : "beta", f.value}};
  }
  Json operator()(const family::Isotropic& f) const {
    return {{"family", "isotropic"}, {"d", f.d}, {f.param == family::Isotropic::Param::P ? "p" : "F", f.value}};
  }
  Json operator()(const family::TwoQubitExample& f) const { return {{"family", "two-qubit-example"}, {"p", f.p}}; }
  Json operator()(const family::Stormer& f) const { return {{"family", "stormer"}, {"alpha", f.alpha}}; }
  Json operator()(const family::Rho2x4& f) const { return {{"family", "rho2x4"}, {"b", f.b}}; }
  Json operator()(const family::TilesUpb&) const { return {{"family", "tiles-upb"}}; }
  Json operator()(const family::TilesBoundEntangled&) const { return {{"family", "tiles-bound-entangled"}}; }
  Json operator()(const family::MixedWithNoise& f) const {
    if (!f.base) throw InputError("mixed-with-noise: missing base");
    return {{"family", "mixed-with-noise"}, {"base", std::visit(SpecToJson{}, f.base->family)}, {"epsilon", f.epsilon}};
  }
  Json operator()(const family::Random& f) const {
    return {{"family", "random"}, {"dA", f.dA}, {"dB", f.dB}, {"seed", f.seed}};
  }
};

}  // namespace detail

inline Json specToJson(const StateFamilySpec& spec) { return std::visit(detail::SpecToJson{}, spec.family); }

/// Build a spec from a family name and key=value parameters given as text.
inline StateFamilySpec specFromParams(const std::string& family, const std::map<std::string, std::string>& params) {
  Json j = {{"family", family}};
  for (const auto& [k, v] : params) {
    if (k == "family") throw InputError("parameter 'family' given twice");
    try {
      std::size_t used = 0;
      if (v.find_first_of(".eE") == std::string::npos && v.find('-') == std::string::npos) {
        j[k] = std::stoull(v, &used);
      } else {
        j[k] = std::stod(v, &used);
      }
      if (used != v.size()) throw std::invalid_argument(v);
    } catch (const std::logic_error&) {
      throw InputError("parameter '" + k + "' is not a number: '" + v + "'");
    }
  }
  return specFromJson(j);
}

// ---------------------------------------------------------------------------
// Matrix files: {"dimA": a, "dimB": b, "entries": [[re, im], ...]} row-major

inline ComplexMatrix matrixFromJson(const Json& j, Dims& dims, const std::string& where) {
  detail::allowOnly(j, {"dimA", "dimB", "entries"}, where);
  dims = {detail::count(j, "dimA", where), detail::count(j, "dimB", where)};
  if (dims.a == 0 || dims.b == 0) throw InputError(where + ": dimensions must be positive");
  const Json& e = detail::field(j, "entries", where);
  const std::size_t n = dims.total();
  if (!e.is_array() || e.size() != n * n)
    throw InputError(where + ": 'entries' must be an array of " + std::to_string(n * n) + " [re, im] pairs");
  ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n * n; ++k) {
    const Json& z = e[k];
    if (!z.is_array() || z.size() != 2 || !z[0].is_number() || !z[1].is_number())
      throw InputError(where + ": entry " + std::to_string(k) + " is not a [re, im] pair of numbers");
    m(static_cast<Eigen::Index>(k / n), static_cast<Eigen::Index>(k % n)) = {z[0].get<double>(), z[1].get<double>()};
  }
  return m;
}

inline Json matrixToJson(const ComplexMatrix& m, Dims dims) {
  Json entries = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back({m(r, c).real(), m(r, c).imag()});
  return {{"dimA", dims.a}, {"dimB", dims.b}, {"entries", std::move(entries)}};
}

inline Json readJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError("'" + path + "' is not valid JSON: " + e.what());
  }
}

/// Either a matrix file or a family spec, told apart by the "family" field.
struct StateSource {
  DensityMatrix state;
  Json description;
  std::optional<StateFamilySpec> spec;
};

inline StateSource stateFromJson(const Json& j, const std::string& origin) {
  if (j.is_object() && j.contains("family")) {
    StateFamilySpec spec = specFromJson(j);
    return {make(spec), specToJson(spec), spec};
  }
  Dims dims;
  const ComplexMatrix m = matrixFromJson(j, dims, origin);
  return {DensityMatrix(m, dims.a, dims.b), Json{{"file", origin}}, std::nullopt};
}

inline DensityMatrix parseStateFile(const std::string& path) { return stateFromJson(readJsonFile(path), path).state; }

inline Witness parseWitnessFile(const std::string& path) {
  Dims dims;
  const ComplexMatrix m = matrixFromJson(readJsonFile(path), dims, path);
  if (detail::hermiticityDrift(m) > tol::herm) throw InputError(path + ": witness is not Hermitian");
  return {m, dims};
}

// ---------------------------------------------------------------------------
// Reports

inline Json tolerancesJson() {
  return {{"herm", tol::herm}, {"trace", tol::trace}, {"norm", tol::norm}, {"pos", tol::pos},
          {"eig", tol::eig},   {"rank", tol::rank},   {"ent", tol::ent}};
}

inline Json reportHeader(const std::string& command, std::uint64_t seed) {
  return {{"tool", "entsep"}, {"version", kVersion}, {"command", command}, {"seed", seed},
          {"tolerances", tolerancesJson()}};
}

inline Json toJson(const CriterionReport& r) {
  Json evidence = Json::object();
  for (const auto& [k, v] : r.evidence) evidence[k] = v;
  return {{"criterion", toString(r.criterion)}, {"verdict", toString(r.verdict)}, {"evidence", evidence},
          {"detail", r.detail}};
}

inline Json toJson(const Classification& c) {
  Json basis = Json::array();
  for (const auto& r : c.basis) basis.push_back(toJson(r));
  return {{"label", toString(c.label)}, {"reason", c.reason}, {"basis", basis}};
}

inline Json toJson(const ProtocolTrace& t) {
  Json params = Json::object();
  for (const auto& [k, v] : t.params) params[k] = v;
  Json steps = Json::array();
  for (const auto& s : t.steps)
    steps.push_back({{"iteration", s.iteration},
                     {"F", s.fidelity},
                     {"successProb", s.successProb},
                     {"cumulativeYieldFactor", s.cumulativeYieldFactor}});
  return {{"protocol", toString(t.protocol)}, {"params", params}, {"steps", steps}};
}

inline Json toJson(const VolumeEstimate& v) {
  return {{"dimA", v.dims.a},  {"dimB", v.dims.b},     {"samples", v.samples}, {"pptCount", v.pptCount},
          {"ratio", v.ratio},  {"stderr", v.stderr},   {"measure", v.measure}, {"seed", v.seed}};
}

inline Json toJson(const UpbReport& r) {
  Json j = {{"orthogonal", r.orthogonal}, {"unextendible", r.unextendible}, {"maxGramDeviation", r.maxGramDeviation}};
  if (r.extension) {
    Json a = Json::array(), b = Json::array();
    for (Eigen::Index i = 0; i < r.extension->a.size(); ++i) a.push_back({r.extension->a(i).real(), r.extension->a(i).imag()});
    for (Eigen::Index i = 0; i < r.extension->b.size(); ++i) b.push_back({r.extension->b(i).real(), r.extension->b(i).imag()});
    j["extension"] = {{"a", a}, {"b", b}};
  }
  return j;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string traceCsv(const ProtocolTrace& t) {
  std::ostringstream out;
  out << "iteration,F,successProb,cumulativeYieldFactor\n";
  for (const auto& s : t.steps)
    out << s.iteration << ',' << detail::fmt17(s.fidelity) << ',' << detail::fmt17(s.successProb) << ','
        << detail::fmt17(s.cumulativeYieldFactor) << '\n';
  return out.str();
}

inline std::string volumeCsv(const std::vector<VolumeEstimate>& rows) {
  std::ostringstream out;
  out << "dimA,dimB,samples,ppt_count,ratio,stderr,measure,seed\n";
  for (const auto& v : rows)
    out << v.dims.a << ',' << v.dims.b << ',' << v.samples << ',' << v.pptCount << ',' << detail::fmt17(v.ratio) << ','
        << detail::fmt17(v.stderr) << ',' << v.measure << ',' << v.seed << '\n';
  return out.str();
}

inline std::string criteriaCsv(const std::vector<CriterionReport>& reports) {
  std::ostringstream out;
  out << "criterion,verdict,key,value\n";
  for (const auto& r : reports)
    for (const auto& [k, v] : r.evidence)
      out << toString(r.criterion) << ',' << toString(r.verdict) << ',' << k << ',' << detail::fmt17(v) << '\n';
  return out.str();
}

}  // namespace entsep
