#pragma once

// JSON reading and writing. Numbers are written as strings: 15 significant
// digits for doubles, "p/q" for exact values.

#include <string>
#include <vector>

#include "json.hpp"

#include "gcdeg/error.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/polytope.hpp"
#include "gcdeg/rootsys.hpp"

namespace gcdeg {

using Json = nlohmann::ordered_json;

namespace io {

inline Json num(double x) { return format_double(x); }
inline Json num(const Rational& x) { return to_string(x); }

inline Json nums(const Vec& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

inline Json nums(const RVec& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(num(x));
  return a;
}

template <class T>
Json rows(const Mat<T>& m) {
  Json a = Json::array();
  for (const auto& r : m) a.push_back(nums(r));
  return a;
}

/// Exact value with its decimal rendering.
inline Json exact_pair(const Rational& x) {
  Json o;
  o["value"] = num(to_double(x));
  o["exact"] = num(x);
  return o;
}

/// Reads a rational from a JSON number or a "p/q" / decimal string.
inline Rational rational(const Json& j, const std::string& where) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  if (j.is_number()) return parse_rational(j.dump());
  throw Error(ErrorKind::SchemaError, where + ": expected a number");
}

inline RVec rational_vector(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaError, where + ": expected an array");
  RVec out;
  for (const auto& x : j) out.push_back(rational(x, where));
  return out;
}

inline Mat<Rational> rational_matrix(const Json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorKind::SchemaError, where + ": expected an array of rows");
  Mat<Rational> out;
  for (const auto& r : j) out.push_back(rational_vector(r, where));
  return out;
}

/// Comma-separated rationals, e.g. "1/2,-1/2".
inline RVec parse_list(const std::string& text) {
  RVec out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    out.push_back(parse_rational(text.substr(start, end - start)));
    start = end + 1;
  }
  return out;
}

inline Json root_system_spec_to_json(const RootSystemSpec& s) {
  Json o;
  if (s.catalog_name) o["catalog_name"] = *s.catalog_name;
  if (s.exact_simple_roots) o["simple_roots"] = rows(*s.exact_simple_roots);
  if (s.simple_roots) o["simple_roots"] = rows(*s.simple_roots);
  o["central_rank"] = s.central_rank;
  return o;
}

inline RootSystemSpec root_system_spec(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, "root_system: expected an object");
  int central = 0;
  if (j.contains("central_rank")) {
    if (!j["central_rank"].is_number_integer() || j["central_rank"].get<int>() < 0)
      throw Error(ErrorKind::SchemaError, "root_system.central_rank: expected a nonnegative integer");
    central = j["central_rank"].get<int>();
  }
  const bool has_cat = j.contains("catalog_name"), has_rows = j.contains("simple_roots");
  if (has_cat == has_rows)
    throw Error(ErrorKind::SchemaError, "root_system: exactly one of catalog_name / simple_roots");
  if (has_cat) {
    if (!j["catalog_name"].is_string()) throw Error(ErrorKind::SchemaError, "root_system.catalog_name: expected a string");
    return RootSystemSpec::catalog(j["catalog_name"].get<std::string>(), central);
  }
  return RootSystemSpec::exact(rational_matrix(j["simple_roots"], "root_system.simple_roots"), central);
}

/// Exact rows first; rows that only form a Cartan datum numerically
/// (decimal approximations of irrational coordinates) fall back to doubles.
inline RootSystem root_system(const Json& j) {
  auto spec = root_system_spec(j);
  if (!spec.exact_simple_roots) return build_root_system(spec);
  try {
    return build_root_system(spec);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InvalidCartanDatum) throw;
    Mat<double> rows_d;
    for (const auto& r : *spec.exact_simple_roots) rows_d.push_back(to_double(r));
    return build_root_system(RootSystemSpec::numeric(rows_d, spec.central_rank));
  }
}

inline Json halfspace_to_json(const HalfSpace& h) {
  Json o;
  o["normal"] = nums(h.normal);
  o["offset"] = num(h.offset);
  return o;
}

inline PolytopeInput polytope_input(const Json& j) {
  if (!j.is_object()) throw Error(ErrorKind::SchemaError, "polytope: expected an object");
  const bool has_ineq = j.contains("inequalities"), has_vert = j.contains("vertices");
  if (has_ineq == has_vert) throw Error(ErrorKind::SchemaError, "polytope: exactly one of inequalities / vertices");
  PolytopeInput in;
  if (has_vert) {
    in.vertices = rational_matrix(j["vertices"], "polytope.vertices");
    return in;
  }
  if (!j["inequalities"].is_array()) throw Error(ErrorKind::SchemaError, "polytope.inequalities: expected an array");
  std::vector<HalfSpace> hs;
  for (const auto& h : j["inequalities"]) {
    if (!h.is_object() || !h.contains("normal") || !h.contains("offset"))
      throw Error(ErrorKind::SchemaError, "polytope.inequalities: each entry needs normal and offset");
    HalfSpace hh{rational_vector(h["normal"], "normal"), rational(h["offset"], "offset"), false,
                 h.contains("label") && h["label"].is_string() ? h["label"].get<std::string>() : ""};
    hs.push_back(std::move(hh));
  }
  in.halfspaces = std::move(hs);
  return in;
}

inline Json polytope_input_to_json(const PolytopeInput& in) {
  Json o;
  if (in.vertices) o["vertices"] = rows(*in.vertices);
  if (in.halfspaces) {
    Json a = Json::array();
    for (const auto& h : *in.halfspaces) {
      Json e = halfspace_to_json(h);
      if (!h.label.empty()) e["label"] = h.label;
      a.push_back(e);
    }
    o["inequalities"] = a;
  }
  return o;
}

inline Json polytope_to_json(const ConvexPolytope& p) {
  Json o;
  o["dim"] = p.dim();
  o["vertices"] = rows(p.vertices());
  Json hs = Json::array();
  for (const auto& h : p.halfspaces()) {
    Json e = halfspace_to_json(h);
    e["redundant"] = h.redundant;
    if (!h.label.empty()) e["label"] = h.label;
    hs.push_back(e);
  }
  o["halfspaces"] = hs;
  o["volume"] = exact_pair(p.volume());
  return o;
}

inline Json root_system_to_json(const RootSystem& rs) {
  Json o;
  o["name"] = rs.name();
  o["dim"] = rs.dim();
  o["rank"] = rs.rank();
  o["central_rank"] = rs.central_rank();
  o["exact"] = rs.is_exact();
  Json simple = Json::array();
  for (const auto& a : rs.simple_roots()) simple.push_back(a.exact ? nums(*a.exact) : nums(a.vec));
  o["simple_roots"] = simple;
  Json pos = Json::array();
  for (const auto& a : rs.positive_roots()) {
    Json e;
    e["label"] = a.label;
    e["vector"] = a.exact ? nums(*a.exact) : nums(a.vec);
    pos.push_back(e);
  }
  o["positive_roots"] = pos;
  o["two_rho"] = rs.exact_two_rho() ? nums(*rs.exact_two_rho()) : nums(rs.two_rho());
  o["fundamental_weights"] =
      rs.exact_fundamental_weights() ? rows(*rs.exact_fundamental_weights()) : rows(rs.fundamental_weights());
  o["weyl_order"] = rs.weyl_order();
  return o;
}

/// {"pieces": [{"c": ..., "lambda": [...]}]}
inline PLConcave pl_function(const Json& j) {
  if (!j.is_object() || !j.contains("pieces") || !j["pieces"].is_array())
    throw Error(ErrorKind::SchemaError, "PL function: expected {\"pieces\": [...]}");
  std::vector<std::pair<Rational, RVec>> pieces;
  for (const auto& p : j["pieces"]) {
    if (!p.is_object() || !p.contains("lambda")) throw Error(ErrorKind::SchemaError, "PL piece needs lambda");
    Rational c = p.contains("c") ? rational(p["c"], "c") : Rational(0);
    pieces.push_back({c, rational_vector(p["lambda"], "lambda")});
  }
  return PLConcave::from_rationals(pieces);
}

inline Json pl_function_to_json(const PLConcave& f) {
  Json a = Json::array();
  for (std::size_t i = 0; i < f.pieces().size(); ++i) {
    const auto& p = f.pieces()[i];
    Json e;
    if (p.exact_c && p.exact_lambda) {
      e["c"] = num(*p.exact_c);
      e["lambda"] = nums(*p.exact_lambda);
    } else {
      e["c"] = num(p.c);
      e["lambda"] = nums(p.lambda);
    }
    e["redundant"] = p.redundant;
    a.push_back(e);
  }
  Json o;
  o["pieces"] = a;
  return o;
}

inline Json parse_document(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("malformed JSON: ") + e.what());
  }
}

/// Indented "key: value" rendering of a report.
inline void render_text(const Json& j, std::string& out, int indent = 0) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  auto scalar = [](const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
  auto flat = [](const Json& v) {
    for (const auto& x : v)
      if (x.is_structured()) return false;
    return true;
  };
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (v.is_object() || (v.is_array() && !flat(v))) {
        out += pad + k + ":\n";
        render_text(v, out, indent + 1);
      } else if (v.is_array()) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ", ") + scalar(x);
        out += pad + k + ": [" + s + "]\n";
      } else {
        out += pad + k + ": " + scalar(v) + "\n";
      }
    }
  } else if (j.is_array()) {
    for (const auto& v : j) {
      if (v.is_array() && flat(v)) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ", ") + scalar(x);
        out += pad + "- [" + s + "]\n";
      } else if (v.is_structured()) {
        out += pad + "-\n";
        render_text(v, out, indent + 1);
      } else {
        out += pad + "- " + scalar(v) + "\n";
      }
    }
  } else {
    out += pad + scalar(j) + "\n";
  }
}

}  // namespace io
}  // namespace gcdeg
