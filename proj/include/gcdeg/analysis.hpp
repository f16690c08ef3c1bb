#pragma once

// End-to-end pipeline: input -> root system, P+ -> KE test -> minimizer ->
// central fibre -> verdict, assembled into a JSON report with fixed field order.

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "gcdeg/degeneration.hpp"
#include "gcdeg/error.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/io.hpp"
#include "gcdeg/minimize.hpp"
#include "gcdeg/oracle.hpp"
#include "gcdeg/polytope.hpp"
#include "gcdeg/rootsys.hpp"
#include "gcdeg/testconfig.hpp"

namespace gcdeg {

inline constexpr const char* kToolVersion = "1.0.0";

/// Error tagged with the pipeline stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const Error& e) : Error(e.kind(), e.message()), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

struct AnalysisOptions {
  MinimizeOptions minimize;
  IntegrationOptions integration;
  double ke_tol = 1e-8;
  std::uint64_t mc_samples = 0;  // 0: no oracle block
  std::uint64_t seed = 0x5eed;
  int grid_steps = 41;
};

/// Options from the input's "options" object; explicit overrides win.
inline AnalysisOptions options_from_json(const Json& j, AnalysisOptions base = {}) {
  if (!j.is_object()) return base;
  auto number = [&](const char* key, double& into) {
    if (!j.contains(key)) return;
    into = to_double(io::rational(j[key], std::string("options.") + key));
    if (!(into > 0)) throw Error(ErrorKind::SchemaError, std::string("options.") + key + " must be positive");
  };
  number("tol_wall", base.minimize.tol_wall);
  number("tol_kkt", base.minimize.tol_kkt);
  number("precision_target", base.integration.rel_tol);
  number("ke_tol", base.ke_tol);
  if (j.contains("mc_check")) {
    if (!j["mc_check"].is_number_integer() || j["mc_check"].get<long long>() < 0)
      throw Error(ErrorKind::SchemaError, "options.mc_check must be a nonnegative integer");
    base.mc_samples = j["mc_check"].get<std::uint64_t>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw Error(ErrorKind::SchemaError, "options.seed must be an integer");
    base.seed = j["seed"].get<std::uint64_t>();
  }
  return base;
}

struct Problem {
  RootSystem rs;
  PolytopeInput polytope_input;
  ConvexPolytope p_plus;
  bool append_chamber = false;
};

inline Problem load_problem(const Json& input) {
  if (!input.is_object()) throw StageError("input", Error(ErrorKind::SchemaError, "input must be a JSON object"));
  if (!input.contains("root_system") || !input.contains("polytope"))
    throw StageError("input", Error(ErrorKind::SchemaError, "input needs root_system and polytope"));
  bool chamber = false;
  if (input.contains("append_chamber")) {
    if (!input["append_chamber"].is_boolean())
      throw StageError("input", Error(ErrorKind::SchemaError, "append_chamber must be a boolean"));
    chamber = input["append_chamber"].get<bool>();
  }
  RootSystem rs = stage("root_system", [&] { return io::root_system(input["root_system"]); });
  PolytopeInput pin = stage("input", [&] { return io::polytope_input(input["polytope"]); });
  ConvexPolytope p = stage("polytope", [&] { return build_polytope(pin, rs, chamber); });
  return Problem{std::move(rs), std::move(pin), std::move(p), chamber};
}

namespace detail {

inline std::string root_name(const RootSystem& rs, std::size_t i) { return rs.simple_roots()[i].label; }

inline Json root_names(const RootSystem& rs, const std::vector<std::size_t>& idx) {
  Json a = Json::array();
  for (auto i : idx) a.push_back(root_name(rs, i));
  return a;
}

inline Json multipliers_json(const RootSystem& rs, const std::vector<Multiplier>& ms) {
  Json a = Json::array();
  for (const auto& m : ms) a.push_back(Json{{"root", root_name(rs, m.index)}, {"value", io::num(m.value)}});
  return a;
}

/// t_i with lam = sum t_i varpi_i on the root span.
inline Vec weight_coordinates(const RootSystem& rs, const Vec& lam) {
  Vec t;
  for (std::size_t i = 0; i < rs.rank(); ++i) {
    const auto& a = rs.simple_roots()[i].vec;
    t.push_back(2.0 * dot(a, lam) / dot(a, a));
  }
  return t;
}

}  // namespace detail

inline Json ke_test_json(const KeTestResult& ke) {
  Json o;
  o["verdict"] = to_string(ke.verdict);
  o["convention"] = "2rho";
  o["b0"] = io::nums(ke.b0);
  o["b0_minus_2rho"] = io::nums(ke.b0_minus_2rho);
  o["simple_root_coefficients"] = io::nums(ke.coefficients);
  o["residual"] = io::num(ke.residual);
  o["tolerance"] = io::num(ke.tol);
  o["verdict_4rho"] = to_string(ke.verdict_4rho);
  o["simple_root_coefficients_4rho"] = io::nums(ke.coefficients_4rho);
  return o;
}

inline Json minimizer_json(const RootSystem& rs, const MinimizerReport& rep) {
  Json o;
  o["lambda0"] = io::nums(rep.lambda0);
  o["lambda0_weight_coordinates"] = io::nums(detail::weight_coordinates(rs, rep.lambda0));
  o["active_set"] = detail::root_names(rs, rep.active_set);
  o["accepted_face"] = detail::root_names(rs, rep.accepted_face);
  o["grad_norm"] = io::num(rep.grad_norm);
  o["multipliers"] = detail::multipliers_json(rs, rep.multipliers);
  o["kkt_residual"] = io::num(rep.kkt_residual);
  o["b_lambda0"] = io::nums(rep.b_lambda0);
  o["b_lambda0_minus_2rho"] = io::nums(rep.b_lambda0 - rs.two_rho());
  o["h_min"] = io::num(rep.h_min);
  o["iterations"] = rep.iterations;
  o["face_visits"] = rep.face_visits;
  Json faces = Json::array();
  for (const auto& f : rep.faces) {
    Json e;
    e["face"] = detail::root_names(rs, f.face);
    e["status"] = f.status;
    e["lambda"] = io::nums(f.lambda);
    e["h"] = io::num(f.h);
    e["projected_grad"] = io::num(f.projected_grad);
    e["iterations"] = f.iterations;
    e["multipliers"] = detail::multipliers_json(rs, f.kkt.multipliers);
    e["kkt_residual"] = io::num(f.kkt.residual);
    faces.push_back(e);
  }
  o["faces"] = faces;
  return o;
}

inline Json central_fibre_json(const RootSystem& rs, const CentralFibreReport& f) {
  auto positive = [&](const std::vector<std::size_t>& idx) {
    Json a = Json::array();
    for (auto r : idx) a.push_back(rs.positive_roots()[r].label);
    return a;
  };
  Json o;
  o["active_roots"] = detail::root_names(rs, f.active_roots);
  o["levi_roots"] = positive(f.levi_roots);
  o["valuation_cone"] = detail::root_names(rs, f.valuation_cone);
  o["horospherical"] = f.horospherical;
  o["isotropy_character"] = positive(f.isotropy_roots);
  Json h0 = Json::array();
  for (const auto& line : h0_lines(rs, f)) h0.push_back(line);
  o["h0"] = h0;
  o["aut_rank"] = f.aut_rank;
  o["counts_consistent"] = f.counts_consistent;
  o["moment_polytope"] = io::rows(f.moment_polytope);
  return o;
}

inline Json verdict_json(const RootSystem& rs, const StabilityVerdict& v) {
  Json o;
  o["verdict"] = to_string(v.kind);
  o["multipliers"] = detail::multipliers_json(rs, v.multipliers);
  o["min_multiplier"] = io::num(v.min_multiplier);
  o["kkt_residual"] = io::num(v.kkt_residual);
  o["statement"] = v.flow_statement;
  return o;
}

inline Json oracle_json(const HFunctional& hf, const MinimizerReport& rep, const AnalysisOptions& opts) {
  const RootSystem& rs = hf.root_system();
  Json o;
  McConfig cfg;
  cfg.samples = opts.mc_samples;
  cfg.seed = opts.seed;
  const Vec lam = rep.lambda0;
  const Polynomial& pi = hf.density();
  auto mc = mc_integrate(hf.polytope(), [&](const Vec& y) { return std::exp(dot(lam, y)) * pi(y); }, cfg);
  const double engine = hf.engine().mass(lam).value();
  const double zscore = mc.std_error > 0 ? (mc.estimate - engine) / mc.std_error : 0.0;
  o["mc"] = Json{{"integrand", "exp(<lambda0, y>) pi(y)"},
                 {"samples", mc.samples},
                 {"seed", opts.seed},
                 {"accepted", mc.accepted},
                 {"estimate", io::num(mc.estimate)},
                 {"std_error", io::num(mc.std_error)},
                 {"engine_value", io::num(engine)},
                 {"z_score", io::num(zscore)},
                 {"agrees_within_3_sigma", std::abs(zscore) <= 3.0}};

  std::vector<std::pair<double, double>> box;
  Vec t = detail::weight_coordinates(rs, lam);
  for (double ti : t) box.push_back({0.0, std::max(0.5, 2.0 * ti)});
  const Mat<double> frame = detail::weight_frame(rs);
  for (std::size_t c = rs.rank(); c < rs.dim(); ++c) {
    double tc = dot(frame[c], lam);
    box.push_back({tc - 0.5, tc + 0.5});
  }
  auto g = grid_minimize(hf, box, opts.grid_steps);
  Vec gap = g.coords;
  bool within = true;
  for (std::size_t i = 0; i < rs.rank(); ++i) {
    gap[i] = std::abs(g.coords[i] - t[i]);
    if (gap[i] > g.spacing[i] + 1e-12) within = false;
  }
  o["grid"] = Json{{"steps", opts.grid_steps},
                   {"argmin", io::nums(g.lambda)},
                   {"h", io::num(g.h)},
                   {"spacing", io::nums(g.spacing)},
                   {"refined_argmin", io::nums(g.refined_lambda)},
                   {"certified", g.certified},
                   {"agrees_within_one_cell", within}};
  return o;
}

/// Full analysis report for an input document.
inline Json run_analyze(const Json& input, const AnalysisOptions& opts) {
  Problem prob = load_problem(input);
  const RootSystem& rs = prob.rs;
  HFunctional hf = stage("h_functional", [&] { return HFunctional(rs, prob.p_plus, opts.integration); });
  KeTestResult ke = stage("ke_test", [&] { return ke_test(hf, opts.ke_tol); });
  MinimizerReport rep = stage("minimize", [&] { return minimize_h(hf, opts.minimize); });
  CentralFibreReport fibre = stage("central_fibre", [&] {
    auto f = central_fibre_report(rs, rep, opts.minimize.tol_wall);
    f.moment_polytope = prob.p_plus.vertices_double();
    return f;
  });
  StabilityVerdict verdict = stage("verdict", [&] { return stability_verdict(rs, rep, fibre); });
  HBreakdown at_min = stage("h_values", [&] { return hf.h_vector(rep.lambda0); });

  Json report;
  report["tool"] = Json{{"name", "gcdeg"}, {"version", kToolVersion}};
  Json echo;
  echo["root_system"] = input["root_system"];
  echo["polytope"] = io::polytope_input_to_json(prob.polytope_input);
  echo["append_chamber"] = prob.append_chamber;
  report["input"] = echo;
  report["tolerances"] = Json{{"tol_wall", io::num(opts.minimize.tol_wall)},
                              {"tol_kkt", io::num(opts.minimize.tol_kkt)},
                              {"grad_tol", io::num(opts.minimize.grad_tol)},
                              {"ke_tol", io::num(opts.ke_tol)},
                              {"integration_rel_tol", io::num(opts.integration.rel_tol)},
                              {"series_switch", io::num(opts.integration.eps_switch)}};
  report["root_system"] = io::root_system_to_json(rs);
  Json poly = io::polytope_to_json(prob.p_plus);
  poly["two_rho_inside"] = hf.two_rho_inside();
  report["polytope"] = poly;
  report["ke_test"] = ke_test_json(ke);
  report["minimizer"] = minimizer_json(rs, rep);
  report["central_fibre"] = central_fibre_json(rs, fibre);
  report["stability"] = verdict_json(rs, verdict);
  report["h_values"] = Json{{"h_at_zero", io::num(0.0)},
                            {"h_at_lambda0", io::num(at_min.h)},
                            {"s_na", io::num(at_min.s_na)},
                            {"l_na", io::num(at_min.l_na)},
                            {"log_volume", io::num(at_min.log_normalization)},
                            {"normalization", "h(0) = 0; the constant ln prod <alpha, rho>^2 is dropped"}};
  Json notes = Json::array({"Kahler-Einstein test uses b(0) - 2rho; the 4rho variant is reported alongside",
                            "the minimizer is always computed, also when the KE test passes"});
  if (input.contains("notes") && input["notes"].is_array())
    for (const auto& n : input["notes"]) notes.push_back(n);
  report["interpretations"] = notes;
  if (opts.mc_samples > 0) report["oracle"] = stage("oracle", [&] { return oracle_json(hf, rep, opts); });
  return report;
}

inline Json h_breakdown_json(const HBreakdown& b) {
  Json o;
  o["source"] = b.source;
  o["h"] = io::num(b.h);
  o["s_na"] = io::num(b.s_na);
  o["l_na"] = io::num(b.l_na);
  o["log_normalization"] = io::num(b.log_normalization);
  return o;
}

inline Json violations_json(const std::vector<Violation>& vs) {
  Json a = Json::array();
  for (const auto& v : vs) {
    Json pts = Json::array();
    for (const auto& pt : v.points) pts.push_back(io::nums(pt));
    a.push_back(Json{{"kind", v.kind}, {"points", pts}, {"lhs", io::num(v.lhs)}, {"rhs", io::num(v.rhs)}});
  }
  return a;
}

inline Json filtration_json(const FiltrationTable& t) {
  Json o;
  o["k"] = t.k;
  o["rational"] = t.rational;
  Json entries = Json::array();
  for (const auto& e : t.entries) {
    Json s = io::exact_pair(e.s);
    if (!t.rational) s.erase("exact");
    entries.push_back(Json{{"lambda", io::nums(e.lambda)}, {"s", s}});
  }
  o["entries"] = entries;
  auto values = [&](const std::vector<Rational>& vs) {
    Json a = Json::array();
    for (const auto& v : vs) a.push_back(t.rational ? io::num(v) : io::num(to_double(v)));
    return a;
  };
  o["gamma_values"] = values(t.gamma_values);
  o["gamma_shifted"] = values(t.gamma_shifted);
  o["gamma_rank"] = t.gamma_rank;
  o["gamma_rank_kind"] = t.gamma_rank_kind;
  o["concavity_violations"] = violations_json(t.concavity_violations);
  o["dominance_violations"] = violations_json(t.dominance_violations);
  o["w_compatibility_violations"] = violations_json(t.w_violations);
  return o;
}

inline Json approx_json(const ApproxResult& a) {
  Json o;
  o["p"] = a.p;
  o["q"] = a.q;
  o["grid_points"] = a.grid.size();
  o["min_gap"] = io::num(a.min_gap);
  o["max_gap"] = io::num(a.max_gap);
  o["bound"] = io::num(1.0 / static_cast<double>(a.p));
  o["sandwich_holds"] = a.min_gap >= -1e-12 && a.max_gap <= 1.0 / static_cast<double>(a.p) + 1e-12;
  o["lp_solves"] = a.lp_solves;
  o["f_p"] = io::pl_function_to_json(a.fp);
  return o;
}

}  // namespace gcdeg
