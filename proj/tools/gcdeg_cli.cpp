#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "gcdeg/gcdeg.hpp"

using namespace gcdeg;

namespace {

struct Flags {
  std::string input;
  std::string preset;
  std::string format = "json";
  std::optional<double> tol_wall;
  std::optional<double> tol_kkt;
  std::optional<double> precision_target;
  std::optional<std::uint64_t> mc_check;
  std::optional<std::uint64_t> seed;
  // subcommand arguments
  std::string example_name;
  std::string lambda;
  std::string f;
  std::string values;
  long k = 1;
  long p = 1;
  long q = 0;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json load_input(const Flags& fl, const char* fallback) {
  if (!fl.input.empty() && !fl.preset.empty())
    throw StageError("input", Error(ErrorKind::InvalidArgument, "give either --input or --preset"));
  if (!fl.input.empty()) return stage("input", [&] { return io::parse_document(read_file(fl.input)); });
  std::string name = fl.preset.empty() ? (fallback ? fallback : "") : fl.preset;
  if (name.empty()) throw StageError("input", Error(ErrorKind::InvalidArgument, "--input or --preset required"));
  return stage("input", [&] { return preset(name).input; });
}

AnalysisOptions options(const Flags& fl, const Json& input) {
  AnalysisOptions o = stage("input", [&] {
    return options_from_json(input.contains("options") ? input["options"] : Json::object());
  });
  if (fl.tol_wall) o.minimize.tol_wall = *fl.tol_wall;
  if (fl.tol_kkt) o.minimize.tol_kkt = *fl.tol_kkt;
  if (fl.precision_target) o.integration.rel_tol = *fl.precision_target;
  if (fl.mc_check) o.mc_samples = *fl.mc_check;
  if (fl.seed) o.seed = *fl.seed;
  return o;
}

/// "linear:LAMBDA[:C0]", "pl:C|LAMBDA;C|LAMBDA...", a JSON object, or @file.
PLConcave parse_f(const std::string& text, const RootSystem& rs) {
  if (text.empty()) throw Error(ErrorKind::InvalidArgument, "--f is required");
  if (text.front() == '@') return io::pl_function(io::parse_document(read_file(text.substr(1))));
  if (text.front() == '{') return io::pl_function(io::parse_document(text));
  auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::InvalidArgument, "unrecognized --f '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  if (kind == "linear") {
    auto c = rest.find(':');
    RVec lam = io::parse_list(rest.substr(0, c));
    Rational c0 = c == std::string::npos ? Rational(0) : parse_rational(rest.substr(c + 1));
    return from_vector_exact(rs, lam, c0);
  }
  if (kind == "pl") {
    std::vector<std::pair<Rational, RVec>> pieces;
    std::stringstream ss(rest);
    std::string piece;
    while (std::getline(ss, piece, ';')) {
      auto bar = piece.find('|');
      if (bar == std::string::npos) throw Error(ErrorKind::InvalidArgument, "pl piece needs 'c|lambda'");
      pieces.push_back({parse_rational(piece.substr(0, bar)), io::parse_list(piece.substr(bar + 1))});
    }
    if (pieces.empty()) throw Error(ErrorKind::InvalidArgument, "pl function has no pieces");
    return PLConcave::from_rationals(pieces);
  }
  throw Error(ErrorKind::InvalidArgument, "unrecognized --f kind '" + kind + "'");
}

void check_f_dim(const PLConcave& f, const RootSystem& rs) {
  if (f.dim() != rs.dim()) throw Error(ErrorKind::InvalidArgument, "--f dimension does not match the root system");
}

Json cmd_example(const Flags& fl) {
  if (fl.example_name.empty()) {
    Json list = Json::array();
    for (const auto& p : presets()) list.push_back(Json{{"name", p.name}, {"description", p.description}});
    return Json{{"presets", list}};
  }
  Json input = stage("input", [&] { return preset(fl.example_name).input; });
  Json report = run_analyze(input, options(fl, input));
  Json out;
  out["preset"] = fl.example_name;
  for (auto& [k, v] : report.items()) out[k] = v;
  return out;
}

Json cmd_h_eval(const Flags& fl) {
  Json input = load_input(fl, "so4-case1");
  AnalysisOptions opts = options(fl, input);
  Problem prob = load_problem(input);
  HFunctional hf = stage("h_functional", [&] { return HFunctional(prob.rs, prob.p_plus, opts.integration); });
  if (fl.lambda.empty() == fl.f.empty())
    throw StageError("input", Error(ErrorKind::InvalidArgument, "give exactly one of --lambda / --f"));
  Json out;
  if (!fl.lambda.empty()) {
    Vec lam = to_double(stage("input", [&] { return io::parse_list(fl.lambda); }));
    out["lambda"] = io::nums(lam);
    out["breakdown"] = h_breakdown_json(stage("h_eval", [&] { return hf.h_vector(lam); }));
  } else {
    PLConcave f = stage("input", [&] {
      auto g = parse_f(fl.f, prob.rs);
      check_f_dim(g, prob.rs);
      return g;
    });
    out["f"] = io::pl_function_to_json(f);
    out["breakdown"] = h_breakdown_json(stage("h_eval", [&] { return hf.h_plfunction(f); }));
  }
  return out;
}

Json cmd_minimize(const Flags& fl) {
  Json input = load_input(fl, "so4-case1");
  AnalysisOptions opts = options(fl, input);
  Problem prob = load_problem(input);
  HFunctional hf = stage("h_functional", [&] { return HFunctional(prob.rs, prob.p_plus, opts.integration); });
  auto rep = stage("minimize", [&] { return minimize_h(hf, opts.minimize); });
  Json out;
  out["tolerances"] = Json{{"tol_wall", io::num(opts.minimize.tol_wall)}, {"tol_kkt", io::num(opts.minimize.tol_kkt)}};
  out["minimizer"] = minimizer_json(prob.rs, rep);
  return out;
}

Json cmd_filtration(const Flags& fl) {
  Json input = load_input(fl, "so4-case1");
  Problem prob = load_problem(input);
  if (fl.k < 1) throw StageError("input", Error(ErrorKind::InvalidArgument, "--k must be >= 1"));
  Json out;
  if (!fl.values.empty()) {
    // explicit values on the lattice points of k P+, in lexicographic order
    auto pts = lattice_points(prob.p_plus, fl.k);
    RVec vals = stage("input", [&] { return io::parse_list(fl.values); });
    if (vals.size() != pts.size())
      throw StageError("input", Error(ErrorKind::InvalidArgument,
                                      "--values needs " + std::to_string(pts.size()) + " entries"));
    out["source"] = "values";
    out["table"] = filtration_json(filtration_table_from_values(prob.rs, fl.k, pts, vals));
    return out;
  }
  PLConcave f = stage("input", [&] {
    auto g = parse_f(fl.f, prob.rs);
    check_f_dim(g, prob.rs);
    return g;
  });
  check_dominant_pieces(prob.rs, f);
  out["source"] = "f";
  out["f"] = io::pl_function_to_json(f);
  out["irreducible_central_fibre"] = irreducible_central_fibre(f, prob.p_plus);
  out["table"] = filtration_json(stage("filtration", [&] { return filtration_table(prob.rs, prob.p_plus, f, fl.k); }));
  return out;
}

Json cmd_approx(const Flags& fl) {
  Json input = load_input(fl, "so4-case1");
  Problem prob = load_problem(input);
  PLConcave f = stage("input", [&] {
    auto g = parse_f(fl.f, prob.rs);
    check_f_dim(g, prob.rs);
    return g;
  });
  Json out;
  out["f"] = io::pl_function_to_json(f);
  out["approximation"] = approx_json(stage("approx", [&] { return approximate_p(f, prob.p_plus, fl.p, fl.q); }));
  return out;
}

void emit(const Json& j, const std::string& format) {
  if (format == "text") {
    std::string s;
    io::render_text(j, s);
    std::cout << s;
  } else {
    std::cout << j.dump(2) << "\n";
  }
}

int fail(const Error& e, const std::string& stage_name, const std::string& format) {
  Json err;
  err["error"] = Json{{"kind", to_string(e.kind())},
                      {"stage", stage_name},
                      {"message", e.message()},
                      {"exit_code", exit_code(e.kind())}};
  emit(err, format);
  std::cerr << "error [" << to_string(e.kind()) << "] in " << stage_name << ": " << e.message() << "\n";
  return exit_code(e.kind());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal degenerations of group compactifications"};
  app.fallthrough();
  app.require_subcommand(1);
  Flags fl;
  app.add_option("--input", fl.input, "input JSON file");
  app.add_option("--preset", fl.preset, "named example input");
  app.add_option("--format", fl.format, "output format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--tol-wall", fl.tol_wall, "wall activity tolerance")->check(CLI::PositiveNumber);
  app.add_option("--tol-kkt", fl.tol_kkt, "KKT tolerance")->check(CLI::PositiveNumber);
  app.add_option("--precision-target", fl.precision_target, "integration relative tolerance")
      ->check(CLI::PositiveNumber);
  app.add_option("--mc-check", fl.mc_check, "Monte Carlo samples for the oracle block");
  app.add_option("--seed", fl.seed, "oracle seed");

  auto* analyze = app.add_subcommand("analyze", "full analysis pipeline");
  auto* example = app.add_subcommand("example", "list presets or analyze one");
  example->add_option("name", fl.example_name, "preset name");
  auto* heval = app.add_subcommand("h-eval", "evaluate h for a vector or a PL function");
  heval->add_option("--lambda", fl.lambda, "comma-separated vector");
  heval->add_option("--f", fl.f, "PL function");
  auto* minimize = app.add_subcommand("minimize", "minimize h over the dominant cone");
  auto* filtration = app.add_subcommand("filtration", "filtration table s_k");
  filtration->add_option("--f", fl.f, "PL function");
  filtration->add_option("--k", fl.k, "degree");
  filtration->add_option("--values", fl.values, "explicit table values");
  auto* approx = app.add_subcommand("approx", "rational approximation f_p");
  approx->add_option("--f", fl.f, "PL function");
  approx->add_option("--p", fl.p, "denominator");
  approx->add_option("--q", fl.q, "grid refinement (default 4p)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    bool unknown = dynamic_cast<const CLI::ExtrasError*>(&e) != nullptr ||
                   dynamic_cast<const CLI::RequiredError*>(&e) != nullptr;
    ErrorKind kind = unknown && app.get_subcommands().empty() ? ErrorKind::UnknownSubcommand
                                                               : ErrorKind::InvalidArgument;
    return fail(Error(kind, kind == ErrorKind::UnknownSubcommand ? std::string("unknown or missing subcommand") : std::string(e.what())), "arguments", fl.format == "text" ? "text" : "json");
  }

  try {
    Json out;
    if (analyze->parsed()) {
      Json input = load_input(fl, nullptr);
      out = run_analyze(input, options(fl, input));
    } else if (example->parsed()) {
      out = cmd_example(fl);
    } else if (heval->parsed()) {
      out = cmd_h_eval(fl);
    } else if (minimize->parsed()) {
      out = cmd_minimize(fl);
    } else if (filtration->parsed()) {
      out = cmd_filtration(fl);
    } else if (approx->parsed()) {
      out = cmd_approx(fl);
    }
    emit(out, fl.format);
    return 0;
  } catch (const StageError& e) {
    return fail(e, e.stage(), fl.format);
  } catch (const Error& e) {
    return fail(e, "run", fl.format);
  }
}
