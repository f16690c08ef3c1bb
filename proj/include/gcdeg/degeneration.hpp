#pragma once

// Stability verdicts and the combinatorial description of the central fibre
// of the optimal degeneration.

#include <cmath>
#include <string>
#include <vector>

#include "gcdeg/error.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/minimize.hpp"
#include "gcdeg/rootsys.hpp"

namespace gcdeg {

enum class KeVerdict { Stable, SemistableBoundary, Unstable };

inline std::string to_string(KeVerdict v) {
  switch (v) {
    case KeVerdict::Stable: return "Stable";
    case KeVerdict::SemistableBoundary: return "SemistableBoundary";
    case KeVerdict::Unstable: return "Unstable";
  }
  return "?";
}

struct KeTestResult {
  KeVerdict verdict = KeVerdict::Unstable;
  Vec b0;
  Vec b0_minus_2rho;
  Vec coefficients;  // simple-root coefficients of b(0) - 2 rho
  double residual = 0.0;  // part of b(0) - 2 rho outside the root span
  double tol = 1e-8;
  // same test against 4 rho
  KeVerdict verdict_4rho = KeVerdict::Unstable;
  Vec coefficients_4rho;
};

namespace detail {

inline KeVerdict classify_cone(const Vec& coef, double residual, double tol) {
  if (residual > tol) return KeVerdict::Unstable;
  bool strict = true;
  for (double c : coef) {
    if (c < -tol) return KeVerdict::Unstable;
    if (c <= tol) strict = false;
  }
  return strict ? KeVerdict::Stable : KeVerdict::SemistableBoundary;
}

}  // namespace detail

/// Barycenter test at lam = 0: is b(0) - 2 rho in the open cone of simple roots?
inline KeTestResult ke_test(const HFunctional& hf, double tol = 1e-8) {
  const RootSystem& rs = hf.root_system();
  KeTestResult out;
  out.tol = tol;
  auto g = hf.barycenter_grad_hess(Vec(rs.dim(), 0.0));
  out.b0 = g.b;
  out.b0_minus_2rho = g.grad;
  std::vector<std::size_t> all(rs.rank());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto [coef, resid] = rs.decompose(g.grad, all);
  out.coefficients = coef;
  out.residual = resid;
  out.verdict = detail::classify_cone(coef, resid, tol);
  auto [coef4, resid4] = rs.decompose(g.b - scaled(rs.two_rho(), 2.0), all);
  out.coefficients_4rho = coef4;
  out.verdict_4rho = detail::classify_cone(coef4, resid4, tol);
  return out;
}

struct CentralFibreReport {
  Vec lambda0;
  std::vector<std::size_t> active_roots;     // simple-root indices
  std::vector<std::size_t> levi_roots;       // indices into positive_roots()
  std::vector<std::size_t> valuation_cone;   // simple roots bounding the cone
  bool horospherical = false;
  std::vector<std::size_t> isotropy_roots;   // positive roots outside the Levi
  std::size_t aut_rank = 0;
  std::size_t h0_diagonal_dim = 0;           // dim of diag(a) part orthogonal to lambda0
  bool h0_has_lambda_line = false;
  bool counts_consistent = false;
  Mat<double> moment_polytope;
};

/// Central fibre data for the minimizer: Levi roots are the positive roots
/// supported on the active walls.
inline CentralFibreReport central_fibre_report(const RootSystem& rs, const MinimizerReport& rep,
                                               double tol_wall = 1e-7) {
  CentralFibreReport out;
  out.lambda0 = rep.lambda0;
  const double scale = 1.0 + norm(rep.lambda0);
  std::vector<bool> active(rs.rank(), false);
  for (std::size_t i = 0; i < rs.rank(); ++i) {
    if (std::abs(rs.pair_simple(i, rep.lambda0)) <= tol_wall * scale) {
      active[i] = true;
      out.active_roots.push_back(i);
    }
  }
  for (std::size_t r = 0; r < rs.positive_roots().size(); ++r) {
    const auto& coeffs = rs.positive_roots()[r].coeffs;
    bool inside = true;
    for (std::size_t i = 0; i < coeffs.size(); ++i)
      if (coeffs[i] != 0 && !active[i]) inside = false;
    if (inside)
      out.levi_roots.push_back(r);
    else
      out.isotropy_roots.push_back(r);
  }
  out.valuation_cone = out.active_roots;
  out.horospherical = out.levi_roots.empty();
  out.aut_rank = rs.dim() - out.active_roots.size();
  const bool zero = norm(rep.lambda0) <= tol_wall;
  out.h0_has_lambda_line = !zero;
  out.h0_diagonal_dim = zero ? rs.dim() : rs.dim() - 1;
  out.counts_consistent =
      rs.positive_roots().size() == out.levi_roots.size() + out.isotropy_roots.size() &&
      out.horospherical == out.active_roots.empty();
  return out;
}

enum class VerdictKind {
  KahlerEinstein,
  KRSolitonProduct,
  ModifiedKStable,
  ModifiedKSemistableOnly,
  Indeterminate
};

inline std::string to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::KahlerEinstein: return "KahlerEinstein";
    case VerdictKind::KRSolitonProduct: return "KRSolitonProduct";
    case VerdictKind::ModifiedKStable: return "ModifiedKStable";
    case VerdictKind::ModifiedKSemistableOnly: return "ModifiedKSemistableOnly";
    case VerdictKind::Indeterminate: return "Indeterminate";
  }
  return "?";
}

struct StabilityVerdict {
  VerdictKind kind = VerdictKind::Indeterminate;
  std::vector<Multiplier> multipliers;
  double kkt_residual = 0.0;
  double min_multiplier = 0.0;
  std::string flow_statement;
};

inline StabilityVerdict stability_verdict(const RootSystem& rs, const MinimizerReport& rep,
                                          const CentralFibreReport& fibre) {
  if (rep.lambda0 != fibre.lambda0 || rep.active_set != fibre.active_roots)
    throw Error(ErrorKind::InconsistentInputs, "minimizer and central fibre reports disagree");
  const double tol = rep.options.tol_kkt;
  StabilityVerdict v;
  v.multipliers = rep.multipliers;
  v.kkt_residual = rep.kkt_residual;
  v.min_multiplier = rep.multipliers.empty() ? 0.0 : rep.multipliers.front().value;
  for (const auto& m : rep.multipliers) v.min_multiplier = std::min(v.min_multiplier, m.value);

  bool negative = false, near_zero = false;
  for (const auto& m : rep.multipliers) {
    if (m.value < -tol) negative = true;
    if (std::abs(m.value) <= tol) near_zero = true;
  }
  const bool lambda_zero = norm(rep.lambda0) <= rep.options.tol_wall;
  const bool central = fibre.active_roots.size() == rs.rank();

  if (rep.kkt_residual > tol || negative) {
    v.kind = VerdictKind::Indeterminate;
  } else if (near_zero) {
    v.kind = VerdictKind::ModifiedKSemistableOnly;
    v.flow_statement = "a multiplier vanishes: modified K-semistable only; the polystable step is not computed";
  } else if (lambda_zero) {
    v.kind = VerdictKind::KahlerEinstein;
    v.flow_statement = "admits a Kahler-Einstein metric; the Kahler-Ricci flow converges to it";
  } else if (central) {
    v.kind = VerdictKind::KRSolitonProduct;
    v.flow_statement = "product test configuration: Kahler-Ricci soliton with vector field Lambda0";
  } else {
    v.kind = VerdictKind::ModifiedKStable;
    v.flow_statement = "Kahler-Ricci flow converges to (X0, Lambda0)";
  }
  return v;
}

/// Symbolic names of the h0 generators.
inline std::vector<std::string> h0_lines(const RootSystem& rs, const CentralFibreReport& f) {
  std::vector<std::string> out;
  out.push_back("diag(a) orthogonal to Lambda0: dim " + std::to_string(f.h0_diagonal_dim));
  if (f.h0_has_lambda_line) out.push_back("line (Lambda0, 0)");
  for (auto r : f.levi_roots) {
    const auto& l = rs.positive_roots()[r].label;
    out.push_back("(X_" + l + ", X_" + l + ")");
    out.push_back("(X_-" + l + ", X_-" + l + ")");
  }
  for (auto r : f.isotropy_roots) {
    const auto& l = rs.positive_roots()[r].label;
    out.push_back("(0, X_" + l + ")");
    out.push_back("(X_-" + l + ", 0)");
  }
  return out;
}

}  // namespace gcdeg
