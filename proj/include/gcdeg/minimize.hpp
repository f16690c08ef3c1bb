#pragma once

// Minimization of h over the closed dominant cone by enumerating its faces
// and running damped Newton on each face subspace.

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcdeg/error.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/rootsys.hpp"

namespace gcdeg {

struct MinimizeOptions {
  double tol_wall = 1e-7;
  double tol_kkt = 1e-8;
  double grad_tol = 1e-10;
  double armijo = 1e-4;
  int max_iterations = 100;
  double max_exponent = 500.0;  // reject a face once |lam| * diam(P) exceeds this
};

struct Multiplier {
  std::size_t index;
  double value;
};

struct KktResult {
  std::vector<Multiplier> multipliers;
  double residual = 0.0;
};

/// Least-squares multipliers with b - 2 rho = sum_{i in active} m_i alpha_i.
inline KktResult kkt_multipliers(const RootSystem& rs, const Vec& b,
                                 const std::vector<std::size_t>& active) {
  if (!active.empty()) {
    Mat<double> rows;
    for (auto i : active) rows.push_back(rs.simple_roots()[i].vec);
    if (rank(rows) < active.size())
      throw Error(ErrorKind::DependentActiveRoots, "active simple roots are linearly dependent");
  }
  auto [coef, resid] = rs.decompose(b - rs.two_rho(), active);
  KktResult out;
  for (std::size_t j = 0; j < active.size(); ++j) out.multipliers.push_back({active[j], coef[j]});
  out.residual = resid;
  return out;
}

struct FaceResult {
  std::vector<std::size_t> face;
  Vec lambda;
  Vec b;
  double h = 0.0;
  double projected_grad = 0.0;
  int iterations = 0;
  bool converged = false;
  bool feasible = false;
  bool accepted = false;
  KktResult kkt;
  std::string status;
};

struct MinimizerReport {
  Vec lambda0;
  std::vector<std::size_t> active_set;
  double grad_norm = 0.0;  // projected onto the accepted face
  std::vector<Multiplier> multipliers;
  double kkt_residual = 0.0;
  Vec b_lambda0;
  double h_min = 0.0;
  int iterations = 0;
  int face_visits = 0;
  std::vector<std::size_t> accepted_face;
  std::vector<FaceResult> faces;
  MinimizeOptions options;
};

/// True when h grows along every ray of the dominant cone: the cone
/// {d : <alpha_i, d> >= 0, <v - 2 rho, d> <= 0 for all vertices v} is {0}.
inline bool coercive(const RootSystem& rs, const ConvexPolytope& p) {
  const std::size_t n = rs.dim();
  if (rs.is_exact()) {
    Mat<Rational> rows;
    for (const auto& a : rs.simple_roots()) rows.push_back(scaled(*a.exact, Rational(-1)));
    for (const auto& v : p.vertices()) rows.push_back(v - *rs.exact_two_rho());
    return cone_is_trivial(rows, n);
  }
  Mat<double> rows;
  for (const auto& a : rs.simple_roots()) rows.push_back(scaled(a.vec, -1.0));
  for (const auto& v : p.vertices_double()) rows.push_back(v - rs.two_rho());
  return cone_is_trivial(rows, n);
}

namespace detail {

/// Orthonormal basis (columns) of {x : <alpha_i, x> = 0, i in face}.
inline Eigen::MatrixXd face_basis(const RootSystem& rs, const std::vector<std::size_t>& face) {
  const std::size_t n = rs.dim();
  if (face.empty()) return Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd a(face.size(), n);
  for (std::size_t r = 0; r < face.size(); ++r)
    for (std::size_t c = 0; c < n; ++c) a(r, c) = rs.simple_roots()[face[r]].vec[c];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Index r = static_cast<Eigen::Index>(face.size());
  return svd.matrixV().rightCols(static_cast<Eigen::Index>(n) - r);
}

inline Vec to_vec(const Eigen::VectorXd& v) { return Vec(v.data(), v.data() + v.size()); }

inline Eigen::VectorXd to_eigen(const Vec& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd to_eigen(const Mat<double>& m) {
  Eigen::MatrixXd out(m.size(), m.empty() ? 0 : m.front().size());
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m[i].size(); ++j) out(i, j) = m[i][j];
  return out;
}

inline double polytope_diameter(const ConvexPolytope& p) {
  double d = 0.0;
  for (const auto& a : p.vertices_double())
    for (const auto& b : p.vertices_double()) d = std::max(d, norm(a - b));
  return d;
}

}  // namespace detail

/// Damped Newton for h restricted to the face subspace, started at 0.
inline FaceResult solve_face(const HFunctional& hf, const std::vector<std::size_t>& face,
                             const MinimizeOptions& opts, Vec start = {}) {
  const RootSystem& rs = hf.root_system();
  FaceResult fr;
  fr.face = face;
  const Eigen::MatrixXd basis = detail::face_basis(rs, face);
  const Eigen::Index m = basis.cols();
  const double diam = detail::polytope_diameter(hf.polytope());
  const double lam_cap = opts.max_exponent / std::max(diam, 1e-300);

  Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
  if (!start.empty()) u = basis.transpose() * detail::to_eigen(start);
  auto lam_of = [&](const Eigen::VectorXd& uu) { return detail::to_vec(basis * uu); };

  auto g = hf.barycenter_grad_hess(lam_of(u));
  for (int it = 0; it <= opts.max_iterations; ++it) {
    fr.iterations = it;
    Eigen::VectorXd grad_u = basis.transpose() * detail::to_eigen(g.grad);
    fr.projected_grad = grad_u.norm();
    if (m == 0 || fr.projected_grad <= opts.grad_tol) {
      fr.converged = true;
      break;
    }
    if (it == opts.max_iterations) break;
    Eigen::MatrixXd hess_u = basis.transpose() * detail::to_eigen(g.hess) * basis;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess_u);
    Eigen::VectorXd step = ldlt.solve(-grad_u);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = -grad_u;
    double slope = grad_u.dot(step);
    if (slope >= 0) {
      step = -grad_u;
      slope = -grad_u.squaredNorm();
    }
    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      Eigen::VectorXd trial = u + t * step;
      if (trial.norm() > lam_cap) {
        t *= 0.5;
        continue;
      }
      double ht = hf.h_raw(lam_of(trial));
      if (std::isfinite(ht) && ht <= g.h + opts.armijo * t * slope) {
        u = trial;
        moved = true;
        break;
      }
      t *= 0.5;
    }
    if (!moved) {
      // no decrease possible at double precision; accept if the gradient is tiny
      fr.converged = fr.projected_grad <= 1e3 * opts.grad_tol;
      fr.status = fr.converged ? "stalled at precision floor" : "line search failed";
      break;
    }
    g = hf.barycenter_grad_hess(lam_of(u));
    if (u.norm() >= 0.999 * lam_cap) {
      fr.status = "diverging";
      break;
    }
  }
  fr.lambda = lam_of(u);
  fr.b = g.b;
  fr.h = g.h;
  return fr;
}

/// Unique minimizer of h over the closed dominant cone.
inline MinimizerReport minimize_h(const HFunctional& hf, const MinimizeOptions& opts = {}) {
  const RootSystem& rs = hf.root_system();
  if (!coercive(rs, hf.polytope()))
    throw Error(ErrorKind::DivergentMinimizer,
                "h is not coercive on the dominant cone: the minimizer is at infinity");
  const std::size_t r = rs.rank();
  MinimizerReport rep;
  rep.options = opts;

  // faces ordered by size, then lexicographically
  std::vector<std::vector<std::size_t>> faces;
  for (std::size_t k = 0; k <= r; ++k)
    for_each_combination(r, k, [&](const std::vector<std::size_t>& idx) { faces.push_back(idx); });

  for (const auto& face : faces) {
    FaceResult fr = solve_face(hf, face, opts);
    ++rep.face_visits;
    rep.iterations += fr.iterations;
    if (!fr.converged) {
      if (fr.status.empty()) fr.status = "not converged";
      rep.faces.push_back(std::move(fr));
      continue;
    }
    const double scale = 1.0 + norm(fr.lambda);
    fr.feasible = true;
    for (std::size_t j = 0; j < r; ++j) {
      if (std::find(face.begin(), face.end(), j) != face.end()) continue;
      if (rs.pair_simple(j, fr.lambda) < -opts.tol_wall * scale) fr.feasible = false;
    }
    fr.kkt = kkt_multipliers(rs, fr.b, face);
    bool signs = std::all_of(fr.kkt.multipliers.begin(), fr.kkt.multipliers.end(),
                             [&](const Multiplier& mu) { return mu.value >= -opts.tol_kkt; });
    fr.accepted = fr.feasible && signs && fr.kkt.residual <= opts.tol_kkt;
    if (fr.status.empty())
      fr.status = fr.accepted ? "accepted" : (!fr.feasible ? "infeasible" : "negative multiplier");
    rep.faces.push_back(std::move(fr));
  }

  const FaceResult* best = nullptr;
  for (const auto& fr : rep.faces)
    if (fr.accepted) {
      best = &fr;
      break;
    }
  if (!best) {
    std::ostringstream msg;
    msg << "no face accepted;";
    for (const auto& fr : rep.faces) {
      msg << " {";
      for (std::size_t i = 0; i < fr.face.size(); ++i) msg << (i ? "," : "") << fr.face[i] + 1;
      msg << "}: " << fr.status << " (kkt residual " << fr.kkt.residual << ")";
    }
    throw Error(ErrorKind::NoFaceAccepted, msg.str());
  }

  rep.accepted_face = best->face;
  rep.lambda0 = best->lambda;
  rep.b_lambda0 = best->b;
  rep.h_min = best->h;
  rep.grad_norm = best->projected_grad;
  const double scale = 1.0 + norm(rep.lambda0);
  for (std::size_t i = 0; i < r; ++i)
    if (std::abs(rs.pair_simple(i, rep.lambda0)) <= opts.tol_wall * scale) rep.active_set.push_back(i);
  auto kkt = kkt_multipliers(rs, rep.b_lambda0, rep.active_set);
  rep.multipliers = kkt.multipliers;
  rep.kkt_residual = kkt.residual;
  return rep;
}

}  // namespace gcdeg
