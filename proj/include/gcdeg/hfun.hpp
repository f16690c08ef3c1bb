#pragma once

// Reduced H-functional of a group compactification and its piecewise-linear
// generalization:
//   h(lam) = ln int_{P+} e^{<lam, y - 2 rho>} pi dy - ln V,   V = int_{P+} pi dy
//   h(f)   = ln (1/V) int_{P+} e^{-f(y) + f(2 rho)} pi dy

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gcdeg/error.hpp"
#include "gcdeg/expint.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/polytope.hpp"
#include "gcdeg/rootsys.hpp"

namespace gcdeg {

/// f(y) = min_a (c_a - <lambda_a, y>)
class PLConcave {
 public:
  struct Piece {
    double c = 0.0;
    Vec lambda;
    std::optional<Rational> exact_c;
    std::optional<RVec> exact_lambda;
    bool redundant = false;
  };

  PLConcave() = default;
  explicit PLConcave(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw Error(ErrorKind::SchemaError, "PL function needs at least one piece");
    const std::size_t d = pieces_.front().lambda.size();
    for (auto& p : pieces_) {
      if (p.lambda.size() != d) throw Error(ErrorKind::SchemaError, "piece dimension mismatch");
      if (p.exact_c) p.c = to_double(*p.exact_c);
      if (p.exact_lambda) p.lambda = to_double(*p.exact_lambda);
    }
  }

  static PLConcave from_doubles(const std::vector<std::pair<double, Vec>>& pieces) {
    std::vector<Piece> ps;
    for (const auto& [c, l] : pieces) ps.push_back(Piece{c, l, std::nullopt, std::nullopt, false});
    return PLConcave(std::move(ps));
  }

  static PLConcave from_rationals(const std::vector<std::pair<Rational, RVec>>& pieces) {
    std::vector<Piece> ps;
    for (const auto& [c, l] : pieces) ps.push_back(Piece{to_double(c), to_double(l), c, l, false});
    return PLConcave(std::move(ps));
  }

  std::size_t dim() const { return pieces_.front().lambda.size(); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  std::vector<Piece>& pieces() { return pieces_; }

  bool rational() const {
    for (const auto& p : pieces_)
      if (!p.exact_c || !p.exact_lambda) return false;
    return true;
  }

  /// Exact data of a piece; dyadic values of the doubles when no exact data.
  Rational exact_c(std::size_t a) const {
    return pieces_[a].exact_c ? *pieces_[a].exact_c : from_double(pieces_[a].c);
  }
  RVec exact_lambda(std::size_t a) const {
    return pieces_[a].exact_lambda ? *pieces_[a].exact_lambda : from_double(pieces_[a].lambda);
  }

  double operator()(const Vec& y) const {
    const auto& p = pieces_[argmin(y)];
    return p.c - dot(p.lambda, y);
  }

  Rational operator()(const RVec& y) const {
    Rational best = exact_c(0) - dot(exact_lambda(0), y);
    for (std::size_t a = 1; a < pieces_.size(); ++a)
      best = std::min(best, Rational(exact_c(a) - dot(exact_lambda(a), y)));
    return best;
  }

  /// Lowest-index piece attaining the minimum at y.
  std::size_t argmin(const Vec& y) const {
    std::size_t best = 0;
    double bv = pieces_[0].c - dot(pieces_[0].lambda, y);
    for (std::size_t a = 1; a < pieces_.size(); ++a) {
      double v = pieces_[a].c - dot(pieces_[a].lambda, y);
      if (v < bv) {
        bv = v;
        best = a;
      }
    }
    return best;
  }

  std::size_t argmin_exact(const RVec& y) const {
    std::size_t best = 0;
    Rational bv = exact_c(0) - dot(exact_lambda(0), y);
    for (std::size_t a = 1; a < pieces_.size(); ++a) {
      Rational v = exact_c(a) - dot(exact_lambda(a), y);
      if (v < bv) {
        bv = v;
        best = a;
      }
    }
    return best;
  }

  /// Adds a constant to every piece.
  PLConcave shifted(const Rational& shift) const {
    PLConcave out = *this;
    for (std::size_t a = 0; a < pieces_.size(); ++a) {
      auto& p = out.pieces_[a];
      if (p.exact_c) {
        p.exact_c = *p.exact_c + shift;
        p.c = to_double(*p.exact_c);
      } else {
        p.c = to_double(from_double(p.c) + shift);
      }
    }
    return out;
  }

 private:
  std::vector<Piece> pieces_;
};

/// Checks <alpha_i, lambda_a> >= 0 for every piece.
inline void check_dominant_pieces(const RootSystem& rs, const PLConcave& f) {
  for (std::size_t a = 0; a < f.pieces().size(); ++a) {
    bool ok;
    if (rs.is_exact())
      ok = rs.is_dominant_exact(f.exact_lambda(a));
    else
      ok = rs.is_dominant(f.pieces()[a].lambda, 1e-12 * (1.0 + norm(f.pieces()[a].lambda)));
    if (!ok)
      throw Error(ErrorKind::NotDominantPiece,
                  "piece " + std::to_string(a) + " has a non-dominant slope");
  }
}

/// Cell {y in domain : piece a attains the min}, nullopt when not
/// full-dimensional. Equal pieces are assigned to the lowest index.
inline std::optional<ConvexPolytope> linearity_cell(const PLConcave& f, std::size_t a,
                                                    const ConvexPolytope& domain) {
  auto hs = domain.halfspaces();
  const RVec la = f.exact_lambda(a);
  const Rational ca = f.exact_c(a);
  for (std::size_t b = 0; b < f.pieces().size(); ++b) {
    if (b == a) continue;
    RVec n = f.exact_lambda(b) - la;
    Rational off = f.exact_c(b) - ca;
    bool zero = std::all_of(n.begin(), n.end(), [](const Rational& x) { return x == 0; });
    if (zero) {
      if (off < 0 || (off == 0 && b < a)) return std::nullopt;
      continue;
    }
    hs.push_back(HalfSpace{n, off, false, "piece " + std::to_string(b)});
  }
  return ConvexPolytope::cell(std::move(hs), domain.dim());
}

/// Flags pieces that never attain the min on a full-dimensional subset.
inline void mark_redundant_pieces(PLConcave& f, const ConvexPolytope& domain) {
  for (std::size_t a = 0; a < f.pieces().size(); ++a)
    f.pieces()[a].redundant = !linearity_cell(f, a, domain).has_value();
}

struct HBreakdown {
  double h = 0.0;
  double s_na = 0.0;
  double l_na = 0.0;
  double log_normalization = 0.0;  // ln V
  std::string source;              // "vector" or "pl"
};

struct GradHess {
  Vec b;
  Vec grad;
  Mat<double> hess;
  double h = 0.0;
};

class HFunctional {
 public:
  HFunctional(RootSystem rs, ConvexPolytope p_plus, IntegrationOptions opts = {})
      : rs_(std::move(rs)), p_(std::move(p_plus)), opts_(opts) {
    if (p_.dim() != rs_.dim()) throw Error(ErrorKind::SchemaError, "polytope and root system dimensions differ");
    pi_ = dh_density(rs_);
    engine_ = std::make_shared<MomentEngine>(p_, pi_, opts_);
    log_v_ = engine_->mass(Vec(rs_.dim(), 0.0)).log();
  }

  const RootSystem& root_system() const { return rs_; }
  const ConvexPolytope& polytope() const { return p_; }
  const Polynomial& density() const { return pi_; }
  const MomentEngine& engine() const { return *engine_; }
  const IntegrationOptions& options() const { return opts_; }
  double log_volume() const { return log_v_; }

  bool two_rho_inside() const {
    if (rs_.is_exact()) return p_.contains(*rs_.exact_two_rho());
    return p_.contains(rs_.two_rho(), 1e-12);
  }

  void require_dominant(const Vec& lam) const {
    if (lam.size() != rs_.dim()) throw Error(ErrorKind::InvalidArgument, "lambda dimension mismatch");
    if (!rs_.is_dominant(lam, 1e-12 * (1.0 + norm(lam))))
      throw Error(ErrorKind::NotDominant, "lambda is not in the closed dominant chamber");
  }

  /// h without the chamber check (convex on all of a).
  double h_raw(const Vec& lam) const {
    return combine({{engine_->mass(lam), rs_.pair_two_rho(lam)}}) - log_v_;
  }

  HBreakdown h_vector(const Vec& lam) const {
    require_dominant(lam);
    HBreakdown out;
    out.source = "vector";
    out.log_normalization = log_v_;
    out.h = h_raw(lam);
    out.l_na = -rs_.pair_two_rho(lam);
    out.s_na = out.l_na - out.h;
    return out;
  }

  HBreakdown h_plfunction(const PLConcave& f) const {
    if (f.dim() != rs_.dim()) throw Error(ErrorKind::InvalidArgument, "PL function dimension mismatch");
    if (!two_rho_inside())
      throw Error(ErrorKind::TwoRhoOutsideDomain, "2 rho is outside the moment polytope");
    check_dominant_pieces(rs_, f);
    const RVec two_rho = rs_.is_exact() ? *rs_.exact_two_rho() : from_double(rs_.two_rho());
    const std::size_t star = f.argmin_exact(two_rho);
    const Rational f2rho = f(two_rho);
    std::vector<std::pair<LogScaled, double>> parts;
    if (f.pieces().size() == 1) {
      // offset = c - f(2 rho) = <lambda, 2 rho>
      parts.push_back({engine_->mass(f.pieces()[0].lambda), rs_.pair_two_rho(f.pieces()[0].lambda)});
    } else {
      for (std::size_t a = 0; a < f.pieces().size(); ++a) {
        auto cell = linearity_cell(f, a, p_);
        if (!cell) continue;
        Rational offset = f.exact_c(a) - f.exact_c(star) + dot(f.exact_lambda(star), two_rho);
        MomentEngine eng(*cell, pi_, opts_, static_cast<int>(a));
        parts.push_back({eng.mass(f.pieces()[a].lambda), to_double(offset)});
      }
    }
    HBreakdown out;
    out.source = "pl";
    out.log_normalization = log_v_;
    out.h = combine(parts) - log_v_;
    out.l_na = to_double(f2rho);
    out.s_na = out.l_na - out.h;
    return out;
  }

  /// b(lam), b - 2 rho and the covariance of e^{<lam,y>} pi dy.
  GradHess barycenter_grad_hess(const Vec& lam) const {
    auto m = engine_->moments(lam);
    GradHess g;
    g.b = m.barycenter();
    g.grad = g.b - rs_.two_rho();
    g.hess = m.covariance();
    g.h = combine({{LogScaled{m.z_scaled, m.log_scale}, rs_.pair_two_rho(lam)}}) - log_v_;
    return g;
  }

 private:
  /// ln sum_i mass_i * e^{-offset_i}
  static double combine(const std::vector<std::pair<LogScaled, double>>& parts) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& [m, off] : parts) top = std::max(top, m.log_scale - off);
    KahanSum s;
    for (const auto& [m, off] : parts) s.add(m.mantissa * std::exp((m.log_scale - off) - top));
    return std::log(s.value()) + top;
  }

  RootSystem rs_;
  ConvexPolytope p_;
  IntegrationOptions opts_;
  Polynomial pi_;
  std::shared_ptr<MomentEngine> engine_;
  double log_v_ = 0.0;
};

}  // namespace gcdeg
