#pragma once

// Concave piecewise-linear functions as equivariant R-test configurations:
// filtration tables s_k(lambda) = k f(lambda / k) with their structural
// checks, semivaluations, and the rational approximation f_p.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcdeg/error.hpp"
#include "gcdeg/hfun.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/polytope.hpp"
#include "gcdeg/rootsys.hpp"

namespace gcdeg {

/// Single piece f(y) = c0 - <lam, y>.
inline PLConcave from_vector(const RootSystem& rs, const Vec& lam, double c0 = 0.0) {
  if (lam.size() != rs.dim()) throw Error(ErrorKind::InvalidArgument, "lambda dimension mismatch");
  if (!rs.is_dominant(lam, 1e-12 * (1.0 + norm(lam))))
    throw Error(ErrorKind::NotDominant, "lambda is not in the closed dominant chamber");
  return PLConcave::from_doubles({{c0, lam}});
}

inline PLConcave from_vector_exact(const RootSystem& rs, const RVec& lam, const Rational& c0) {
  if (lam.size() != rs.dim()) throw Error(ErrorKind::InvalidArgument, "lambda dimension mismatch");
  bool dominant = rs.is_exact() ? rs.is_dominant_exact(lam)
                                : rs.is_dominant(to_double(lam), 1e-12 * (1.0 + norm(to_double(lam))));
  if (!dominant) throw Error(ErrorKind::NotDominant, "lambda is not in the closed dominant chamber");
  return PLConcave::from_rationals({{c0, lam}});
}

/// One non-redundant piece on the domain: the central fibre is irreducible.
inline bool irreducible_central_fibre(const PLConcave& f, const ConvexPolytope& domain) {
  std::size_t live = 0;
  for (std::size_t a = 0; a < f.pieces().size(); ++a)
    if (linearity_cell(f, a, domain)) ++live;
  return live == 1;
}

struct FiltrationEntry {
  RVec lambda;
  Rational s;
};

struct Violation {
  std::string kind;  // "concavity", "dominance", "superadditivity"
  std::vector<RVec> points;
  Rational lhs;  // should be >= rhs
  Rational rhs;
};

struct FiltrationTable {
  long k = 1;
  bool rational = true;
  std::vector<FiltrationEntry> entries;
  std::vector<Rational> gamma_values;   // distinct s values, ascending
  std::vector<Rational> gamma_shifted;  // minus the minimum
  int gamma_rank = 0;
  std::string gamma_rank_kind;  // "exact" or "numeric"
  std::vector<Violation> concavity_violations;
  std::vector<Violation> dominance_violations;
  std::vector<Violation> w_violations;

  std::optional<std::size_t> find(const RVec& lambda) const {
    auto it = index_.find(lambda);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  void rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < entries.size(); ++i) index_[entries[i].lambda] = i;
  }

 private:
  std::map<RVec, std::size_t> index_;
};

namespace detail {

/// Exact simple-root coordinates c of v (v = sum c_i alpha_i), nullopt
/// outside the root span.
class SimpleCoordinates {
 public:
  explicit SimpleCoordinates(const RootSystem& rs) : rs_(rs) {
    const std::size_t r = rs.rank();
    for (const auto& a : rs.simple_roots()) rows_.push_back(a.exact ? *a.exact : from_double(a.vec));
    Mat<Rational> gram(r, RVec(r));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) gram[i][j] = dot(rows_[i], rows_[j]);
    inv_.assign(r, RVec(r));
    for (std::size_t j = 0; j < r; ++j) {
      RVec e(r, Rational(0));
      e[j] = 1;
      auto col = solve_square(gram, e);
      for (std::size_t i = 0; i < r; ++i) inv_[i][j] = (*col)[i];
    }
  }

  std::optional<RVec> operator()(const RVec& v) const {
    const std::size_t r = rows_.size();
    RVec av(r);
    for (std::size_t i = 0; i < r; ++i) av[i] = dot(rows_[i], v);
    RVec c(r, Rational(0));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < r; ++j) c[i] += inv_[i][j] * av[j];
    RVec back(v.size(), Rational(0));
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t k = 0; k < v.size(); ++k) back[k] += c[i] * rows_[i][k];
    if (back != v) return std::nullopt;
    return c;
  }

 private:
  const RootSystem& rs_;
  Mat<Rational> rows_;
  Mat<Rational> inv_;
};

/// Integer relation search by LLL on [I | N x]; returns true when x[0] is a
/// small-integer combination of the others within tol.
inline bool integer_relation_with_first(const Vec& x, double tol) {
  const std::size_t n = x.size();
  if (n == 1) return std::abs(x[0]) <= tol;
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return true;
  const double big = 1.0 / tol;
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    b(i, i) = 1.0;
    b(i, n) = big * x[i] / scale;
  }
  auto gram_schmidt = [&](Eigen::MatrixXd& bs, Eigen::MatrixXd& mu) {
    bs = b;
    mu = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        mu(i, j) = b.row(i).dot(bs.row(j)) / bs.row(j).squaredNorm();
        bs.row(i) -= mu(i, j) * bs.row(j);
      }
    }
  };
  Eigen::MatrixXd bs, mu;
  gram_schmidt(bs, mu);
  std::size_t k = 1;
  for (int guard = 0; k < n && guard < 10000; ++guard) {
    for (std::size_t j = k; j-- > 0;) {
      double q = std::round(mu(k, j));
      if (q != 0.0) {
        b.row(k) -= q * b.row(j);
        gram_schmidt(bs, mu);
      }
    }
    if (bs.row(k).squaredNorm() >= (0.75 - mu(k, k - 1) * mu(k, k - 1)) * bs.row(k - 1).squaredNorm()) {
      ++k;
    } else {
      b.row(k).swap(b.row(k - 1));
      gram_schmidt(bs, mu);
      k = std::max<std::size_t>(k - 1, 1);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    double c0 = b(i, 0);
    if (c0 == 0.0) continue;
    double maxc = 0.0, resid = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      maxc = std::max(maxc, std::abs(b(i, j)));
      resid += b(i, j) * x[j];
    }
    if (maxc <= 1e4 && std::abs(resid) <= tol * scale * maxc * n) return true;
  }
  return false;
}

inline void fill_gamma(FiltrationTable& t) {
  std::vector<Rational> vals;
  for (const auto& e : t.entries) vals.push_back(e.s);
  std::sort(vals.begin(), vals.end());
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  t.gamma_values = vals;
  t.gamma_shifted.clear();
  for (const auto& v : vals) t.gamma_shifted.push_back(v - vals.front());
  if (t.rational) {
    // every difference is rational: the group is 0 or cyclic
    t.gamma_rank = vals.size() > 1 ? 1 : 0;
    t.gamma_rank_kind = "exact";
    return;
  }
  t.gamma_rank_kind = "numeric";
  Vec basis;
  const double tol = 1e-9;
  for (std::size_t i = 1; i < vals.size(); ++i) {
    double g = to_double(vals[i] - vals.front());
    Vec x{g};
    x.insert(x.end(), basis.begin(), basis.end());
    if (!integer_relation_with_first(x, tol)) basis.push_back(g);
    if (basis.size() >= 6) break;
  }
  t.gamma_rank = static_cast<int>(basis.size());
}

}  // namespace detail

/// Midpoint concavity and dominance monotonicity over all entry pairs.
inline void check_table(const RootSystem& rs, FiltrationTable& t) {
  t.concavity_violations.clear();
  t.dominance_violations.clear();
  t.w_violations.clear();
  detail::SimpleCoordinates coords(rs);
  const auto& e = t.entries;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      RVec mid = scaled(e[i].lambda + e[j].lambda, Rational(1, 2));
      if (auto m = t.find(mid)) {
        Rational avg = (e[i].s + e[j].s) / 2;
        if (e[*m].s < avg)
          t.concavity_violations.push_back({"concavity", {e[i].lambda, e[j].lambda, mid}, e[*m].s, avg});
      }
    }
  }
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (i == j) continue;
      // lambda_i = lambda_j - sum c alpha with c >= 0  =>  s_i >= s_j
      auto c = coords(e[j].lambda - e[i].lambda);
      if (!c) continue;
      if (!std::all_of(c->begin(), c->end(), [](const Rational& x) { return x >= 0; })) continue;
      if (e[i].s < e[j].s)
        t.dominance_violations.push_back({"dominance", {e[i].lambda, e[j].lambda}, e[i].s, e[j].s});
    }
  }
  for (const auto& en : e) {
    for (std::size_t i = 0; i < rs.rank(); ++i) {
      RVec mu = rs.is_exact() ? rs.reflect_exact(i, en.lambda) : from_double(rs.reflect(i, to_double(en.lambda)));
      if (mu == en.lambda) continue;
      if (auto m = t.find(mu); m && e[*m].s != en.s)
        t.w_violations.push_back({"w-compatibility", {en.lambda, mu}, e[*m].s, en.s});
    }
  }
}

/// Table of s_k(lambda) = k f(lambda / k) over k P+ intersected with the lattice.
inline FiltrationTable filtration_table(const RootSystem& rs, const ConvexPolytope& p_plus,
                                        const PLConcave& f, long k,
                                        const Mat<Rational>& basis = {}) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be >= 1");
  FiltrationTable t;
  t.k = k;
  t.rational = f.rational();
  const Rational kk(k);
  for (auto& lam : lattice_points(p_plus, k, basis)) {
    Rational s = kk * f(scaled(lam, Rational(1) / kk));
    t.entries.push_back({std::move(lam), s});
  }
  t.rebuild_index();
  detail::fill_gamma(t);
  check_table(rs, t);
  return t;
}

/// Table from explicit values (e.g. a filtration not coming from a concave f).
inline FiltrationTable filtration_table_from_values(const RootSystem& rs, long k,
                                                    const Mat<Rational>& points,
                                                    const std::vector<Rational>& values) {
  if (points.size() != values.size())
    throw Error(ErrorKind::SchemaError, "points and values differ in length");
  FiltrationTable t;
  t.k = k;
  t.rational = true;
  for (std::size_t i = 0; i < points.size(); ++i) t.entries.push_back({points[i], values[i]});
  std::sort(t.entries.begin(), t.entries.end(),
            [](const FiltrationEntry& a, const FiltrationEntry& b) { return a.lambda < b.lambda; });
  t.rebuild_index();
  detail::fill_gamma(t);
  check_table(rs, t);
  return t;
}

/// s_{l1 + l2}^{(k1 + k2)} >= s_{l1}^{(k1)} + s_{l2}^{(k2)} whenever the sum is in the table.
inline std::vector<Violation> check_superadditivity(const FiltrationTable& t1, const FiltrationTable& t2,
                                                    const FiltrationTable& t12) {
  std::vector<Violation> out;
  for (const auto& a : t1.entries) {
    for (const auto& b : t2.entries) {
      RVec sum = a.lambda + b.lambda;
      auto m = t12.find(sum);
      if (!m) continue;
      Rational rhs = a.s + b.s;
      if (t12.entries[*m].s < rhs)
        out.push_back({"superadditivity", {a.lambda, b.lambda}, t12.entries[*m].s, rhs});
    }
  }
  return out;
}

/// Value of the W-invariant extension of f at an arbitrary point.
inline double w_invariant_value(const RootSystem& rs, const PLConcave& f, const Vec& y) {
  return f(dominant_representative(rs, y).vector);
}

struct WeightedElement {
  std::vector<std::pair<RVec, long>> components;  // (mu, k)
};

/// Formal product: components (mu_i + nu_j, k_i + l_j).
inline WeightedElement product(const WeightedElement& a, const WeightedElement& b) {
  WeightedElement out;
  for (const auto& [mu, k] : a.components)
    for (const auto& [nu, l] : b.components) out.components.push_back({mu + nu, k + l});
  return out;
}

/// v_f(sigma) = min over components of k f(mu / k).
inline Rational semivaluation_eval(const RootSystem& rs, const ConvexPolytope& p_plus,
                                   const PLConcave& f, const WeightedElement& sigma) {
  if (sigma.components.empty()) throw Error(ErrorKind::InvalidArgument, "empty weighted element");
  std::optional<Rational> best;
  for (const auto& [mu, k] : sigma.components) {
    if (k < 1) throw Error(ErrorKind::ComponentOutsidePolytope, "component degree must be >= 1");
    RVec y = scaled(mu, Rational(1) / Rational(k));
    bool dominant = rs.is_exact() ? rs.is_dominant_exact(mu) : rs.is_dominant(to_double(mu), 1e-12);
    if (!p_plus.contains(y) || !dominant)
      throw Error(ErrorKind::ComponentOutsidePolytope, "component weight is outside k P+");
    Rational v = Rational(k) * f(y);
    if (!best || v < *best) best = v;
  }
  return *best;
}

struct ApproxResult {
  long p = 1;
  long q = 4;
  Mat<double> grid;
  Vec f_values;
  Vec g_values;   // ceil(p f) / p
  Vec fp_values;  // upper concave envelope of g
  double max_gap = 0.0;  // max (f_p - f)
  double min_gap = 0.0;  // min (f_p - f)
  PLConcave fp;          // min over the envelope planes found
  std::size_t lp_solves = 0;
};

namespace detail {

/// max sum w_j g_j  s.t.  sum w_j (x_j, 1) = (x_t, 1), w >= 0, by revised
/// simplex started from a basis containing column t. Returns the dual plane
/// (a, beta) with value <a, x> + beta.
class EnvelopeLP {
 public:
  EnvelopeLP(const Mat<double>& pts, const Vec& vals) : pts_(pts), vals_(vals) {
    d_ = pts.empty() ? 0 : pts.front().size();
    scale_ = 1.0;
    for (double v : vals) scale_ = std::max(scale_, std::abs(v));
  }

  Vec solve(std::size_t t, std::vector<std::size_t>& basis_hint) {
    const std::size_t m = d_ + 1;
    std::vector<std::size_t> basis = initial_basis(t, basis_hint);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(m);
    w(0) = 1.0;  // basis[0] == t
    const double tol = 1e-12 * scale_;
    int degenerate_run = 0;
    Eigen::VectorXd y(m);
    for (int iter = 0; iter < 100000; ++iter) {
      Eigen::MatrixXd bm = columns(basis);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(bm);
      Eigen::VectorXd gb(m);
      for (std::size_t i = 0; i < m; ++i) gb(i) = vals_[basis[i]];
      y = bm.transpose().partialPivLu().solve(gb);
      // pricing
      std::size_t enter = pts_.size();
      double best = tol;
      const bool bland = degenerate_run > 50;
      for (std::size_t j = 0; j < pts_.size(); ++j) {
        double r = vals_[j] - plane(y, pts_[j]);
        if (r > best) {
          best = r;
          enter = j;
          if (bland) break;
        }
      }
      if (enter == pts_.size()) break;
      Eigen::VectorXd col(m);
      for (std::size_t i = 0; i < d_; ++i) col(i) = pts_[enter][i];
      col(d_) = 1.0;
      Eigen::VectorXd dir = lu.solve(col);
      std::size_t leave = m;
      double ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < m; ++i) {
        if (dir(i) <= 1e-12) continue;
        double r = std::max(w(i), 0.0) / dir(i);
        if (r < ratio - 1e-15 || (std::abs(r - ratio) <= 1e-15 && leave < m && basis[i] < basis[leave])) {
          ratio = r;
          leave = i;
        }
      }
      if (leave == m) break;  // cannot happen for a bounded LP
      w -= ratio * dir;
      w(leave) = ratio;
      basis[leave] = enter;
      degenerate_run = ratio <= 1e-15 ? degenerate_run + 1 : 0;
    }
    basis_hint = basis;
    return Vec(y.data(), y.data() + y.size());
  }

  double plane(const Eigen::VectorXd& y, const Vec& x) const {
    double v = y(d_);
    for (std::size_t i = 0; i < d_; ++i) v += y(i) * x[i];
    return v;
  }

 private:
  Eigen::MatrixXd columns(const std::vector<std::size_t>& basis) const {
    const std::size_t m = d_ + 1;
    Eigen::MatrixXd bm(m, m);
    for (std::size_t c = 0; c < m; ++c) {
      for (std::size_t i = 0; i < d_; ++i) bm(i, c) = pts_[basis[c]][i];
      bm(d_, c) = 1.0;
    }
    return bm;
  }

  std::vector<std::size_t> initial_basis(std::size_t t, const std::vector<std::size_t>& hint) const {
    const std::size_t m = d_ + 1;
    std::vector<std::size_t> basis{t};
    auto try_add = [&](std::size_t j) {
      if (basis.size() == m || std::find(basis.begin(), basis.end(), j) != basis.end()) return;
      Eigen::MatrixXd e(d_, basis.size());
      for (std::size_t c = 1; c < basis.size(); ++c)
        for (std::size_t i = 0; i < d_; ++i) e(i, c - 1) = pts_[basis[c]][i] - pts_[t][i];
      for (std::size_t i = 0; i < d_; ++i) e(i, basis.size() - 1) = pts_[j][i] - pts_[t][i];
      Eigen::FullPivLU<Eigen::MatrixXd> lu(e);
      lu.setThreshold(1e-9);
      if (static_cast<std::size_t>(lu.rank()) == basis.size()) basis.push_back(j);
    };
    for (auto j : hint) try_add(j);
    // nearest points first
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t j = 0; j < pts_.size() && basis.size() < m; ++j) order.push_back({norm(pts_[j] - pts_[t]), j});
    std::sort(order.begin(), order.end());
    for (const auto& [dist, j] : order) {
      if (basis.size() == m) break;
      try_add(j);
    }
    return basis;
  }

  const Mat<double>& pts_;
  const Vec& vals_;
  std::size_t d_ = 0;
  double scale_ = 1.0;
};

/// Points of the set inside the convex hull of `hull_pts` (d <= 2).
inline std::vector<std::size_t> inside_hull(const Mat<double>& pts, const std::vector<std::size_t>& candidates,
                                            const Mat<double>& hull_pts, double tol) {
  std::vector<std::size_t> out;
  const std::size_t d = hull_pts.front().size();
  if (d == 1) {
    double lo = hull_pts.front()[0], hi = lo;
    for (const auto& p : hull_pts) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    for (auto j : candidates)
      if (pts[j][0] >= lo - tol && pts[j][0] <= hi + tol) out.push_back(j);
    return out;
  }
  // monotone chain
  Mat<double> s = hull_pts;
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (s.size() < 3) return out;
  auto cross = [](const Vec& o, const Vec& a, const Vec& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };
  Mat<double> hull(2 * s.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], s[i]) <= 0) --k;
    hull[k++] = s[i];
  }
  for (std::size_t i = s.size() - 1, t = k + 1; i-- > 0;) {
    while (k >= t && cross(hull[k - 2], hull[k - 1], s[i]) <= 0) --k;
    hull[k++] = s[i];
  }
  hull.resize(k - 1);
  if (hull.size() < 3) return out;
  for (auto j : candidates) {
    bool in = true;
    for (std::size_t e = 0; e < hull.size() && in; ++e) {
      const Vec& a = hull[e];
      const Vec& b = hull[(e + 1) % hull.size()];
      double len = std::hypot(b[0] - a[0], b[1] - a[1]);
      if (cross(a, b, pts[j]) < -tol * len) in = false;
    }
    if (in) out.push_back(j);
  }
  return out;
}

}  // namespace detail

/// f_p: upper concave envelope of ceil(p f) / p on the grid (1/q) Z^d in P+.
inline ApproxResult approximate_p(const PLConcave& f, const ConvexPolytope& p_plus, long p, long q = 0) {
  if (p < 1) throw Error(ErrorKind::InvalidArgument, "p must be >= 1");
  if (q <= 0) q = 4 * p;
  ApproxResult out;
  out.p = p;
  out.q = q;
  const Rational pr(p);
  for (const auto& pt : lattice_points(p_plus, q)) {
    RVec y = scaled(pt, Rational(1, q));
    Rational fv = f(y);
    Rational gv = ceil(pr * fv) / pr;
    out.grid.push_back(to_double(y));
    out.f_values.push_back(to_double(fv));
    out.g_values.push_back(to_double(gv));
  }
  const std::size_t n = out.grid.size();
  const std::size_t d = p_plus.dim();
  out.fp_values.assign(n, 0.0);
  std::vector<bool> done(n, false);
  detail::EnvelopeLP lp(out.grid, out.g_values);
  std::vector<std::size_t> hint;
  std::vector<std::pair<double, Vec>> planes;
  double scale = 1.0;
  for (double v : out.g_values) scale = std::max(scale, std::abs(v));
  for (std::size_t t = 0; t < n; ++t) {
    if (done[t]) continue;
    Vec y = lp.solve(t, hint);
    ++out.lp_solves;
    Eigen::VectorXd ye = Eigen::Map<Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    out.fp_values[t] = lp.plane(ye, out.grid[t]);
    done[t] = true;
    Vec a(y.begin(), y.begin() + d);
    planes.push_back({y[d], scaled(a, -1.0)});
    if (d > 2) continue;
    // every grid point in the hull of the tight set lies on this facet
    Mat<double> tight;
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(out.g_values[j] - lp.plane(ye, out.grid[j])) <= 1e-10 * scale) tight.push_back(out.grid[j]);
      if (!done[j]) open.push_back(j);
    }
    if (tight.size() < d + 1) continue;
    for (auto j : detail::inside_hull(out.grid, open, tight, 1e-9)) {
      out.fp_values[j] = lp.plane(ye, out.grid[j]);
      done[j] = true;
    }
  }
  std::sort(planes.begin(), planes.end());
  planes.erase(std::unique(planes.begin(), planes.end()), planes.end());
  out.fp = PLConcave::from_doubles(planes);
  out.max_gap = -std::numeric_limits<double>::infinity();
  out.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double gap = out.fp_values[j] - out.f_values[j];
    out.max_gap = std::max(out.max_gap, gap);
    out.min_gap = std::min(out.min_gap, gap);
  }
  return out;
}

}  // namespace gcdeg
