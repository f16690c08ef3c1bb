#pragma once

// Integration of polynomial x exp(linear) densities over simplices and
// polytopes. Each simplex is mapped to the standard simplex and integrated
// one coordinate at a time; a term coeff * t^m * U^e * exp(<g, t>) keeps the
// power of U = 1 - sum(t) symbolic so nothing is ever expanded in U.

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "gcdeg/error.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/parallel.hpp"
#include "gcdeg/polynomial.hpp"
#include "gcdeg/polytope.hpp"

namespace gcdeg {

struct IntegrationOptions {
  int degree_cap = 24;
  double eps_switch = 8.0;  // |c| below this integrates by series
  double rel_tol = 1e-12;   // cancellation monitor threshold
  int max_series_terms = 4000;
  int max_subdivision_depth = 12;
};

/// coeff * y^monomial * exp(<linform, y>)
struct PolyExpTerm {
  double coeff = 0.0;
  Monomial monomial;
  Vec linform;
};

/// A positive quantity stored as mantissa * exp(log_scale).
struct LogScaled {
  double mantissa = 0.0;
  double log_scale = 0.0;

  double log() const { return std::log(mantissa) + log_scale; }
  double value() const { return mantissa * std::exp(log_scale); }
};

namespace detail {

/// Binomial coefficients as doubles, grown on demand.
class BinomialTable {
 public:
  double operator()(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    while (static_cast<int>(rows_.size()) <= n) {
      std::vector<double> row(rows_.size() + 1, 1.0);
      const auto& prev = rows_.back();
      for (std::size_t i = 1; i + 1 < row.size(); ++i) row[i] = prev[i - 1] + prev[i];
      rows_.push_back(std::move(row));
    }
    return rows_[n][k];
  }

 private:
  std::vector<std::vector<double>> rows_{{1.0}};
};

/// a! b! / (a + b + 1)!
inline double beta_int(BinomialTable& binom, int a, int b) {
  return 1.0 / (static_cast<double>(a + b + 1) * binom(a + b, a));
}

inline double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

struct TermKey {
  int gamma_id;
  int upow;
  Monomial mono;
  bool operator<(const TermKey& o) const {
    if (gamma_id != o.gamma_id) return gamma_id < o.gamma_id;
    if (upow != o.upow) return upow < o.upow;
    return mono < o.mono;
  }
};

struct TermAcc {
  std::vector<double> coeff;
  std::vector<double> mag;
};

struct StandardResult {
  std::vector<double> value;
  std::vector<double> mag;  // accumulated absolute contributions
  bool closed_form_used = false;
};

/// Integrates each family[f](t) * exp(<gamma, t>) over the standard simplex.
inline StandardResult integrate_standard(const std::vector<Polynomial>& family, const Vec& gamma,
                                         const IntegrationOptions& opts) {
  const std::size_t nf = family.size();
  const int d = static_cast<int>(gamma.size());
  BinomialTable binom;
  StandardResult res;

  std::vector<Vec> gammas;
  auto gid = [&](const Vec& g) {
    for (std::size_t i = 0; i < gammas.size(); ++i)
      if (gammas[i] == g) return static_cast<int>(i);
    gammas.push_back(g);
    return static_cast<int>(gammas.size() - 1);
  };

  std::map<TermKey, TermAcc> terms;
  auto add = [&](std::map<TermKey, TermAcc>& into, TermKey key, std::size_t f, double c, double m) {
    auto& acc = into[std::move(key)];
    if (acc.coeff.empty()) {
      acc.coeff.assign(nf, 0.0);
      acc.mag.assign(nf, 0.0);
    }
    acc.coeff[f] += c;
    acc.mag[f] += m;
  };

  const int g0 = gid(gamma);
  for (std::size_t f = 0; f < nf; ++f)
    for (const auto& [mono, c] : family[f].terms()) add(terms, TermKey{g0, 0, mono}, f, c, std::abs(c));

  for (int r = d; r >= 1; --r) {
    std::map<TermKey, TermAcc> next;
    for (const auto& [key, acc] : terms) {
      const Vec g = gammas[key.gamma_id];
      const int k = key.mono[r - 1];
      const int e = key.upow;
      const double c = g[r - 1];
      Monomial rest(key.mono.begin(), key.mono.begin() + (r - 1));
      Vec g_rest(g.begin(), g.begin() + (r - 1));

      auto emit = [&](const Vec& gnew, int upow, double factor) {
        auto& into = next[TermKey{gid(gnew), upow, rest}];
        if (into.coeff.empty()) {
          into.coeff.assign(nf, 0.0);
          into.mag.assign(nf, 0.0);
        }
        const double af = std::abs(factor);
        for (std::size_t f = 0; f < nf; ++f) {
          into.coeff[f] += acc.coeff[f] * factor;
          into.mag[f] += acc.mag[f] * af;
        }
      };

      if (std::abs(c) < opts.eps_switch) {
        // series of exp(c t); for c < 0 substitute t -> L - t first
        const bool flip = c < 0.0;
        const double a = std::abs(c);
        const int p = flip ? e : k;
        const int q = flip ? k : e;
        Vec gnew = g_rest;
        double pre = 1.0;
        if (flip) {
          for (auto& x : gnew) x -= c;
          pre = std::exp(c);
        }
        double term = beta_int(binom, p, q);  // j = 0
        double sum = 0.0;
        for (int j = 0;; ++j) {
          emit(gnew, p + q + j + 1, pre * term);
          sum += term;
          if (a == 0.0) break;
          double ratio = a / (j + 1) * (p + j + 1) / static_cast<double>(p + q + j + 2);
          term *= ratio;
          double tail_ratio = a / (j + 2);
          if (tail_ratio < 1.0 && term / (1.0 - tail_ratio) < 1e-18 * sum) break;
          if (term == 0.0) break;
          if (j + 1 >= opts.max_series_terms)
            throw Error(ErrorKind::DegreeCapExceeded, "exponential series did not converge");
        }
      } else {
        res.closed_form_used = true;
        const double kf = factorial(k), ef = factorial(e);
        const double ec = std::exp(c);
        Vec g_shift = g_rest;
        for (auto& x : g_shift) x -= c;
        // L^(k-n) exp(cL) part
        for (int n = 0; n <= k; ++n) {
          double factor = kf * ef * binom(e + n, n) / factorial(k - n) * std::pow(c, -(e + 1 + n));
          if (n % 2 == 1) factor = -factor;
          emit(g_shift, k - n, factor * ec);
        }
        // L^(e-n) part
        for (int n = 0; n <= e; ++n) {
          double factor = kf * ef * binom(k + n, n) / factorial(e - n) * std::pow(c, -(k + 1 + n));
          if ((k + 1) % 2 == 1) factor = -factor;
          emit(g_rest, e - n, factor);
        }
      }
    }
    terms = std::move(next);
  }

  res.value.assign(nf, 0.0);
  res.mag.assign(nf, 0.0);
  std::vector<KahanSum> sums(nf);
  for (const auto& [key, acc] : terms) {
    for (std::size_t f = 0; f < nf; ++f) {
      sums[f].add(acc.coeff[f]);
      res.mag[f] += acc.mag[f];
    }
  }
  for (std::size_t f = 0; f < nf; ++f) res.value[f] = sums[f].value();
  return res;
}

struct SimplexMap {
  std::size_t base = 0;  // index of the vertex used as origin
  Vec origin;
  Mat<double> edges;  // edges[j] = v_{j'} - v_base
  double abs_det = 0.0;
};

inline SimplexMap simplex_map(const Mat<double>& verts, std::size_t base) {
  SimplexMap m;
  m.base = base;
  m.origin = verts[base];
  for (std::size_t i = 0; i < verts.size(); ++i)
    if (i != base) m.edges.push_back(verts[i] - verts[base]);
  const std::size_t d = m.origin.size();
  Eigen::MatrixXd e(d, d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) e(i, j) = m.edges[i][j];
  m.abs_det = std::abs(e.determinant());
  return m;
}

/// Vertex maximizing <lam, v>; ties go to the lowest index.
inline std::size_t max_vertex(const Mat<double>& verts, const Vec& lam) {
  std::size_t best = 0;
  double bv = dot(lam, verts[0]);
  for (std::size_t i = 1; i < verts.size(); ++i) {
    double v = dot(lam, verts[i]);
    if (v > bv) {
      bv = v;
      best = i;
    }
  }
  return best;
}

/// Cancellation check; scale[f] is the magnitude a value of family f is
/// measured against.
inline void check_cancellation(const StandardResult& r, const std::vector<double>& scale,
                               const IntegrationOptions& opts) {
  if (!r.closed_form_used) return;
  const double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t f = 0; f < r.value.size(); ++f) {
    double ref = std::max(std::abs(r.value[f]), scale[f]);
    if (16.0 * eps * r.mag[f] > opts.rel_tol * ref)
      throw Error(ErrorKind::PrecisionLoss, "cancellation in closed-form fiber integration");
  }
}

inline Simplex bisect_longest_edge(const Simplex& s, bool second) {
  std::size_t bi = 0, bj = 1;
  Rational best = -1;
  for (std::size_t i = 0; i < s.vertices.size(); ++i)
    for (std::size_t j = i + 1; j < s.vertices.size(); ++j) {
      auto diff = s.vertices[i] - s.vertices[j];
      Rational l = dot(diff, diff);
      if (l > best) {
        best = l;
        bi = i;
        bj = j;
      }
    }
  RVec mid = scaled(s.vertices[bi] + s.vertices[bj], Rational(1, 2));
  Simplex out = s;
  out.vertices[second ? bi : bj] = mid;
  return out;
}

}  // namespace detail

/// Values and common log-scale of int_s p(y) exp(<lam, y>) dy for several
/// polynomials at once. On PrecisionLoss the simplex is bisected.
inline std::pair<std::vector<double>, double> integrate_simplex_family(
    const std::vector<Polynomial>& family, const Vec& lam, const Simplex& s,
    const IntegrationOptions& opts = {}, int depth = 0) {
  const std::size_t d = s.dim();
  if (s.vertices.size() != d + 1) throw Error(ErrorKind::DegenerateSimplex, "wrong vertex count");
  if (lam.size() != d) throw Error(ErrorKind::InvalidArgument, "lambda dimension mismatch");
  for (const auto& p : family)
    if (p.degree() > opts.degree_cap)
      throw Error(ErrorKind::DegreeCapExceeded, "polynomial degree exceeds the cap");
  if (s.edge_det() == 0) throw Error(ErrorKind::DegenerateSimplex, "simplex has zero volume");

  auto verts = s.vertices_double();
  auto map = detail::simplex_map(verts, detail::max_vertex(verts, lam));
  Vec gamma(d);
  for (std::size_t j = 0; j < d; ++j) gamma[j] = dot(lam, map.edges[j]);
  std::vector<Polynomial> composed;
  for (const auto& p : family) composed.push_back(p.compose_affine(map.origin, map.edges));

  try {
    auto r = detail::integrate_standard(composed, gamma, opts);
    double diam = 0.0;
    for (const auto& a : verts)
      for (const auto& b : verts) diam = std::max(diam, norm(a - b));
    std::vector<double> scale(family.size());
    for (std::size_t f = 0; f < family.size(); ++f)
      scale[f] = std::abs(r.value[0]) *
                 std::pow(diam, std::max(0, family[f].degree() - family[0].degree()));
    detail::check_cancellation(r, scale, opts);
    for (auto& v : r.value) v *= map.abs_det;
    return {r.value, dot(lam, map.origin)};
  } catch (const Error& err) {
    if (err.kind() != ErrorKind::PrecisionLoss || depth >= opts.max_subdivision_depth) throw;
  }
  auto a = integrate_simplex_family(family, lam, detail::bisect_longest_edge(s, false), opts, depth + 1);
  auto b = integrate_simplex_family(family, lam, detail::bisect_longest_edge(s, true), opts, depth + 1);
  const double top = std::max(a.second, b.second);
  std::vector<double> out(family.size());
  for (std::size_t f = 0; f < out.size(); ++f)
    out[f] = a.first[f] * std::exp(a.second - top) + b.first[f] * std::exp(b.second - top);
  return {out, top};
}

/// int_s p(y) exp(<lam, y>) dy
inline double integrate_simplex(const Polynomial& p, const Vec& lam, const Simplex& s,
                                const IntegrationOptions& opts = {}) {
  auto [v, scale] = integrate_simplex_family({p}, lam, s, opts);
  return v[0] * std::exp(scale);
}

/// int_s sum_terms coeff * y^m * exp(<linform, y>) dy
inline double integrate_terms(const std::vector<PolyExpTerm>& terms, const Simplex& s,
                              const IntegrationOptions& opts = {}) {
  KahanSum sum;
  for (const auto& t : terms) {
    Polynomial p(s.dim());
    p.add_term(t.monomial, t.coeff);
    sum.add(integrate_simplex(p, t.linform, s, opts));
  }
  return sum.value();
}

/// Z, first and second moments of exp(<lam, y>) pi dy over a region. The
/// moments are stored about `shift` and scaled by exp(-log_scale).
struct RegionMoments {
  int region_id = 0;
  Vec lambda;
  Vec shift;
  double log_scale = 0.0;
  double z_scaled = 0.0;
  Vec first_scaled;            // int (y - shift) e pi
  Mat<double> second_scaled;   // int (y - shift)(y - shift)^T e pi

  double log_z() const { return std::log(z_scaled) + log_scale; }
  double z() const { return z_scaled * std::exp(log_scale); }

  Vec barycenter() const {
    Vec b(shift);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += first_scaled[i] / z_scaled;
    return b;
  }

  Vec first() const { return scaled(barycenter(), z()); }

  Mat<double> second() const {
    const double zz = z();
    const std::size_t d = shift.size();
    Mat<double> s(d, Vec(d));
    auto b = barycenter();
    auto cov = covariance();
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) s[i][j] = zz * (cov[i][j] + b[i] * b[j]);
    return s;
  }

  Mat<double> covariance() const {
    const std::size_t d = shift.size();
    Mat<double> c(d, Vec(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        c[i][j] = second_scaled[i][j] / z_scaled -
                  (first_scaled[i] / z_scaled) * (first_scaled[j] / z_scaled);
    return c;
  }
};

/// Triangulates a region once and evaluates moments for many lambdas.
/// Families are pi, (y_i - c_i) pi and (y_i - c_i)(y_j - c_j) pi with c the
/// vertex centroid.
class MomentEngine {
 public:
  MomentEngine(const ConvexPolytope& region, const Polynomial& pi, IntegrationOptions opts = {},
               int region_id = 0)
      : dim_(region.dim()), opts_(opts), region_id_(region_id) {
    if (pi.nvars() != dim_) throw Error(ErrorKind::InvalidArgument, "density dimension mismatch");
    simplices_ = region.triangulate().simplices;
    shift_.assign(dim_, 0.0);
    for (const auto& v : region.vertices_double())
      for (std::size_t i = 0; i < dim_; ++i) shift_[i] += v[i] / region.vertices().size();
    family_.push_back(pi);
    std::vector<Polynomial> lin;
    for (std::size_t i = 0; i < dim_; ++i) {
      Vec c(dim_, 0.0);
      c[i] = 1.0;
      lin.push_back(Polynomial::linear(c, -shift_[i]));
      family_.push_back(lin.back() * pi);
    }
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) family_.push_back(lin[i] * lin[j] * pi);
  }

  std::size_t dim() const { return dim_; }
  const std::vector<Simplex>& simplices() const { return simplices_; }
  const Vec& shift() const { return shift_; }

  /// int e^{<lam,y>} pi dy only.
  LogScaled mass(const Vec& lam) const {
    auto parts = run(lam, 1);
    return LogScaled{parts.values[0], parts.log_scale};
  }

  RegionMoments moments(const Vec& lam) const {
    auto parts = run(lam, family_.size());
    RegionMoments m;
    m.region_id = region_id_;
    m.lambda = lam;
    m.shift = shift_;
    m.log_scale = parts.log_scale;
    m.z_scaled = parts.values[0];
    m.first_scaled.assign(parts.values.begin() + 1, parts.values.begin() + 1 + dim_);
    m.second_scaled.assign(dim_, Vec(dim_));
    std::size_t idx = 1 + dim_;
    for (std::size_t i = 0; i < dim_; ++i)
      for (std::size_t j = i; j < dim_; ++j) {
        m.second_scaled[i][j] = parts.values[idx];
        m.second_scaled[j][i] = parts.values[idx];
        ++idx;
      }
    return m;
  }

 private:
  struct Parts {
    std::vector<double> values;
    double log_scale = 0.0;
  };

  Parts run(const Vec& lam, std::size_t nfam) const {
    if (lam.size() != dim_) throw Error(ErrorKind::InvalidArgument, "lambda dimension mismatch");
    std::vector<Polynomial> fam(family_.begin(), family_.begin() + nfam);
    std::vector<std::pair<std::vector<double>, double>> slots(simplices_.size());
    parallel_for(simplices_.size(), [&](std::size_t i) {
      slots[i] = integrate_simplex_family(fam, lam, simplices_[i], opts_);
    });
    Parts out;
    out.log_scale = -std::numeric_limits<double>::infinity();
    for (const auto& s : slots) out.log_scale = std::max(out.log_scale, s.second);
    if (slots.empty()) out.log_scale = 0.0;
    std::vector<KahanSum> sums(nfam);
    for (const auto& s : slots) {
      const double w = std::exp(s.second - out.log_scale);
      for (std::size_t f = 0; f < nfam; ++f) sums[f].add(s.first[f] * w);
    }
    for (std::size_t f = 0; f < nfam; ++f) out.values.push_back(sums[f].value());
    return out;
  }

  std::size_t dim_;
  IntegrationOptions opts_;
  int region_id_;
  std::vector<Simplex> simplices_;
  Vec shift_;
  std::vector<Polynomial> family_;
};

inline RegionMoments region_moments(const ConvexPolytope& p, const Polynomial& pi, const Vec& lam,
                                    const IntegrationOptions& opts = {}) {
  return MomentEngine(p, pi, opts).moments(lam);
}

}  // namespace gcdeg
