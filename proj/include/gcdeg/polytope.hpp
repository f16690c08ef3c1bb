#pragma once

// Exact convex polytopes in low dimension: H/V conversion, chamber
// intersection, pulling triangulation, uniform subdivision and lattice points.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gcdeg/error.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/rootsys.hpp"

namespace gcdeg {

/// <normal, y> <= offset
struct HalfSpace {
  RVec normal;
  Rational offset;
  bool redundant = false;
  std::string label;

  Rational slack(const RVec& y) const { return offset - dot(normal, y); }
  bool contains(const RVec& y) const { return slack(y) >= 0; }
  bool tight(const RVec& y) const { return slack(y) == 0; }
};

/// Scales (normal, offset) so the normal is a primitive integer vector.
inline HalfSpace normalized(HalfSpace h) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::gcd;
  using boost::multiprecision::lcm;
  using boost::multiprecision::numerator;
  BigInt l = 1;
  for (const auto& x : h.normal) l = lcm(l, BigInt(denominator(x)));
  BigInt g = 0;
  for (const auto& x : h.normal) g = gcd(g, BigInt(numerator(x * Rational(l))));
  if (g == 0) return h;
  Rational s = Rational(l) / Rational(g);
  for (auto& x : h.normal) x *= s;
  h.offset *= s;
  return h;
}

inline bool same_halfspace(const HalfSpace& a, const HalfSpace& b) {
  auto na = normalized(a), nb = normalized(b);
  return na.normal == nb.normal && na.offset == nb.offset;
}

struct Simplex {
  Mat<Rational> vertices;  // dim + 1 points

  std::size_t dim() const { return vertices.empty() ? 0 : vertices.front().size(); }

  Mat<double> vertices_double() const {
    Mat<double> out;
    for (const auto& v : vertices) out.push_back(to_double(v));
    return out;
  }

  /// Signed determinant of the edge matrix [v_i - v_0].
  Rational edge_det() const {
    const std::size_t d = dim();
    Mat<Rational> m(d, RVec(d));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) m[i][j] = vertices[i + 1][j] - vertices[0][j];
    // Gaussian elimination determinant
    Rational det = 1;
    for (std::size_t c = 0; c < d; ++c) {
      std::size_t p = c;
      while (p < d && m[p][c] == 0) ++p;
      if (p == d) return 0;
      if (p != c) {
        std::swap(m[p], m[c]);
        det = -det;
      }
      det *= m[c][c];
      for (std::size_t r = c + 1; r < d; ++r) {
        if (m[r][c] == 0) continue;
        Rational f = m[r][c] / m[c][c];
        for (std::size_t k = c; k < d; ++k) m[r][k] -= f * m[c][k];
      }
    }
    return det;
  }

  Rational volume() const {
    Rational det = edge_det();
    if (det < 0) det = -det;
    BigInt fact = 1;
    for (std::size_t i = 2; i <= dim(); ++i) fact *= i;
    return det / Rational(fact);
  }
};

struct Triangulation {
  std::vector<Simplex> simplices;

  Rational volume() const {
    Rational v = 0;
    for (const auto& s : simplices) v += s.volume();
    return v;
  }
};

namespace detail {

/// Affine dimension of a point set (-1 for empty).
inline int affine_dim(const Mat<Rational>& pts) {
  if (pts.empty()) return -1;
  Mat<Rational> diffs;
  for (std::size_t i = 1; i < pts.size(); ++i) diffs.push_back(pts[i] - pts[0]);
  return static_cast<int>(rank(diffs));
}

/// Exact feasibility of {A y <= b} by Fourier-Motzkin elimination.
inline bool fm_feasible(std::vector<std::pair<RVec, Rational>> rows, std::size_t n) {
  for (std::size_t var = 0; var < n; ++var) {
    std::vector<std::pair<RVec, Rational>> pos, neg, rest;
    for (auto& r : rows) {
      if (r.first[var] > 0)
        pos.push_back(std::move(r));
      else if (r.first[var] < 0)
        neg.push_back(std::move(r));
      else
        rest.push_back(std::move(r));
    }
    for (const auto& p : pos) {
      for (const auto& q : neg) {
        Rational a = p.first[var], b = -q.first[var];
        RVec comb(n);
        for (std::size_t k = 0; k < n; ++k) comb[k] = b * p.first[k] + a * q.first[k];
        comb[var] = 0;
        rest.emplace_back(std::move(comb), b * p.second + a * q.second);
      }
    }
    rows = std::move(rest);
    // drop duplicates to keep growth in check
    std::sort(rows.begin(), rows.end());
    rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  }
  for (const auto& r : rows)
    if (r.second < 0) return false;
  return true;
}

}  // namespace detail

class ConvexPolytope {
 public:
  ConvexPolytope() = default;

  /// Builds from inequalities; throws Unbounded / Empty / LowerDimensional.
  static ConvexPolytope from_halfspaces(std::vector<HalfSpace> hs, std::size_t dim) {
    auto p = build(std::move(hs), dim);
    if (p.status_ != Status::Ok) throw Error(status_error(p.status_), status_message(p.status_));
    return p;
  }

  /// Like from_halfspaces but returns nullopt for empty or lower-dimensional
  /// regions (used for cells of linearity).
  static std::optional<ConvexPolytope> cell(std::vector<HalfSpace> hs, std::size_t dim) {
    auto p = build(std::move(hs), dim);
    if (p.status_ == Status::Unbounded) throw Error(ErrorKind::Unbounded, "cell is unbounded");
    if (p.status_ != Status::Ok) return std::nullopt;
    return p;
  }

  /// Convex hull of a point set; halfspaces are its facets.
  static ConvexPolytope from_vertices(const Mat<Rational>& points, std::size_t dim) {
    if (points.empty()) throw Error(ErrorKind::Empty, "no vertices given");
    for (const auto& p : points)
      if (p.size() != dim) throw Error(ErrorKind::SchemaError, "vertex dimension mismatch");
    if (detail::affine_dim(points) < static_cast<int>(dim))
      throw Error(ErrorKind::LowerDimensional, "vertices span a lower-dimensional set");
    std::vector<HalfSpace> facets;
    for_each_combination(points.size(), dim, [&](const std::vector<std::size_t>& idx) {
      // a . p = b for the chosen points: nullspace of rows [p, -1]
      Mat<Rational> rows;
      for (auto i : idx) {
        RVec r(points[i]);
        r.push_back(Rational(-1));
        rows.push_back(r);
      }
      auto ns = nullspace(rows, dim + 1);
      if (ns.size() != 1) return;
      HalfSpace h;
      h.normal.assign(ns[0].begin(), ns[0].begin() + dim);
      h.offset = ns[0][dim];
      bool all_zero = true;
      for (const auto& x : h.normal)
        if (x != 0) all_zero = false;
      if (all_zero) return;
      bool has_pos = false, has_neg = false;
      for (const auto& p : points) {
        Rational s = h.slack(p);
        if (s > 0) has_pos = true;
        if (s < 0) has_neg = true;
      }
      if (has_pos && has_neg) return;
      if (has_neg) {
        for (auto& x : h.normal) x = -x;
        h.offset = -h.offset;
      }
      h = normalized(h);
      for (const auto& f : facets)
        if (f.normal == h.normal && f.offset == h.offset) return;
      facets.push_back(h);
    });
    return from_halfspaces(std::move(facets), dim);
  }

  std::size_t dim() const { return dim_; }
  const std::vector<HalfSpace>& halfspaces() const { return halfspaces_; }
  const Mat<Rational>& vertices() const { return vertices_; }
  const Mat<double>& vertices_double() const { return vertices_double_; }

  bool contains(const RVec& y) const {
    for (const auto& h : halfspaces_)
      if (!h.contains(y)) return false;
    return true;
  }

  bool contains(const Vec& y, double tol) const {
    for (const auto& h : halfspaces_) {
      Vec n = to_double(h.normal);
      if (dot(n, y) > to_double(h.offset) + tol * (1.0 + norm(n))) return false;
    }
    return true;
  }

  /// Adds <alpha_i, y> >= 0 for every simple root (when P rather than P+ is supplied).
  ConvexPolytope with_chamber(const RootSystem& rs) const {
    auto hs = halfspaces_;
    for (std::size_t i = 0; i < rs.rank(); ++i) {
      const auto& a = rs.simple_roots()[i];
      RVec alpha = a.exact ? *a.exact : from_double(a.vec);
      HalfSpace h{scaled(alpha, Rational(-1)), Rational(0), false, "chamber " + a.label};
      hs.push_back(rs.is_exact() ? normalized(h) : h);
    }
    for (auto& h : hs) h.redundant = false;
    return from_halfspaces(std::move(hs), dim_);
  }

  /// Pulling triangulation: cone from the lexicographically smallest vertex
  /// over the recursively triangulated facets not containing it.
  Triangulation triangulate() const {
    std::vector<std::size_t> all(vertices_.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    Triangulation t;
    for (auto& idx : triangulate_face(all, static_cast<int>(dim_))) {
      Simplex s;
      for (auto i : idx) s.vertices.push_back(vertices_[i]);
      t.simplices.push_back(std::move(s));
    }
    return t;
  }

  Rational volume() const { return triangulate().volume(); }

  /// Every vertex scaled by k.
  ConvexPolytope dilate(const Rational& k) const {
    auto hs = halfspaces_;
    for (auto& h : hs) {
      h.offset *= k;
      h.redundant = false;
    }
    return from_halfspaces(std::move(hs), dim_);
  }

 private:
  enum class Status { Ok, Empty, Unbounded, LowerDimensional };

  static ErrorKind status_error(Status s) {
    switch (s) {
      case Status::Empty: return ErrorKind::Empty;
      case Status::Unbounded: return ErrorKind::Unbounded;
      default: return ErrorKind::LowerDimensional;
    }
  }
  static std::string status_message(Status s) {
    switch (s) {
      case Status::Empty: return "polytope is empty";
      case Status::Unbounded: return "polytope is unbounded";
      default: return "polytope is not full-dimensional";
    }
  }

  static ConvexPolytope build(std::vector<HalfSpace> hs, std::size_t dim) {
    ConvexPolytope p;
    p.dim_ = dim;
    if (dim == 0) throw Error(ErrorKind::SchemaError, "zero-dimensional ambient space");
    for (const auto& h : hs) {
      if (h.normal.size() != dim) throw Error(ErrorKind::SchemaError, "halfspace dimension mismatch");
      bool nz = false;
      for (const auto& x : h.normal)
        if (x != 0) nz = true;
      if (!nz) throw Error(ErrorKind::SchemaError, "halfspace with zero normal");
    }
    p.halfspaces_ = std::move(hs);

    Mat<Rational> normals;
    for (const auto& h : p.halfspaces_) normals.push_back(h.normal);
    if (!cone_is_trivial(normals, dim)) {
      std::vector<std::pair<RVec, Rational>> rows;
      for (const auto& h : p.halfspaces_) rows.emplace_back(h.normal, h.offset);
      p.status_ = detail::fm_feasible(rows, dim) ? Status::Unbounded : Status::Empty;
      return p;
    }

    // vertex enumeration over dim-subsets of halfspaces
    std::set<RVec> found;
    for_each_combination(p.halfspaces_.size(), dim, [&](const std::vector<std::size_t>& idx) {
      Mat<Rational> a;
      RVec b;
      for (auto i : idx) {
        a.push_back(p.halfspaces_[i].normal);
        b.push_back(p.halfspaces_[i].offset);
      }
      auto x = solve_square(a, b);
      if (!x) return;
      if (!p.contains(*x)) return;
      found.insert(*x);
    });
    p.vertices_.assign(found.begin(), found.end());
    if (p.vertices_.empty()) {
      p.status_ = Status::Empty;
      return p;
    }
    if (detail::affine_dim(p.vertices_) < static_cast<int>(dim)) {
      p.status_ = Status::LowerDimensional;
      return p;
    }
    for (const auto& v : p.vertices_) p.vertices_double_.push_back(to_double(v));

    // facet check; later duplicates of a facet are redundant
    for (std::size_t j = 0; j < p.halfspaces_.size(); ++j) {
      auto& h = p.halfspaces_[j];
      Mat<Rational> tight;
      for (const auto& v : p.vertices_)
        if (h.tight(v)) tight.push_back(v);
      h.redundant = detail::affine_dim(tight) != static_cast<int>(dim) - 1;
      if (!h.redundant)
        for (std::size_t i = 0; i < j; ++i)
          if (!p.halfspaces_[i].redundant && same_halfspace(p.halfspaces_[i], h)) h.redundant = true;
    }
    return p;
  }

  std::vector<std::vector<std::size_t>> triangulate_face(const std::vector<std::size_t>& face,
                                                         int k) const {
    if (k == 0) return {{face.front()}};
    // vertices are stored sorted, so the smallest index is the lex-min vertex
    const std::size_t apex = *std::min_element(face.begin(), face.end());
    std::vector<std::vector<std::size_t>> out;
    std::set<std::vector<std::size_t>> seen;
    for (const auto& h : halfspaces_) {
      std::vector<std::size_t> sub;
      for (auto i : face)
        if (h.tight(vertices_[i])) sub.push_back(i);
      if (sub.size() == face.size() || std::find(sub.begin(), sub.end(), apex) != sub.end())
        continue;
      Mat<Rational> pts;
      for (auto i : sub) pts.push_back(vertices_[i]);
      if (detail::affine_dim(pts) != k - 1) continue;
      if (!seen.insert(sub).second) continue;
      for (auto& s : triangulate_face(sub, k - 1)) {
        s.insert(s.begin(), apex);
        out.push_back(std::move(s));
      }
    }
    return out;
  }

  std::size_t dim_ = 0;
  Status status_ = Status::Ok;
  std::vector<HalfSpace> halfspaces_;
  Mat<Rational> vertices_;
  Mat<double> vertices_double_;
};

struct PolytopeInput {
  std::optional<std::vector<HalfSpace>> halfspaces;
  std::optional<Mat<Rational>> vertices;
};

/// Builds P+ in both representations. With append_chamber the input is the
/// W-invariant P and the dominant-chamber inequalities are added.
inline ConvexPolytope build_polytope(const PolytopeInput& input, const RootSystem& rs,
                                     bool append_chamber = false) {
  if (input.halfspaces.has_value() == input.vertices.has_value())
    throw Error(ErrorKind::SchemaError, "polytope needs exactly one of inequalities / vertices");
  ConvexPolytope p;
  if (input.halfspaces) {
    if (input.halfspaces->empty()) throw Error(ErrorKind::Unbounded, "no inequalities given");
    for (const auto& h : *input.halfspaces)
      if (h.normal.size() != rs.dim())
        throw Error(ErrorKind::SchemaError, "inequality dimension does not match the root system");
    p = ConvexPolytope::from_halfspaces(*input.halfspaces, rs.dim());
  } else {
    if (input.vertices->empty()) throw Error(ErrorKind::Empty, "no vertices given");
    for (const auto& v : *input.vertices)
      if (v.size() != rs.dim())
        throw Error(ErrorKind::SchemaError, "vertex dimension does not match the root system");
    p = ConvexPolytope::from_vertices(*input.vertices, rs.dim());
  }
  if (append_chamber) p = p.with_chamber(rs);
  return p;
}

inline Triangulation triangulate(const ConvexPolytope& p) { return p.triangulate(); }

/// One level of uniform (Freudenthal) subdivision: 2^d congruent children.
inline std::vector<Simplex> subdivide_uniform(const Simplex& s) {
  const std::size_t d = s.dim();
  std::vector<Simplex> out;
  std::vector<std::size_t> perm(d);
  for (std::size_t i = 0; i < d; ++i) perm[i] = i;
  // Kuhn coordinates: x = sum of unit steps, region 2 >= x_1 >= ... >= x_d >= 0
  auto to_ambient = [&](const std::vector<int>& x) {
    RVec y = s.vertices[0];
    for (std::size_t i = 0; i < d; ++i) {
      if (x[i] == 0) continue;
      Rational f(x[i], 2);
      for (std::size_t k = 0; k < d; ++k) y[k] += f * (s.vertices[i + 1][k] - s.vertices[i][k]);
    }
    return y;
  };
  for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
    std::vector<int> corner(d);
    for (std::size_t i = 0; i < d; ++i) corner[i] = (mask >> i) & 1;
    std::sort(perm.begin(), perm.end());
    do {
      std::vector<std::vector<int>> pts{corner};
      for (std::size_t m = 0; m < d; ++m) {
        auto next = pts.back();
        next[perm[m]] += 1;
        pts.push_back(next);
      }
      // keep the simplex when every vertex satisfies the ordering constraints
      bool inside = true;
      for (const auto& x : pts) {
        if (x[0] > 2 || x[d - 1] < 0) inside = false;
        for (std::size_t i = 0; i + 1 < d; ++i)
          if (x[i] < x[i + 1]) inside = false;
      }
      if (!inside) continue;
      Simplex child;
      for (const auto& x : pts) child.vertices.push_back(to_ambient(x));
      out.push_back(std::move(child));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return out;
}

/// Lattice points of k * P in the lattice spanned by the basis rows
/// (identity when empty), each verified exactly.
inline Mat<Rational> lattice_points(const ConvexPolytope& p, long k,
                                    const Mat<Rational>& basis = {}) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "dilation factor must be >= 1");
  const std::size_t d = p.dim();
  Mat<Rational> b = basis;
  if (b.empty()) {
    b.assign(d, RVec(d, Rational(0)));
    for (std::size_t i = 0; i < d; ++i) b[i][i] = 1;
  }
  if (b.size() != d || rank(b) != d)
    throw Error(ErrorKind::InvalidArgument, "lattice basis must be square and invertible");
  // coordinates of the dilated vertices in the basis give an integer box
  std::vector<BigInt> lo(d), hi(d);
  bool first = true;
  for (const auto& v : p.vertices()) {
    auto c = solve_in_span(b, scaled(v, Rational(k)));
    for (std::size_t i = 0; i < d; ++i) {
      BigInt l = -floor_div(Rational(-(*c)[i]));
      BigInt f = floor_div((*c)[i]);
      if (first || f < lo[i]) lo[i] = f;
      if (first || l > hi[i]) hi[i] = l;
    }
    first = false;
  }
  auto kp = p.dilate(Rational(k));
  Mat<Rational> out;
  std::vector<BigInt> n(lo);
  while (true) {
    RVec y(d, Rational(0));
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t c = 0; c < d; ++c) y[c] += Rational(n[i]) * b[i][c];
    if (kp.contains(y)) out.push_back(y);
    std::size_t pos = 0;
    while (pos < d) {
      if (n[pos] < hi[pos]) {
        ++n[pos];
        break;
      }
      n[pos] = lo[pos];
      ++pos;
    }
    if (pos == d) break;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace gcdeg
