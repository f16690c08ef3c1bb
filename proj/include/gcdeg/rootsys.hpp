#pragma once

// Root system combinatorics in orthonormal coordinates of a*: simple and
// positive roots, fundamental weights, 2*rho, Weyl reflections and the
// Duistermaat-Heckman density prod_{alpha>0} <alpha, y>^2.

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gcdeg/error.hpp"
#include "gcdeg/numeric.hpp"
#include "gcdeg/polynomial.hpp"

namespace gcdeg {

struct RootSystemSpec {
  std::optional<std::string> catalog_name;
  std::optional<Mat<double>> simple_roots;          // rows, numeric
  std::optional<Mat<Rational>> exact_simple_roots;  // rows, exact
  int central_rank = 0;

  static RootSystemSpec catalog(std::string name, int central_rank = 0) {
    RootSystemSpec s;
    s.catalog_name = std::move(name);
    s.central_rank = central_rank;
    return s;
  }
  static RootSystemSpec exact(Mat<Rational> rows, int central_rank = 0) {
    RootSystemSpec s;
    s.exact_simple_roots = std::move(rows);
    s.central_rank = central_rank;
    return s;
  }
  static RootSystemSpec numeric(Mat<double> rows, int central_rank = 0) {
    RootSystemSpec s;
    s.simple_roots = std::move(rows);
    s.central_rank = central_rank;
    return s;
  }
};

struct Root {
  std::vector<int> coeffs;  // in the simple-root basis
  Vec vec;                  // ambient coordinates
  std::optional<RVec> exact;
  std::string label;
};

/// Label such as "a1", "a1+a2", "2a1+a2" (1-based simple-root indices).
inline std::string root_label(const std::vector<int>& coeffs) {
  std::string s;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i] == 0) continue;
    if (!s.empty()) s += "+";
    if (coeffs[i] != 1) s += std::to_string(coeffs[i]);
    s += "a" + std::to_string(i + 1);
  }
  return s.empty() ? "0" : s;
}

class RootSystem {
 public:
  std::size_t dim() const { return dim_; }
  std::size_t rank() const { return simple_.size(); }
  std::size_t central_rank() const { return dim_ - rank(); }
  const std::string& name() const { return name_; }
  bool is_exact() const { return exact_; }

  const std::vector<Root>& simple_roots() const { return simple_; }
  const std::vector<Root>& positive_roots() const { return positive_; }
  const Mat<double>& fundamental_weights() const { return fundamental_; }
  const std::optional<Mat<Rational>>& exact_fundamental_weights() const { return fundamental_exact_; }
  const Vec& two_rho() const { return two_rho_; }
  const std::optional<RVec>& exact_two_rho() const { return two_rho_exact_; }
  const std::vector<int>& two_rho_coeffs() const { return two_rho_coeffs_; }
  const std::vector<Eigen::MatrixXd>& weyl_generators() const { return weyl_generators_; }
  const Mat<int>& cartan_matrix() const { return cartan_; }
  std::size_t weyl_order() const { return weyl_order_; }

  double pair_simple(std::size_t i, const Vec& y) const { return dot(simple_[i].vec, y); }

  Rational pair_simple_exact(std::size_t i, const RVec& y) const {
    require_exact("pair_simple_exact");
    return dot(*simple_[i].exact, y);
  }

  /// <lam, 2 rho>, exactly rounded when the roots are rational.
  double pair_two_rho(const Vec& lam) const {
    if (exact_) return to_double(dot(from_double(lam), *two_rho_exact_));
    return dot(lam, two_rho_);
  }

  Vec reflect(std::size_t i, const Vec& y) const {
    const Vec& a = simple_[i].vec;
    double f = 2.0 * dot(a, y) / dot(a, a);
    Vec out(y);
    for (std::size_t k = 0; k < dim_; ++k) out[k] -= f * a[k];
    return out;
  }

  RVec reflect_exact(std::size_t i, const RVec& y) const {
    require_exact("reflect_exact");
    const RVec& a = *simple_[i].exact;
    Rational f = Rational(2) * dot(a, y) / dot(a, a);
    RVec out(y);
    for (std::size_t k = 0; k < dim_; ++k) out[k] -= f * a[k];
    return out;
  }

  bool is_dominant(const Vec& y, double tol = 0.0) const {
    for (std::size_t i = 0; i < rank(); ++i)
      if (pair_simple(i, y) < -tol) return false;
    return true;
  }

  bool is_dominant_exact(const RVec& y) const {
    for (std::size_t i = 0; i < rank(); ++i)
      if (pair_simple_exact(i, y) < 0) return false;
    return true;
  }

  /// Exact coefficients of v in the simple-root basis; nullopt when v is not
  /// in the root span.
  std::optional<RVec> simple_coordinates_exact(const RVec& v) const {
    require_exact("simple_coordinates_exact");
    if (rank() == 0) {
      for (const auto& x : v)
        if (x != 0) return std::nullopt;
      return RVec{};
    }
    Mat<Rational> rows;
    for (const auto& r : simple_) rows.push_back(*r.exact);
    return solve_in_span(rows, v);
  }

  /// Least-squares coefficients of v on the simple roots restricted to the
  /// index set, and the norm of the off-span residual.
  std::pair<Vec, double> decompose(const Vec& v, const std::vector<std::size_t>& indices) const {
    const std::size_t k = indices.size();
    if (k == 0) return {Vec{}, norm(v)};
    Eigen::MatrixXd a(dim_, k);
    for (std::size_t j = 0; j < k; ++j)
      for (std::size_t i = 0; i < dim_; ++i) a(i, j) = simple_[indices[j]].vec[i];
    Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(v.data(), dim_);
    Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
    Eigen::VectorXd r = b - a * c;
    return {Vec(c.data(), c.data() + k), r.norm()};
  }

 private:
  void require_exact(const char* what) const {
    if (!exact_)
      throw Error(ErrorKind::InvalidArgument,
                  std::string(what) + " needs rational simple roots");
  }

  friend RootSystem build_root_system(const RootSystemSpec& spec);

  std::string name_;
  std::size_t dim_ = 0;
  bool exact_ = false;
  std::vector<Root> simple_;
  std::vector<Root> positive_;
  Mat<double> fundamental_;
  std::optional<Mat<Rational>> fundamental_exact_;
  Vec two_rho_;
  std::optional<RVec> two_rho_exact_;
  std::vector<int> two_rho_coeffs_;
  std::vector<Eigen::MatrixXd> weyl_generators_;
  Mat<int> cartan_;
  std::size_t weyl_order_ = 1;
};

namespace detail {

struct CatalogBlock {
  std::optional<Mat<Rational>> exact;
  Mat<double> numeric;
};

inline CatalogBlock catalog_block(const std::string& name) {
  const double s3 = std::sqrt(3.0);
  auto exact_block = [](Mat<Rational> rows) {
    CatalogBlock b;
    for (const auto& r : rows) b.numeric.push_back(to_double(r));
    b.exact = std::move(rows);
    return b;
  };
  if (name == "A1") return exact_block({{Rational(2)}});
  if (name == "B2") return exact_block({{Rational(1), Rational(-1)}, {Rational(0), Rational(1)}});
  if (name == "A2") return CatalogBlock{std::nullopt, {{1.0, 0.0}, {-0.5, s3 / 2.0}}};
  if (name == "G2") return CatalogBlock{std::nullopt, {{1.0, 0.0}, {-1.5, s3 / 2.0}}};
  throw Error(ErrorKind::UnknownCatalogName, "unknown root system '" + name + "'");
}

/// Catalog lookup. "A1xA1" uses the SO4 normalization (1,-1),(1,1); any other
/// 'x'-separated name is the orthogonal direct sum of its factors.
inline CatalogBlock catalog_rows(const std::string& name) {
  if (name == "A1xA1") {
    Mat<Rational> rows{{Rational(1), Rational(-1)}, {Rational(1), Rational(1)}};
    CatalogBlock b;
    for (const auto& r : rows) b.numeric.push_back(to_double(r));
    b.exact = rows;
    return b;
  }
  std::vector<std::string> parts;
  std::stringstream ss(name);
  std::string part;
  while (std::getline(ss, part, 'x')) parts.push_back(part);
  if (parts.empty()) throw Error(ErrorKind::UnknownCatalogName, "empty root system name");
  std::vector<CatalogBlock> blocks;
  std::size_t total = 0;
  bool all_exact = true;
  for (const auto& p : parts) {
    blocks.push_back(catalog_block(p));
    total += blocks.back().numeric.front().size();
    all_exact = all_exact && blocks.back().exact.has_value();
  }
  CatalogBlock out;
  if (all_exact) out.exact.emplace();
  std::size_t offset = 0;
  for (const auto& b : blocks) {
    const std::size_t w = b.numeric.front().size();
    for (std::size_t r = 0; r < b.numeric.size(); ++r) {
      Vec row(total, 0.0);
      for (std::size_t c = 0; c < w; ++c) row[offset + c] = b.numeric[r][c];
      out.numeric.push_back(row);
      if (all_exact) {
        RVec erow(total, Rational(0));
        for (std::size_t c = 0; c < w; ++c) erow[offset + c] = (*b.exact)[r][c];
        out.exact->push_back(erow);
      }
    }
    offset += w;
  }
  return out;
}

}  // namespace detail

/// Builds the root system: validates the Cartan datum, generates the
/// positive roots by height, and derives fundamental weights, 2 rho and the
/// Weyl generators.
inline RootSystem build_root_system(const RootSystemSpec& spec) {
  const bool has_catalog = spec.catalog_name.has_value();
  const bool has_rows = spec.simple_roots.has_value() || spec.exact_simple_roots.has_value();
  if (has_catalog == has_rows)
    throw Error(ErrorKind::SchemaError, "exactly one of catalog_name / simple_roots must be given");
  if (spec.central_rank < 0) throw Error(ErrorKind::SchemaError, "central_rank must be >= 0");

  Mat<double> rows;
  std::optional<Mat<Rational>> exact_rows;
  RootSystem rs;
  if (has_catalog) {
    auto block = detail::catalog_rows(*spec.catalog_name);
    rows = std::move(block.numeric);
    exact_rows = std::move(block.exact);
    rs.name_ = *spec.catalog_name;
  } else if (spec.exact_simple_roots) {
    exact_rows = *spec.exact_simple_roots;
    for (const auto& r : *exact_rows) rows.push_back(to_double(r));
    rs.name_ = "custom";
  } else {
    rows = *spec.simple_roots;
    rs.name_ = "custom";
  }

  const std::size_t r = rows.size();
  std::size_t cols = r == 0 ? 0 : rows.front().size();
  for (const auto& row : rows)
    if (row.size() != cols) throw Error(ErrorKind::SchemaError, "ragged simple-root matrix");
  rs.dim_ = cols + static_cast<std::size_t>(spec.central_rank);
  rs.exact_ = exact_rows.has_value();
  if (rs.dim_ == 0) throw Error(ErrorKind::SchemaError, "ambient dimension is zero");

  // pad to the ambient dimension
  for (auto& row : rows) row.resize(rs.dim_, 0.0);
  if (exact_rows)
    for (auto& row : *exact_rows) row.resize(rs.dim_, Rational(0));

  // linear independence
  if (r > 0) {
    std::size_t rk = exact_rows ? rank(*exact_rows) : rank(rows);
    if (rk < r) throw Error(ErrorKind::InvalidCartanDatum, "simple roots are linearly dependent");
  }

  // Cartan integers A[i][j] = 2 <a_i, a_j> / <a_j, a_j>
  rs.cartan_.assign(r, std::vector<int>(r, 0));
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      int value = 0;
      if (exact_rows) {
        Rational a = Rational(2) * dot((*exact_rows)[i], (*exact_rows)[j]) /
                     dot((*exact_rows)[j], (*exact_rows)[j]);
        if (boost::multiprecision::denominator(a) != 1)
          throw Error(ErrorKind::InvalidCartanDatum, "non-integer Cartan number");
        value = boost::multiprecision::numerator(a).convert_to<int>();
      } else {
        double a = 2.0 * dot(rows[i], rows[j]) / dot(rows[j], rows[j]);
        double rounded = std::round(a);
        if (std::abs(a - rounded) > 1e-9)
          throw Error(ErrorKind::InvalidCartanDatum, "non-integer Cartan number");
        value = static_cast<int>(rounded);
      }
      if (i != j && value > 0)
        throw Error(ErrorKind::InvalidCartanDatum, "positive off-diagonal Cartan number");
      rs.cartan_[i][j] = value;
    }
  }
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = i + 1; j < r; ++j)
      if (rs.cartan_[i][j] * rs.cartan_[j][i] > 3)
        throw Error(ErrorKind::InvalidCartanDatum, "Cartan datum not of finite type");

  auto make_root = [&](const std::vector<int>& coeffs) {
    Root root;
    root.coeffs = coeffs;
    root.vec.assign(rs.dim_, 0.0);
    if (exact_rows) root.exact = RVec(rs.dim_, Rational(0));
    for (std::size_t i = 0; i < r; ++i) {
      if (coeffs[i] == 0) continue;
      for (std::size_t k = 0; k < rs.dim_; ++k) {
        root.vec[k] += coeffs[i] * rows[i][k];
        if (exact_rows) (*root.exact)[k] += Rational(coeffs[i]) * (*exact_rows)[i][k];
      }
    }
    if (exact_rows) root.vec = to_double(*root.exact);
    root.label = root_label(coeffs);
    return root;
  };

  for (std::size_t i = 0; i < r; ++i) {
    std::vector<int> e(r, 0);
    e[i] = 1;
    rs.simple_.push_back(make_root(e));
  }

  // Positive roots by height. beta + a_i is a root iff q > 0 where
  // p - q = <beta, a_i^vee> and p is the length of the a_i-string below beta.
  std::set<std::vector<int>> known;
  std::vector<std::vector<int>> ordered;
  for (const auto& s : rs.simple_) {
    known.insert(s.coeffs);
    ordered.push_back(s.coeffs);
  }
  constexpr std::size_t kMaxRoots = 2000;
  for (std::size_t idx = 0; idx < ordered.size(); ++idx) {
    const auto beta = ordered[idx];
    for (std::size_t i = 0; i < r; ++i) {
      int pairing = 0;  // <beta, a_i^vee>
      for (std::size_t j = 0; j < r; ++j) pairing += beta[j] * rs.cartan_[j][i];
      int p = 0;
      while (true) {
        auto down = beta;
        down[i] -= p + 1;
        if (down[i] < 0 || !known.count(down)) break;
        ++p;
      }
      bool is_simple_i = true;
      for (std::size_t j = 0; j < r; ++j)
        if (beta[j] != (j == i ? 1 : 0)) is_simple_i = false;
      if (is_simple_i) continue;
      int q = p - pairing;
      if (q > 0) {
        auto up = beta;
        up[i] += 1;
        if (known.insert(up).second) {
          ordered.push_back(up);
          if (ordered.size() > kMaxRoots)
            throw Error(ErrorKind::InvalidCartanDatum, "root generation does not terminate");
        }
      }
    }
  }
  std::stable_sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
    int ha = 0, hb = 0;
    for (int x : a) ha += x;
    for (int x : b) hb += x;
    if (ha != hb) return ha < hb;
    return a > b;
  });
  for (const auto& c : ordered) rs.positive_.push_back(make_root(c));

  // 2 rho
  rs.two_rho_coeffs_.assign(r, 0);
  rs.two_rho_.assign(rs.dim_, 0.0);
  if (exact_rows) rs.two_rho_exact_ = RVec(rs.dim_, Rational(0));
  for (const auto& root : rs.positive_) {
    for (std::size_t i = 0; i < r; ++i) rs.two_rho_coeffs_[i] += root.coeffs[i];
    if (exact_rows)
      for (std::size_t k = 0; k < rs.dim_; ++k) (*rs.two_rho_exact_)[k] += (*root.exact)[k];
    else
      for (std::size_t k = 0; k < rs.dim_; ++k) rs.two_rho_[k] += root.vec[k];
  }
  if (exact_rows) rs.two_rho_ = to_double(*rs.two_rho_exact_);

  // Fundamental weights: w_i = sum_k M_ik a_k with M = D G^{-1}, D = diag(|a_i|^2/2).
  if (r > 0) {
    if (exact_rows) {
      Mat<Rational> gram(r, RVec(r));
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < r; ++j) gram[i][j] = dot((*exact_rows)[i], (*exact_rows)[j]);
      Mat<Rational> weights;
      for (std::size_t i = 0; i < r; ++i) {
        RVec rhs(r, Rational(0));
        rhs[i] = gram[i][i] / 2;
        auto m = solve_square(gram, rhs);  // gram symmetric: row i of M
        RVec w(rs.dim_, Rational(0));
        for (std::size_t k = 0; k < r; ++k)
          for (std::size_t c = 0; c < rs.dim_; ++c) w[c] += (*m)[k] * (*exact_rows)[k][c];
        weights.push_back(w);
        rs.fundamental_.push_back(to_double(w));
      }
      rs.fundamental_exact_ = std::move(weights);
    } else {
      Eigen::MatrixXd a(r, rs.dim_);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t c = 0; c < rs.dim_; ++c) a(i, c) = rows[i][c];
      Eigen::MatrixXd gram = a * a.transpose();
      Eigen::MatrixXd d = (gram.diagonal() / 2.0).asDiagonal();
      Eigen::MatrixXd w = d * gram.inverse() * a;
      for (std::size_t i = 0; i < r; ++i) {
        Vec row(rs.dim_);
        for (std::size_t c = 0; c < rs.dim_; ++c) row[c] = w(i, c);
        rs.fundamental_.push_back(row);
      }
    }
  }

  // Weyl generators s_i = I - 2 a a^T / |a|^2
  for (const auto& s : rs.simple_) {
    Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(s.vec.data(), rs.dim_);
    rs.weyl_generators_.push_back(Eigen::MatrixXd::Identity(rs.dim_, rs.dim_) -
                                  2.0 * a * a.transpose() / a.squaredNorm());
  }

  // |W| as the orbit size of a regular dominant point.
  {
    Vec seed(rs.dim_, 0.0);
    for (const auto& w : rs.fundamental_)
      for (std::size_t k = 0; k < rs.dim_; ++k) seed[k] += w[k];
    auto key = [](const Vec& v) {
      std::vector<long long> k;
      for (double x : v) k.push_back(std::llround(x * 1e8));
      return k;
    };
    std::set<std::vector<long long>> seen{key(seed)};
    std::vector<Vec> frontier{seed};
    constexpr std::size_t kMaxOrder = 200000;
    while (!frontier.empty()) {
      std::vector<Vec> next;
      for (const auto& v : frontier) {
        for (std::size_t i = 0; i < r; ++i) {
          Vec w = rs.reflect(i, v);
          if (seen.insert(key(w)).second) next.push_back(w);
        }
      }
      if (seen.size() > kMaxOrder)
        throw Error(ErrorKind::InvalidCartanDatum, "Weyl group closure does not terminate");
      frontier = std::move(next);
    }
    rs.weyl_order_ = seen.size();
  }
  return rs;
}

/// prod_{alpha in Phi+} <alpha, y>^2 as an expanded polynomial in dim() variables.
inline Polynomial dh_density(const RootSystem& rs) {
  Polynomial p = Polynomial::constant(rs.dim(), 1.0);
  for (const auto& root : rs.positive_roots()) {
    Polynomial l = Polynomial::linear(root.vec);
    p = p * (l * l);
  }
  return p;
}

struct DominantRepresentative {
  Vec vector;
  std::vector<std::size_t> word;  // simple reflections applied, in order
};

/// Reflects y into the closed dominant chamber.
inline DominantRepresentative dominant_representative(const RootSystem& rs, Vec y) {
  DominantRepresentative out;
  const double tol = 1e-14 * (1.0 + norm(y));
  for (std::size_t guard = 0; guard < 100000; ++guard) {
    std::size_t hit = rs.rank();
    for (std::size_t i = 0; i < rs.rank(); ++i) {
      if (rs.pair_simple(i, y) < -tol) {
        hit = i;
        break;
      }
    }
    if (hit == rs.rank()) break;
    y = rs.reflect(hit, y);
    out.word.push_back(hit);
  }
  out.vector = std::move(y);
  return out;
}

struct ExactDominantRepresentative {
  RVec vector;
  std::vector<std::size_t> word;
};

inline ExactDominantRepresentative dominant_representative_exact(const RootSystem& rs, RVec y) {
  ExactDominantRepresentative out;
  while (true) {
    std::size_t hit = rs.rank();
    for (std::size_t i = 0; i < rs.rank(); ++i) {
      if (rs.pair_simple_exact(i, y) < 0) {
        hit = i;
        break;
      }
    }
    if (hit == rs.rank()) break;
    y = rs.reflect_exact(hit, y);
    out.word.push_back(hit);
  }
  out.vector = std::move(y);
  return out;
}

}  // namespace gcdeg
