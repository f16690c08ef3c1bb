#pragma once

#include <cmath>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "gcdeg/numeric.hpp"

namespace gcdeg {

/// Exponent multi-index.
using Monomial = std::vector<int>;

/// Sparse multivariate polynomial with double coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, double c) {
    Polynomial p(nvars);
    p.add_term(Monomial(nvars, 0), c);
    return p;
  }

  /// c0 + sum_i coeffs[i] * y_i
  static Polynomial linear(const Vec& coeffs, double c0 = 0.0) {
    Polynomial p(coeffs.size());
    p.add_term(Monomial(coeffs.size(), 0), c0);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      Monomial m(coeffs.size(), 0);
      m[i] = 1;
      p.add_term(m, coeffs[i]);
    }
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t i) {
    Vec c(nvars, 0.0);
    c[i] = 1.0;
    return linear(c);
  }

  std::size_t nvars() const { return nvars_; }
  const std::map<Monomial, double>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }

  int degree() const {
    int d = 0;
    for (const auto& [m, c] : terms_) {
      int s = 0;
      for (int e : m) s += e;
      d = std::max(d, s);
    }
    return d;
  }

  void add_term(const Monomial& m, double c) {
    if (c == 0.0) return;
    auto [it, inserted] = terms_.emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  double operator()(std::span<const double> y) const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) {
      double v = c;
      for (std::size_t i = 0; i < m.size(); ++i)
        for (int e = 0; e < m[i]; ++e) v *= y[i];
      s += v;
    }
    return s;
  }

  Polynomial& operator+=(const Polynomial& o) {
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
  }

  Polynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [m, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a += b * -1.0; }
  friend Polynomial operator*(Polynomial a, double s) { return a *= s; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    Polynomial out(std::max(a.nvars_, b.nvars_));
    for (const auto& [ma, ca] : a.terms_) {
      for (const auto& [mb, cb] : b.terms_) {
        Monomial m(ma);
        for (std::size_t i = 0; i < m.size(); ++i) m[i] += mb[i];
        out.add_term(m, ca * cb);
      }
    }
    return out;
  }

  Polynomial pow(int e) const {
    Polynomial result = constant(nvars_, 1.0);
    Polynomial base = *this;
    while (e > 0) {
      if (e & 1) result = result * base;
      e >>= 1;
      if (e) base = base * base;
    }
    return result;
  }

  /// q(t) = p(origin + sum_j t_j * directions[j]); q has directions.size() variables.
  Polynomial compose_affine(const Vec& origin, const Mat<double>& directions) const {
    const std::size_t m = directions.size();
    // y_i as a linear polynomial in t
    std::vector<Polynomial> coord;
    coord.reserve(nvars_);
    for (std::size_t i = 0; i < nvars_; ++i) {
      Vec c(m);
      for (std::size_t j = 0; j < m; ++j) c[j] = directions[j][i];
      coord.push_back(linear(c, origin[i]));
    }
    // cache powers per coordinate
    std::vector<std::vector<Polynomial>> powers(nvars_);
    Polynomial out(m);
    for (const auto& [mono, c] : terms_) {
      Polynomial term = constant(m, c);
      for (std::size_t i = 0; i < nvars_; ++i) {
        int e = mono[i];
        if (e == 0) continue;
        auto& cache = powers[i];
        if (cache.empty()) cache.push_back(constant(m, 1.0));
        while (static_cast<int>(cache.size()) <= e) cache.push_back(cache.back() * coord[i]);
        term = term * cache[e];
      }
      out += term;
    }
    return out;
  }

  std::string to_string() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [m, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += format_double(c);
      for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i] == 0) continue;
        s += "*y" + std::to_string(i + 1);
        if (m[i] > 1) s += "^" + std::to_string(m[i]);
      }
    }
    return s;
  }

 private:
  std::size_t nvars_ = 0;
  std::map<Monomial, double> terms_;
};

}  // namespace gcdeg
