#pragma once

// Scalar types, exact rationals and small dense linear algebra shared by
// every module. Exact routines are templated on the scalar so the same
// elimination code serves cpp_rational and double (with a tolerance).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "gcdeg/error.hpp"

namespace gcdeg {

using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;
using Vec = std::vector<double>;
using RVec = std::vector<Rational>;
template <class T>
using Mat = std::vector<std::vector<T>>;

// ---------------------------------------------------------------------------
// Rational conversion and formatting

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

inline Vec to_double(const RVec& v) {
  Vec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = to_double(v[i]);
  return out;
}

/// Exact value of a finite double (every double is a dyadic rational).
inline Rational from_double(double x) {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "non-finite value");
  int exponent = 0;
  double mantissa = std::frexp(x, &exponent);
  // mantissa in [0.5, 1): scale to a 53-bit integer.
  auto scaled = static_cast<long long>(std::ldexp(mantissa, 53));
  exponent -= 53;
  Rational r(scaled);
  if (exponent > 0) {
    r *= Rational(BigInt(1) << exponent);
  } else if (exponent < 0) {
    r /= Rational(BigInt(1) << (-exponent));
  }
  return r;
}

inline RVec from_double(const Vec& v) {
  RVec out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = from_double(v[i]);
  return out;
}

/// Parses "p/q", an integer, or a decimal with optional exponent
/// ("-1.25", "3e-2") into an exact rational.
inline Rational parse_rational(std::string_view text) {
  auto fail = [&]() -> Rational {
    throw Error(ErrorKind::SchemaError, "cannot parse number '" + std::string(text) + "'");
  };
  std::string s;
  for (char ch : text)
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  if (s.empty()) return fail();
  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational num = parse_rational(s.substr(0, slash));
    Rational den = parse_rational(s.substr(slash + 1));
    if (den == 0) return fail();
    return num / den;
  }
  bool negative = false;
  std::size_t pos = 0;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = s[pos] == '-';
    ++pos;
  }
  BigInt digits = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool in_frac = false;
  for (; pos < s.size(); ++pos) {
    char ch = s[pos];
    if (ch >= '0' && ch <= '9') {
      digits = digits * 10 + (ch - '0');
      seen_digit = true;
      if (in_frac) ++frac_digits;
    } else if (ch == '.' && !in_frac) {
      in_frac = true;
    } else {
      break;
    }
  }
  if (!seen_digit) return fail();
  long exponent = 0;
  if (pos < s.size()) {
    if (s[pos] != 'e' && s[pos] != 'E') return fail();
    ++pos;
    std::string rest = s.substr(pos);
    if (rest.empty()) return fail();
    try {
      std::size_t used = 0;
      exponent = std::stol(rest, &used);
      if (used != rest.size()) return fail();
    } catch (const std::exception&) {
      return fail();
    }
  }
  exponent -= frac_digits;
  Rational r(digits);
  BigInt ten_pow = 1;
  for (long i = 0; i < std::labs(exponent); ++i) ten_pow *= 10;
  if (exponent >= 0)
    r *= Rational(ten_pow);
  else
    r /= Rational(ten_pow);
  return negative ? Rational(-r) : r;
}

/// "p/q" or "p" for integers.
inline std::string to_string(const Rational& r) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  if (denominator(r) == 1) return numerator(r).str();
  return numerator(r).str() + "/" + denominator(r).str();
}

/// Decimal with 15 significant digits.
inline std::string format_double(double x) {
  if (x == 0.0) return "0";  // also folds -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", x);
  return buf;
}

inline BigInt floor_div(const Rational& r) {
  using boost::multiprecision::denominator;
  using boost::multiprecision::numerator;
  BigInt n = numerator(r);
  BigInt d = denominator(r);
  BigInt q = n / d;
  if (n % d != 0 && n < 0) q -= 1;
  return q;
}

inline Rational floor(const Rational& r) { return Rational(floor_div(r)); }
inline Rational ceil(const Rational& r) { return Rational(-floor_div(Rational(-r))); }

// ---------------------------------------------------------------------------
// Vector helpers

template <class T>
T dot(const std::vector<T>& a, const std::vector<T>& b) {
  T s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

template <class T>
std::vector<T> operator+(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += b[i];
  return out;
}

template <class T>
std::vector<T> operator-(const std::vector<T>& a, const std::vector<T>& b) {
  std::vector<T> out(a);
  for (std::size_t i = 0; i < a.size(); ++i) out[i] -= b[i];
  return out;
}

template <class T, class S>
std::vector<T> scaled(const std::vector<T>& a, const S& s) {
  std::vector<T> out(a);
  for (auto& x : out) x *= s;
  return out;
}

/// Neumaier-compensated running sum.
class KahanSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// ---------------------------------------------------------------------------
// Elimination, templated on the scalar.

template <class T>
struct ZeroTest;

template <>
struct ZeroTest<Rational> {
  static bool is_zero(const Rational& x) { return x == 0; }
  static bool is_negative(const Rational& x) { return x < 0; }
  static bool is_positive(const Rational& x) { return x > 0; }
};

template <>
struct ZeroTest<double> {
  static constexpr double tol = 1e-11;
  static bool is_zero(double x) { return std::abs(x) <= tol; }
  static bool is_negative(double x) { return x < -tol; }
  static bool is_positive(double x) { return x > tol; }
};

template <class T>
bool is_zero(const T& x) {
  return ZeroTest<T>::is_zero(x);
}

/// Reduced row echelon form in place; returns the pivot columns.
template <class T>
std::vector<std::size_t> rref(Mat<T>& m, std::size_t ncols) {
  std::vector<std::size_t> pivots;
  std::size_t row = 0;
  for (std::size_t col = 0; col < ncols && row < m.size(); ++col) {
    std::size_t best = m.size();
    for (std::size_t r = row; r < m.size(); ++r) {
      if (is_zero(m[r][col])) continue;
      if constexpr (std::is_same_v<T, double>) {
        if (best == m.size() || std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
      } else {
        best = r;
        break;
      }
    }
    if (best == m.size()) continue;
    std::swap(m[row], m[best]);
    T inv = T(1) / m[row][col];
    for (auto& x : m[row]) x *= inv;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || is_zero(m[r][col])) continue;
      T factor = m[r][col];
      for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] -= factor * m[row][c];
    }
    pivots.push_back(col);
    ++row;
  }
  return pivots;
}

template <class T>
std::size_t rank(Mat<T> m) {
  if (m.empty()) return 0;
  return rref(m, m.front().size()).size();
}

/// Solves the square system a x = b; nullopt when singular.
template <class T>
std::optional<std::vector<T>> solve_square(const Mat<T>& a, const std::vector<T>& b) {
  const std::size_t n = a.size();
  Mat<T> aug(n, std::vector<T>(n + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
    aug[i][n] = b[i];
  }
  auto piv = rref(aug, n);
  if (piv.size() < n) return std::nullopt;
  std::vector<T> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = aug[i][n];
  return x;
}

/// Basis of {x : m x = 0} for an r x ncols matrix.
template <class T>
Mat<T> nullspace(Mat<T> m, std::size_t ncols) {
  auto piv = rref(m, ncols);
  std::vector<bool> is_pivot(ncols, false);
  for (auto p : piv) is_pivot[p] = true;
  Mat<T> basis;
  for (std::size_t free = 0; free < ncols; ++free) {
    if (is_pivot[free]) continue;
    std::vector<T> v(ncols, T(0));
    v[free] = T(1);
    for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -m[r][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

/// Least-squares style exact decomposition: returns coefficients c with
/// sum_i c_i rows[i] == target, or nullopt when target is outside the span
/// (rows must be independent).
template <class T>
std::optional<std::vector<T>> solve_in_span(const Mat<T>& rows, const std::vector<T>& target) {
  const std::size_t k = rows.size();
  const std::size_t n = target.size();
  // columns = rows, unknowns = k
  Mat<T> aug(n, std::vector<T>(k + 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) aug[i][j] = rows[j][i];
    aug[i][k] = target[i];
  }
  auto piv = rref(aug, k + 1);
  if (!piv.empty() && piv.back() == k) return std::nullopt;  // inconsistent
  if (piv.size() < k) return std::nullopt;
  std::vector<T> c(k);
  for (std::size_t r = 0; r < k; ++r) c[r] = aug[r][k];
  return c;
}

/// Iterates over all k-subsets of {0..n-1} in lexicographic order.
template <class F>
void for_each_combination(std::size_t n, std::size_t k, F&& f) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    f(static_cast<const std::vector<std::size_t>&>(idx));
    if (k == 0) return;
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + (pos - 1)) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

/// True when the cone {d : rows * d <= 0} is {0}.
template <class T>
bool cone_is_trivial(const Mat<T>& rows, std::size_t n) {
  if (rank(rows) < n) return false;  // contains a line
  // Pointed cone: any extreme ray is cut out by n-1 independent tight rows.
  bool trivial = true;
  for_each_combination(rows.size(), n - 1, [&](const std::vector<std::size_t>& idx) {
    if (!trivial) return;
    Mat<T> sub;
    for (auto i : idx) sub.push_back(rows[i]);
    Mat<T> ns;
    if (sub.empty()) {
      ns.push_back(std::vector<T>(n, T(0)));
      ns[0][0] = T(1);
    } else {
      ns = nullspace(sub, n);
    }
    if (ns.size() != 1) return;
    for (int sign : {1, -1}) {
      bool ok = true;
      for (const auto& r : rows) {
        if (ZeroTest<T>::is_positive(dot(r, ns[0]) * T(sign))) {
          ok = false;
          break;
        }
      }
      if (ok) trivial = false;
    }
  });
  return trivial;
}

}  // namespace gcdeg
