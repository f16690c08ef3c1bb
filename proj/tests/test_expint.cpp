#include <gtest/gtest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

#include "gcdeg/expint.hpp"
#include "gcdeg/polytope.hpp"
#include "gcdeg/rootsys.hpp"

using namespace gcdeg;

namespace {

// Gauss-Legendre nodes on [0, 1] by Newton iteration on P_n.
struct Gauss {
  std::vector<long double> x, w;
  explicit Gauss(int n) {
    const long double pi = 3.141592653589793238462643383279503L;
    for (int i = 1; i <= n; ++i) {
      long double z = std::cos(pi * (i - 0.25L) / (n + 0.5L)), dp = 0;
      for (int it = 0; it < 100; ++it) {
        long double p0 = 1, p1 = z;
        for (int k = 2; k <= n; ++k) {
          long double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        long double dz = p1 / dp;
        z -= dz;
        if (std::fabs(dz) < 1e-19L) break;
      }
      x.push_back((1 - z) / 2);
      w.push_back(1 / ((1 - z * z) * dp * dp));
    }
  }
};

// Duffy-collapsed tensor quadrature over a triangle.
long double triangle_quad(const Mat<double>& v, const std::function<long double(long double, long double)>& f,
                          int n = 48) {
  Gauss g(n);
  long double det = std::fabs((long double)(v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) -
                              (long double)(v[2][0] - v[0][0]) * (v[1][1] - v[0][1]));
  long double s = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      long double u = g.x[i], t = g.x[j];
      long double a = u * (1 - t), b = u * t;
      long double x = v[0][0] + a * (v[1][0] - v[0][0]) + b * (v[2][0] - v[0][0]);
      long double y = v[0][1] + a * (v[1][1] - v[0][1]) + b * (v[2][1] - v[0][1]);
      s += g.w[i] * g.w[j] * u * f(x, y);
    }
  return s * det;
}

Simplex rsimplex(const Mat<Rational>& v) { return Simplex{v}; }

Polynomial one(std::size_t n) { return Polynomial::constant(n, 1.0); }

}  // namespace

TEST(IntegrateSimplex, OneDimensionalClosedForms) {
  auto y = Polynomial::variable(1, 0);
  Simplex unit = rsimplex({{0}, {1}});
  EXPECT_NEAR(integrate_simplex(y * y, {1.0}, unit), std::exp(1.0) - 2.0, 1e-13);
  EXPECT_NEAR(integrate_simplex(y, {1.0}, unit), 1.0, 1e-13);
  EXPECT_NEAR(integrate_simplex(one(1), {0.0}, unit), 1.0, 1e-15);
  for (double c : {-30.0, -8.0, -7.999, 0.5, 8.0, 8.001, 40.0})
    EXPECT_NEAR(integrate_simplex(one(1), {c}, unit) / std::expm1(c) * c, 1.0, 1e-12) << c;
}

TEST(IntegrateSimplex, StandardSimplexVolume) {
  double fact = 1;
  for (std::size_t n = 1; n <= 5; ++n) {
    fact *= n;
    Mat<Rational> v(n + 1, RVec(n, Rational(0)));
    for (std::size_t i = 0; i < n; ++i) v[i + 1][i] = 1;
    EXPECT_NEAR(integrate_simplex(one(n), Vec(n, 0.0), Simplex{v}), 1.0 / fact, 1e-15) << n;
  }
}

TEST(IntegrateSimplex, MatchesQuadratureAcrossSwitch) {
  Mat<Rational> tri{{0, 0}, {Rational(3, 2), Rational(-3, 2)}, {3, 0}};
  Simplex s{tri};
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  auto pi = (x - y) * (x + y);
  pi = pi * pi;
  auto verts = s.vertices_double();
  for (double t : {0.0, 0.3, 2.6, 2.67, 2.7, 5.0}) {
    Vec lam{t, -0.25 * t};
    double got = integrate_simplex(pi, lam, s);
    long double want = triangle_quad(verts, [&](long double a, long double b) {
      long double q = (a - b) * (a + b);
      return q * q * std::exp(lam[0] * a + lam[1] * b);
    });
    EXPECT_NEAR(got / (double)want, 1.0, 1e-12) << t;
  }
}

TEST(IntegrateSimplex, IntegrateTermsIsLinear) {
  Simplex s{{{0, 0}, {1, 0}, {0, 1}}};
  std::vector<PolyExpTerm> terms{{2.0, {1, 0}, {0.5, 0.0}}, {-1.0, {0, 2}, {0.0, -1.0}}};
  Polynomial a(2), b(2);
  a.add_term({1, 0}, 2.0);
  b.add_term({0, 2}, -1.0);
  EXPECT_NEAR(integrate_terms(terms, s),
              integrate_simplex(a, {0.5, 0.0}, s) + integrate_simplex(b, {0.0, -1.0}, s), 1e-14);
}

TEST(IntegrateSimplex, Errors) {
  EXPECT_THROW(integrate_simplex(one(2), {0.0, 0.0}, Simplex{{{0, 0}, {1, 1}, {2, 2}}}), Error);
  EXPECT_THROW(integrate_simplex(one(2), {0.0}, Simplex{{{0, 0}, {1, 0}, {0, 1}}}), Error);
}

TEST(RegionMoments, SegmentWithDensity) {
  auto p = ConvexPolytope::from_vertices({{0}, {3}}, 1);
  auto pi = dh_density(build_root_system(RootSystemSpec::catalog("A1")));
  auto m = region_moments(p, pi, {0.0});
  EXPECT_NEAR(m.z(), 36.0, 1e-12);
  EXPECT_NEAR(m.first()[0], 81.0, 1e-11);
  EXPECT_NEAR(m.barycenter()[0], 2.25, 1e-13);
}

TEST(RegionMoments, UnitSquareCovariance) {
  auto sq = ConvexPolytope::from_halfspaces({{{-1, 0}, 0}, {{0, -1}, 0}, {{1, 0}, 1}, {{0, 1}, 1}}, 2);
  auto m = region_moments(sq, one(2), {0.0, 0.0});
  auto c = m.covariance();
  EXPECT_NEAR(m.z(), 1.0, 1e-15);
  EXPECT_NEAR(c[0][0], 1.0 / 12, 1e-14);
  EXPECT_NEAR(c[1][1], 1.0 / 12, 1e-14);
  EXPECT_NEAR(c[0][1], 0.0, 1e-14);
  // with a tilt, the marginals are independent exponential families on [0, 1]
  auto t = region_moments(sq, one(2), {2.0, -1.0});
  auto mean = [](double a) { return 1.0 / (1.0 - std::exp(-a)) - 1.0 / a; };
  EXPECT_NEAR(t.barycenter()[0], mean(2.0), 1e-13);
  EXPECT_NEAR(t.barycenter()[1], mean(-1.0), 1e-13);
  EXPECT_NEAR(t.covariance()[0][1], 0.0, 1e-13);
}

TEST(RegionMoments, AdditiveOverSplit) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  auto pi = dh_density(rs);
  Mat<Rational> v{{0, 0}, {3, 3}, {3, 0}, {Rational(3, 2), Rational(-3, 2)}};
  auto whole = ConvexPolytope::from_vertices(v, 2);
  auto left = ConvexPolytope::from_vertices({{0, 0}, {3, 3}, {3, 0}}, 2);
  auto right = ConvexPolytope::from_vertices({{0, 0}, {3, 0}, {Rational(3, 2), Rational(-3, 2)}}, 2);
  for (Vec lam : {Vec{0, 0}, Vec{0.7, -0.7}, Vec{-1.5, 0.2}}) {
    auto a = region_moments(whole, pi, lam), b = region_moments(left, pi, lam), c = region_moments(right, pi, lam);
    EXPECT_NEAR(a.z() / (b.z() + c.z()), 1.0, 1e-12);
    for (int i = 0; i < 2; ++i)
      EXPECT_NEAR(a.first()[i], b.first()[i] + c.first()[i], 1e-11 * std::abs(a.z()) * 4);
  }
}

TEST(RegionMoments, TranslationMovesBarycenterKeepsCovariance) {
  auto tri = ConvexPolytope::from_vertices({{0, 0}, {2, 0}, {0, 1}}, 2);
  auto moved = ConvexPolytope::from_vertices({{5, -3}, {7, -3}, {5, -2}}, 2);
  Vec lam{0.9, -2.2};
  auto a = region_moments(tri, one(2), lam), b = region_moments(moved, one(2), lam);
  EXPECT_NEAR(b.barycenter()[0] - a.barycenter()[0], 5.0, 1e-12);
  EXPECT_NEAR(b.barycenter()[1] - a.barycenter()[1], -3.0, 1e-12);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(a.covariance()[i][j], b.covariance()[i][j], 1e-12);
  EXPECT_NEAR(b.log_z() - a.log_z(), lam[0] * 5 - lam[1] * 3, 1e-12);
}

TEST(RegionMoments, CovarianceIsPositiveDefinite) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  auto pi = dh_density(rs);
  auto p = ConvexPolytope::from_vertices({{0, 0}, {3, 3}, {3, 1}, {2, -1}, {Rational(3, 2), Rational(-3, 2)}}, 2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int t = 0; t < 20; ++t) {
    auto m = region_moments(p, pi, {u(rng), u(rng)});
    Eigen::Matrix2d c;
    c << m.covariance()[0][0], m.covariance()[0][1], m.covariance()[1][0], m.covariance()[1][1];
    EXPECT_EQ(Eigen::LLT<Eigen::Matrix2d>(c).info(), Eigen::Success);
  }
}

TEST(RegionMoments, SubdivisionInvariance) {
  Simplex s{{{0, 0}, {3, 0}, {1, 2}}};
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  auto p = x * x * y + Polynomial::constant(2, 1.0);
  Vec lam{1.3, -0.4};
  double whole = integrate_simplex(p, lam, s);
  double parts = 0;
  for (const auto& k : subdivide_uniform(s)) parts += integrate_simplex(p, lam, k);
  EXPECT_NEAR(parts / whole, 1.0, 1e-13);
}

TEST(MomentEngine, LargeLambdaStaysFinite) {
  auto p = ConvexPolytope::from_vertices({{0}, {1}}, 1);
  MomentEngine eng(p, one(1));
  // int_0^1 e^{c y} dy = (e^c - 1) / c
  for (double c : {200.0, 800.0, -800.0}) {
    double want = c > 0 ? c - std::log(c) + std::log1p(-std::exp(-c)) : -std::log(-c);
    EXPECT_NEAR(eng.mass({c}).log(), want, 1e-10) << c;
  }
  auto m = eng.moments({800.0});
  EXPECT_NEAR(m.barycenter()[0], 1.0 - 1.0 / 800, 1e-12);
  EXPECT_NEAR(m.covariance()[0][0], 1.0 / (800.0 * 800.0), 1e-12);
}

TEST(MomentEngine, DeterministicAcrossCalls) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  auto p = ConvexPolytope::from_vertices({{0, 0}, {3, 3}, {3, 0}, {Rational(3, 2), Rational(-3, 2)}}, 2);
  MomentEngine eng(p, dh_density(rs));
  auto a = eng.moments({0.4, -0.4}), b = eng.moments({0.4, -0.4});
  EXPECT_EQ(a.z_scaled, b.z_scaled);
  EXPECT_EQ(a.first_scaled, b.first_scaled);
}

TEST(IntegrateSimplex, TriangleExponential) {
  Simplex s{{{0, 0}, {1, 0}, {0, 1}}};
  EXPECT_NEAR(integrate_simplex(one(2), {1.0, 0.0}, s), std::exp(1.0) - 2.0, 1e-13);
}

TEST(IntegrateSimplex, SplitAtRandomInteriorPoint) {
  std::mt19937_64 rng(13);
  std::uniform_int_distribution<int> w(1, 20);
  Mat<Rational> v{{0, 0}, {3, 0}, {1, 2}};
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  auto p = (x - y) * (x - y) * (x + y) * (x + y);
  for (int t = 0; t < 10; ++t) {
    Rational a(w(rng)), b(w(rng)), c(w(rng)), sum = a + b + c;
    RVec q{(a * v[0][0] + b * v[1][0] + c * v[2][0]) / sum, (a * v[0][1] + b * v[1][1] + c * v[2][1]) / sum};
    Vec lam{0.5 * t - 2, 1.0 - 0.3 * t};
    double whole = integrate_simplex(p, lam, Simplex{v});
    double parts = 0;
    for (int i = 0; i < 3; ++i) {
      Mat<Rational> sub = v;
      sub[i] = q;
      parts += integrate_simplex(p, lam, Simplex{sub});
    }
    EXPECT_NEAR(parts / whole, 1.0, 1e-10);
  }
}

TEST(IntegrateSimplex, AffineCovariance) {
  // A(y) = M y + t with M = [[2, 1], [0, 1]], t = (1, -1)
  Mat<Rational> v{{0, 0}, {1, 0}, {0, 1}};
  Mat<Rational> av;
  for (const auto& p : v) av.push_back({2 * p[0] + p[1] + 1, p[1] - 1});
  auto x = Polynomial::variable(2, 0), y = Polynomial::variable(2, 1);
  auto p = x * x * y + Polynomial::constant(2, 0.5);
  // p o A^{-1}: y = z2 + 1, x = (z1 - z2 - 2) / 2
  auto zx = Polynomial::linear({0.5, -0.5}, -1.0), zy = Polynomial::linear({0.0, 1.0}, 1.0);
  auto q = zx * zx * zy + Polynomial::constant(2, 0.5);
  Vec lam{0.7, -1.1};
  // <lam, A^{-1} z> = lam . (zx, zy) = linear in z plus a constant
  Vec mu{0.5 * lam[0], -0.5 * lam[0] + lam[1]};
  double shift = -lam[0] + lam[1];
  double lhs = integrate_simplex(q, mu, Simplex{av}) * std::exp(shift);
  double rhs = 2.0 * integrate_simplex(p, lam, Simplex{v});
  EXPECT_NEAR(lhs / rhs, 1.0, 1e-10);
}

TEST(IntegrateSimplex, SeriesSwitchContinuity) {
  // the same integrand evaluated with the series just below and the closed form just above the switch
  Simplex s{{{0, 0}, {1, 0}, {0, 1}}};
  auto x = Polynomial::variable(2, 0);
  auto p = x * x * x + Polynomial::constant(2, 0.5);
  for (double c : {8.0, 3.0, 1.5}) {
    Vec lam{c, c / 3};
    IntegrationOptions series, closed;
    series.eps_switch = c * (1 + 1e-6) * 2;
    closed.eps_switch = c * (1 - 1e-6) / 3;
    double a = integrate_simplex(p, lam, s, series), b = integrate_simplex(p, lam, s, closed);
    EXPECT_NEAR(a / b, 1.0, 1e-10) << c;
  }
  IntegrationOptions o;
  double below = integrate_simplex(p, {o.eps_switch * (1 - 1e-12), 0.1}, s);
  double above = integrate_simplex(p, {o.eps_switch * (1 + 1e-12), 0.1}, s);
  EXPECT_NEAR(above / below, 1.0, 1e-10);
}
