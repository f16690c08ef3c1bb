#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "gcdeg/minimize.hpp"

using namespace gcdeg;

namespace {

HFunctional a1_segment(Rational top) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1"));
  return HFunctional(rs, ConvexPolytope::from_vertices({{0}, {top}}, 1));
}

HFunctional case1() {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  auto p = ConvexPolytope::from_vertices({{0, 0}, {3, 3}, {3, 0}, {Rational(3, 2), Rational(-3, 2)}}, 2);
  return HFunctional(rs, p);
}

// A1 plus a one-dimensional centre, box [0, xmax] x [ymin, ymax].
HFunctional a1_box(Rational xmax, Rational ymin, Rational ymax) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1", 1));
  auto p = ConvexPolytope::from_vertices({{0, ymin}, {xmax, ymin}, {0, ymax}, {xmax, ymax}}, 2);
  return HFunctional(rs, p);
}

// Weighted mean of w(y) e^{lam y} on [a, b] by Simpson.
double tilted_mean(const std::function<long double(long double)>& w, double lam, double a, double b) {
  const int n = 20000;
  long double h = (b - a) / n, s0 = 0, s1 = 0;
  for (int i = 0; i <= n; ++i) {
    long double y = a + i * h, c = (i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2);
    long double e = w(y) * std::exp((long double)lam * y);
    s0 += c * e;
    s1 += c * e * y;
  }
  return (double)(s1 / s0);
}

// Root of the increasing function g by bisection.
double bisect(const std::function<double(double)>& g, double lo, double hi) {
  for (int i = 0; i < 200; ++i) {
    double mid = (lo + hi) / 2;
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return (lo + hi) / 2;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::SchemaError;
}

}  // namespace

TEST(Minimize, Sl2MinimizerAtOrigin) {
  auto rep = minimize_h(a1_segment(3));
  EXPECT_NEAR(rep.lambda0[0], 0.0, 1e-12);
  EXPECT_EQ(rep.active_set, (std::vector<std::size_t>{0}));
  ASSERT_EQ(rep.multipliers.size(), 1u);
  // b(0) = 9/4, 2 rho = 2, alpha = 2
  EXPECT_NEAR(rep.multipliers[0].value, 0.125, 1e-12);
  EXPECT_NEAR(rep.h_min, 0.0, 1e-14);
}

TEST(Minimize, BalancedSegmentHasZeroMultiplier) {
  auto rep = minimize_h(a1_segment(Rational(8, 3)));
  EXPECT_NEAR(rep.lambda0[0], 0.0, 1e-9);
  ASSERT_EQ(rep.multipliers.size(), 1u);
  EXPECT_NEAR(rep.multipliers[0].value, 0.0, 1e-9);
}

TEST(Minimize, InteriorMinimizerMatchesSeparableOracle) {
  auto hf = a1_box(Rational(5, 2), -1, 2);
  auto rep = minimize_h(hf);
  EXPECT_TRUE(rep.active_set.empty());
  double lx = bisect([](double l) { return tilted_mean([](long double y) { return y * y; }, l, 0, 2.5) - 2.0; }, -20, 20);
  double ly = bisect([](double l) { return tilted_mean([](long double) { return 1.0L; }, l, -1, 2); }, -20, 20);
  EXPECT_NEAR(rep.lambda0[0], lx, 1e-8);
  EXPECT_NEAR(rep.lambda0[1], ly, 1e-8);
  EXPECT_GT(rep.lambda0[0], 0.0);
  EXPECT_LT(rep.lambda0[1], 0.0);
}

TEST(Minimize, CentralMinimizerOnWall) {
  auto rep = minimize_h(a1_box(3, -1, 2));
  EXPECT_EQ(rep.active_set, (std::vector<std::size_t>{0}));
  double ly = bisect([](double l) { return tilted_mean([](long double) { return 1.0L; }, l, -1, 2); }, -20, 20);
  EXPECT_NEAR(rep.lambda0[0], 0.0, 1e-9);
  EXPECT_NEAR(rep.lambda0[1], ly, 1e-8);
  EXPECT_GT(rep.multipliers[0].value, 0.0);
}

TEST(Minimize, Case1OnSecondWallAndBelowRandomSamples) {
  auto hf = case1();
  auto rep = minimize_h(hf);
  EXPECT_EQ(rep.active_set, (std::vector<std::size_t>{1}));
  EXPECT_NEAR(rep.lambda0[0], -rep.lambda0[1], 1e-10);
  EXPECT_GT(rep.lambda0[0], 0.0);
  EXPECT_LT(rep.kkt_residual, 1e-8);
  EXPECT_GT(rep.multipliers[0].value, 0.0);
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 2);
  for (int t = 0; t < 200; ++t) {
    double a = u(rng), b = u(rng);
    // dominant: x - y >= 0 and x + y >= 0
    Vec lam{(a + b) / 2, (b - a) / 2};
    EXPECT_GE(hf.h_raw(lam), rep.h_min - 1e-12);
  }
  // one-dimensional check along the face
  for (double s : {-1e-3, 1e-3}) {
    Vec lam{rep.lambda0[0] + s, rep.lambda0[1] - s};
    EXPECT_GT(hf.h_raw(lam), rep.h_min);
  }
}

TEST(Kkt, MultipliersAndErrors) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  // b - 2 rho = 3 a1 + 0.5 a2 = (3.5, -2.5)
  auto k = kkt_multipliers(rs, {5.5, -2.5}, {0, 1});
  EXPECT_NEAR(k.multipliers[0].value, 3.0, 1e-14);
  EXPECT_NEAR(k.multipliers[1].value, 0.5, 1e-14);
  EXPECT_NEAR(k.residual, 0.0, 1e-14);
  auto one = kkt_multipliers(rs, {3.0, 1.0}, {0});
  EXPECT_NEAR(one.residual, std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(kkt_multipliers(rs, {2.0, 0.0}, {}).residual, 0.0, 1e-15);
  EXPECT_EQ(kind_of([&] { kkt_multipliers(rs, {2.0, 0.0}, {0, 0}); }), ErrorKind::DependentActiveRoots);
}

TEST(Minimize, DivergentWhenTwoRhoOnBoundary) {
  EXPECT_FALSE(coercive(build_root_system(RootSystemSpec::catalog("A1")), ConvexPolytope::from_vertices({{0}, {2}}, 1)));
  EXPECT_EQ(kind_of([] { minimize_h(a1_segment(2)); }), ErrorKind::DivergentMinimizer);
  EXPECT_EQ(kind_of([] { minimize_h(a1_segment(1)); }), ErrorKind::DivergentMinimizer);
  EXPECT_TRUE(coercive(build_root_system(RootSystemSpec::catalog("A1")), ConvexPolytope::from_vertices({{0}, {3}}, 1)));
}

TEST(Minimize, FaceEnumerationRecordsEveryFace) {
  auto rep = minimize_h(case1());
  EXPECT_EQ(rep.face_visits, 4);
  EXPECT_EQ(rep.faces.size(), 4u);
  int accepted = 0;
  for (const auto& f : rep.faces) accepted += f.accepted;
  EXPECT_GE(accepted, 1);
}
