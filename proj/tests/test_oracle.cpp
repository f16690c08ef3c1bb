#include <gtest/gtest.h>

#include <cmath>

#include "gcdeg/minimize.hpp"
#include "gcdeg/oracle.hpp"

using namespace gcdeg;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::SchemaError;
}

}  // namespace

TEST(Splitmix, Deterministic) {
  EXPECT_EQ(splitmix64(0), splitmix64(0));
  EXPECT_NE(splitmix64(1), splitmix64(2));
  double lo = 1, hi = 0, sum = 0;
  for (std::uint64_t i = 0; i < 100000; ++i) {
    double u = uniform01(7, i);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  EXPECT_GE(lo, 0.0);
  EXPECT_LT(hi, 1.0);
  EXPECT_NEAR(sum / 100000, 0.5, 0.005);
}

TEST(McIntegrate, UnitSquareAndTriangle) {
  auto sq = ConvexPolytope::from_halfspaces({{{-1, 0}, 0}, {{0, -1}, 0}, {{1, 0}, 1}, {{0, 1}, 1}}, 2);
  auto r = mc_integrate(sq, [](const Vec&) { return 1.0; }, {});
  EXPECT_DOUBLE_EQ(r.estimate, 1.0);
  EXPECT_EQ(r.accepted, r.samples);
  auto tri = ConvexPolytope::from_vertices({{0, 0}, {1, 0}, {0, 1}}, 2);
  auto t = mc_integrate(tri, [](const Vec&) { return 1.0; }, {});
  EXPECT_NEAR(t.estimate, 0.5, 4 * t.std_error);
}

TEST(McIntegrate, ExponentialMoment) {
  auto seg = ConvexPolytope::from_vertices({{0}, {1}}, 1);
  McConfig cfg;
  cfg.samples = 400000;
  auto r = mc_integrate(seg, [](const Vec& y) { return y[0] * y[0] * std::exp(y[0]); }, cfg);
  EXPECT_NEAR(r.estimate, std::exp(1.0) - 2.0, 4 * r.std_error);
  EXPECT_LT(r.std_error, 2e-3);
  auto again = mc_integrate(seg, [](const Vec& y) { return y[0] * y[0] * std::exp(y[0]); }, cfg);
  EXPECT_EQ(r.estimate, again.estimate);
  cfg.seed = 99;
  EXPECT_NE(mc_integrate(seg, [](const Vec& y) { return y[0]; }, cfg).estimate,
            mc_integrate(seg, [](const Vec& y) { return y[0]; }, McConfig{400000, 5, {}}).estimate);
}

TEST(McIntegrate, Errors) {
  auto seg = ConvexPolytope::from_vertices({{0}, {1}}, 1);
  McConfig tight;
  tight.box = {{0.2, 0.8}};
  EXPECT_EQ(kind_of([&] { mc_integrate(seg, [](const Vec&) { return 1.0; }, tight); }), ErrorKind::BoxTooTight);
  McConfig few;
  few.samples = 100;
  EXPECT_EQ(kind_of([&] { mc_integrate(seg, [](const Vec&) { return 1.0; }, few); }), ErrorKind::InvalidArgument);
  McConfig wide;
  wide.box = {{-1.0, 3.0}};
  auto r = mc_integrate(seg, [](const Vec&) { return 1.0; }, wide);
  EXPECT_NEAR(r.estimate, 1.0, 4 * r.std_error);
}

TEST(GridMinimize, Sl2AtOrigin) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1"));
  HFunctional hf(rs, ConvexPolytope::from_vertices({{0}, {3}}, 1));
  auto g = grid_minimize(hf, {{0.0, 1.0}}, 21);
  EXPECT_NEAR(g.lambda[0], 0.0, 1e-15);
  EXPECT_TRUE(g.certified);
  EXPECT_THROW(grid_minimize(hf, {{0.0, 1.0}}, 1), Error);
  EXPECT_THROW(grid_minimize(hf, {{0.0, 1.0}, {0.0, 1.0}}, 5), Error);
}

TEST(GridMinimize, Case1AgreesWithNewton) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  HFunctional hf(rs, ConvexPolytope::from_vertices({{0, 0}, {3, 3}, {3, 0}, {Rational(3, 2), Rational(-3, 2)}}, 2));
  auto rep = minimize_h(hf);
  auto g = grid_minimize(hf, {{0.0, 1.0}, {0.0, 1.0}}, 41);
  EXPECT_TRUE(g.certified);
  EXPECT_LT(std::abs(g.lambda[0] - rep.lambda0[0]), g.spacing[0]);
  EXPECT_LT(std::abs(g.lambda[1] - rep.lambda0[1]), g.spacing[0]);
  EXPECT_LE(hf.h_raw(rep.lambda0), g.h + 1e-12);
  EXPECT_NEAR(g.coords[1], 0.0, 1e-15);
  EXPECT_EQ(g.evaluations > 41u * 41u / 2, true);
}
