#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>
#include <set>

#include "gcdeg/polytope.hpp"
#include "gcdeg/rootsys.hpp"

using namespace gcdeg;

namespace {

Mat<Rational> case1_vertices() { return {{0, 0}, {3, 3}, {3, 0}, {Rational(3, 2), Rational(-3, 2)}}; }
Mat<Rational> case2_vertices() { return {{0, 0}, {3, 3}, {3, 1}, {2, -1}, {Rational(3, 2), Rational(-3, 2)}}; }

ConvexPolytope unit_square() {
  return ConvexPolytope::from_halfspaces({{{-1, 0}, 0}, {{0, -1}, 0}, {{1, 0}, 1}, {{0, 1}, 1}}, 2);
}

bool has_halfspace(const ConvexPolytope& p, RVec n, Rational c) {
  HalfSpace target = normalized(HalfSpace{std::move(n), c});
  for (const auto& h : p.halfspaces())
    if (!h.redundant && same_halfspace(h, target)) return true;
  return false;
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

TEST(BuildPolytope, Case1FromVertices) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  auto p = build_polytope(PolytopeInput{std::nullopt, case1_vertices()}, rs);
  EXPECT_EQ(p.vertices().size(), 4u);
  EXPECT_TRUE(has_halfspace(p, {-1, 1}, 0));  // y <= x
  EXPECT_TRUE(has_halfspace(p, {-1, -1}, 0)); // y >= -x
  EXPECT_TRUE(has_halfspace(p, {1, 0}, 3));   // x <= 3
  EXPECT_TRUE(has_halfspace(p, {1, -1}, 3));  // x - y <= 3
  std::size_t live = 0;
  for (const auto& h : p.halfspaces()) live += !h.redundant;
  EXPECT_EQ(live, 4u);
}

TEST(BuildPolytope, Case2FromVertices) {
  auto p = ConvexPolytope::from_vertices(case2_vertices(), 2);
  std::size_t live = 0;
  for (const auto& h : p.halfspaces()) live += !h.redundant;
  EXPECT_EQ(live, 5u);
  EXPECT_TRUE(has_halfspace(p, {2, -1}, 5));
}

TEST(BuildPolytope, UnitSquareFromInequalities) {
  auto p = unit_square();
  EXPECT_EQ(p.vertices().size(), 4u);
  EXPECT_EQ(p.volume(), Rational(1));
}

TEST(BuildPolytope, RedundantInequalitiesAreFlagged) {
  auto p = ConvexPolytope::from_halfspaces(
      {{{-1, 0}, 0}, {{0, -1}, 0}, {{1, 0}, 1}, {{0, 1}, 1}, {{1, 1}, 5}}, 2);
  EXPECT_EQ(p.halfspaces().size(), 5u);
  EXPECT_TRUE(p.halfspaces()[4].redundant);
}

TEST(BuildPolytope, Errors) {
  EXPECT_EQ(kind_of([] { ConvexPolytope::from_halfspaces({{{-1, 0}, 0}, {{0, -1}, 0}}, 2); }), ErrorKind::Unbounded);
  EXPECT_EQ(kind_of([] {
              ConvexPolytope::from_halfspaces({{{1, 0}, -1}, {{-1, 0}, 0}, {{0, 1}, 1}, {{0, -1}, 1}}, 2);
            }),
            ErrorKind::Empty);
  EXPECT_EQ(kind_of([] {
              ConvexPolytope::from_halfspaces({{{1, 0}, 0}, {{-1, 0}, 0}, {{0, 1}, 1}, {{0, -1}, 1}}, 2);
            }),
            ErrorKind::LowerDimensional);
  EXPECT_EQ(kind_of([] { ConvexPolytope::from_vertices({{0, 0}, {1, 1}, {2, 2}}, 2); }),
            ErrorKind::LowerDimensional);
}

TEST(BuildPolytope, AppendChamber) {
  auto rs = build_root_system(RootSystemSpec::catalog("A1xA1"));
  // W-invariant square |x| + |y| <= 2
  PolytopeInput in;
  in.halfspaces = std::vector<HalfSpace>{{{1, 1}, 2}, {{1, -1}, 2}, {{-1, 1}, 2}, {{-1, -1}, 2}};
  auto p = build_polytope(in, rs, true);
  EXPECT_EQ(p.volume(), Rational(2));
  for (const auto& v : p.vertices()) EXPECT_TRUE(rs.is_dominant_exact(v));
}

TEST(BuildPolytope, RoundTripThroughVertices) {
  auto p = ConvexPolytope::from_vertices(case2_vertices(), 2);
  auto q = ConvexPolytope::from_halfspaces(p.halfspaces(), 2);
  auto pv = p.vertices(), qv = q.vertices();
  std::sort(pv.begin(), pv.end());
  std::sort(qv.begin(), qv.end());
  EXPECT_EQ(pv, qv);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> u(-40, 40);
  for (int t = 0; t < 200; ++t) {
    RVec y{Rational(u(rng), 10), Rational(u(rng), 10)};
    EXPECT_EQ(p.contains(y), q.contains(y));
  }
}

TEST(Triangulate, Examples) {
  auto sq = triangulate(unit_square());
  EXPECT_EQ(sq.simplices.size(), 2u);
  EXPECT_EQ(sq.volume(), Rational(1));
  auto c1 = ConvexPolytope::from_vertices(case1_vertices(), 2);
  auto t1 = triangulate(c1);
  EXPECT_EQ(t1.simplices.size(), 2u);
  EXPECT_EQ(t1.volume(), Rational(27, 4));
  auto tri = ConvexPolytope::from_vertices({{0, 0}, {1, 0}, {0, 1}}, 2);
  auto tt = triangulate(tri);
  ASSERT_EQ(tt.simplices.size(), 1u);
  EXPECT_EQ(tt.volume(), Rational(1, 2));
}

TEST(Triangulate, SimplicesInsideAndVolumeExact) {
  auto p = ConvexPolytope::from_vertices(case2_vertices(), 2);
  auto t = triangulate(p);
  for (const auto& s : t.simplices)
    for (const auto& v : s.vertices) EXPECT_TRUE(p.contains(v));
  // shoelace on (0,0),(3/2,-3/2),(2,-1),(3,1),(3,3)
  EXPECT_EQ(t.volume(), Rational(25, 4));
  auto cube = ConvexPolytope::from_halfspaces(
      {{{-1, 0, 0}, 0}, {{0, -1, 0}, 0}, {{0, 0, -1}, 0}, {{1, 0, 0}, 1}, {{0, 1, 0}, 1}, {{0, 0, 1}, 1}}, 3);
  EXPECT_EQ(cube.volume(), Rational(1));
  EXPECT_EQ(cube.vertices().size(), 8u);
}

TEST(Subdivide, FreudenthalChildrenPreserveVolume) {
  Simplex s{{{0, 0}, {2, 0}, {1, 3}}};
  auto kids = subdivide_uniform(s);
  EXPECT_EQ(kids.size(), 4u);
  Rational v = 0;
  for (const auto& k : kids) v += k.volume();
  EXPECT_EQ(v, s.volume());
  Simplex t{{{0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  auto k3 = subdivide_uniform(t);
  EXPECT_EQ(k3.size(), 8u);
  Rational v3 = 0;
  for (const auto& k : k3) v3 += k.volume();
  EXPECT_EQ(v3, t.volume());
}

TEST(LatticePoints, Examples) {
  auto seg = ConvexPolytope::from_vertices({{0}, {3}}, 1);
  EXPECT_EQ(lattice_points(seg, 1), (Mat<Rational>{{0}, {1}, {2}, {3}}));
  EXPECT_EQ(lattice_points(unit_square(), 2).size(), 9u);
  EXPECT_THROW(lattice_points(seg, 0), Error);
}

TEST(LatticePoints, Case1MatchesBruteForceScan) {
  auto p = ConvexPolytope::from_vertices(case1_vertices(), 2);
  std::set<RVec> brute;
  for (int x = -5; x <= 5; ++x)
    for (int y = -5; y <= 5; ++y) {
      // y <= x, y >= -x, x <= 3, x - y <= 3
      if (y <= x && y >= -x && x <= 3 && x - y <= 3) brute.insert(RVec{x, y});
    }
  auto pts = lattice_points(p, 1);
  EXPECT_EQ(std::set<RVec>(pts.begin(), pts.end()), brute);
}

TEST(LatticePoints, DilationCommutes) {
  auto p = ConvexPolytope::from_vertices(case2_vertices(), 2);
  for (long k : {2, 3}) EXPECT_EQ(lattice_points(p, k), lattice_points(p.dilate(Rational(k)), 1));
}

TEST(LatticePoints, CustomBasis) {
  auto seg = ConvexPolytope::from_vertices({{0}, {3}}, 1);
  EXPECT_EQ(lattice_points(seg, 1, {{2}}), (Mat<Rational>{{0}, {2}}));
}
