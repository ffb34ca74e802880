#include <gtest/gtest.h>

#include "conekit/exactgeom.hpp"
#include "conekit/lp.hpp"
#include "support.hpp"

using namespace conekit;
using conekit::testing::generators_of;
using conekit::testing::in_polar_by_definition;
using conekit::testing::random_cone;
using conekit::testing::random_int_vec;

TEST(Rational, ParseAndPrint) {
  EXPECT_EQ(parse_rational("3/6"), Q(1, 2));
  EXPECT_EQ(parse_rational("-4"), Q(-4));
  EXPECT_EQ(parse_rational("0.25"), Q(1, 4));
  EXPECT_EQ(to_string(Q(-2, 4)), "-1/2");
  EXPECT_THROW(parse_rational("1/0"), MalformedInput);
  EXPECT_THROW(parse_rational("x"), MalformedInput);
}

TEST(Rational, PrimitiveScaling) {
  EXPECT_EQ(primitive(Vec{Q(1, 2), Q(3, 4)}), (Vec{2, 3}));
  EXPECT_EQ(canonical_line(Vec{0, -2, 4}), (Vec{0, 1, -2}));
  EXPECT_EQ(rank(Mat{{1, 2}, {2, 4}}), 1u);
}

TEST(Cone, HalfPlanePolarIsRay) {
  // R x R_+ has polar {0} x R_-.
  auto c = ConvexPolyCone::from_generators(2, {{1, 0}, {-1, 0}, {0, 1}});
  auto p = polar(c);
  EXPECT_TRUE(cone_equal(p, ConvexPolyCone::from_generators(2, {{0, -1}})));
}

TEST(Cone, QuadrantSelfDualUpToSign) {
  auto q = ConvexPolyCone::from_generators(2, {{1, 0}, {0, 1}});
  EXPECT_TRUE(cone_equal(polar(q), ConvexPolyCone::from_generators(2, {{-1, 0}, {0, -1}})));
}

TEST(Cone, WholeAndOrigin) {
  auto w = dd_convert(ConvexPolyCone::whole(3));
  EXPECT_TRUE(w.is_whole());
  EXPECT_TRUE(dd_convert(polar(w)).is_origin());
  EXPECT_TRUE(is_pointed(ConvexPolyCone::origin(2)));
  EXPECT_FALSE(is_full_dimensional(ConvexPolyCone::ray(Vec{1, 1})));
}

TEST(Cone, CanonicalRaysAreDeterministic) {
  auto a = dd_convert(ConvexPolyCone::from_inequalities(2, {{-2, 0}, {0, -6}}));
  auto b = dd_convert(ConvexPolyCone::from_inequalities(2, {{0, -1}, {-1, 0}}));
  EXPECT_EQ(serialize(a), serialize(b));
  EXPECT_EQ(a.rays(), (Mat{{0, 1}, {1, 0}}));
}

TEST(Cone, SerializeRoundTrip) {
  std::mt19937 rng(7);
  for (int k = 0; k < 40; ++k) {
    auto c = random_cone(rng, 3);
    auto back = parse_cone(serialize(dd_convert(c)));
    EXPECT_TRUE(cone_equal(c, back)) << serialize(c);
  }
}

TEST(Cone, UnionContainment) {
  ConeRep u({ConvexPolyCone::from_generators(2, {{1, 0}, {0, 1}}),
             ConvexPolyCone::from_generators(2, {{-1, 0}, {0, 1}})});
  EXPECT_TRUE(cone_member(u, Vec{-3, 2}));
  EXPECT_FALSE(cone_member(u, Vec{0, -1}));
  auto hole = uncovered_direction(ConvexPolyCone::whole(2), u);
  ASSERT_TRUE(hole.has_value());
  EXPECT_LT((*hole)[1], 0);
}

TEST(Cone, ProjectionDistance) {
  Polyhedron P(2, {{1, 0}, {0, 1}}, {0, 0});
  EXPECT_EQ(squared_distance(P, Vec{3, 4}), Q(25));
  EXPECT_EQ(project(P, Vec{3, -1}), (Vec{0, -1}));
}

// Property: polar(polar(C)) = C.
TEST(ConeProperty, PolarInvolution) {
  std::mt19937 rng(11);
  for (int k = 0; k < 150; ++k) {
    const std::size_t n = 1 + k % 3;
    auto c = random_cone(rng, n, 5);
    EXPECT_TRUE(cone_equal(polar(polar(c)), c)) << serialize(c);
  }
}

// Property: membership in the polar matches the definition on random vectors.
TEST(ConeProperty, PolarMatchesDefinition) {
  std::mt19937 rng(12);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = 2 + k % 2;
    auto c = random_cone(rng, n, 4);
    auto p = polar(c);
    const Mat gens = generators_of(c);
    for (int s = 0; s < 30; ++s) {
      Vec v = random_int_vec(rng, n, -2, 2);
      EXPECT_EQ(cone_member(p, v), in_polar_by_definition(gens, v));
    }
  }
}

// Property: (C1 + C2)° = C1° ∩ C2°.
TEST(ConeProperty, SumIntersectionDuality) {
  std::mt19937 rng(13);
  for (int k = 0; k < 60; ++k) {
    auto a = random_cone(rng, 3, 3);
    auto b = random_cone(rng, 3, 3);
    EXPECT_TRUE(cone_equal(polar(conic_sum({a, b}, 3)), intersect({polar(a), polar(b)})));
  }
}

// Property: V and H descriptions agree after conversion.
TEST(ConeProperty, DoubleDescriptionConsistent) {
  std::mt19937 rng(14);
  for (int k = 0; k < 60; ++k) {
    auto c = dd_convert(random_cone(rng, 3, 5));
    for (const Vec& g : c.generators)
      for (const Vec& a : c.inequalities) EXPECT_LE(dot(a, g), 0);
    auto h = ConvexPolyCone::from_inequalities(3, c.inequalities);
    EXPECT_TRUE(cone_equal(h, c));
  }
}

TEST(Cone, PreimageAndProduct) {
  auto q = ConvexPolyCone::from_generators(1, {{1}});
  // {x in R^2 : x1 - x2 >= 0}
  auto pre = preimage(Mat{{1, -1}}, q);
  EXPECT_TRUE(cone_member(pre, Vec{2, 1}));
  EXPECT_FALSE(cone_member(pre, Vec{1, 2}));
  auto pr = product(q, q);
  EXPECT_TRUE(cone_equal(pr, ConvexPolyCone::from_generators(2, {{1, 0}, {0, 1}})));
}

TEST(LP, SmallOptimum) {
  // max x + y s.t. x + 2y <= 4, 3x + y <= 6
  LinearProgram lp(2);
  lp.objective = {1, 1};
  lp.add({1, 2}, Sense::LE, 4);
  lp.add({3, 1}, Sense::LE, 6);
  LPResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_EQ(r.value, Q(14, 5));
  EXPECT_EQ(r.x, (Vec{Q(8, 5), Q(6, 5)}));
}

TEST(LP, InfeasibleAndUnbounded) {
  LinearProgram a(1);
  a.add({1}, Sense::GE, 2);
  a.add({1}, Sense::LE, 1);
  EXPECT_EQ(solve_lp(a).status, LPStatus::Infeasible);
  LinearProgram b(1);
  b.objective = {1};
  EXPECT_EQ(solve_lp(b).status, LPStatus::Unbounded);
  LinearProgram c(1);
  c.free[0] = true;
  c.objective = {-1};
  c.add({1}, Sense::GE, -3);
  LPResult r = solve_lp(c);
  ASSERT_EQ(r.status, LPStatus::Optimal);
  EXPECT_EQ(r.x[0], Q(-3));
}

// Property: LP optimum of a random bounded 2D program equals the best vertex
// found by intersecting every pair of constraint lines.
TEST(LPProperty, MatchesVertexEnumeration) {
  std::mt19937 rng(15);
  for (int k = 0; k < 40; ++k) {
    Mat A;
    Vec b;
    for (int r = 0; r < 4; ++r) {
      A.push_back(random_int_vec(rng, 2));
      b.push_back(std::uniform_int_distribution<int>(1, 5)(rng));
    }
    for (int s : {1, -1}) {  // box |x|, |y| <= 10 keeps it bounded
      A.push_back({s, 0});
      b.push_back(10);
      A.push_back({0, s});
      b.push_back(10);
    }
    Vec obj = random_int_vec(rng, 2);
    LinearProgram lp(2);
    lp.free = {true, true};
    lp.objective = obj;
    for (std::size_t r = 0; r < A.size(); ++r) lp.add(A[r], Sense::LE, b[r]);
    LPResult res = solve_lp(lp);
    ASSERT_EQ(res.status, LPStatus::Optimal);
    std::optional<Q> best;
    for (std::size_t i = 0; i < A.size(); ++i)
      for (std::size_t j = i + 1; j < A.size(); ++j) {
        Q det = A[i][0] * A[j][1] - A[i][1] * A[j][0];
        if (det == 0) continue;
        Vec x{(b[i] * A[j][1] - A[i][1] * b[j]) / det, (A[i][0] * b[j] - b[i] * A[j][0]) / det};
        bool ok = true;
        for (std::size_t r = 0; r < A.size(); ++r) ok = ok && dot(A[r], x) <= b[r];
        if (ok && (!best || dot(obj, x) > *best)) best = dot(obj, x);
      }
    ASSERT_TRUE(best.has_value());
    EXPECT_EQ(res.value, *best);
  }
}
