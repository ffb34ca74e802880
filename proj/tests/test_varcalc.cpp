#include <gtest/gtest.h>

#include <random>

#include "conekit/oracle.hpp"
#include "conekit/pieces.hpp"
#include "conekit/ratfunc.hpp"
#include "conekit/varcalc.hpp"
#include "support.hpp"

using namespace conekit;
using conekit::testing::random_int_vec;

namespace {

ConvexPolyCone gens(std::size_t n, Mat g) { return ConvexPolyCone::from_generators(n, std::move(g)); }

AtomFn abs_atom() {
  AtomFn a;
  a.name = "abs";
  a.dim = 1;
  a.convex = true;
  a.pieces = {{Polyhedron(1, {{-1}}, {0}), QuadFn::affine({1}, 0)},
              {Polyhedron(1, {{1}}, {0}), QuadFn::affine({-1}, 0)}};
  return a;
}

QuadFn parabola(int sign) {  // x1^2 + sign * x2
  QuadFn q;
  q.dim = 2;
  q.H = {{1, 0}, {0, 0}};
  q.g = {0, Q(sign)};
  q.c = 0;
  return q;
}

}  // namespace

TEST(Template, GrammarAndEvaluation) {
  RatFunc f = parse_template("1/(4*i)");
  EXPECT_EQ(f.eval(2), Q(1, 8));
  RatFunc g = parse_template("(i+1)^2 - i");
  EXPECT_EQ(g.eval(3), Q(13));
  EXPECT_EQ(*g.order(), 2);
  EXPECT_THROW(parse_template("i^i"), MalformedInput);
  EXPECT_THROW(parse_template("(i"), MalformedInput);
  EXPECT_THROW(f.eval(0), MalformedInput);
}

TEST(Template, SignAndLimitDirection) {
  EXPECT_TRUE(parse_template("i-3").sign_from(4).positive);
  EXPECT_FALSE(parse_template("i-3").sign_from(1).nonnegative);
  auto d = limit_direction(TVec{RatFunc(Q(1)), RatFunc::index()});
  ASSERT_TRUE(d.has_value());
  EXPECT_EQ(*d, (Vec{0, 1}));
}

// Property: template arithmetic agrees with pointwise evaluation.
TEST(TemplateProperty, ArithmeticIsPointwise) {
  std::mt19937 rng(3);
  std::uniform_int_distribution<int> c(-4, 4);
  for (int k = 0; k < 50; ++k) {
    RatFunc a = RatFunc(Q(c(rng))) + RatFunc(Q(c(rng))) * RatFunc::index();
    RatFunc b = RatFunc(Q(c(rng) == 0 ? 1 : 2)) + RatFunc::index() * RatFunc::index();
    for (long i = 1; i <= 5; ++i) {
      EXPECT_EQ((a + b).eval(i), a.eval(i) + b.eval(i));
      EXPECT_EQ((a * b).eval(i), a.eval(i) * b.eval(i));
      EXPECT_EQ((a / b).eval(i), a.eval(i) / b.eval(i));
    }
  }
}

TEST(Sets, MembershipAndDistance) {
  auto lvl = SetExpr::level(AtomFn::quadratic("p", parabola(-1), true));
  EXPECT_TRUE(member(*lvl, Vec{1, 1}));
  EXPECT_FALSE(member(*lvl, Vec{1, 0}));
  auto P = SetExpr::polyhedron(Polyhedron(2, {{1, 0}}, {0}));
  DistanceResult d = distance(*P, Vec{3, 7});
  ASSERT_TRUE(d.exact);
  EXPECT_EQ(d.squared, Q(9));
}

TEST(Sets, AtomValidation) {
  EXPECT_FALSE(check_atom(abs_atom(), 5).has_value());
  AtomFn bad = abs_atom();
  bad.pieces[1].f = QuadFn::affine({-1}, 1);  // jumps at 0
  EXPECT_TRUE(check_atom(bad, 5).has_value());
}

TEST(Cones, ParabolaLevelSet) {
  auto lvl = SetExpr::level(AtomFn::quadratic("p", parabola(-1), true));
  ConeResult t = tangent_cone(*lvl, Vec{0, 0});
  EXPECT_TRUE(t.exact);
  EXPECT_TRUE(cone_equal(t.cone, ConeRep(gens(2, {{1, 0}, {-1, 0}, {0, 1}}))));
  ConeResult n = frechet_normal_cone(*lvl, Vec{0, 0});
  EXPECT_TRUE(cone_equal(n.cone, ConeRep(gens(2, {{0, -1}}))));
}

TEST(Cones, InteriorPointHasWholeTangent) {
  auto P = SetExpr::polyhedron(Polyhedron(2, {{1, 1}}, {1}));
  ConeResult t = tangent_cone(*P, Vec{0, 0});
  EXPECT_TRUE(cone_equal(t.cone, ConeRep(ConvexPolyCone::whole(2))));
  EXPECT_TRUE(dd_convert(frechet_normal_cone(*P, Vec{0, 0}).cone.pieces.at(0)).is_origin());
}

TEST(Cones, UnionOfAxesLimitingNormals) {
  // The cross {x1 = 0} U {x2 = 0}: Frechet normals {0}, limiting normals the axes.
  auto a = SetExpr::polyhedron(Polyhedron(2, {{1, 0}, {-1, 0}}, {0, 0}));
  auto b = SetExpr::polyhedron(Polyhedron(2, {{0, 1}, {0, -1}}, {0, 0}));
  auto u = SetExpr::union_of({a, b});
  EXPECT_TRUE(dd_convert(frechet_normal_cone(*u, Vec{0, 0}).cone.pieces.at(0)).is_origin());
  ConeResult lim = limiting_normal_cone(*u, Vec{0, 0});
  EXPECT_TRUE(cone_member(lim.cone, Vec{1, 0}));
  EXPECT_TRUE(cone_member(lim.cone, Vec{0, -3}));
  EXPECT_FALSE(cone_member(lim.cone, Vec{1, 1}));
}

TEST(Cones, ComplementOfOpenQuadrant) {
  // closure of the complement of the open negative quadrant: nonconvex, T is itself.
  auto c = SetExpr::complement(Polyhedron(2, {{1, 0}, {0, 1}}, {0, 0}));
  ConeResult t = tangent_cone(*c, Vec{0, 0});
  EXPECT_TRUE(cone_member(t.cone, Vec{1, -1}));
  EXPECT_FALSE(cone_member(t.cone, Vec{-1, -1}));
  EXPECT_TRUE(dd_convert(frechet_normal_cone(*c, Vec{0, 0}).cone.pieces.at(0)).is_origin());
}

// Property: the Frechet normal cone is the polar of the tangent cone on random
// polyhedral unions.
TEST(ConesProperty, FrechetIsPolarOfTangent) {
  std::mt19937 rng(21);
  for (int k = 0; k < 40; ++k) {
    std::vector<SetPtr> parts;
    for (int p = 0; p < 2; ++p)
      parts.push_back(SetExpr::polyhedron(
          Polyhedron(2, {random_int_vec(rng, 2), random_int_vec(rng, 2)}, {Q(0), Q(0)})));
    auto u = SetExpr::union_of(parts);
    ConeResult t = tangent_cone(*u, Vec{0, 0});
    ConeResult f = frechet_normal_cone(*u, Vec{0, 0});
    ASSERT_TRUE(t.exact && f.exact);
    EXPECT_TRUE(cone_equal(f.cone, ConeRep(polar(t.cone))));
  }
}

// Property: the limiting normal cone of a polyhedral union contains its
// Frechet normal cone.
TEST(ConesProperty, LimitingContainsFrechet) {
  std::mt19937 rng(22);
  for (int k = 0; k < 40; ++k) {
    std::vector<SetPtr> parts;
    for (int p = 0; p < 2; ++p)
      parts.push_back(SetExpr::polyhedron(Polyhedron(2, {random_int_vec(rng, 2)}, {Q(0)})));
    auto u = SetExpr::union_of(parts);
    EXPECT_TRUE(cone_contains(limiting_normal_cone(*u, Vec{0, 0}).cone,
                              frechet_normal_cone(*u, Vec{0, 0}).cone));
  }
}

TEST(Subdiff, AbsoluteValue) {
  AtomFn a = abs_atom();
  SubdiffResult basic = subdifferential(a, Vec{0}, Flavor::Basic);
  ASSERT_EQ(basic.kind, SubdiffResult::Kind::Polytope);
  std::vector<Vec> pts = basic.points;
  std::sort(pts.begin(), pts.end(), [](const Vec& x, const Vec& y) { return x[0] < y[0]; });
  EXPECT_EQ(pts, (std::vector<Vec>{{-1}, {1}}));
  SubdiffResult smooth = subdifferential(a, Vec{2}, Flavor::Basic);
  ASSERT_TRUE(smooth.is_singleton());
  EXPECT_EQ(smooth.points[0], (Vec{1}));
  EXPECT_EQ(subdifferential(a, Vec{0}, Flavor::FrechetUpper).kind, SubdiffResult::Kind::Empty);
}

TEST(Subdiff, NegativeAbsoluteValue) {
  AtomFn a = abs_atom();
  for (AtomPiece& p : a.pieces) p.f.g = neg(p.f.g);
  a.convex = false;
  SubdiffResult basic = subdifferential(a, Vec{0}, Flavor::Basic);
  EXPECT_EQ(basic.points.size(), 2u);  // {-1, 1}, not the interval
  EXPECT_EQ(subdifferential(a, Vec{0}, Flavor::Frechet).kind, SubdiffResult::Kind::Empty);
}

TEST(Coderivative, AbsoluteValueGraph) {
  auto g = SetExpr::epigraph(abs_atom());
  CoderivativeResult at1 = coderivative(*g, 1, Vec{0, 0}, Vec{1});
  EXPECT_TRUE(at1.contains(Vec{0}));
  EXPECT_TRUE(at1.contains(Vec{1}));
  EXPECT_FALSE(at1.contains(Vec{2}));
  EXPECT_TRUE(coderivative(*g, 1, Vec{0, 0}, Vec{0}).is_origin());
}

TEST(Oracle, AgreesOnPolyhedralCone) {
  auto P = SetExpr::polyhedron(Polyhedron(2, {{-1, 0}, {-1, -2}}, {0, 0}));
  ConeResult t = tangent_cone(*P, Vec{0, 0});
  OracleOptions opt;
  opt.seed = 4;
  Agreement a = compare_tangent(t.cone, oracle_tangent(*P, Vec{0, 0}, opt));
  EXPECT_EQ(a.disagree_outside_band, 0u);
  EXPECT_GE(a.agree * 1000, a.total * 999);
  Agreement n = compare_normal(limiting_normal_cone(*P, Vec{0, 0}).cone, oracle_normal(*P, Vec{0, 0}, opt));
  EXPECT_EQ(n.disagree_outside_band, 0u);
}

TEST(Pieces, CompileUnionOfEpigraph) {
  auto e = SetExpr::epigraph(abs_atom());
  auto ps = compile(*e);
  EXPECT_EQ(ps.size(), 2u);
  for (const BasicPiece& p : ps) EXPECT_TRUE(p.polyhedral());
  auto t = tangent_from_pieces(ps, Vec{0, 0});
  ASSERT_TRUE(t.has_value());
  const ConeRep epi(gens(2, {{1, 1}, {-1, 1}}));
  EXPECT_TRUE(cone_contains(epi, *t));
  EXPECT_TRUE(cone_contains(*t, epi));
}
