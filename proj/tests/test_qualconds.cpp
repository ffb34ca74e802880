#include <gtest/gtest.h>

#include <random>

#include "conekit/families.hpp"
#include "conekit/generators.hpp"
#include "conekit/qualconds.hpp"
#include "examples.hpp"
#include "support.hpp"

using namespace conekit;
using namespace conekit::testing;

namespace {
const Vec kOrigin{0, 0};
}

TEST(Qualify, LinearFamily) {
  auto f = linear_family();
  EXPECT_EQ(chip_check(*f, kOrigin).holds, Holds::Yes);
  QCVerdict scc = scc_check(*f, kOrigin);
  EXPECT_EQ(scc.holds, Holds::No);
  ASSERT_TRUE(scc.witness.has_value());
  EXPECT_EQ(*scc.witness, (Vec{0, 1}));
  EXPECT_EQ(nqc_check(*f, kOrigin).holds, Holds::Yes);
  EXPECT_EQ(sqc_check(*f, kOrigin).holds, Holds::Yes);
  EXPECT_EQ(fmcq_check(*f).holds, Holds::No);
}

TEST(Qualify, QuadraticFamily) {
  auto f = quadratic_family();
  EXPECT_EQ(chip_check(*f, kOrigin).holds, Holds::No);
  EXPECT_EQ(scc_check(*f, kOrigin).holds, Holds::Yes);
  EXPECT_EQ(sqc_check(*f, kOrigin).holds, Holds::Yes);
}

TEST(Qualify, OneSidedFamily) {
  auto f = one_sided_family();
  // The intersection is the closed first quadrant; the member tangent cones
  // all contain R x R_+, so CHIP fails at the origin.
  ChipVerdict chip = chip_check(*f, kOrigin);
  EXPECT_EQ(chip.holds, Holds::No);
  EXPECT_EQ(scc_check(*f, kOrigin).holds, Holds::Yes);
  EXPECT_EQ(fmcq_check(*f).holds, Holds::No);
  EXPECT_EQ(cqc_check(minus_x2(), *f).holds, Holds::No);
}

TEST(Qualify, TwoParabolasNqcFails) {
  QCVerdict v = nqc_check(*two_parabolas(), kOrigin);
  EXPECT_EQ(v.holds, Holds::No);
  ASSERT_EQ(v.combination.size(), 2u);
  EXPECT_TRUE(is_zero(add(v.combination[0], v.combination[1])));
  EXPECT_FALSE(is_zero(v.combination[0]));
}

TEST(Qualify, NormalClosednessOfHalfplanes) {
  QCVerdict v = ncc_check(*halfplane_family(0), kOrigin);
  EXPECT_EQ(v.holds, Holds::No);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(*v.witness, (Vec{0, 1}));
}

TEST(Qualify, InteriorPointCondition) {
  auto f = make_finite_family("pair", {SetExpr::polyhedron(Polyhedron(2, {{1, 0}}, {0})),
                                       SetExpr::polyhedron(Polyhedron(2, {{0, 1}}, {0}))});
  EXPECT_EQ(interior_point_nqc(*f, kOrigin).holds, Holds::Yes);
  EXPECT_EQ(nqc_check(*f, kOrigin).holds, Holds::Yes);
}

TEST(ConicQC, OpposedHalfplanesFail) {
  QCVerdict v = conic_qc_check({halfplane({0, 1}), halfplane({0, -1})});
  EXPECT_EQ(v.holds, Holds::No);
  QCVerdict w = conic_qc_check({halfplane({0, 1}), halfplane({1, 0})});
  EXPECT_EQ(w.holds, Holds::Yes);
}

TEST(Closedness, HullWithLimit) {
  GeneratorFamily g;
  g.dim = 2;
  g.templates.push_back({TVec{RatFunc(Q(1)), RatFunc::index()}, 0});
  TruncationPolicy p{8, 64, 5};
  HullClosure h = closed_hull(g, p);
  EXPECT_TRUE(h.exact);
  EXPECT_TRUE(cone_equal(h.cone, ConvexPolyCone::from_generators(2, {{1, 0}, {0, 1}})));
  EXPECT_EQ(closedness_check("cc", g, p).holds, Holds::No);
  auto y = strict_separator(g, 8);
  ASSERT_TRUE(y.has_value());
  for (const Vec& v : g.at(8)) EXPECT_LT(dot(*y, v), 0);
}

// Property: a returned vanishing combination is nontrivial, sums to zero and
// uses members of the given cones.
TEST(ClosednessProperty, VanishingCombinationsAreValid) {
  std::mt19937 rng(41);
  int found = 0;
  for (int k = 0; k < 60; ++k) {
    std::vector<ConvexPolyCone> cs;
    for (int j = 0; j < 3; ++j) cs.push_back(random_cone(rng, 2, 2));
    auto v = vanishing_combination(cs);
    if (!v) continue;
    ++found;
    Vec sum = zeros(2);
    bool nontrivial = false;
    for (std::size_t j = 0; j < cs.size(); ++j) {
      EXPECT_TRUE(cone_member(cs[j], (*v)[j]));
      sum = add(sum, (*v)[j]);
      nontrivial = nontrivial || !is_zero((*v)[j]);
    }
    EXPECT_TRUE(is_zero(sum));
    EXPECT_TRUE(nontrivial);
  }
  EXPECT_GT(found, 0);
}

// Property: a strict separator, when found, is strictly negative on every
// generator of the truncation.
TEST(ClosednessProperty, StrictSeparatorsSeparate) {
  std::mt19937 rng(42);
  for (int k = 0; k < 40; ++k) {
    GeneratorFamily g;
    g.dim = 2;
    for (int j = 0; j < 3; ++j) g.fixed.push_back(random_int_vec(rng, 2));
    auto y = strict_separator(g, 4);
    if (!y) continue;
    for (const Vec& v : g.at(4)) EXPECT_LT(dot(*y, v), 0);
  }
}

// The basic subdifferential of -|x| at 0 is {-1, 1}; it misses 0 even though
// its convex hull does not, so SQC holds for the single constraint -|x| <= 0.
TEST(Qualify, SqcUsesNonconvexSubdifferentialAsASet) {
  AtomFn a = abs_atom();
  for (AtomPiece& p : a.pieces) p.f.g = neg(p.f.g);
  a.convex = false;
  auto f = make_finite_family("negabs", {SetExpr::level(a)});
  EXPECT_EQ(sqc_check(*f, Vec{0}).holds, Holds::Yes);
  // Adding -x <= 0 lets the subgradient 1 of -|x| cancel the gradient -1.
  auto g = make_finite_family("pair", {SetExpr::level(a), SetExpr::level(AtomFn::affine("negx", {-1}, 0))});
  QCVerdict v = sqc_check(*g, Vec{0});
  EXPECT_EQ(v.holds, Holds::No);
  ASSERT_EQ(v.combination.size(), 2u);
  EXPECT_TRUE(is_zero(add(v.combination[0], v.combination[1])));
}
