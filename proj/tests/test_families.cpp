#include <gtest/gtest.h>

#include <random>

#include "conekit/families.hpp"
#include "conekit/generators.hpp"
#include "conekit/varcalc.hpp"
#include "examples.hpp"
#include "support.hpp"

using namespace conekit;
using namespace conekit::testing;

namespace {
const Vec kOrigin{0, 0};
ConeRep upper_half() { return ConeRep(ConvexPolyCone::from_generators(2, {{1, 0}, {-1, 0}, {0, 1}})); }
}  // namespace

TEST(Chip, TwoParabolasFail) {
  auto f = two_parabolas();
  ChipSides s = chip_sides(*f, kOrigin);
  EXPECT_TRUE(cone_equal(s.lhs, ConeRep(ConvexPolyCone::origin(2))));
  EXPECT_TRUE(cone_equal(s.rhs, ConeRep(ConvexPolyCone::from_generators(2, {{1, 0}, {-1, 0}}))));
  ChipVerdict v = chip_check(*f, kOrigin);
  EXPECT_EQ(v.holds, Holds::No);
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ((*v.witness)[1], 0);
  EXPECT_NE((*v.witness)[0], 0);
  EXPECT_TRUE(v.exact);
}

TEST(Chip, SteepeningEpigraphs) {
  auto f = steepening_epigraphs();
  for (long i = 1; i <= 64; ++i) {
    ConeResult t = tangent_cone(*f->instantiate(i), kOrigin);
    ASSERT_TRUE(t.exact);
    EXPECT_TRUE(cone_equal(t.cone, upper_half())) << "member " << i;
  }
  ChipSides s = chip_sides(*f, kOrigin);
  EXPECT_TRUE(cone_equal(s.lhs, ConeRep(ConvexPolyCone::from_generators(2, {{1, 0}, {0, 1}}))));
  ChipVerdict v = chip_check(*f, kOrigin);
  EXPECT_EQ(v.holds, Holds::No);
  EXPECT_EQ(v.at_truncation, Holds::Yes);  // every finite truncation satisfies CHIP
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_LT((*v.witness)[0], 0);
}

TEST(Chip, HalfplanesHold) {
  ChipVerdict v = chip_check(*halfplane_family(0), kOrigin);
  EXPECT_EQ(v.holds, Holds::Yes);
}

TEST(Chip, TruncationPolicyFromEnvironment) {
  ::setenv("CONEKIT_KMAX", "32", 1);
  EXPECT_EQ(TruncationPolicy::from_env().K_max, 32);
  ::unsetenv("CONEKIT_KMAX");
  EXPECT_EQ(TruncationPolicy::from_env().K_max, 512);
  auto levels = tested_levels(TruncationPolicy{8, 64, 5});
  EXPECT_EQ(levels, (std::vector<long>{8, 16, 32, 64}));
}

// Truncation K keeps every index up to and including K.
TEST(Chip, IndicesStartAtFirst) {
  auto f = halfplane_family(0);
  EXPECT_EQ(f->indices(3), (std::vector<long>{0, 1, 2, 3}));
  EXPECT_EQ(f->last_index(3), 3);
}

TEST(Stagnation, NormalHullNeverStagnates) {
  auto f = halfplane_family(0);
  auto quantity = [&](long K) {
    Mat g;
    for (long i : f->indices(K)) g.push_back({1, Q(i)});
    return ConeRep(ConvexPolyCone::from_generators(2, g));
  };
  ScanResult<ConeRep> r = stagnation_scan(*f, quantity);
  EXPECT_FALSE(r.stagnated);
  auto g = normal_generators(*f, kOrigin);
  ASSERT_TRUE(g.has_value());
  EXPECT_EQ(g->limit_directions(), (std::vector<Vec>{{0, 1}}));
}

TEST(Stagnation, ConstantQuantityStagnates) {
  auto f = halfplane_family(0);
  ScanResult<Q> r = stagnation_scan(*f, [](long) { return Q(3); });
  EXPECT_TRUE(r.stagnated);
  EXPECT_EQ(r.value, Q(3));
}

TEST(StrongChip, TwoParabolasFail) {
  StrongChipReport r = asymptotic_strong_chip_check(*two_parabolas(), kOrigin);
  EXPECT_EQ(r.holds, Holds::No);
}

TEST(StrongChip, HalfplanesHoldAfterClosure) {
  StrongChipReport r = asymptotic_strong_chip_check(*halfplane_family(0), kOrigin);
  EXPECT_EQ(r.holds, Holds::Yes);
  EXPECT_TRUE(cone_equal(r.rhs, ConeRep(ConvexPolyCone::from_generators(2, {{1, 0}, {0, 1}}))));
}

TEST(Invex, ConvexFamilyIsNotApplicable) {
  EXPECT_EQ(invex_chip_check(*halfplane_family(0), kOrigin).holds, Holds::NotApplicable);
}

TEST(Invex, LemmaOnComplement) {
  auto c = SetExpr::complement(Polyhedron(2, {{1, 0}, {0, 1}}, {0, 0}));
  EXPECT_TRUE(invex_lemma_check(*c, kOrigin));
}

// Property: chip_check and asymptotic_strong_chip_check agree on random convex
// polyhedral families through the origin.
TEST(ChipProperty, AgreesWithStrongChipOnHalfspaces) {
  std::mt19937 rng(31);
  for (int k = 0; k < 60; ++k) {
    const std::size_t n = 2 + k % 2;
    const std::size_t m = 1 + k % 6;
    auto f = random_halfspace_family(rng, n, m);
    const Vec x = zeros(n);
    EXPECT_EQ(chip_check(*f, x).holds, asymptotic_strong_chip_check(*f, x).holds) << "case " << k;
  }
}

// Property: T(x; intersection of the first K) lies in every T(x; Omega_j), j <= K.
TEST(ChipProperty, TruncatedTangentMonotone) {
  std::mt19937 rng(32);
  for (int k = 0; k < 30; ++k) {
    auto f = random_halfspace_family(rng, 3, 4);
    ConeResult whole = tangent_cone(*SetExpr::truncated(f, 4), zeros(3));
    for (long j = 1; j <= 4; ++j)
      EXPECT_TRUE(cone_contains(tangent_cone(*f->instantiate(j), zeros(3)).cone, whole.cone));
  }
  auto s = steepening_epigraphs();
  ConeResult t8 = tangent_cone(*SetExpr::truncated(s, 8), kOrigin);
  for (long j = 1; j <= 8; ++j) EXPECT_TRUE(cone_contains(tangent_cone(*s->instantiate(j), kOrigin).cone, t8.cone));
}

TEST(Regularity, TransversalPairIsBounded) {
  auto f = make_finite_family("pair", {SetExpr::polyhedron(Polyhedron(2, {{1, 0}}, {0})),
                                       SetExpr::polyhedron(Polyhedron(2, {{0, 1}}, {0}))});
  RegularityEstimate e = linear_regularity_estimate(*f, kOrigin);
  EXPECT_FALSE(e.growing);
  EXPECT_LT(e.C_hat, 10.0);
}

TEST(Regularity, TangentParabolasGrow) {
  RegularityEstimate e = linear_regularity_estimate(*two_parabolas(), kOrigin);
  EXPECT_TRUE(e.growing);
}
