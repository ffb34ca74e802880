#include <gtest/gtest.h>

#include <random>

#include "conekit/certify.hpp"
#include "conekit/varcalc.hpp"
#include "examples.hpp"
#include "support.hpp"

using namespace conekit;
using namespace conekit::testing;

namespace {

const Vec kOrigin{0, 0};

std::vector<ConeRep> quadrants() {
  std::vector<ConeRep> q;
  for (auto [s, t] : {std::pair{1, 1}, {-1, 1}, {-1, -1}, {1, -1}})
    q.emplace_back(ConvexPolyCone::from_generators(2, {{s, 0}, {0, t}}));
  return q;
}

// Checks the two identities of an extremal certificate directly.
void expect_identities(const ExtremalCertificate& c) {
  Vec sum = zeros(c.normals.front().size());
  Q weighted;
  Q w = 1;
  for (const Vec& x : c.normals) {
    w /= 2;
    sum = add(sum, scale(w, x));
    weighted += w * norm2(x);
  }
  EXPECT_TRUE(is_zero(sum));
  EXPECT_EQ(c.scale_sq * weighted, Q(1));
}

}  // namespace

TEST(Extremal, ShiftedHalfplanes) {
  std::vector<ConeRep> cs{ConeRep(halfplane({0, -1})), ConeRep(halfplane({0, 1}))};
  ShiftWitness w = tangential_extremality_witness(cs, Q(2));
  ASSERT_TRUE(w.found);
  EXPECT_TRUE(shifted_intersection_empty(cs, w.shifts));
  for (const Vec& a : w.shifts) EXPECT_LE(norm2(a), Q(4));
  EXPECT_FALSE(shifted_intersection_empty(cs, {zeros(2), zeros(2)}));
}

TEST(Extremal, QuadrantCertificate) {
  auto cs = quadrants();
  auto c = extremal_certificate(cs);
  ASSERT_TRUE(c.has_value());
  expect_identities(*c);
  EXPECT_TRUE(verify(*c, cs));
  for (std::size_t i = 0; i < cs.size(); ++i) EXPECT_TRUE(cone_member(c->homes[i], c->normals[i]));
}

TEST(Extremal, OverlapIsAHypothesisViolation) {
  std::vector<ConeRep> cs{ConeRep(halfplane({0, -1})), ConeRep(halfplane({1, 0}))};
  EXPECT_THROW(extremal_certificate(cs), HypothesisViolation);
}

TEST(Extremal, SingleOriginConeHasNoCertificate) {
  std::vector<ConeRep> cs{ConeRep(ConvexPolyCone::origin(2))};
  EXPECT_FALSE(extremal_certificate(cs).has_value());
}

TEST(Extremal, FullDimensionalIntersectionNotSeparated) {
  std::vector<ConeRep> cs{ConeRep(halfplane({0, -1})), ConeRep(halfplane({-1, 0}))};
  ShiftWitness w = tangential_extremality_witness(cs, Q(1));
  EXPECT_FALSE(w.found);
  EXPECT_FALSE(w.diagnostic.empty());
}

// Property: on random cone systems meeting only at the origin, every emitted
// certificate satisfies both identities exactly.
TEST(ExtremalProperty, IdentitiesOnRandomSystems) {
  std::mt19937 rng(51);
  int systems = 0, certified = 0;
  while (systems < 30) {
    const std::size_t n = 2 + systems % 2;
    const std::size_t K = 2 + systems % 4;
    std::vector<ConvexPolyCone> raw;
    for (std::size_t i = 0; i < K; ++i) raw.push_back(random_cone(rng, n, 3));
    if (!dd_convert(intersect(raw)).is_origin()) continue;
    ++systems;
    std::vector<ConeRep> cs(raw.begin(), raw.end());
    auto c = extremal_certificate(cs);
    if (!c) continue;
    ++certified;
    expect_identities(*c);
    EXPECT_TRUE(verify(*c, cs));
  }
  EXPECT_GT(certified, 0);
}

TEST(FrechetRep, CornerSplits) {
  auto r = frechet_rep_check({halfplane({0, -1}), halfplane({-1, 0})}, Vec{-1, -1});
  ASSERT_TRUE(r.represented);
  Vec sum = zeros(2);
  for (const Vec& p : r.parts) sum = add(sum, p);
  EXPECT_EQ(sum, (Vec{-1, -1}));
  EXPECT_EQ(r.gap_sq, Q(0));
}

TEST(FrechetRep, NonNormalIsADomainError) {
  EXPECT_THROW(frechet_rep_check({halfplane({0, -1}), halfplane({-1, 0})}, Vec{1, 1}), DomainError);
}

// The gap of (0,1) to cone{(1,i) : 1 <= i <= K} is 1/(1+K^2): the nearest
// generator is (1,K) and the squared distance to its ray is 1 - K^2/(1+K^2).
TEST(FrechetRep, GapShrinksLikeInverseSquare) {
  auto f = halfplane_family(1);
  Q prev = 1;
  for (long K : {4L, 16L, 64L}) {
    FrechetRep r = frechet_rep_check(*f, kOrigin, Vec{0, 1}, K);
    EXPECT_FALSE(r.represented);
    EXPECT_EQ(r.gap_sq, Q(1, 1 + K * K)) << "K=" << K;
    EXPECT_LT(r.gap_sq, prev);
    prev = r.gap_sq;
  }
}

TEST(Sip, LinearInequalities) {
  SipProblem p;
  p.objective = AtomFn::affine("f", {-1, 0}, 0);
  p.form = ConstraintForm::Inequality;
  p.family = linear_family();
  for (SipMode m : {SipMode::Upper, SipMode::Lower}) {
    KKTCertificate c = sip_certify(p, kOrigin, m);
    EXPECT_EQ(c.status, KKTStatus::Certified);
    ASSERT_EQ(c.terms.size(), 1u);
    EXPECT_TRUE(c.terms[0].finite);
    EXPECT_EQ(c.terms[0].index_set, (std::vector<long>{0}));
    EXPECT_EQ(c.terms[0].multipliers, (std::vector<Q>{1}));
    EXPECT_EQ(c.residual, Q(0));
    EXPECT_TRUE(reverify(c, p, kOrigin));
  }
}

TEST(Sip, ChipFailureIsReported) {
  SipProblem p;
  p.objective = minus_x2();
  p.form = ConstraintForm::Inequality;
  p.family = one_sided_family();
  try {
    sip_certify(p, kOrigin, SipMode::Lower);
    FAIL() << "expected a hypothesis violation";
  } catch (const HypothesisViolation& e) {
    EXPECT_NE(std::string(e.what()).find("CHIP=no"), std::string::npos);
  }
}

TEST(Sip, GeometricForm) {
  // minimize -x1 - x2 over {x1 <= 0} and {x2 <= 0}: -grad = (1,1) = e1 + e2.
  SipProblem p;
  p.objective = AtomFn::affine("f", {-1, -1}, 0);
  p.form = ConstraintForm::Geometric;
  p.family = make_finite_family("quadrant", {SetExpr::polyhedron(Polyhedron(2, {{1, 0}}, {0})),
                                             SetExpr::polyhedron(Polyhedron(2, {{0, 1}}, {0}))});
  KKTCertificate c = sip_certify(p, kOrigin, SipMode::Lower);
  EXPECT_EQ(c.status, KKTStatus::Certified);
  EXPECT_FALSE(c.closure_used);
  EXPECT_TRUE(reverify(c, p, kOrigin));
}

TEST(Sip, NonOptimalPointViolatesCondition) {
  SipProblem p;
  p.objective = AtomFn::affine("f", {1, 1}, 0);
  p.form = ConstraintForm::Geometric;
  p.family = make_finite_family("quadrant", {SetExpr::polyhedron(Polyhedron(2, {{1, 0}}, {0})),
                                             SetExpr::polyhedron(Polyhedron(2, {{0, 1}}, {0}))});
  EXPECT_EQ(sip_certify(p, kOrigin, SipMode::Lower).status, KKTStatus::ConditionViolated);
}

TEST(Sip, OperatorForm) {
  // constraint M x in Theta with M = identity, Theta = {y1 <= 0}.
  SipProblem p;
  p.objective = AtomFn::affine("f", {-1, 0}, 0);
  p.form = ConstraintForm::Operator;
  p.M = {{1, 0}, {0, 1}};
  p.m = {0, 0};
  p.family = make_finite_family("theta", {SetExpr::polyhedron(Polyhedron(2, {{1, 0}}, {0}))});
  KKTCertificate c = sip_certify(p, kOrigin, SipMode::Upper);
  EXPECT_EQ(c.status, KKTStatus::Certified);
  ASSERT_FALSE(c.terms.empty());
  EXPECT_FALSE(c.terms[0].range_normals.empty());
}

namespace {

ParetoProblem abs_problem() {
  ParetoProblem p;
  p.graph = SetExpr::epigraph(abs_atom());
  p.n = 1;
  p.m = 1;
  p.theta = ConvexPolyCone::from_generators(1, {{1}});
  return p;
}

}  // namespace

TEST(Pareto, AbsoluteValueGraph) {
  ParetoProblem p = abs_problem();
  for (ParetoNotion n : {ParetoNotion::TangentialGraphical, ParetoNotion::Graphical, ParetoNotion::FullyLocalized})
    EXPECT_EQ(pareto_check(p, kOrigin, n).holds, Holds::Yes) << to_string(n);
  auto c = pareto_necessary_cond(p, kOrigin);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->ystar, (Vec{1}));
  EXPECT_EQ(c->residual, Q(0));
  EXPECT_TRUE(verify(*c, p, kOrigin));
}

TEST(Pareto, ConstrainedNeedsConstraintNormal) {
  ParetoProblem p;
  p.graph = SetExpr::polyhedron(Polyhedron(2, {{-1, -1}}, {0}));
  p.n = 1;
  p.m = 1;
  p.theta = ConvexPolyCone::from_generators(1, {{1}});
  p.constraints = make_finite_family("omega", {SetExpr::polyhedron(Polyhedron(1, {{1}}, {0}))});
  auto c = pareto_necessary_cond(p, kOrigin);
  ASSERT_TRUE(c.has_value());
  EXPECT_EQ(c->ystar, (Vec{1}));
  EXPECT_EQ(c->x0, (Vec{-1}));
  EXPECT_TRUE(verify(*c, p, kOrigin));
}

TEST(Pareto, FatImageIsNotMinimal) {
  ParetoProblem p;
  p.graph = SetExpr::polyhedron(Polyhedron(2, {{0, 1}, {0, -1}}, {1, 1}));
  p.n = 1;
  p.m = 1;
  p.theta = ConvexPolyCone::from_generators(1, {{1}});
  ParetoDecision d = pareto_check(p, kOrigin, ParetoNotion::FullyLocalized);
  EXPECT_EQ(d.holds, Holds::No);
  ASSERT_TRUE(d.witness.has_value());
  EXPECT_TRUE(member(*p.graph, *d.witness));
  EXPECT_LT((*d.witness)[1], 0);
}

TEST(Pareto, OrderConeHypotheses) {
  ParetoProblem p = abs_problem();
  p.theta = ConvexPolyCone::from_generators(1, {{1}, {-1}});
  EXPECT_THROW(pareto_necessary_cond(p, kOrigin), HypothesisViolation);
}

// Property: graphical minimality implies fully-localized minimality (the
// image localization is the graph localization with x unrestricted near x).
TEST(ParetoProperty, GraphicalImpliesFullyLocalized) {
  std::mt19937 rng(61);
  int checked = 0;
  for (int k = 0; k < 40; ++k) {
    Mat A;
    Vec b;
    for (int r = 0; r < 2; ++r) {
      A.push_back(random_int_vec(rng, 2, -2, 2));
      b.push_back(0);
    }
    ParetoProblem p;
    p.graph = SetExpr::polyhedron(Polyhedron(2, A, b));
    p.n = 1;
    p.m = 1;
    p.theta = ConvexPolyCone::from_generators(1, {{1}});
    ParetoDecision g = pareto_check(p, kOrigin, ParetoNotion::Graphical);
    if (g.holds != Holds::Yes) continue;
    ++checked;
    EXPECT_EQ(pareto_check(p, kOrigin, ParetoNotion::FullyLocalized).holds, Holds::Yes);
  }
  EXPECT_GT(checked, 0);
}
