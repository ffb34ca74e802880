#pragma once

// Reference families built directly through the core API, independent of the
// JSON instance parser.

#include "conekit/setalg.hpp"

namespace conekit::testing {

inline RatFunc T(const char* s) { return parse_template(s); }
inline RatFunc C(long v) { return RatFunc(Q(v)); }

// {x1^2 - x2 <= 0} and {x1^2 + x2 <= 0}.
inline FamilyPtr two_parabolas() {
  QuadFn q1;
  q1.dim = 2;
  q1.H = {{1, 0}, {0, 0}};
  q1.g = {0, -1};
  q1.c = 0;
  QuadFn q2 = q1;
  q2.g = {0, 1};
  return make_finite_family("two-parabolas", {SetExpr::level(AtomFn::quadratic("p1", q1, true)),
                                              SetExpr::level(AtomFn::quadratic("p2", q2, true))});
}

// epi phi_i with phi_i(x) = i x^2 for x <= 0 and 0 for x >= 0.
inline std::shared_ptr<AtomT> half_parabola_atom() {
  auto at = std::make_shared<AtomT>();
  at->name = "phi";
  at->dim = 1;
  at->convex = true;
  AtomPieceT p1;
  p1.region.dim = 1;
  p1.region.A = {{C(1)}};
  p1.region.b = {C(0)};
  p1.f.dim = 1;
  p1.f.H = {{T("i")}};
  p1.f.g = {C(0)};
  AtomPieceT p2;
  p2.region.dim = 1;
  p2.region.A = {{C(-1)}};
  p2.region.b = {C(0)};
  p2.f.dim = 1;
  p2.f.g = {C(0)};
  at->pieces = {p1, p2};
  return at;
}

inline FamilyPtr steepening_epigraphs() {
  SetTemplate st;
  st.dim = 2;
  st.node = TEpigraphSet{half_parabola_atom()};
  return make_template_family("steepening", st, 1);
}

// Level sets of x1 + i x2, i >= 0, with the conjugate of each affine atom.
inline FamilyPtr linear_family() {
  auto al = std::make_shared<AtomT>();
  al->name = "lin";
  al->dim = 2;
  al->convex = true;
  AtomPieceT pl;
  pl.region.dim = 2;
  pl.f.dim = 2;
  pl.f.g = {C(1), T("i")};
  al->pieces = {pl};
  ConjugateT cj;
  cj.domain.dim = 2;
  cj.domain.A = {{C(1), C(0)}, {C(-1), C(0)}, {C(0), C(1)}, {C(0), C(-1)}};
  cj.domain.b = {C(1), C(-1), T("i"), T("-i")};
  cj.value.dim = 2;
  cj.value.g = {C(0), C(0)};
  al->conjugate = cj;
  SetTemplate sl;
  sl.dim = 2;
  sl.node = TLevelSet{al};
  return make_template_family("linear", sl, 0);
}

// Half-planes {x1 + i x2 <= 0}, i >= first.
inline FamilyPtr halfplane_family(long first) {
  PolyhedronT P;
  P.dim = 2;
  P.A = {{C(1), T("i")}};
  P.b = {C(0)};
  SetTemplate sp;
  sp.dim = 2;
  sp.node = TPolySet{P};
  return make_template_family("halfplanes", sp, first);
}

inline QuadFnT steep_quadratic() {  // i x1^2 - x2
  QuadFnT f;
  f.dim = 2;
  f.H = {{T("i"), C(0)}, {C(0), C(0)}};
  f.g = {C(0), C(-1)};
  return f;
}

inline FamilyPtr quadratic_family() {
  auto aq = std::make_shared<AtomT>();
  aq->name = "quad";
  aq->dim = 2;
  aq->convex = true;
  AtomPieceT pq;
  pq.region.dim = 2;
  pq.f = steep_quadratic();
  aq->pieces = {pq};
  SetTemplate sq;
  sq.dim = 2;
  sq.node = TLevelSet{aq};
  return make_template_family("quadratic", sq, 1);
}

// i x1^2 - x2 for x1 <= 0 and -x2 for x1 >= 0, with its conjugate.
inline FamilyPtr one_sided_family() {
  auto a8 = std::make_shared<AtomT>();
  a8->name = "one-sided";
  a8->dim = 2;
  a8->convex = true;
  AtomPieceT r1;
  r1.region.dim = 2;
  r1.region.A = {{C(1), C(0)}};
  r1.region.b = {C(0)};
  r1.f = steep_quadratic();
  AtomPieceT r2;
  r2.region.dim = 2;
  r2.region.A = {{C(-1), C(0)}};
  r2.region.b = {C(0)};
  r2.f.dim = 2;
  r2.f.g = {C(0), C(-1)};
  a8->pieces = {r1, r2};
  ConjugateT c8;
  c8.domain.dim = 2;
  c8.domain.A = {{C(1), C(0)}, {C(0), C(1)}, {C(0), C(-1)}};
  c8.domain.b = {C(0), C(-1), C(1)};
  c8.value.dim = 2;
  c8.value.H = {{T("1/(4*i)"), C(0)}, {C(0), C(0)}};
  c8.value.g = {C(0), C(0)};
  a8->conjugate = c8;
  SetTemplate s8;
  s8.dim = 2;
  s8.node = TLevelSet{a8};
  return make_template_family("one-sided", s8, 1);
}

// -x2 with the conjugate 0 on {(0, -1)}.
inline AtomFn minus_x2() {
  AtomFn obj = AtomFn::affine("minus-x2", {0, -1}, 0);
  return obj;
}

inline AtomFn abs_atom() {
  AtomFn a;
  a.name = "abs";
  a.dim = 1;
  a.convex = true;
  a.pieces = {{Polyhedron(1, {{-1}}, {0}), QuadFn::affine({1}, 0)},
              {Polyhedron(1, {{1}}, {0}), QuadFn::affine({-1}, 0)}};
  return a;
}

}  // namespace conekit::testing
