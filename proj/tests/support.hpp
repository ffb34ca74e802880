#pragma once

// Shared helpers for the test suites: seeded random cones and families, and
// brute-force reference checks that do not go through the library's own
// conversion routines.

#include <random>
#include <vector>

#include "conekit/exactgeom.hpp"
#include "conekit/setalg.hpp"

namespace conekit::testing {

inline Vec random_int_vec(std::mt19937& rng, std::size_t n, int lo = -3, int hi = 3) {
  std::uniform_int_distribution<int> d(lo, hi);
  Vec v(n);
  for (;;) {
    for (Q& q : v) q = d(rng);
    if (!is_zero(v)) return v;
  }
}

inline ConvexPolyCone random_cone(std::mt19937& rng, std::size_t n, std::size_t max_gens = 4) {
  std::uniform_int_distribution<std::size_t> k(1, max_gens);
  Mat g;
  const std::size_t m = k(rng);
  for (std::size_t i = 0; i < m; ++i) g.push_back(random_int_vec(rng, n));
  return ConvexPolyCone::from_generators(n, std::move(g));
}

// Membership in cone(gens) decided by the definition of the polar instead of
// the library: v is in the polar iff <v, g> <= 0 for every generator.
inline bool in_polar_by_definition(const Mat& gens, const Vec& v) {
  for (const Vec& g : gens)
    if (dot(v, g) > 0) return false;
  return true;
}

inline Mat generators_of(const ConvexPolyCone& c) { return dd_convert(c).generators; }

// Random halfspaces {<a, x> <= 0} through the origin.
inline FamilyPtr random_halfspace_family(std::mt19937& rng, std::size_t n, std::size_t m) {
  std::vector<SetPtr> members;
  for (std::size_t i = 0; i < m; ++i)
    members.push_back(SetExpr::polyhedron(Polyhedron(n, {random_int_vec(rng, n)}, {Q(0)})));
  return make_finite_family("random", std::move(members));
}

inline ConvexPolyCone halfplane(const Vec& a) {
  return ConvexPolyCone::from_inequalities(a.size(), {a});
}

}  // namespace conekit::testing
