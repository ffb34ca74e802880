#pragma once

// Generator sets of countable cone families and the shared engines that
// decide closedness of their conic hulls and nontrivial vanishing sums.

#include <optional>
#include <string>
#include <vector>

#include "conekit/setalg.hpp"
#include "conekit/verdict.hpp"

namespace conekit {

// v(i) for every integer i >= from.
struct GeneratorTemplate {
  TVec v;
  long from = 1;
};

struct GeneratorFamily {
  std::size_t dim = 0;
  std::vector<Vec> fixed;
  std::vector<GeneratorTemplate> templates;

  bool finite() const { return templates.empty(); }
  bool constant() const;
  // fixed generators plus v(i) for from <= i <= K
  std::vector<Vec> at(long K) const;
  // Primitive limit directions of the non-constant templates.
  std::vector<Vec> limit_directions() const;
  // Exact sufficient test that v(i) lies in c for every i > K.
  bool tail_in(const ConvexPolyCone& c, long K) const;
};

// Nonnegative multipliers expressing d in cone(gens), or nullopt.
std::optional<std::vector<Q>> conic_combination(const std::vector<Vec>& gens, const Vec& d);

// Truncation levels visited by semi-decisions: K_init, 2 K_init, ..., K_max.
std::vector<long> tested_levels(const TruncationPolicy& p);

// cl cone of the generators: the hull at K with the limit directions adjoined.
// exact is set when every tail generator is certified to lie in it.
struct HullClosure {
  ConvexPolyCone cone;
  bool exact = false;
  long K = 0;
  std::vector<Vec> limits;
};
HullClosure closed_hull(const GeneratorFamily& g, const TruncationPolicy& p);

// Is cone(generators) closed? A limit direction outside the hull at every
// tested truncation gives "no"; a hull that absorbs its limits and tails
// gives "yes".
QCVerdict closedness_check(std::string condition, const GeneratorFamily& g,
                           const TruncationPolicy& p);

// A nontrivial choice x*_i in C_i with sum zero, or nullopt. Verified exactly.
std::optional<std::vector<Vec>> vanishing_combination(const std::vector<ConvexPolyCone>& cones);

// Gordan-type certificate: y with <y,g> < 0 for every generator of the
// family, tails included. Proves no nontrivial vanishing sum exists.
std::optional<Vec> strict_separator(const GeneratorFamily& g, long K);

// Value of a template at a fixed point, as a function of i.
RatFunc value_template(const QuadFnT& f, const Vec& x);

// Gradient of a template at a fixed point, as a template vector.
TVec grad_template(const QuadFnT& f, const Vec& x);

// Generators of R_+ d phi_i(x) over the active members of an inequality
// family (members are level sets). nullopt when the template structure does
// not give them in closed form. Nonconvex atoms need equal active gradients.
std::optional<GeneratorFamily> subgradient_generators(const IndexedFamily& f, const Vec& x);

// Generators of N(x; Omega_i) over all members, for families whose normal
// cones are convex and available in closed form.
std::optional<GeneratorFamily> normal_generators(const IndexedFamily& f, const Vec& x);

// Normal cones N(x; Omega_i) for the members of the truncation at K.
std::vector<ConvexPolyCone> member_normal_cones(const IndexedFamily& f, const Vec& x, long K,
                                                bool* exact);

// The member atoms of an inequality family at index i.
AtomFn member_atom(const IndexedFamily& f, long i);

}  // namespace conekit
