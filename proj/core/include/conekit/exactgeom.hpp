#pragma once

// Exact polyhedral cone geometry over the rationals.

#include <optional>
#include <string>
#include <vector>

#include "conekit/rational.hpp"

namespace conekit {

struct InfeasibleSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A closed convex polyhedral cone held as a V/H pair.
//
// generators: rays; a line l is stored as the pair (l, -l), and such pairs come
// first (n_lines of them). inequalities: rows a meaning <a,x> <= 0; equalities
// are stored as pairs (a, -a) first (n_eqs of them).
struct ConvexPolyCone {
  std::size_t dim = 0;
  Mat generators;
  Mat inequalities;
  std::size_t n_lines = 0;
  std::size_t n_eqs = 0;
  bool has_v = false;
  bool has_h = false;
  bool exact = true;
  bool synced = false;

  static ConvexPolyCone from_generators(std::size_t dim, Mat gens);
  static ConvexPolyCone from_inequalities(std::size_t dim, Mat ineqs);
  static ConvexPolyCone whole(std::size_t dim);
  static ConvexPolyCone origin(std::size_t dim);
  static ConvexPolyCone ray(const Vec& v);

  Mat lines() const;  // one vector per line
  Mat rays() const;   // pointed part generators
  bool is_origin() const { return synced && generators.empty(); }
  bool is_whole() const { return synced && inequalities.empty(); }
};

// Finite union of convex polyhedral cones.
struct ConeRep {
  std::vector<ConvexPolyCone> pieces;
  bool exact = true;

  ConeRep() = default;
  explicit ConeRep(ConvexPolyCone c);
  explicit ConeRep(std::vector<ConvexPolyCone> cs);
  std::size_t dim() const { return pieces.empty() ? 0 : pieces.front().dim; }
  bool convex() const { return pieces.size() == 1; }
};

// {x : A x <= b}
struct Polyhedron {
  std::size_t dim = 0;
  Mat A;
  Vec b;

  Polyhedron() = default;
  Polyhedron(std::size_t n, Mat a, Vec rhs);
  static Polyhedron whole(std::size_t n) { return Polyhedron(n, {}, {}); }
  bool contains(const Vec& x) const;
  bool empty() const;
  std::vector<std::size_t> active(const Vec& x) const;
};

ConvexPolyCone dd_convert(const ConvexPolyCone& cone);
ConvexPolyCone polar(const ConvexPolyCone& cone);
ConvexPolyCone polar(const ConeRep& cone);
ConvexPolyCone intersect(const std::vector<ConvexPolyCone>& cones);
ConeRep intersect(const ConeRep& a, const ConeRep& b);
ConvexPolyCone conic_sum(const std::vector<ConvexPolyCone>& cones, std::size_t dim);
// Preimage {x : M x in C} for a cone C in the range space.
ConvexPolyCone preimage(const Mat& M, const ConvexPolyCone& c);
// Cartesian product C1 x C2.
ConvexPolyCone product(const ConvexPolyCone& a, const ConvexPolyCone& b);

Vec project(const Polyhedron& P, const Vec& x);
Q squared_distance(const Polyhedron& P, const Vec& x);

bool cone_member(const ConvexPolyCone& cone, const Vec& v);
bool cone_member(const ConeRep& cone, const Vec& v);
bool cone_contains(const ConvexPolyCone& outer, const ConvexPolyCone& inner);
// A point of `inner` outside the union, or nullopt when inner is covered.
std::optional<Vec> uncovered_direction(const ConvexPolyCone& inner, const ConeRep& outer);
bool cone_contains(const ConeRep& outer, const ConeRep& inner);
bool cone_equal(const ConvexPolyCone& a, const ConvexPolyCone& b);
bool cone_equal(const ConeRep& a, const ConeRep& b);
bool is_pointed(const ConvexPolyCone& cone);
bool is_full_dimensional(const ConvexPolyCone& cone);

// Relative-interior point of the cone (zero for {0}).
Vec interior_point(const ConvexPolyCone& cone);

std::string serialize(const ConvexPolyCone& cone);
std::string serialize(const ConeRep& cone);
ConvexPolyCone parse_cone(const std::string& text);

}  // namespace conekit
