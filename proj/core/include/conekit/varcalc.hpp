#pragma once

// Tangent and normal cones, subdifferentials and coderivatives.

#include <optional>
#include <string>
#include <vector>

#include "conekit/setalg.hpp"

namespace conekit {

enum class ConeMethod { ClosedForm, FaceEnumeration, Sampled };
const char* to_string(ConeMethod m);

struct SampleGrid {
  std::vector<double> t;          // step lengths or radii
  std::size_t directions = 0;     // number of sampled directions
  double angular_tolerance_deg = 1.0;
  unsigned seed = 0;
};

struct ConeResult {
  ConeRep cone;
  bool exact = true;
  ConeMethod method = ConeMethod::ClosedForm;
  std::optional<SampleGrid> grid;  // set for sampled results
};

ConeResult tangent_cone(const SetExpr& s, const Vec& x);
ConeResult frechet_normal_cone(const SetExpr& s, const Vec& x);
ConeResult limiting_normal_cone(const SetExpr& s, const Vec& x);

// Limiting normal cone at the origin of a finite union of polyhedral cones,
// as the union of the Frechet normal cones over the strata of the local
// hyperplane arrangement.
ConeRep normal_cone_of_cone(const ConeRep& T);

enum class Flavor { Basic, Frechet, FrechetUpper, Singular };
const char* to_string(Flavor f);

struct SubdiffResult {
  enum class Kind { Empty, Points, Polytope };
  Kind kind = Kind::Empty;
  std::vector<Vec> points;  // the finite set, or the polytope's vertices
  Flavor flavor = Flavor::Basic;

  bool is_singleton() const { return points.size() == 1; }
};

// Throws Unsupported when the flavor has no closed form for this atom.
SubdiffResult subdifferential(const AtomFn& atom, const Vec& x, Flavor flavor);

// Vertices of a bounded polyhedron; nullopt when it is unbounded.
std::optional<std::vector<Vec>> polytope_vertices(const Polyhedron& P);

// {x* : (x*, -y*) in N((x,y); gph F)} as a union of polyhedra.
struct CoderivativeResult {
  std::vector<Polyhedron> slices;
  bool exact = true;

  bool contains(const Vec& xs) const;
  // True when the slice is exactly {0}.
  bool is_origin() const;
};

CoderivativeResult coderivative(const SetExpr& graph, std::size_t n, const Vec& xy,
                                const Vec& ystar);

}  // namespace conekit
