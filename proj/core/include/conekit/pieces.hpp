#pragma once

// Disjunctive normal form of set expressions: every supported expression is a
// finite union of basic pieces {A x <= b, q_j(x) <= 0}.

#include <optional>
#include <string>
#include <vector>

#include "conekit/setalg.hpp"

namespace conekit {

struct BasicPiece {
  std::size_t dim = 0;
  Mat A;
  Vec b;
  std::vector<QuadFn> quads;

  bool polyhedral() const { return quads.empty(); }
  bool contains(const Vec& x) const;
  Polyhedron linear_part() const { return Polyhedron(dim, A, b); }
};

// Cap on the number of pieces produced by products of unions.
inline constexpr std::size_t kMaxPieces = 4096;

std::vector<BasicPiece> compile(const SetExpr& s);

// Removes duplicate and dominated constraints; nullopt when provably empty.
std::optional<BasicPiece> simplify(BasicPiece p);

struct PieceTangent {
  ConvexPolyCone cone;
  bool exact = true;
  bool reduced = false;  // facial reduction was needed
};

// Tangent cone of a basic piece at x, nullopt when x is not in the piece.
std::optional<PieceTangent> piece_tangent(const BasicPiece& p, const Vec& x);

// Constraints {q(., i) <= 0 for all integers i >= i0} for a template that is
// affine in i after clearing a positive denominator; nullopt otherwise.
std::optional<std::vector<QuadFn>> limit_constraints(const QuadFnT& q, long i0);

// Exact DNF of the intersection over all indices of a family, when the
// template structure allows it.
std::optional<std::vector<BasicPiece>> limit_intersection(const IndexedFamily& f);

// Union of the tangent cones of the pieces containing x (pieces contained in
// another one are dropped); nullopt when x lies in no piece.
std::optional<ConeRep> tangent_from_pieces(const std::vector<BasicPiece>& pieces, const Vec& x);

// Nearest point of the set to x in floating point (exact projection for
// polyhedral pieces, barrier solve otherwise).
std::vector<double> approx_projection(const std::vector<BasicPiece>& pieces,
                                      const std::vector<double>& x);

struct TangentIntersection {
  ConeRep cone;
  std::string method;
};

// Exact intersection over all indices of the member tangent cones at x, when
// the template structure allows it.
std::optional<TangentIntersection> limit_tangent_intersection(const IndexedFamily& f,
                                                              const Vec& x);

}  // namespace conekit
