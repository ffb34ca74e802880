#pragma once

// Qualification and closedness conditions for countable systems.

#include <vector>

#include "conekit/setalg.hpp"
#include "conekit/verdict.hpp"

namespace conekit {

// Normal qualification: only zero normals x*_i in N(x; Omega_i) sum to zero.
QCVerdict nqc_check(const IndexedFamily& f, const Vec& x);
// Conic variant on cones Lambda_i at the origin (normals are the polars).
QCVerdict conic_qc_check(const std::vector<ConvexPolyCone>& cones);
// Sufficient condition for convex systems: a point of one member strictly
// inside all the others.
QCVerdict interior_point_nqc(const IndexedFamily& f, const Vec& x);

// Closedness of the finite-sum set of member normals.
QCVerdict ncc_check(const IndexedFamily& f, const Vec& x);

// Inequality systems: every member is a level set {phi_i <= 0}.
QCVerdict scc_check(const IndexedFamily& ineq, const Vec& x);
QCVerdict sqc_check(const IndexedFamily& ineq, const Vec& x);

// Conjugate-based closedness (convex atoms with conjugate data).
QCVerdict fmcq_check(const IndexedFamily& ineq);
QCVerdict cqc_check(const AtomFn& phi, const IndexedFamily& ineq);

}  // namespace conekit
