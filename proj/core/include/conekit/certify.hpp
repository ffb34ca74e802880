#pragma once

// Certificates: extremal systems of cones, Frechet normals of cone
// intersections, KKT conditions for countably constrained programs and
// Pareto optimality for set-valued objectives.

#include <optional>
#include <string>
#include <vector>

#include "conekit/setalg.hpp"
#include "conekit/verdict.hpp"

namespace conekit {

// ---- extremal systems -----------------------------------------------------

struct ShiftWitness {
  bool found = false;
  std::vector<Vec> shifts;  // a_i with |a_i|^2 <= R^2
  Q bound;                  // R
  std::string diagnostic;
};

// Is the intersection of the shifted cones (C_i - a_i) empty? Exact, by LP
// infeasibility over every choice of one convex piece per cone.
bool shifted_intersection_empty(const std::vector<ConeRep>& cones, const std::vector<Vec>& shifts);

// Searches bounded shifts making the shifted intersection empty. Candidates
// come from vanishing sums of polar generators.
ShiftWitness tangential_extremality_witness(const std::vector<ConeRep>& cones, const Q& R);
// Same on the tangent cones T(x; Omega_i) of the first K members.
ShiftWitness tangential_extremality_witness(const IndexedFamily& f, const Vec& x, const Q& R,
                                            long K);

struct ExtremalCertificate {
  std::vector<Vec> shifts;  // empty when no bounded witness was found
  Q bound;
  bool extremality_verified = false;
  std::vector<Vec> normals;  // x*_i, unscaled
  std::vector<ConeRep> homes;  // N(0; Lambda_i)
  Q scale_sq;  // t^2 with t^2 * sum 2^-i |x*_i|^2 = 1
  long K_used = 0;
};

// Throws HypothesisViolation unless the cones meet only at the origin;
// nullopt when no nontrivial weighted vanishing sum exists.
std::optional<ExtremalCertificate> extremal_certificate(const std::vector<ConeRep>& cones,
                                                        const Q& R = 4);
// Re-checks every identity of the certificate from scratch.
bool verify(const ExtremalCertificate& c, const std::vector<ConeRep>& cones);

// ---- Frechet normals to cone intersections --------------------------------

struct FrechetRep {
  bool represented = false;
  std::vector<std::size_t> index_set;  // 1-based member numbers
  std::vector<Vec> parts;              // x*_i for i in index_set
  Q gap_sq;                            // squared distance to the finite-sum hull
  QCVerdict qualification;
};

// Writes x* as a finite sum of polars, or reports the exact gap. Throws
// HypothesisViolation when the conic qualification fails and DomainError when
// x* is not a Frechet normal of the intersection.
FrechetRep frechet_rep_check(const std::vector<ConvexPolyCone>& cones, const Vec& xs);
// Family form: x* is tested against the whole intersection, the hull is built
// from the tangent cones of the first K members.
FrechetRep frechet_rep_check(const IndexedFamily& f, const Vec& x, const Vec& xs, long K);

// ---- KKT certificates ------------------------------------------------------

enum class ConstraintForm { Geometric, Operator, Inequality };
enum class SipMode { Upper, Lower };
const char* to_string(ConstraintForm f);
const char* to_string(SipMode m);

struct SipProblem {
  AtomFn objective;
  ConstraintForm form = ConstraintForm::Geometric;
  FamilyPtr family;  // Omega_i, Theta_i (range space) or level sets
  Mat M;             // operator constraints f(x) = M x + m
  Vec m;
};

// One element v of the subdifferential with -v written in the hull.
struct KKTTerm {
  Vec selection;
  std::vector<long> index_set;
  std::vector<Q> multipliers;      // inequality form
  std::vector<Vec> normals;        // x*_i (or lambda_i times a subgradient)
  std::vector<Vec> range_normals;  // operator form: y*_i with x*_i = M^T y*_i
  Q residual;                      // squared distance of -v to the finite sum
  bool finite = false;             // -v is attained by the finite sum
};

enum class KKTStatus { Certified, ConditionViolated };

struct KKTCertificate {
  SipMode mode = SipMode::Upper;
  ConstraintForm form = ConstraintForm::Geometric;
  KKTStatus status = KKTStatus::Certified;
  std::vector<KKTTerm> terms;  // upper: one per vertex; lower: the realizing one
  Q residual;                  // largest term residual
  bool closure_used = true;
  std::vector<QCVerdict> qualifications;
  ChipVerdict chip;
  long K_used = 0;
  bool exact = true;
  std::string note;
};

KKTCertificate sip_certify(const SipProblem& p, const Vec& x, SipMode mode);
// Standalone re-check of the finite terms using membership tests only.
bool reverify(const KKTCertificate& c, const SipProblem& p, const Vec& x);

// ---- Pareto optimality ------------------------------------------------------

struct ParetoProblem {
  SetPtr graph;  // gph F in R^n x R^m
  std::size_t n = 0;
  std::size_t m = 0;
  ConvexPolyCone theta;  // ordering cone, closed convex pointed
  FamilyPtr constraints;  // Omega_i; null means Omega = R^n
};

enum class ParetoNotion { FullyLocalized, Graphical, TangentialGraphical };
const char* to_string(ParetoNotion n);

struct ParetoDecision {
  Holds holds = Holds::Inconclusive;
  bool exact = true;
  std::optional<Vec> witness;  // (x, y) or a tangent direction
  Q box_radius;                // sup-norm radius of U x V used
  std::string method;
};

ParetoDecision pareto_check(const ParetoProblem& p, const Vec& xy, ParetoNotion notion);

struct ParetoCertificate {
  Vec ystar;  // nonzero, in -N(0; Theta)
  Vec x0;     // in D*F(x, y)(y*)
  std::vector<long> index_set;
  std::vector<Vec> normals;
  Q residual;
  std::string path;  // which set of hypotheses was verified
  std::vector<QCVerdict> qualifications;
  bool exact = true;
};

// Throws HypothesisViolation listing the failed hypotheses; nullopt when no
// multiplier was found.
std::optional<ParetoCertificate> pareto_necessary_cond(const ParetoProblem& p, const Vec& xy);
bool verify(const ParetoCertificate& c, const ParetoProblem& p, const Vec& xy);

}  // namespace conekit
