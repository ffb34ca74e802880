#pragma once

// Floating-point log-barrier solver for small convex quadratically
// constrained problems. Used only where a result is labeled approximate or is
// re-verified exactly afterwards.

#include <cstddef>
#include <vector>

namespace conekit {

// q(x) = x^T H x + g^T x + c. An empty H means zero.
struct QuadForm {
  std::vector<std::vector<double>> H;
  std::vector<double> g;
  double c = 0.0;

  double value(const std::vector<double>& x) const;
};

struct ConvexProblem {
  std::size_t n = 0;
  QuadForm objective;                // minimized; must be convex
  std::vector<QuadForm> constraints; // each q(x) <= 0, each convex
  double box = 1e4;                  // |x_k| <= box is added implicitly
  std::vector<double> start;         // optional starting point
};

struct ConvexSolution {
  bool feasible = false;  // a strictly feasible point was found
  std::vector<double> x;
  double value = 0.0;
  double gap = 0.0;  // value - optimum <= gap (barrier duality bound)
};

ConvexSolution minimize_convex(const ConvexProblem& prob, double tol = 1e-10);

}  // namespace conekit
