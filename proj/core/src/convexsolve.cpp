#include "conekit/convexsolve.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace conekit {

double QuadForm::value(const std::vector<double>& x) const {
  double v = c;
  for (std::size_t k = 0; k < g.size(); ++k) v += g[k] * x[k];
  for (std::size_t r = 0; r < H.size(); ++r)
    for (std::size_t s = 0; s < H[r].size(); ++s) v += x[r] * H[r][s] * x[s];
  return v;
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense quadratic in the solver's variable space.
struct DQuad {
  MatrixXd H;  // symmetric, the function is z^T H z + g^T z + c
  VectorXd g;
  double c = 0.0;

  double val(const VectorXd& z) const { return z.dot(H * z) + g.dot(z) + c; }
  VectorXd grad(const VectorXd& z) const { return 2.0 * (H * z) + g; }
};

DQuad lift(const QuadForm& q, std::size_t n, std::size_t dim) {
  DQuad d;
  d.H = MatrixXd::Zero(dim, dim);
  d.g = VectorXd::Zero(dim);
  d.c = q.c;
  for (std::size_t r = 0; r < q.H.size() && r < n; ++r)
    for (std::size_t s = 0; s < q.H[r].size() && s < n; ++s)
      d.H(r, s) = 0.5 * (q.H[r][s] + q.H[s][r]);
  for (std::size_t k = 0; k < q.g.size() && k < n; ++k) d.g(k) = q.g[k];
  return d;
}

struct Barrier {
  DQuad obj;
  std::vector<DQuad> cons;

  bool strictly_feasible(const VectorXd& z) const {
    return std::all_of(cons.begin(), cons.end(), [&](const DQuad& q) { return q.val(z) < 0; });
  }
  double phi(const VectorXd& z, double t) const {
    double v = t * obj.val(z);
    for (const DQuad& q : cons) v -= std::log(-q.val(z));
    return v;
  }

  // Newton centering of the barrier at parameter t.
  void center(VectorXd& z, double t, const std::function<bool(const VectorXd&)>& stop) const {
    const auto dim = z.size();
    for (int it = 0; it < 200; ++it) {
      VectorXd grad = t * obj.grad(z);
      MatrixXd hess = 2.0 * t * obj.H;
      for (const DQuad& q : cons) {
        double f = q.val(z);
        VectorXd gq = q.grad(z);
        grad += gq / (-f);
        hess += gq * gq.transpose() / (f * f) + 2.0 * q.H / (-f);
      }
      hess += 1e-12 * MatrixXd::Identity(dim, dim);
      VectorXd step = -hess.ldlt().solve(grad);
      double decrement = -grad.dot(step);
      if (!(decrement > 1e-14)) return;
      double s = 1.0;
      double base = phi(z, t);
      for (int ls = 0; ls < 80; ++ls, s *= 0.5) {
        VectorXd cand = z + s * step;
        if (!strictly_feasible(cand)) continue;
        if (phi(cand, t) <= base - 0.25 * s * decrement) break;
      }
      VectorXd cand = z + s * step;
      if (!strictly_feasible(cand)) return;
      z = cand;
      if (stop && stop(z)) return;
      if (decrement < 1e-12) return;
    }
  }
};

void add_box(std::vector<DQuad>& cons, std::size_t n, std::size_t dim, double box) {
  for (std::size_t k = 0; k < n; ++k)
    for (double sign : {1.0, -1.0}) {
      DQuad q;
      q.H = MatrixXd::Zero(dim, dim);
      q.g = VectorXd::Zero(dim);
      q.g(k) = sign;
      q.c = -box;
      cons.push_back(q);
    }
}

}  // namespace

ConvexSolution minimize_convex(const ConvexProblem& prob, double tol) {
  const std::size_t n = prob.n;
  ConvexSolution out;
  VectorXd x = VectorXd::Zero(n);
  for (std::size_t k = 0; k < prob.start.size() && k < n; ++k) x(k) = prob.start[k];

  // Phase I in (x, s): minimize s subject to q_j(x) - s <= 0.
  std::vector<DQuad> cons;
  for (const QuadForm& q : prob.constraints) cons.push_back(lift(q, n, n));
  add_box(cons, n, n, prob.box);
  bool strict = std::all_of(cons.begin(), cons.end(), [&](const DQuad& q) { return q.val(x) < 0; });
  if (!strict) {
    Barrier p1;
    p1.obj.H = MatrixXd::Zero(n + 1, n + 1);
    p1.obj.g = VectorXd::Zero(n + 1);
    p1.obj.g(n) = 1.0;
    double smax = 0.0;
    for (const DQuad& q : cons) {
      DQuad l;
      l.H = MatrixXd::Zero(n + 1, n + 1);
      l.H.topLeftCorner(n, n) = q.H;
      l.g = VectorXd::Zero(n + 1);
      l.g.head(n) = q.g;
      l.g(n) = -1.0;
      l.c = q.c;
      smax = std::max(smax, q.val(x));
      p1.cons.push_back(l);
    }
    DQuad floor_s;  // s >= -1 keeps phase I bounded
    floor_s.H = MatrixXd::Zero(n + 1, n + 1);
    floor_s.g = VectorXd::Zero(n + 1);
    floor_s.g(n) = -1.0;
    floor_s.c = -1.0;
    p1.cons.push_back(floor_s);
    VectorXd z(n + 1);
    z.head(n) = x;
    z(n) = smax + 1.0;
    auto done = [&](const VectorXd& w) { return w(static_cast<long>(n)) < -1e-12; };
    double t = 1.0;
    const double m = static_cast<double>(p1.cons.size());
    for (int outer = 0; outer < 60 && !done(z); ++outer) {
      p1.center(z, t, done);
      if (m / t < 1e-13) break;
      t *= 10.0;
    }
    if (!done(z)) return out;
    x = z.head(n);
  }

  Barrier p2;
  p2.obj = lift(prob.objective, n, n);
  p2.cons = cons;
  const double m = static_cast<double>(cons.size());
  double t = 1.0;
  for (int outer = 0; outer < 80; ++outer) {
    p2.center(x, t, nullptr);
    if (m / t < tol) break;
    t *= 20.0;
  }
  out.feasible = true;
  out.x.assign(x.data(), x.data() + n);
  out.value = p2.obj.val(x);
  out.gap = m / t;
  return out;
}

}  // namespace conekit
