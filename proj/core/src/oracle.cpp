#include "conekit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "conekit/pieces.hpp"

namespace conekit {

namespace {

constexpr std::size_t kTailSteps = 5;
constexpr double kDistanceRatio = 1e-3;
constexpr double kRoundingDeg = 1e-9;
constexpr double kConvergenceRatio = 0.5;

double norm(const DVec& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Vec exact_of(const DVec& v) {
  Vec r;
  for (double x : v) r.emplace_back(x);  // binary doubles convert exactly
  return r;
}

DVec double_of(const Vec& v) {
  DVec r;
  for (const Q& q : v) r.push_back(to_double(q));
  return r;
}

std::vector<double> tangent_steps() {
  std::vector<double> t;
  for (int k = 1; k <= 24; ++k) t.push_back(std::ldexp(1.0, -k));
  return t;
}

std::vector<double> normal_radii() { return {1e-1, 1e-2, 1e-3, 1e-4}; }

double angle_between(const DVec& a, const DVec& b) {
  double na = norm(a), nb = norm(b);
  if (na == 0 || nb == 0) return 90.0;
  double c = 0;
  for (std::size_t k = 0; k < a.size(); ++k) c += a[k] * b[k];
  c = std::clamp(c / (na * nb), -1.0, 1.0);
  return std::acos(c) * 180.0 / M_PI;
}

// Unit vectors orthogonal to d spanning its orthogonal complement.
std::vector<DVec> perpendiculars(const DVec& d) {
  const std::size_t n = d.size();
  std::vector<DVec> basis{d};
  std::vector<DVec> out;
  for (std::size_t k = 0; k < n && basis.size() < n; ++k) {
    DVec e(n, 0.0);
    e[k] = 1.0;
    for (const DVec& b : basis) {
      double c = 0, bb = 0;
      for (std::size_t j = 0; j < n; ++j) c += e[j] * b[j], bb += b[j] * b[j];
      for (std::size_t j = 0; j < n; ++j) e[j] -= c / bb * b[j];
    }
    double ne = norm(e);
    if (ne < 1e-9) continue;
    for (double& x : e) x /= ne;
    basis.push_back(e);
    out.push_back(e);
  }
  return out;
}

}  // namespace

std::vector<DVec> sample_directions(std::size_t n, const OracleOptions& opt) {
  std::vector<DVec> dirs;
  if (n == 1) return {{1.0}, {-1.0}};
  if (n == 2) {
    for (std::size_t k = 0; k < opt.directions_2d; ++k) {
      double a = 2 * M_PI * static_cast<double>(k) / static_cast<double>(opt.directions_2d);
      dirs.push_back({std::cos(a), std::sin(a)});
    }
    return dirs;
  }
  std::mt19937 rng(opt.seed);
  std::normal_distribution<double> g;
  while (dirs.size() < opt.directions_nd) {
    DVec d(n);
    for (double& x : d) x = g(rng);
    double nd = norm(d);
    if (nd < 1e-9) continue;
    for (double& x : d) x /= nd;
    dirs.push_back(std::move(d));
  }
  return dirs;
}

SampledCone oracle_tangent(const SetExpr& s, const Vec& x, const OracleOptions& opt) {
  SampledCone out;
  out.grid.t = opt.t.empty() ? tangent_steps() : opt.t;
  out.grid.angular_tolerance_deg = opt.angular_tolerance_deg;
  out.grid.seed = opt.seed;
  out.directions = sample_directions(s.dim, opt);
  out.grid.directions = out.directions.size();

  std::vector<BasicPiece> pieces;
  bool curved = false;
  try {
    pieces = compile(s);
    curved = std::any_of(pieces.begin(), pieces.end(),
                         [](const BasicPiece& p) { return !p.polyhedral(); });
  } catch (const Unsupported&) {
  }
  std::vector<double> steps = out.grid.t;
  std::sort(steps.begin(), steps.end());
  steps.resize(std::min(steps.size(), kTailSteps));
  const DVec xd = double_of(x);

  for (const DVec& d : out.directions) {
    bool ok = true;
    for (double t : steps) {
      DVec y(xd);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += t * d[k];
      Vec ye = x;
      for (std::size_t k = 0; k < ye.size(); ++k) ye[k] += Q(t) * Q(d[k]);
      if (member(s, ye)) continue;
      // curved boundaries are followed by arcs, not segments
      if (curved) {
        DVec p = approx_projection(pieces, y);
        DVec diff(y.size());
        for (std::size_t k = 0; k < y.size(); ++k) diff[k] = y[k] - p[k];
        if (norm(diff) <= kDistanceRatio * t) continue;
      }
      ok = false;
      break;
    }
    out.accepted.push_back(ok);
  }
  return out;
}

SampledCone oracle_normal(const SetExpr& s, const Vec& x, const OracleOptions& opt) {
  SampledCone out;
  out.grid.t = opt.t.empty() ? normal_radii() : opt.t;
  out.grid.angular_tolerance_deg = opt.angular_tolerance_deg;
  out.grid.seed = opt.seed;
  std::vector<DVec> probes = sample_directions(s.dim, opt);
  out.grid.directions = probes.size();
  std::vector<BasicPiece> pieces = compile(s);
  std::vector<double> radii = out.grid.t;
  std::sort(radii.begin(), radii.end());
  const double r = radii.front();
  const double coarse_r = radii.size() > 1 ? radii[1] : r;
  const DVec xd = double_of(x);
  // Unit residual y - P(y) for y = x + rad u; empty when y is in the set.
  auto residual = [&](const DVec& u, double rad) {
    DVec y(xd);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += rad * u[k];
    DVec p = approx_projection(pieces, y);
    DVec v(y.size());
    for (std::size_t k = 0; k < y.size(); ++k) v[k] = y[k] - p[k];
    double nv = norm(v);
    if (nv <= 1e-9 * rad) return DVec{};
    for (double& c : v) c /= nv;
    return v;
  };
  for (const DVec& u : probes) {
    DVec v = residual(u, r);
    if (v.empty()) continue;
    out.coarse.push_back(residual(u, coarse_r));
    out.directions.push_back(std::move(v));
    out.accepted.push_back(true);
  }
  return out;
}

double angle_to_cone(const ConeRep& c, const DVec& d) {
  Vec de = exact_of(d);
  if (cone_member(c, de)) return 0.0;
  double best = 180.0;
  for (const ConvexPolyCone& piece : c.pieces) {
    ConvexPolyCone h = dd_convert(piece);
    Polyhedron P(h.dim, h.inequalities, zeros(h.inequalities.size()));
    best = std::min(best, angle_between(d, double_of(project(P, de))));
  }
  return best;
}

double angle_to_complement(const ConeRep& c, const DVec& d) {
  if (!cone_member(c, exact_of(d))) return 0.0;
  // bisection along rotations towards each perpendicular axis
  double best = 90.0;
  auto inside = [&](const DVec& p, double deg) {
    double a = deg * M_PI / 180.0;
    DVec v(d.size());
    for (std::size_t k = 0; k < d.size(); ++k) v[k] = std::cos(a) * d[k] + std::sin(a) * p[k];
    return cone_member(c, exact_of(v));
  };
  for (const DVec& p0 : perpendiculars(d)) {
    for (double sgn : {1.0, -1.0}) {
      DVec p(p0);
      for (double& x : p) x *= sgn;
      if (inside(p, best)) continue;
      double lo = 0, hi = best;
      for (int it = 0; it < 30; ++it) {
        double mid = 0.5 * (lo + hi);
        (inside(p, mid) ? lo : hi) = mid;
      }
      best = std::min(best, hi);
    }
  }
  return best;
}

Agreement compare_tangent(const ConeRep& exact, const SampledCone& sampled) {
  Agreement a;
  const double tol = sampled.grid.angular_tolerance_deg;
  for (std::size_t k = 0; k < sampled.directions.size(); ++k) {
    const DVec& d = sampled.directions[k];
    bool in = cone_member(exact, exact_of(d));
    ++a.total;
    if (in == static_cast<bool>(sampled.accepted[k])) {
      ++a.agree;
      continue;
    }
    double gap = in ? angle_to_complement(exact, d) : angle_to_cone(exact, d);
    (gap <= tol ? a.disagree_in_band : a.disagree_outside_band)++;
  }
  return a;
}

Agreement compare_normal(const ConeRep& exact, const SampledCone& sampled) {
  Agreement a;
  const double tol = sampled.grid.angular_tolerance_deg;
  for (std::size_t k = 0; k < sampled.directions.size(); ++k) {
    ++a.total;
    double gap = angle_to_cone(exact, sampled.directions[k]);
    // A sample agrees when it lies on the cone up to rounding, or when it
    // approaches the cone as the radius shrinks over the last decade.
    bool converging = false;
    if (gap > kRoundingDeg && k < sampled.coarse.size() && !sampled.coarse[k].empty())
      converging = gap <= kConvergenceRatio * angle_to_cone(exact, sampled.coarse[k]);
    if (gap <= kRoundingDeg || converging)
      ++a.agree;
    else if (gap <= tol)
      ++a.disagree_in_band;
    else
      ++a.disagree_outside_band;
  }
  return a;
}

}  // namespace conekit
