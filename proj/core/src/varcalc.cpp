#include "conekit/varcalc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "conekit/lp.hpp"
#include "conekit/oracle.hpp"
#include "conekit/pieces.hpp"

namespace conekit {

const char* to_string(ConeMethod m) {
  switch (m) {
    case ConeMethod::ClosedForm:
      return "closed-form";
    case ConeMethod::FaceEnumeration:
      return "face-enumeration";
    case ConeMethod::Sampled:
      return "sampled";
  }
  return "?";
}

const char* to_string(Flavor f) {
  switch (f) {
    case Flavor::Basic:
      return "basic";
    case Flavor::Frechet:
      return "frechet";
    case Flavor::FrechetUpper:
      return "frechet-upper";
    case Flavor::Singular:
      return "singular";
  }
  return "?";
}

namespace {

// Rational approximation of a unit direction, good to about 1e-6 rad.
Vec rationalize(const DVec& d) {
  Vec v;
  for (double x : d) v.emplace_back(std::lround(x * 1e6), 1000000);
  return v;
}

// Cone list from sampled tangent directions. In the plane, each maximal arc
// of accepted directions becomes a cone; elsewhere the conic hull is used.
ConeRep cone_from_samples(std::size_t n, const SampledCone& s) {
  std::vector<Vec> acc;
  for (std::size_t k = 0; k < s.directions.size(); ++k)
    if (s.accepted[k]) acc.push_back(rationalize(s.directions[k]));
  if (acc.empty()) return ConeRep(ConvexPolyCone::origin(n));
  if (n != 2) return ConeRep(dd_convert(ConvexPolyCone::from_generators(n, acc)));
  // directions are in angular order for n == 2
  const std::size_t m = s.directions.size();
  if (acc.size() == m) return ConeRep(ConvexPolyCone::whole(2));
  std::size_t start = 0;
  while (s.accepted[start] || !s.accepted[(start + 1) % m]) start = (start + 1) % m;
  std::vector<ConvexPolyCone> arcs;
  std::vector<Vec> arc;
  auto flush = [&] {
    if (arc.empty()) return;
    // split long arcs so every piece spans less than a half-plane
    const std::size_t step = m / 4;
    for (std::size_t b = 0; b < arc.size(); b += step) {
      std::size_t e = std::min(arc.size() - 1, b + step);
      arcs.push_back(dd_convert(ConvexPolyCone::from_generators(2, {arc[b], arc[e]})));
    }
    arc.clear();
  };
  for (std::size_t k = 1; k <= m; ++k) {
    std::size_t j = (start + k) % m;
    if (s.accepted[j])
      arc.push_back(rationalize(s.directions[j]));
    else
      flush();
  }
  flush();
  return ConeRep(std::move(arcs));
}

// Union of rays through clustered sampled normal directions.
ConeRep rays_from_samples(std::size_t n, const SampledCone& s, double tol_deg) {
  std::vector<DVec> reps;
  const double cos_tol = std::cos(tol_deg * M_PI / 180.0);
  for (const DVec& d : s.directions) {
    bool near = false;
    for (const DVec& r : reps) {
      double c = 0;
      for (std::size_t k = 0; k < n; ++k) c += d[k] * r[k];
      if (c >= cos_tol) near = true;
    }
    if (!near) reps.push_back(d);
  }
  std::vector<ConvexPolyCone> cones{ConvexPolyCone::origin(n)};
  for (const DVec& r : reps) cones.push_back(ConvexPolyCone::ray(rationalize(r)));
  ConeRep out(std::move(cones));
  out.exact = false;
  for (ConvexPolyCone& c : out.pieces) c.exact = false;
  return out;
}

ConeResult sampled_tangent(const SetExpr& s, const Vec& x) {
  SampledCone sc = oracle_tangent(s, x);
  ConeResult r;
  r.cone = cone_from_samples(s.dim, sc);
  r.cone.exact = false;
  for (ConvexPolyCone& c : r.cone.pieces) c.exact = false;
  r.exact = false;
  r.method = ConeMethod::Sampled;
  r.grid = sc.grid;
  return r;
}

}  // namespace

ConeResult tangent_cone(const SetExpr& s, const Vec& x) {
  if (x.size() != s.dim) throw MalformedInput("tangent_cone: dimension mismatch");
  if (!member(s, x)) throw DomainError("tangent_cone: point " + to_string(x) + " is not in the set");
  std::vector<BasicPiece> pieces;
  try {
    pieces = compile(s);
  } catch (const Unsupported&) {
    if (const auto* tr = std::get_if<TruncatedSet>(&s.node)) {
      // intersection of member cones; only a lower-level approximation
      std::optional<ConeRep> acc;
      for (const SetPtr& m : tr->family->members(tr->K)) {
        ConeResult t = tangent_cone(*m, x);
        acc = acc ? intersect(*acc, t.cone) : t.cone;
      }
      ConeResult r;
      r.cone = *acc;
      r.cone.exact = false;
      r.exact = false;
      r.method = ConeMethod::Sampled;
      return r;
    }
    return sampled_tangent(s, x);
  }
  auto cone = tangent_from_pieces(pieces, x);
  if (!cone) throw DomainError("tangent_cone: point lies in no piece");
  if (!cone->exact) return sampled_tangent(s, x);
  ConeResult r;
  r.cone = std::move(*cone);
  r.exact = true;
  r.method = ConeMethod::ClosedForm;
  return r;
}

ConeResult frechet_normal_cone(const SetExpr& s, const Vec& x) {
  ConeResult t = tangent_cone(s, x);
  ConeResult r;
  r.cone = ConeRep(polar(t.cone));
  r.exact = t.exact;
  r.cone.exact = t.exact;
  r.method = t.method;
  r.grid = t.grid;
  return r;
}

ConeRep normal_cone_of_cone(const ConeRep& T) {
  const std::size_t n = T.dim();
  std::vector<ConvexPolyCone> pieces;
  for (const ConvexPolyCone& c : T.pieces) pieces.push_back(dd_convert(c));
  Mat hs;
  for (const ConvexPolyCone& c : pieces)
    for (const Vec& a : c.inequalities) {
      Vec h = canonical_line(a);
      if (std::find(hs.begin(), hs.end(), h) == hs.end()) hs.push_back(h);
    }

  std::vector<ConvexPolyCone> found;
  auto record = [&](const Vec& x) {
    if (!cone_member(T, x)) return;
    std::vector<ConvexPolyCone> local;
    for (const ConvexPolyCone& c : pieces) {
      if (!cone_member(c, x)) continue;
      Mat act;
      for (const Vec& a : c.inequalities)
        if (sgn(dot(a, x)) == 0) act.push_back(a);
      local.push_back(ConvexPolyCone::from_inequalities(n, std::move(act)));
    }
    ConvexPolyCone nc = polar(ConeRep(std::move(local)));
    for (const ConvexPolyCone& f : found)
      if (cone_equal(f, nc)) return;
    found.push_back(std::move(nc));
  };

  std::vector<int> signs(hs.size(), 0);
  auto build = [&](std::size_t upto, Vec* point) {
    LinearProgram lp(n);
    std::fill(lp.free.begin(), lp.free.end(), true);
    for (std::size_t k = 0; k < upto; ++k) {
      if (signs[k] < 0) lp.add(hs[k], Sense::LE, -1);
      if (signs[k] == 0) lp.add(hs[k], Sense::EQ, 0);
      if (signs[k] > 0) lp.add(hs[k], Sense::GE, 1);
    }
    return lp_feasible(lp, point);
  };
  std::function<void(std::size_t)> dfs = [&](std::size_t k) {
    if (k == hs.size()) {
      Vec x;
      if (build(k, &x)) record(x);
      return;
    }
    for (int s : {0, -1, 1}) {
      signs[k] = s;
      if (build(k + 1, nullptr)) dfs(k + 1);
    }
  };
  dfs(0);

  // drop strata cones contained in another one
  std::vector<ConvexPolyCone> out;
  for (std::size_t i = 0; i < found.size(); ++i) {
    bool contained = false;
    for (std::size_t j = 0; j < found.size() && !contained; ++j)
      if (j != i && cone_contains(found[j], found[i]) && !(cone_equal(found[j], found[i]) && j > i))
        contained = true;
    if (!contained) out.push_back(found[i]);
  }
  ConeRep r(std::move(out));
  r.exact = T.exact;
  return r;
}

ConeResult limiting_normal_cone(const SetExpr& s, const Vec& x) {
  ConeResult t = tangent_cone(s, x);
  ConeResult r;
  if (t.exact && structurally_convex(s)) {
    r.cone = ConeRep(polar(t.cone));
    r.method = ConeMethod::ClosedForm;
    return r;
  }
  if (t.exact && structurally_polyhedral(s)) {
    r.cone = normal_cone_of_cone(t.cone);
    r.method = ConeMethod::FaceEnumeration;
    return r;
  }
  OracleOptions opt;
  SampledCone sc = oracle_normal(s, x, opt);
  r.cone = rays_from_samples(s.dim, sc, opt.angular_tolerance_deg);
  r.exact = false;
  r.method = ConeMethod::Sampled;
  r.grid = sc.grid;
  return r;
}

// ---- subdifferentials -------------------------------------------------------

std::optional<std::vector<Vec>> polytope_vertices(const Polyhedron& P) {
  const std::size_t n = P.dim;
  Mat rows;
  for (std::size_t k = 0; k < P.A.size(); ++k) {
    Vec r = P.A[k];
    r.push_back(-P.b[k]);
    rows.push_back(std::move(r));
  }
  rows.push_back(neg(unit(n + 1, n)));
  ConvexPolyCone h = dd_convert(ConvexPolyCone::from_inequalities(n + 1, rows));
  std::vector<Vec> verts;
  bool recession = h.n_lines > 0;
  for (const Vec& r : h.rays()) {
    if (sgn(r[n]) > 0) {
      Vec v(r.begin(), r.begin() + static_cast<long>(n));
      verts.push_back(scale(1 / r[n], v));
    } else {
      recession = true;
    }
  }
  if (verts.empty()) return std::vector<Vec>{};
  if (recession) return std::nullopt;
  std::sort(verts.begin(), verts.end(), lex_less);
  return verts;
}

namespace {

SubdiffResult from_polyhedron(const Polyhedron& P, Flavor flavor) {
  auto verts = polytope_vertices(P);
  if (!verts) throw Unsupported("subdifferential is unbounded");
  SubdiffResult r;
  r.flavor = flavor;
  r.points = *verts;
  if (r.points.empty())
    r.kind = SubdiffResult::Kind::Empty;
  else if (r.points.size() == 1)
    r.kind = SubdiffResult::Kind::Points;
  else
    r.kind = SubdiffResult::Kind::Polytope;
  return r;
}

// {v : sign * (v - grad_p) in polar T(x; R_p) for every active piece p}
Polyhedron regular_subgradients(const AtomFn& atom, const Vec& x, int sign) {
  const std::size_t n = atom.dim;
  Mat A;
  Vec b;
  for (std::size_t p : atom.active_pieces(x)) {
    const AtomPiece& ap = atom.pieces[p];
    Mat act;
    for (std::size_t k : ap.region.active(x)) act.push_back(ap.region.A[k]);
    ConvexPolyCone tp = dd_convert(ConvexPolyCone::from_inequalities(n, std::move(act)));
    Vec grad = ap.f.grad(x);
    // sign*(v - grad) . d <= 0 for each generator d of T_p
    for (const Vec& d : tp.generators) {
      A.push_back(scale(Q(sign), d));
      b.push_back(Q(sign) * dot(grad, d));
    }
  }
  return Polyhedron(n, std::move(A), std::move(b));
}

}  // namespace

SubdiffResult subdifferential(const AtomFn& atom, const Vec& x, Flavor flavor) {
  if (x.size() != atom.dim) throw MalformedInput("subdifferential: dimension mismatch");
  auto act = atom.active_pieces(x);
  if (act.empty()) throw DomainError("atom " + atom.name + " is not defined at " + to_string(x));
  SubdiffResult r;
  r.flavor = flavor;
  switch (flavor) {
    case Flavor::Singular:
      // continuous piecewise polynomials are locally Lipschitz
      r.kind = SubdiffResult::Kind::Points;
      r.points = {zeros(atom.dim)};
      return r;
    case Flavor::Frechet:
      return from_polyhedron(regular_subgradients(atom, x, 1), flavor);
    case Flavor::FrechetUpper:
      return from_polyhedron(regular_subgradients(atom, x, -1), flavor);
    case Flavor::Basic: {
      if (atom.convex) return from_polyhedron(regular_subgradients(atom, x, 1), flavor);
      Vec g = atom.pieces[act[0]].f.grad(x);
      bool smooth = true;
      for (std::size_t p : act) smooth = smooth && atom.pieces[p].f.grad(x) == g;
      r.kind = SubdiffResult::Kind::Points;
      if (smooth) {
        r.points = {g};
        return r;
      }
      // Nonconvex kink: v with (v, -1) in the limiting normal cone to the epigraph.
      Vec xy = x;
      xy.push_back(atom.value(x));
      CoderivativeResult slices = coderivative(*SetExpr::epigraph(atom), atom.dim, xy, Vec{1});
      if (!slices.exact) throw Unsupported("basic subdifferential of " + atom.name + " is not exact");
      for (const Polyhedron& P : slices.slices) {
        auto v = polytope_vertices(P);
        if (!v) throw Unsupported("basic subdifferential of " + atom.name + " is unbounded");
        if (v->size() > 1 && slices.slices.size() > 1)
          throw Unsupported("basic subdifferential of " + atom.name + " is a union of polytopes");
        if (v->size() > 1) r.kind = SubdiffResult::Kind::Polytope;
        for (Vec& p : *v)
          if (std::find(r.points.begin(), r.points.end(), p) == r.points.end()) r.points.push_back(std::move(p));
      }
      std::sort(r.points.begin(), r.points.end());
      if (r.points.empty()) r.kind = SubdiffResult::Kind::Empty;
      return r;
    }
  }
  return r;
}

// ---- coderivative -------------------------------------------------------------

bool CoderivativeResult::contains(const Vec& xs) const {
  return std::any_of(slices.begin(), slices.end(), [&](const Polyhedron& p) { return p.contains(xs); });
}

bool CoderivativeResult::is_origin() const {
  if (slices.empty()) return false;
  for (const Polyhedron& p : slices) {
    auto v = polytope_vertices(p);
    if (!v || v->size() != 1 || !is_zero(v->front())) return false;
  }
  return true;
}

CoderivativeResult coderivative(const SetExpr& graph, std::size_t n, const Vec& xy,
                                const Vec& ystar) {
  if (graph.dim != n + ystar.size() || xy.size() != graph.dim)
    throw MalformedInput("coderivative: dimension mismatch");
  ConeResult N = limiting_normal_cone(graph, xy);
  CoderivativeResult out;
  out.exact = N.exact;
  for (const ConvexPolyCone& c0 : N.cone.pieces) {
    ConvexPolyCone c = dd_convert(c0);
    Mat A;
    Vec b;
    for (const Vec& a : c.inequalities) {
      Vec ax(a.begin(), a.begin() + static_cast<long>(n));
      Vec ay(a.begin() + static_cast<long>(n), a.end());
      // a_x . x* + a_y . (-y*) <= 0
      A.push_back(std::move(ax));
      b.push_back(dot(ay, ystar));
    }
    Polyhedron P(n, std::move(A), std::move(b));
    if (!P.empty()) out.slices.push_back(std::move(P));
  }
  return out;
}

}  // namespace conekit
