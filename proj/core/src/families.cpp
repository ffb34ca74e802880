#include "conekit/families.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "conekit/generators.hpp"
#include "conekit/lp.hpp"
#include "conekit/oracle.hpp"
#include "conekit/pieces.hpp"
#include "conekit/varcalc.hpp"

namespace conekit {

namespace {

FamilyPtr share(const IndexedFamily& f) { return std::make_shared<IndexedFamily>(f); }

// Drop pieces contained in another piece; the union is unchanged.
ConeRep prune(ConeRep c) {
  std::vector<ConvexPolyCone> keep;
  for (std::size_t i = 0; i < c.pieces.size(); ++i) {
    bool drop = false;
    for (std::size_t j = 0; j < c.pieces.size() && !drop; ++j) {
      if (i == j || !cone_contains(c.pieces[j], c.pieces[i])) continue;
      drop = !cone_contains(c.pieces[i], c.pieces[j]) || j < i;
    }
    if (!drop) keep.push_back(c.pieces[i]);
  }
  ConeRep r(std::move(keep));
  r.exact = c.exact;
  return r;
}

ConeRep intersect_all(const std::vector<ConeRep>& cones) {
  std::vector<ConeRep> distinct;
  for (const ConeRep& c : cones)
    if (std::none_of(distinct.begin(), distinct.end(),
                     [&](const ConeRep& d) { return cone_equal(c, d); }))
      distinct.push_back(c);
  ConeRep acc = distinct.front();
  for (std::size_t k = 1; k < distinct.size(); ++k) acc = prune(intersect(acc, distinct[k]));
  return acc;
}

// A direction of `outer` outside `inner`, preferring generators.
std::optional<Vec> gap_direction(const ConeRep& outer, const ConeRep& inner) {
  for (const ConvexPolyCone& p0 : outer.pieces) {
    ConvexPolyCone p = dd_convert(p0);
    for (const Vec& g : p.generators)
      if (!cone_member(inner, g)) return primitive(g);
  }
  for (const ConvexPolyCone& p : outer.pieces)
    if (auto d = uncovered_direction(p, inner)) return primitive(*d);
  return std::nullopt;
}

bool convex_template(const SetTemplate& t) {
  return std::visit(
      [](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TPolySet>) return true;
        else if constexpr (std::is_same_v<T, TLevelSet> || std::is_same_v<T, TEpigraphSet>)
          return n.atom->convex;
        else if constexpr (std::is_same_v<T, TFixedSet>) return structurally_convex(*n.set);
        else return false;
      },
      t.node);
}

bool family_convex(const IndexedFamily& f) {
  if (f.infinite()) return convex_template(*f.tmpl);
  return std::all_of(f.finite.begin(), f.finite.end(),
                     [](const SetPtr& s) { return structurally_convex(*s); });
}

DVec to_d(const Vec& v) {
  DVec d;
  for (const Q& q : v) d.push_back(to_double(q));
  return d;
}

double dnorm(const DVec& a, const DVec& b) {
  double s = 0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(s);
}

double dist_to(const std::vector<BasicPiece>& pieces, const DVec& y) {
  return dnorm(y, approx_projection(pieces, y));
}

std::vector<DVec> grid_directions(std::size_t n, std::size_t dirs2d, unsigned seed) {
  OracleOptions opt;
  opt.directions_2d = dirs2d;
  opt.directions_nd = 200;
  opt.seed = seed;
  return sample_directions(n, opt);
}

// Sample points near x: x + r u and their projections onto each member.
struct Sample {
  DVec p;
  std::size_t radius;
  long owner;  // member index the point was projected onto, or 0
};

std::vector<Sample> regularity_samples(const IndexedFamily& f, const Vec& x,
                                       const std::vector<std::vector<BasicPiece>>& members,
                                       const std::vector<long>& idx, const RegularityGrid& g) {
  std::vector<Sample> out;
  DVec xd = to_d(x);
  auto dirs = grid_directions(f.dim, g.directions, g.seed);
  for (std::size_t r = 0; r < g.radii.size(); ++r)
    for (const DVec& u : dirs) {
      DVec y(xd);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += g.radii[r] * u[k];
      out.push_back({y, r, 0});
      for (std::size_t m = 0; m < members.size(); ++m)
        out.push_back({approx_projection(members[m], y), r, idx[m]});
    }
  return out;
}

}  // namespace

void require_base_point(const IndexedFamily& f, const Vec& x) {
  if (x.size() != f.dim) throw MalformedInput("base point has the wrong dimension");
  for (long i : f.indices(f.policy.K_max))
    if (!member(*f.instantiate(i), x))
      throw DomainError("base point " + to_string(x) + " is not in member " + std::to_string(i) +
                        " of " + f.name);
}

ChipSides chip_sides_at(const IndexedFamily& f, const Vec& x, long K) {
  ChipSides s;
  s.K = f.last_index(K);
  ConeResult lhs = tangent_cone(*SetExpr::truncated(share(f), K), x);
  s.lhs = lhs.cone;
  s.lhs_exact = lhs.exact;
  std::vector<ConeRep> member_cones;
  s.rhs_exact = true;
  for (const SetPtr& m : f.members(K)) {
    ConeResult t = tangent_cone(*m, x);
    s.rhs_exact = s.rhs_exact && t.exact;
    member_cones.push_back(t.cone);
  }
  s.rhs = intersect_all(member_cones);
  s.method = "truncation";
  return s;
}

ChipSides chip_sides(const IndexedFamily& f, const Vec& x) {
  if (!f.infinite()) {
    ChipSides s = chip_sides_at(f, x, 0);
    s.method = "finite-family";
    return s;
  }
  ChipSides s;
  std::string lm, rm;
  if (auto lim = limit_intersection(f)) {
    if (auto t = tangent_from_pieces(*lim, x); t && t->exact) {
      s.lhs = *t;
      s.lhs_exact = true;
      lm = "limit-intersection";
    }
  }
  if (auto ti = limit_tangent_intersection(f, x)) {
    s.rhs = ti->cone;
    s.rhs_exact = true;
    rm = ti->method;
  }
  if (!s.lhs_exact) {
    auto scan = stagnation_scan(
        f, [&](long K) { return tangent_cone(*SetExpr::truncated(share(f), K), x).cone; });
    s.lhs = scan.value;
    s.K = std::max(s.K, scan.K_star);
    lm = "stagnation-scan";
  }
  if (!s.rhs_exact) {
    auto scan = stagnation_scan(f, [&](long K) { return chip_sides_at(f, x, K).rhs; });
    s.rhs = scan.value;
    s.K = std::max(s.K, scan.K_star);
    rm = "stagnation-scan";
  }
  s.method = lm + "/" + rm;
  return s;
}

ChipVerdict chip_check(const IndexedFamily& f, const Vec& x) {
  require_base_point(f, x);
  ChipVerdict v;
  ChipSides s = chip_sides(f, x);
  ChipSides at = f.infinite() ? chip_sides_at(f, x, f.policy.K_init) : s;
  auto gap = gap_direction(s.rhs, s.lhs);
  auto gap_at = gap_direction(at.rhs, at.lhs);
  v.at_truncation = gap_at ? Holds::No : Holds::Yes;
  v.K_used = s.K ? s.K : at.K;
  v.method = s.method;
  if (s.lhs_exact && s.rhs_exact) {
    v.holds = gap ? Holds::No : Holds::Yes;
    v.witness = gap;
    v.exact = true;
    if (f.infinite() && v.holds != v.at_truncation)
      v.note = "the verdict for the first " + std::to_string(at.K) + " members differs";
    return v;
  }
  v.exact = false;
  if (gap) {
    v.holds = Holds::No;
    v.witness = gap;
    v.note = "witness verified at truncation";
    return v;
  }
  for (auto* sufficient : {&chip_via_rank, &invex_chip_check}) {
    ChipVerdict c = sufficient(f, x);
    if (c.holds == Holds::Yes) {
      v.holds = Holds::Yes;
      v.method += "+" + c.method;
      v.exact = c.exact;
      return v;
    }
  }
  v.holds = Holds::Inconclusive;
  v.note = "sides agree at truncation; no sufficient condition certified";
  return v;
}

StrongChipReport asymptotic_strong_chip_check(const IndexedFamily& f, const Vec& x) {
  if (!family_convex(f)) throw Unsupported("asymptotic strong CHIP needs convex members");
  require_base_point(f, x);
  StrongChipReport r;
  ChipSides s = chip_sides(f, x);
  r.lhs = ConeRep(polar(s.lhs));
  r.K_used = s.K;
  bool rhs_exact = false;
  if (auto g = normal_generators(f, x)) {
    HullClosure h = closed_hull(*g, f.policy);
    r.rhs = ConeRep(h.cone);
    r.limit_directions = h.limits;
    rhs_exact = h.exact;
    r.K_used = std::max(r.K_used, f.infinite() ? h.K : 0L);
    r.method = h.exact ? "closed-hull" : "hull-at-truncation";
  } else {
    bool exact = true;
    long K = f.policy.K_init;
    auto cones = member_normal_cones(f, x, K, &exact);
    r.rhs = ConeRep(conic_sum(cones, f.dim));
    r.K_used = std::max(r.K_used, f.last_index(K));
    rhs_exact = exact && !f.infinite();
    r.method = "member-normal-cones";
  }
  r.exact = s.lhs_exact && rhs_exact;
  auto gap = gap_direction(r.lhs, r.rhs);
  if (!gap) gap = gap_direction(r.rhs, r.lhs);
  r.witness = gap;
  if (r.exact)
    r.holds = gap ? Holds::No : Holds::Yes;
  else
    r.holds = Holds::Inconclusive;
  return r;
}

RegularityEstimate linear_regularity_estimate(const IndexedFamily& f, const Vec& x,
                                              const RegularityGrid& grid) {
  RegularityEstimate e;
  e.grid = grid;
  e.K = f.last_index(f.policy.K_init);
  std::vector<long> idx = f.indices(f.policy.K_init);
  std::vector<std::vector<BasicPiece>> members;
  for (long i : idx) members.push_back(compile(*f.instantiate(i)));
  std::vector<BasicPiece> inter = compile(*SetExpr::truncated(share(f), f.policy.K_init));
  e.per_radius.assign(grid.radii.size(), 0.0);
  bool any_informative = false;
  for (const Sample& s : regularity_samples(f, x, members, idx, grid)) {
    double num = dist_to(inter, s.p);
    double den = 0;
    for (const auto& m : members) den = std::max(den, dist_to(m, s.p));
    double ratio = 1.0;  // 0/0 convention
    if (den > 1e-12)
      ratio = num / den, any_informative = true;
    else if (num > 1e-9)
      ratio = num / 1e-12, any_informative = true;
    e.per_radius[s.radius] = std::max(e.per_radius[s.radius], ratio);
    ++e.points;
  }
  e.degenerate = !any_informative;
  e.C_hat = std::max(1.0, *std::max_element(e.per_radius.begin(), e.per_radius.end()));
  e.growing = e.per_radius.size() > 1 && e.per_radius.back() > 2.0 * e.per_radius.front() + 1e-9;
  return e;
}

EquiDirReport equi_dir_diff_check(const IndexedFamily& f, const Vec& x, std::size_t directions,
                                  std::vector<double> t, double tol) {
  EquiDirReport rep;
  rep.t = t;
  rep.tol = tol;
  std::sort(t.begin(), t.end());
  std::vector<long> idx;
  if (!f.infinite()) {
    idx = f.indices(0);
  } else {
    for (long i = f.first_index(); i < f.first_index() + f.policy.K_init; ++i) idx.push_back(i);
    for (long i = 16; i <= f.policy.K_max; i *= 2)
      if (i > idx.back()) idx.push_back(i);
  }
  DVec xd = to_d(x);
  auto dirs = grid_directions(f.dim, directions, 1);
  for (long i : idx) {
    SetPtr m = f.instantiate(i);
    std::vector<BasicPiece> pieces = compile(*m);
    ConeRep T = tangent_cone(*m, x).cone;
    for (const DVec& h : dirs) {
      Vec he;
      for (double c : h) he.emplace_back(c);
      Q best;
      bool first = true;
      for (const ConvexPolyCone& c0 : T.pieces) {
        ConvexPolyCone c = dd_convert(c0);
        Q d2 = squared_distance(Polyhedron(f.dim, c.inequalities, zeros(c.inequalities.size())), he);
        if (first || d2 < best) best = d2, first = false;
      }
      double target = std::sqrt(to_double(best));
      double tmin = t.front();
      DVec y(xd);
      for (std::size_t k = 0; k < y.size(); ++k) y[k] += tmin * h[k];
      double dev = std::abs(dist_to(pieces, y) / tmin - target);
      if (dev > rep.worst) {
        rep.worst = dev;
        rep.worst_direction = h;
        rep.worst_index = i;
      }
    }
  }
  rep.passes = rep.worst <= tol;
  return rep;
}

ChipVerdict chip_via_regularity(const IndexedFamily& f, const Vec& x) {
  ChipVerdict v;
  v.method = "certified-by-sampled-hypothesis";
  v.exact = false;
  RegularityEstimate e = linear_regularity_estimate(f, x);
  EquiDirReport d = equi_dir_diff_check(f, x);
  v.K_used = e.K;
  if (!e.growing && d.passes) {
    v.holds = Holds::Yes;
    v.note = "linear regularity bound " + std::to_string(e.C_hat);
  } else {
    v.holds = Holds::Inconclusive;
    v.note = e.growing ? "regularity ratio grows" : "equi-directional differentiability fails";
  }
  v.at_truncation = v.holds;
  return v;
}

namespace {

// Piece containment P in Q for polyhedral pieces, by LP.
bool piece_within(const BasicPiece& p, const BasicPiece& q) {
  if (!p.polyhedral() || !q.polyhedral()) return false;
  for (std::size_t r = 0; r < q.A.size(); ++r) {
    LinearProgram lp(p.dim);
    std::fill(lp.free.begin(), lp.free.end(), true);
    lp.objective = q.A[r];
    for (std::size_t k = 0; k < p.A.size(); ++k) lp.add(p.A[k], Sense::LE, p.b[k]);
    LPResult res = solve_lp(lp);
    if (res.status == LPStatus::Unbounded) return false;
    if (res.status == LPStatus::Optimal && res.value > q.b[r]) return false;
  }
  return true;
}

bool set_within(const std::vector<BasicPiece>& a, const std::vector<BasicPiece>& b) {
  return std::all_of(a.begin(), a.end(), [&](const BasicPiece& p) {
    return std::any_of(b.begin(), b.end(), [&](const BasicPiece& q) { return piece_within(p, q); });
  });
}

bool is_singleton(const std::vector<BasicPiece>& pieces, const Vec& x) {
  if (pieces.empty()) return false;
  for (const BasicPiece& p : pieces) {
    if (!p.polyhedral()) return false;
    auto v = polytope_vertices(p.linear_part());
    if (!v || v->size() != 1 || v->front() != x) return false;
  }
  return true;
}

}  // namespace

RankReport tangential_rank(const IndexedFamily& f, const Vec& x, const RegularityGrid& grid) {
  require_base_point(f, x);
  RankReport r;
  r.K = f.last_index(f.policy.K_init);
  std::vector<long> idx = f.indices(f.policy.K_init);
  std::vector<std::vector<BasicPiece>> members;
  for (long i : idx) members.push_back(compile(*f.instantiate(i)));
  std::optional<std::vector<BasicPiece>> whole;
  if (f.infinite()) whole = limit_intersection(f);
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (is_singleton(members[m], x)) {
      r.exact_zero = true;
      r.index = idx[m];
      r.certificate = "member " + std::to_string(idx[m]) + " is the base point";
      return r;
    }
    bool inside = false;
    if (whole) {
      inside = set_within(members[m], *whole);
    } else if (!f.infinite()) {
      inside = std::all_of(members.begin(), members.end(),
                           [&](const auto& o) { return set_within(members[m], o); });
    }
    if (inside) {
      r.exact_zero = true;
      r.index = idx[m];
      r.certificate = "member " + std::to_string(idx[m]) + " lies in the intersection";
      return r;
    }
  }
  // sampled limsup of dist(y; intersection) / |y - x| over y in each member
  std::vector<BasicPiece> inter = whole ? *whole : compile(*SetExpr::truncated(share(f), f.policy.K_init));
  DVec xd = to_d(x);
  r.rho = std::numeric_limits<double>::infinity();
  std::size_t last = grid.radii.size() - 1;
  for (std::size_t m = 0; m < members.size(); ++m) {
    double sup = 0;
    for (const Sample& s : regularity_samples(f, x, {members[m]}, {idx[m]}, grid)) {
      if (s.owner == 0 || s.radius != last) continue;
      double d = dnorm(s.p, xd);
      if (d < 1e-12) continue;
      sup = std::max(sup, dist_to(inter, s.p) / d);
    }
    if (sup < r.rho) r.rho = sup, r.index = idx[m];
  }
  return r;
}

ChipVerdict chip_via_rank(const IndexedFamily& f, const Vec& x) {
  ChipVerdict v;
  RankReport r = tangential_rank(f, x);
  v.method = "tangential-rank";
  v.K_used = r.K;
  if (r.exact_zero) {
    v.holds = Holds::Yes;
    v.note = r.certificate;
  } else {
    v.holds = Holds::Inconclusive;
    v.exact = false;
    v.note = "sampled rank " + std::to_string(r.rho);
  }
  v.at_truncation = v.holds;
  return v;
}

namespace {

// Tri-state: 1 = boundary of the complement member, 0 = interior, -1 = neither.
int complement_position(const Polyhedron& P, const Vec& x) {
  if (!P.contains(x)) return 0;  // x is interior to the closed complement
  return P.active(x).empty() ? -1 : 1;
}

bool interior_by_pieces(const SetExpr& s, const Vec& x) {
  for (const BasicPiece& p : compile(s)) {
    bool strict = true;
    for (std::size_t k = 0; k < p.A.size() && strict; ++k) strict = dot(p.A[k], x) < p.b[k];
    for (const QuadFn& q : p.quads)
      if (strict) strict = q.eval(x) < 0;
    if (strict) return true;
  }
  return false;
}

}  // namespace

ChipVerdict invex_chip_check(const IndexedFamily& f, const Vec& x) {
  ChipVerdict v;
  v.method = "invex";
  v.at_truncation = Holds::NotApplicable;
  std::size_t in_J = 0;
  auto reject = [&](std::string why) {
    v.holds = Holds::NotApplicable;
    v.note = std::move(why);
    return v;
  };
  if (f.infinite()) {
    const SetTemplate& t = *f.tmpl;
    const long i0 = f.first_index();
    v.K_used = f.policy.K_max;
    if (const auto* tc = std::get_if<TComplementSet>(&t.node)) {
      bool inside = true, some_active = false;
      for (std::size_t k = 0; k < tc->P.A.size(); ++k) {
        SignPattern s = (tdot(tc->P.A[k], x) - tc->P.b[k]).sign_from(i0);
        inside = inside && s.nonpositive;
        some_active = some_active || s.zero;
      }
      if (inside && some_active) {
        v.holds = Holds::Yes;
        v.note = "base point on every member boundary";
        v.at_truncation = Holds::Yes;
        return v;
      }
      return reject("base point is not on every member boundary");
    }
    if (const auto* tp = std::get_if<TPolySet>(&t.node)) {
      for (std::size_t k = 0; k < tp->P.A.size(); ++k)
        if (!(tdot(tp->P.A[k], x) - tp->P.b[k]).sign_from(i0).negative)
          return reject("base point not interior to every member");
      v.holds = v.at_truncation = Holds::Yes;
      v.note = "base point interior to every member";
      return v;
    }
    // other templates: check instances up to K_max
    v.exact = false;
    for (long i : f.indices(f.policy.K_max))
      if (!interior_by_pieces(*f.instantiate(i), x))
        return reject("base point not interior to member " + std::to_string(i));
    v.holds = v.at_truncation = Holds::Yes;
    v.note = "interiority verified up to K_max";
    return v;
  }
  v.K_used = f.last_index(0);
  for (const SetPtr& m : f.finite) {
    if (const auto* c = std::get_if<ComplementSet>(&m->node)) {
      int pos = complement_position(c->P, x);
      if (pos < 0) return reject("base point interior to a removed open set");
      in_J += pos == 1;
      continue;
    }
    if (!interior_by_pieces(*m, x)) return reject("member neither invex-type nor has x interior");
  }
  v.holds = v.at_truncation = Holds::Yes;
  v.note = std::to_string(in_J) + " complement members with x on the boundary";
  return v;
}

bool invex_lemma_check(const SetExpr& A, const Vec& x) {
  ConeResult T = tangent_cone(A, x);
  for (const ConvexPolyCone& c0 : T.cone.pieces) {
    ConvexPolyCone c = dd_convert(c0);
    for (const Vec& g : c.generators)
      for (const Q& t : {Q(1, 4), Q(1), Q(4)})
        if (!member(A, add(x, scale(t, g)))) return false;
  }
  return true;
}

}  // namespace conekit
