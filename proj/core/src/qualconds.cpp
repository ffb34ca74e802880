#include "conekit/qualconds.hpp"

#include <algorithm>
#include <cmath>

#include "conekit/families.hpp"
#include "conekit/generators.hpp"
#include "conekit/lp.hpp"
#include "conekit/oracle.hpp"
#include "conekit/pieces.hpp"
#include "conekit/varcalc.hpp"

namespace conekit {

namespace {

constexpr std::size_t kMaxSelections = 4096;

std::vector<ConeRep> member_normals(const IndexedFamily& f, const Vec& x, long K, bool* exact) {
  std::vector<ConeRep> out;
  for (const SetPtr& m : f.members(K)) {
    ConeResult r = limiting_normal_cone(*m, x);
    *exact = *exact && r.exact;
    out.push_back(r.cone);
  }
  return out;
}

// Tries every choice of one convex piece per member.
std::optional<std::vector<Vec>> vanishing_over_unions(const std::vector<ConeRep>& reps) {
  std::size_t total = 1;
  for (const ConeRep& r : reps) {
    total *= r.pieces.size();
    if (total > kMaxSelections) throw Unsupported("too many normal-cone piece selections");
  }
  std::vector<std::size_t> pick(reps.size(), 0);
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rest = s;
    std::vector<ConvexPolyCone> sel;
    for (std::size_t m = 0; m < reps.size(); ++m) {
      sel.push_back(reps[m].pieces[rest % reps[m].pieces.size()]);
      rest /= reps[m].pieces.size();
    }
    if (auto c = vanishing_combination(sel)) return c;
  }
  return std::nullopt;
}

bool sums_to_zero(const std::vector<Vec>& xs, std::size_t n) {
  Vec s = zeros(n);
  for (const Vec& v : xs) s = add(s, v);
  return is_zero(s);
}

// 0 in conv(points), exactly.
constexpr std::size_t kMaxSubgradientChoices = 1024;

bool zero_in_hull(const std::vector<Vec>& pts, std::size_t n) {
  if (pts.empty()) return false;
  LinearProgram lp(pts.size());
  for (std::size_t r = 0; r < n; ++r) {
    Vec row;
    for (const Vec& p : pts) row.push_back(p[r]);
    lp.add(std::move(row), Sense::EQ, 0);
  }
  lp.add(Vec(pts.size(), Q(1)), Sense::EQ, 1);
  return lp_feasible(lp);
}

Vec exact_of(const std::vector<double>& v) {
  Vec r;
  for (double d : v) r.emplace_back(d);
  return r;
}

bool strictly_inside(const BasicPiece& p, const Vec& w) {
  for (std::size_t k = 0; k < p.A.size(); ++k)
    if (!(dot(p.A[k], w) < p.b[k])) return false;
  for (const QuadFn& q : p.quads)
    if (!(q.eval(w) < 0)) return false;
  return true;
}

}  // namespace

QCVerdict nqc_check(const IndexedFamily& f, const Vec& x) {
  require_base_point(f, x);
  QCVerdict v;
  v.condition = "NQC";
  const long K = f.policy.K_init;
  v.K_used = f.last_index(K);
  bool exact = true;
  auto reps = member_normals(f, x, K, &exact);
  v.exact = exact;
  if (auto c = vanishing_over_unions(reps)) {
    if (!sums_to_zero(*c, f.dim)) throw std::logic_error("nqc: witness does not sum to zero");
    v.holds = Holds::No;
    v.combination = *c;
    v.method = "vanishing-combination";
    return v;
  }
  if (!f.infinite()) {
    v.holds = Holds::Yes;
    v.method = "finite-family";
    return v;
  }
  auto g = normal_generators(f, x);
  if (g && g->constant()) {
    v.holds = Holds::Yes;
    v.method = "constant-templates";
    return v;
  }
  if (g) {
    if (auto y = strict_separator(*g, K)) {
      v.holds = Holds::Yes;
      v.method = "strict-separator";
      v.certificate_point = y;
      return v;
    }
  }
  v.holds = Holds::Inconclusive;
  v.method = "truncation";
  return v;
}

QCVerdict conic_qc_check(const std::vector<ConvexPolyCone>& cones) {
  QCVerdict v;
  v.condition = "conic-QC";
  v.K_used = static_cast<long>(cones.size());
  std::vector<ConvexPolyCone> normals;
  for (const ConvexPolyCone& c : cones) normals.push_back(polar(c));
  v.method = "vanishing-combination";
  if (auto c = vanishing_combination(normals)) {
    v.holds = Holds::No;
    v.combination = *c;
  } else {
    v.holds = Holds::Yes;
  }
  return v;
}

QCVerdict interior_point_nqc(const IndexedFamily& f, const Vec& x) {
  require_base_point(f, x);
  QCVerdict v;
  v.condition = "interior-point";
  v.method = "slack-maximization";
  const std::size_t n = f.dim;
  auto inconclusive = [&](std::string why) {
    v.holds = Holds::Inconclusive;
    v.note = std::move(why);
    return v;
  };

  if (f.infinite()) {
    const auto* tp = std::get_if<TPolySet>(&f.tmpl->node);
    if (!tp) return inconclusive("only polyhedral templates are searched");
    const long K = f.policy.K_init;
    v.K_used = f.last_index(K);
    LinearProgram lp(n + 1);
    std::fill(lp.free.begin(), lp.free.end(), true);
    lp.objective = unit(n + 1, n);
    for (long i : f.indices(K)) {
      Polyhedron P = tp->P.at(i);
      for (std::size_t k = 0; k < P.A.size(); ++k) {
        Vec row = P.A[k];
        row.push_back(1);
        lp.add(std::move(row), Sense::LE, P.b[k]);
      }
    }
    lp.add(unit(n + 1, n), Sense::LE, 1);
    LPResult res = solve_lp(lp);
    if (res.status != LPStatus::Optimal || res.value <= 0) return inconclusive("no common strict point");
    Vec w(res.x.begin(), res.x.begin() + static_cast<long>(n));
    for (std::size_t k = 0; k < tp->P.A.size(); ++k)
      if (!(tdot(tp->P.A[k], w) - tp->P.b[k]).sign_from(f.first_index()).negative)
        return inconclusive("strict point found at truncation fails for later members");
    v.holds = Holds::Yes;
    v.certificate_point = w;
    v.note = "strictly feasible for every member";
    return v;
  }

  std::vector<BasicPiece> members;
  for (const SetPtr& m : f.finite) {
    if (!structurally_convex(*m)) throw Unsupported("interior-point condition needs convex members");
    auto ps = compile(*m);
    if (ps.size() != 1) return inconclusive("a member is not a single convex piece");
    members.push_back(ps.front());
  }
  v.K_used = static_cast<long>(members.size());
  for (std::size_t i0 = 0; i0 < members.size(); ++i0) {
    ConvexProblem prob;
    prob.n = n + 1;
    prob.objective.g.assign(n + 1, 0.0);
    prob.objective.g[n] = -1.0;
    for (std::size_t m = 0; m < members.size(); ++m) {
      double slack = m == i0 ? 0.0 : 1.0;
      const BasicPiece& p = members[m];
      for (std::size_t k = 0; k < p.A.size(); ++k) {
        QuadForm q;
        for (const Q& a : p.A[k]) q.g.push_back(to_double(a));
        q.g.push_back(slack);
        q.c = -to_double(p.b[k]);
        prob.constraints.push_back(q);
      }
      for (const QuadFn& qf : p.quads) {
        QuadForm q = qf.widen(n + 1).to_double();
        q.g[n] = slack;
        prob.constraints.push_back(q);
      }
    }
    QuadForm cap;
    cap.g.assign(n + 1, 0.0);
    cap.g[n] = 1.0;
    cap.c = -1.0;
    prob.constraints.push_back(cap);
    ConvexSolution sol = minimize_convex(prob);
    if (!sol.feasible || -sol.value <= 1e-9) continue;
    Vec w = exact_of(std::vector<double>(sol.x.begin(), sol.x.begin() + static_cast<long>(n)));
    if (!members[i0].contains(w)) continue;
    bool ok = true;
    for (std::size_t m = 0; m < members.size() && ok; ++m)
      if (m != i0) ok = strictly_inside(members[m], w);
    if (ok) {
      v.holds = Holds::Yes;
      v.certificate_point = w;
      v.note = "point of member " + std::to_string(i0 + 1) + " strictly inside the others";
      return v;
    }
  }
  return inconclusive("no point of one member strictly inside the others");
}

QCVerdict ncc_check(const IndexedFamily& f, const Vec& x) {
  require_base_point(f, x);
  if (auto g = normal_generators(f, x)) return closedness_check("NCC", *g, f.policy);
  QCVerdict v;
  v.condition = "NCC";
  v.holds = Holds::Inconclusive;
  v.method = "no-closed-form-normals";
  v.exact = false;
  return v;
}

QCVerdict scc_check(const IndexedFamily& ineq, const Vec& x) {
  require_base_point(ineq, x);
  if (auto g = subgradient_generators(ineq, x)) return closedness_check("SCC", *g, ineq.policy);
  QCVerdict v;
  v.condition = "SCC";
  v.holds = Holds::Inconclusive;
  v.method = "no-closed-form-subgradients";
  v.exact = false;
  return v;
}

QCVerdict sqc_check(const IndexedFamily& ineq, const Vec& x) {
  require_base_point(ineq, x);
  QCVerdict v;
  v.condition = "SQC";
  const long K = ineq.policy.K_init;
  v.K_used = ineq.last_index(K);
  // Per active constraint, the cones lambda * d(phi_i): one cone for a convex
  // subdifferential, one ray per point when it is a finite nonconvex set.
  std::vector<std::vector<ConvexPolyCone>> options;
  std::size_t combos = 1;
  for (long i : ineq.indices(K)) {
    AtomFn a = member_atom(ineq, i);
    if (!a.lipschitz_near(x)) throw Unsupported("SQC needs locally Lipschitz constraints");
    if (sgn(a.value(x)) != 0) continue;  // inactive: multiplier must vanish
    SubdiffResult sd = subdifferential(a, x, Flavor::Basic);
    const bool finite_set = sd.kind == SubdiffResult::Kind::Points;
    const bool zero = finite_set ? std::any_of(sd.points.begin(), sd.points.end(), [](const Vec& p) { return is_zero(p); })
                                 : zero_in_hull(sd.points, ineq.dim);
    if (zero) {
      v.holds = Holds::No;
      v.method = "zero-subgradient";
      v.note = "0 is a subgradient of active constraint " + std::to_string(i);
      v.combination = {zeros(ineq.dim)};
      return v;
    }
    std::vector<ConvexPolyCone> alt;
    if (finite_set)
      for (const Vec& p : sd.points) alt.push_back(dd_convert(ConvexPolyCone::from_generators(ineq.dim, {p})));
    else
      alt.push_back(dd_convert(ConvexPolyCone::from_generators(ineq.dim, sd.points)));
    combos *= alt.size();
    if (combos > kMaxSubgradientChoices) throw Unsupported("SQC: too many subgradient choices");
    options.push_back(std::move(alt));
  }
  for (std::size_t c = 0; c < combos; ++c) {
    std::vector<ConvexPolyCone> cones;
    for (std::size_t j = 0, rest = c; j < options.size(); ++j) {
      cones.push_back(options[j][rest % options[j].size()]);
      rest /= options[j].size();
    }
    if (auto comb = vanishing_combination(cones)) {
      v.holds = Holds::No;
      v.combination = *comb;
      v.method = "vanishing-combination";
      return v;
    }
  }
  v.method = "vanishing-combination";
  if (!ineq.infinite()) {
    v.holds = Holds::Yes;
    return v;
  }
  auto g = subgradient_generators(ineq, x);
  if (g && g->constant()) {
    v.holds = Holds::Yes;
    v.method = "constant-templates";
    return v;
  }
  if (g)
    if (auto y = strict_separator(*g, K)) {
      v.holds = Holds::Yes;
      v.method = "strict-separator";
      v.certificate_point = y;
      return v;
    }
  v.holds = Holds::Inconclusive;
  return v;
}

// ---- conjugate closedness ---------------------------------------------------

namespace {

struct ConjData {
  bool templated = false;
  std::vector<Conjugate> finite;        // finite families
  std::optional<ConjugateT> tmpl;       // templated families
  long first = 1;
};

ConjData conjugates(const IndexedFamily& f) {
  ConjData d;
  if (f.infinite()) {
    auto atom = f.level_atom_template();
    if (!atom || !atom->conjugate) throw Unsupported("family " + f.name + " has no conjugate data");
    if (!atom->convex) throw Unsupported("conjugate closedness needs convex constraints");
    d.templated = true;
    d.tmpl = *atom->conjugate;
    d.first = f.first_index();
    return d;
  }
  for (long i : f.indices(0)) {
    AtomFn a = member_atom(f, i);
    if (!a.conjugate) throw Unsupported("constraint " + a.name + " has no conjugate data");
    d.finite.push_back(*a.conjugate);
  }
  return d;
}

bool affine_valued(const QuadFn& q) { return q.is_affine(); }

// Candidate dual points y in the domain for every index, on a small grid.
std::vector<Vec> domain_grid(const PolyhedronT& D, long i0, std::size_t n) {
  std::vector<Vec> out;
  std::vector<int> c(n, -3);
  while (true) {
    Vec y;
    for (int k : c) y.emplace_back(k);
    bool in = true;
    for (std::size_t r = 0; r < D.A.size() && in; ++r)
      in = (tdot(D.A[r], y) - D.b[r]).sign_from(i0).nonpositive;
    if (in) out.push_back(y);
    std::size_t k = 0;
    while (k < n && ++c[k] > 3) c[k++] = -3;
    if (k == n) break;
  }
  // small norms first
  std::stable_sort(out.begin(), out.end(), [](const Vec& a, const Vec& b) { return norm2(a) < norm2(b); });
  return out;
}

// Limits d = (y, lim phi_i*(y)) of conjugate-epigraph points that move with i.
std::vector<Vec> limit_candidates(const ConjugateT& c, long i0, std::size_t n) {
  std::vector<Vec> out;
  for (const Vec& y : domain_grid(c.domain, i0, n)) {
    RatFunc val = value_template(c.value, y);
    if (val.is_constant()) continue;
    auto o = val.order();
    if (!o || *o > 0) continue;
    Q lim = *o == 0 ? val.leading_ratio() : Q(0);
    Vec d = y;
    d.push_back(lim);
    out.push_back(std::move(d));
  }
  return out;
}

// Domains that pin every coordinate to p_k(i) by a pair of opposite rows give
// the moving point (p(i), phi_i*(p(i))); its limit direction is a candidate.
std::optional<Vec> pinned_limit(const ConjugateT& c, std::size_t n) {
  const PolyhedronT& D = c.domain;
  TVec p(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::optional<RatFunc> up, down;
    for (std::size_t r = 0; r < D.A.size(); ++r) {
      if (!tvec_constant(D.A[r])) continue;
      Vec a = eval_tvec(D.A[r], 1);
      if (a == unit(n, k)) up = D.b[r];
      if (a == neg(unit(n, k))) down = D.b[r];
    }
    if (!up || !down || !(*up + *down).num().is_zero()) return std::nullopt;
    p[k] = *up;
  }
  RatFunc val = c.value.c;
  for (std::size_t k = 0; k < n; ++k) val = val + c.value.g[k] * p[k];
  if (!c.value.H.empty())
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t l = 0; l < n; ++l) val = val + c.value.H[k][l] * p[k] * p[l];
  TVec e = p;
  e.push_back(val);
  if (tvec_constant(e)) return std::nullopt;
  auto d = limit_direction(e);
  if (!d) return std::nullopt;
  return *d;
}

// Exact search for polyhedral truncations: maximize <x, y> - phi(x) over the
// members within the unit box around base.
std::optional<Vec> separating_point_lp(const std::vector<SetPtr>& members, const Vec& y,
                                       const Q& r, const AtomFn* phi, const Vec& base) {
  const std::size_t n = base.size();
  if (phi && !phi->is_affine()) return std::nullopt;
  std::vector<BasicPiece> rows;
  for (const SetPtr& m : members) {
    auto pieces = compile(*m);
    if (pieces.size() != 1 || !pieces.front().polyhedral()) return std::nullopt;
    rows.push_back(pieces.front());
  }
  Q c0 = 0;
  Vec obj = y;
  if (phi) {
    obj = sub(y, phi->pieces.front().f.g);
    c0 = phi->pieces.front().f.c;
  }
  // Constraint generation: start from the last member, add violated ones.
  std::vector<bool> used(rows.size(), false);
  if (!rows.empty()) used.back() = true;
  for (std::size_t round = 0; round <= rows.size(); ++round) {
    LinearProgram lp(n);
    lp.free.assign(n, true);
    for (std::size_t m = 0; m < rows.size(); ++m) {
      if (!used[m]) continue;
      for (std::size_t k = 0; k < rows[m].A.size(); ++k) lp.add(rows[m].A[k], Sense::LE, rows[m].b[k]);
    }
    for (std::size_t j = 0; j < n; ++j) {
      lp.add(unit(n, j), Sense::LE, base[j] + 1);
      lp.add(unit(n, j), Sense::GE, base[j] - 1);
    }
    lp.objective = obj;
    LPResult res = solve_lp(lp);
    if (res.status != LPStatus::Optimal || !(res.value - c0 > r)) return std::nullopt;
    bool added = false;
    for (std::size_t m = 0; m < rows.size(); ++m) {
      if (used[m] || rows[m].contains(res.x)) continue;
      used[m] = true;
      added = true;
    }
    if (!added) return res.x;
  }
  return std::nullopt;
}

// Searches x in the first K members with <x, y_d> - r_d > phi(x) (phi = 0 for FMCQ).
std::optional<Vec> separating_point(const std::vector<SetPtr>& members, const Vec& d,
                                    const AtomFn* phi, const Vec& base) {
  const std::size_t n = base.size();
  Vec y(d.begin(), d.begin() + static_cast<long>(n));
  const Q r = d[n];
  if (auto x = separating_point_lp(members, y, r, phi, base)) return x;
  OracleOptions opt;
  auto dirs = sample_directions(n, opt);
  for (int k = 0; k <= 40; ++k) {
    Q t(1);
    t /= Q(mpz_class(1) << k);
    for (const auto& u : dirs) {
      Vec x = base;
      for (std::size_t j = 0; j < n; ++j) x[j] += t * Q(u[j]);
      Q lhs = dot(x, y) - r;
      Q rhs = 0;
      if (phi) {
        try {
          rhs = phi->value(x);
        } catch (const DomainError&) {
          continue;
        }
      }
      if (!(lhs > rhs)) continue;
      // later members tend to be tighter
      bool in = std::all_of(members.rbegin(), members.rend(),
                            [&](const SetPtr& m) { return member(*m, x); });
      if (in) return x;
    }
  }
  return std::nullopt;
}

QCVerdict conjugate_closedness(std::string name, const IndexedFamily& f, const AtomFn* phi) {
  QCVerdict v;
  v.condition = std::move(name);
  ConjData cd = conjugates(f);
  std::optional<Conjugate> phic;
  if (phi) {
    if (!phi->conjugate) throw Unsupported("objective " + phi->name + " has no conjugate data");
    phic = phi->conjugate;
  }
  if (!cd.templated) {
    bool polyhedral = std::all_of(cd.finite.begin(), cd.finite.end(),
                                  [](const Conjugate& c) { return affine_valued(c.value); });
    if (phic) polyhedral = polyhedral && affine_valued(phic->value);
    v.holds = polyhedral ? Holds::Yes : Holds::Inconclusive;
    v.method = polyhedral ? "polyhedral-epigraphs" : "finite-nonpolyhedral";
    v.K_used = static_cast<long>(cd.finite.size());
    return v;
  }
  const std::size_t n = f.dim;
  auto cands = limit_candidates(*cd.tmpl, cd.first, n);
  if (auto d = pinned_limit(*cd.tmpl, n)) cands.push_back(*d);
  if (cands.empty()) {
    v.holds = Holds::Inconclusive;
    v.method = "no-moving-generators";
    return v;
  }
  // shift by a point of epi phi* for the objective
  Vec shift = zeros(n + 1);
  if (phic) {
    std::vector<Vec> pts;
    auto vs = polytope_vertices(phic->domain);
    if (vs && !vs->empty()) pts = *vs;
    if (pts.empty()) {
      PolyhedronT dt;
      dt.dim = n;
      for (std::size_t k = 0; k < phic->domain.A.size(); ++k) {
        dt.A.push_back(constant_tvec(phic->domain.A[k]));
        dt.b.push_back(RatFunc(phic->domain.b[k]));
      }
      pts = domain_grid(dt, 1, n);
    }
    if (pts.empty()) throw Unsupported("objective conjugate has an empty sampled domain");
    shift = pts.front();
    shift.push_back(phic->value.eval(pts.front()));
  }
  const long K = f.policy.K_max;
  std::vector<SetPtr> members = f.members(K);
  Vec base = f.base_point ? *f.base_point : zeros(n);
  for (const Vec& c : cands) {
    Vec d = add(c, shift);
    if (auto x = separating_point(members, d, phi, base)) {
      v.holds = Holds::No;
      v.witness = d;
      v.certificate_point = x;
      v.K_used = f.last_index(K);
      v.method = "limit-point-separated";
      v.note = "d is a limit of epigraph points and is strictly separated from the hull of the first " +
               std::to_string(members.size()) + " members";
      return v;
    }
  }
  v.holds = Holds::Inconclusive;
  v.K_used = f.last_index(K);
  v.method = "limit-point-separated";
  v.note = "no separating point found";
  return v;
}

}  // namespace

QCVerdict fmcq_check(const IndexedFamily& ineq) { return conjugate_closedness("FMCQ", ineq, nullptr); }

QCVerdict cqc_check(const AtomFn& phi, const IndexedFamily& ineq) {
  QCVerdict fm = fmcq_check(ineq);
  if (fm.holds == Holds::Yes && phi.conjugate && affine_valued(phi.conjugate->value)) {
    fm.condition = "CQC";
    fm.method = "implied-by-FMCQ";
    return fm;
  }
  return conjugate_closedness("CQC", ineq, &phi);
}

}  // namespace conekit
