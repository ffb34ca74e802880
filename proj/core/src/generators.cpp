#include "conekit/generators.hpp"

#include <algorithm>

#include "conekit/lp.hpp"
#include "conekit/varcalc.hpp"

namespace conekit {

bool GeneratorFamily::constant() const {
  return std::all_of(templates.begin(), templates.end(),
                     [](const GeneratorTemplate& t) { return tvec_constant(t.v); });
}

std::vector<Vec> GeneratorFamily::at(long K) const {
  std::vector<Vec> out = fixed;
  for (const GeneratorTemplate& t : templates) {
    if (tvec_constant(t.v)) {
      out.push_back(eval_tvec(t.v, t.from));
      continue;
    }
    for (long i = t.from; i <= K; ++i) out.push_back(eval_tvec(t.v, i));
  }
  return out;
}

std::vector<Vec> GeneratorFamily::limit_directions() const {
  std::vector<Vec> out;
  for (const GeneratorTemplate& t : templates) {
    if (tvec_constant(t.v)) continue;
    auto d = limit_direction(t.v);
    if (d && std::find(out.begin(), out.end(), *d) == out.end()) out.push_back(*d);
  }
  return out;
}

bool GeneratorFamily::tail_in(const ConvexPolyCone& c0, long K) const {
  ConvexPolyCone c = dd_convert(c0);
  for (const GeneratorTemplate& t : templates) {
    if (tvec_constant(t.v)) {
      if (!cone_member(c, eval_tvec(t.v, t.from))) return false;
      continue;
    }
    for (const Vec& h : c.inequalities) {
      SignPattern s = tdot(t.v, h).sign_from(std::max(K + 1, t.from));
      if (!s.nonpositive) return false;
    }
  }
  return true;
}

std::optional<std::vector<Q>> conic_combination(const std::vector<Vec>& gens, const Vec& d) {
  const std::size_t n = d.size();
  if (is_zero(d)) return std::vector<Q>(gens.size(), Q(0));
  if (gens.empty()) return std::nullopt;
  LinearProgram lp(gens.size());
  for (std::size_t r = 0; r < n; ++r) {
    Vec row;
    for (const Vec& g : gens) row.push_back(g[r]);
    lp.add(std::move(row), Sense::EQ, d[r]);
  }
  Vec mu;
  if (!lp_feasible(lp, &mu)) return std::nullopt;
  return std::vector<Q>(mu.begin(), mu.end());
}

std::vector<long> tested_levels(const TruncationPolicy& p) {
  std::vector<long> out;
  for (long K = std::max(1L, p.K_init); K < p.K_max; K *= 2) out.push_back(K);
  out.push_back(p.K_max);
  return out;
}

namespace {

ConvexPolyCone hull_of(std::size_t n, std::vector<Vec> gens) {
  return dd_convert(ConvexPolyCone::from_generators(n, std::move(gens)));
}

}  // namespace

HullClosure closed_hull(const GeneratorFamily& g, const TruncationPolicy& p) {
  HullClosure h;
  h.limits = g.limit_directions();
  for (long K : tested_levels(p)) {
    std::vector<Vec> gens = g.at(K);
    gens.insert(gens.end(), h.limits.begin(), h.limits.end());
    h.cone = hull_of(g.dim, std::move(gens));
    h.K = K;
    h.exact = g.finite() || g.constant() || g.tail_in(h.cone, K);
    if (h.exact) break;
  }
  return h;
}

QCVerdict closedness_check(std::string condition, const GeneratorFamily& g,
                           const TruncationPolicy& p) {
  QCVerdict v;
  v.condition = std::move(condition);
  if (g.finite() || g.constant()) {
    v.holds = Holds::Yes;
    v.method = g.finite() ? "finitely-generated" : "constant-templates";
    return v;
  }
  const std::vector<long> levels = tested_levels(p);
  const std::vector<Vec> limits = g.limit_directions();
  for (const Vec& d : limits) {
    bool outside_everywhere = true;
    for (long K : levels)
      if (conic_combination(g.at(K), d)) {
        outside_everywhere = false;
        break;
      }
    if (outside_everywhere) {
      v.holds = Holds::No;
      v.witness = d;
      v.K_used = levels.back();
      v.method = "limit-direction-outside-hull";
      v.note = "non-membership verified at K = " + std::to_string(levels.front()) + ".." +
               std::to_string(levels.back());
      return v;
    }
  }
  for (long K : levels) {
    std::vector<Vec> gens = g.at(K);
    bool absorbs = std::all_of(limits.begin(), limits.end(),
                               [&](const Vec& d) { return conic_combination(gens, d).has_value(); });
    if (absorbs && g.tail_in(hull_of(g.dim, gens), K)) {
      v.holds = Holds::Yes;
      v.K_used = K;
      v.method = "tail-certified";
      return v;
    }
  }
  v.holds = Holds::Inconclusive;
  v.K_used = levels.back();
  v.method = "limit-directions";
  return v;
}

std::optional<std::vector<Vec>> vanishing_combination(const std::vector<ConvexPolyCone>& cones) {
  if (cones.empty()) return std::nullopt;
  const std::size_t n = cones.front().dim;
  struct Col {
    std::size_t member;
    Vec v;
    bool line;
  };
  std::vector<Col> cols;
  for (std::size_t m = 0; m < cones.size(); ++m) {
    ConvexPolyCone c = dd_convert(cones[m]);
    for (const Vec& l : c.lines()) cols.push_back({m, l, true});
    for (const Vec& r : c.rays()) cols.push_back({m, r, false});
  }
  auto assemble = [&](const Vec& coef) {
    std::vector<Vec> xs(cones.size(), zeros(n));
    for (std::size_t k = 0; k < cols.size(); ++k)
      xs[cols[k].member] = add(xs[cols[k].member], scale(coef[k], cols[k].v));
    return xs;
  };

  // rays carry positive weight
  LinearProgram lp(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) lp.free[k] = cols[k].line;
  for (std::size_t r = 0; r < n; ++r) {
    Vec row;
    for (const Col& c : cols) row.push_back(c.v[r]);
    lp.add(std::move(row), Sense::EQ, 0);
  }
  Vec sel;
  for (const Col& c : cols) sel.push_back(c.line ? Q(0) : Q(1));
  bool any_ray = std::any_of(cols.begin(), cols.end(), [](const Col& c) { return !c.line; });
  if (any_ray) {
    lp.add(sel, Sense::EQ, 1);
    Vec coef;
    if (lp_feasible(lp, &coef)) {
      auto xs = assemble(coef);
      if (std::any_of(xs.begin(), xs.end(), [](const Vec& x) { return !is_zero(x); })) return xs;
    }
  }
  // only lines left: a linear dependence among them
  Mat lines;
  std::vector<std::size_t> which;
  for (std::size_t k = 0; k < cols.size(); ++k)
    if (cols[k].line) {
      lines.push_back(cols[k].v);
      which.push_back(k);
    }
  if (lines.empty()) return std::nullopt;
  Mat kernel = nullspace(transpose(lines, n), lines.size());
  if (kernel.empty()) return std::nullopt;
  Vec coef = zeros(cols.size());
  for (std::size_t k = 0; k < which.size(); ++k) coef[which[k]] = kernel.front()[k];
  return assemble(coef);
}

std::optional<Vec> strict_separator(const GeneratorFamily& g, long K) {
  const std::size_t n = g.dim;
  std::vector<Vec> gens = g.at(K);
  if (gens.empty()) return zeros(n);
  LinearProgram lp(n);
  std::fill(lp.free.begin(), lp.free.end(), true);
  for (const Vec& v : gens) lp.add(v, Sense::LE, -1);
  for (const Vec& d : g.limit_directions()) lp.add(d, Sense::LE, 0);
  Vec y;
  if (!lp_feasible(lp, &y)) return std::nullopt;
  for (const GeneratorTemplate& t : g.templates) {
    if (tvec_constant(t.v)) continue;
    if (!tdot(t.v, y).sign_from(std::max(K + 1, t.from)).negative) return std::nullopt;
  }
  return y;
}

TVec grad_template(const QuadFnT& f, const Vec& x) {
  TVec g = f.g.empty() ? TVec(f.dim, RatFunc(0)) : f.g;
  for (std::size_t r = 0; r < f.H.size(); ++r)
    g[r] = g[r] + RatFunc(2) * tdot(f.H[r], x);
  return g;
}

RatFunc value_template(const QuadFnT& f, const Vec& x) {
  RatFunc v = f.c;
  if (!f.g.empty()) v = v + tdot(f.g, x);
  for (std::size_t r = 0; r < f.H.size(); ++r) v = v + RatFunc(x[r]) * tdot(f.H[r], x);
  return v;
}

namespace {

enum class Tri { Always, Never, Mixed };

// Does the templated region contain x for all i >= i0?
Tri region_contains(const PolyhedronT& P, const Vec& x, long i0) {
  bool always = true;
  for (std::size_t k = 0; k < P.A.size(); ++k) {
    SignPattern s = (tdot(P.A[k], x) - P.b[k]).sign_from(i0);
    if (s.positive) return Tri::Never;
    if (!s.nonpositive) always = false;
  }
  return always ? Tri::Always : Tri::Mixed;
}

// Subgradient templates of a level-set atom template at x: empty when the
// constraint is inactive, nullopt when undecidable in closed form.
std::optional<std::vector<TVec>> active_gradients(const AtomT& atom, const Vec& x, long i0) {
  std::vector<TVec> grads;
  std::optional<SignPattern> val;
  for (const AtomPieceT& p : atom.pieces) {
    Tri t = region_contains(p.region, x, i0);
    if (t == Tri::Never) continue;
    if (t == Tri::Mixed) return std::nullopt;
    SignPattern s = value_template(p.f, x).sign_from(i0);
    if (!s.zero && !s.negative) {
      if (s.positive) throw DomainError("point violates the constraint " + atom.name);
      return std::nullopt;
    }
    val = s;
    TVec g = grad_template(p.f, x);
    if (std::find(grads.begin(), grads.end(), g) == grads.end()) grads.push_back(g);
  }
  if (!val) return std::nullopt;
  if (val->negative) return std::vector<TVec>{};
  if (!atom.convex && grads.size() > 1) return std::nullopt;
  return grads;
}

void push_cone_generators(const ConvexPolyCone& c0, std::vector<Vec>& out) {
  ConvexPolyCone c = dd_convert(c0);
  for (const Vec& g : c.generators) out.push_back(g);
}

}  // namespace

AtomFn member_atom(const IndexedFamily& f, long i) {
  SetPtr m = f.instantiate(i);
  const auto* lv = std::get_if<LevelSet>(&m->node);
  if (!lv) throw Unsupported("family " + f.name + " is not an inequality system");
  return *lv->atom;
}

std::optional<GeneratorFamily> subgradient_generators(const IndexedFamily& f, const Vec& x) {
  GeneratorFamily g;
  g.dim = f.dim;
  if (!f.infinite()) {
    for (long i : f.indices(0)) {
      AtomFn a = member_atom(f, i);
      int s = sgn(a.value(x));
      if (s > 0) throw DomainError("point violates constraint " + a.name);
      if (s < 0) continue;
      try {
        SubdiffResult sd = subdifferential(a, x, Flavor::Basic);
        for (const Vec& p : sd.points) g.fixed.push_back(p);
      } catch (const Unsupported&) {
        return std::nullopt;
      }
    }
    return g;
  }
  auto atom = f.level_atom_template();
  if (!atom) {
    if (f.tmpl->index_free()) {
      // constant family: one member stands for all
      auto first = make_finite_family(f.name, {f.instantiate(f.first_index())});
      return subgradient_generators(*first, x);
    }
    return std::nullopt;
  }
  auto grads = active_gradients(*atom, x, f.first_index());
  if (!grads) return std::nullopt;
  for (TVec& v : *grads) g.templates.push_back({std::move(v), f.first_index()});
  return g;
}

std::vector<ConvexPolyCone> member_normal_cones(const IndexedFamily& f, const Vec& x, long K,
                                                bool* exact) {
  std::vector<ConvexPolyCone> out;
  for (const SetPtr& m : f.members(K)) {
    ConeResult r = limiting_normal_cone(*m, x);
    if (!r.exact && exact) *exact = false;
    if (r.cone.pieces.size() != 1) throw Unsupported("member normal cone is not convex");
    out.push_back(dd_convert(r.cone.pieces.front()));
  }
  return out;
}

std::optional<GeneratorFamily> normal_generators(const IndexedFamily& f, const Vec& x) {
  GeneratorFamily g;
  g.dim = f.dim;
  auto from_instance = [&](const SetExpr& s) -> bool {
    ConeResult r = limiting_normal_cone(s, x);
    if (!r.exact || r.cone.pieces.size() != 1) return false;
    push_cone_generators(r.cone.pieces.front(), g.fixed);
    return true;
  };
  if (!f.infinite()) {
    for (const SetPtr& m : f.finite)
      if (!from_instance(*m)) return std::nullopt;
    return g;
  }
  const SetTemplate& t = *f.tmpl;
  const long i0 = f.first_index();
  if (t.index_free()) {
    if (!from_instance(*f.instantiate(i0))) return std::nullopt;
    return g;
  }
  if (const auto* tp = std::get_if<TPolySet>(&t.node)) {
    for (std::size_t k = 0; k < tp->P.A.size(); ++k) {
      SignPattern s = (tdot(tp->P.A[k], x) - tp->P.b[k]).sign_from(i0);
      if (s.zero) {
        g.templates.push_back({tp->P.A[k], i0});
      } else if (!s.negative) {
        if (s.positive) throw DomainError("point is outside family " + f.name);
        return std::nullopt;
      }
    }
    return g;
  }
  if (const auto* tl = std::get_if<TLevelSet>(&t.node)) {
    if (!tl->atom->convex) return std::nullopt;
    auto grads = active_gradients(*tl->atom, x, i0);
    if (!grads) return std::nullopt;
    // N = R_+ d phi(x) needs 0 outside d phi(x); checked on the first members
    for (long i = i0; i < i0 + f.policy.K_init; ++i) {
      std::vector<Vec> pts;
      for (const TVec& v : *grads) pts.push_back(eval_tvec(v, i));
      if (pts.empty()) break;
      LinearProgram lp(pts.size());
      for (std::size_t r = 0; r < f.dim; ++r) {
        Vec row;
        for (const Vec& p : pts) row.push_back(p[r]);
        lp.add(std::move(row), Sense::EQ, 0);
      }
      lp.add(Vec(pts.size(), Q(1)), Sense::EQ, 1);
      if (lp_feasible(lp)) return std::nullopt;
    }
    for (TVec& v : *grads) g.templates.push_back({std::move(v), i0});
    return g;
  }
  return std::nullopt;
}

}  // namespace conekit
