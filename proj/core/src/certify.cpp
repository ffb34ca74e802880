#include "conekit/certify.hpp"

#include <algorithm>
#include <map>

#include "conekit/families.hpp"
#include "conekit/generators.hpp"
#include "conekit/lp.hpp"
#include "conekit/pieces.hpp"
#include "conekit/qualconds.hpp"
#include "conekit/varcalc.hpp"

namespace conekit {

const char* to_string(ConstraintForm f) {
  switch (f) {
    case ConstraintForm::Geometric:
      return "geometric";
    case ConstraintForm::Operator:
      return "operator";
    case ConstraintForm::Inequality:
      return "inequality";
  }
  return "?";
}

const char* to_string(SipMode m) { return m == SipMode::Upper ? "upper" : "lower"; }

const char* to_string(ParetoNotion n) {
  switch (n) {
    case ParetoNotion::FullyLocalized:
      return "fully-localized";
    case ParetoNotion::Graphical:
      return "graphical";
    case ParetoNotion::TangentialGraphical:
      return "tangential-graphical";
  }
  return "?";
}

namespace {

constexpr std::size_t kMaxSelections = 4096;

// Calls fn on every choice of one convex piece per cone until it returns true.
template <class Fn>
bool for_each_selection(const std::vector<ConeRep>& reps, Fn&& fn) {
  std::size_t total = 1;
  for (const ConeRep& r : reps) {
    if (r.pieces.empty()) return false;
    total *= r.pieces.size();
    if (total > kMaxSelections) throw Unsupported("too many piece selections");
  }
  for (std::size_t s = 0; s < total; ++s) {
    std::size_t rest = s;
    std::vector<ConvexPolyCone> sel;
    for (const ConeRep& r : reps) {
      sel.push_back(dd_convert(r.pieces[rest % r.pieces.size()]));
      rest /= r.pieces.size();
    }
    if (fn(sel)) return true;
  }
  return false;
}

bool is_origin_rep(const ConeRep& c) {
  return std::all_of(c.pieces.begin(), c.pieces.end(), [](const ConvexPolyCone& p) {
    return dd_convert(p).generators.empty();
  });
}

Q l1(const Vec& v) {
  Q s = 0;
  for (const Q& q : v) s += abs(q);
  return s;
}

Q pow2(long i) {
  Q r = 1;
  for (long k = 0; k < i; ++k) r *= 2;
  return r;
}

Polyhedron cone_polyhedron(const ConvexPolyCone& c) {
  ConvexPolyCone d = dd_convert(c);
  return Polyhedron(d.dim, d.inequalities, Vec(d.inequalities.size(), Q(0)));
}

// conv(points) + cone(gens) as a polyhedron, via the homogenized cone.
Polyhedron minkowski(std::size_t n, const std::vector<Vec>& points, const std::vector<Vec>& gens) {
  Mat g;
  for (const Vec& p : points) {
    Vec h = p;
    h.push_back(1);
    g.push_back(std::move(h));
  }
  for (const Vec& v : gens) {
    Vec h = v;
    h.push_back(0);
    g.push_back(std::move(h));
  }
  ConvexPolyCone c = dd_convert(ConvexPolyCone::from_generators(n + 1, std::move(g)));
  Mat A;
  Vec b;
  for (const Vec& row : c.inequalities) {
    Vec a(row.begin(), row.begin() + static_cast<long>(n));
    if (is_zero(a)) continue;  // s >= 0 and its multiples
    A.push_back(std::move(a));
    b.push_back(-row[n]);
  }
  return Polyhedron(n, std::move(A), std::move(b));
}

// theta in the simplex and c >= 0 with sum theta_k v_k + sum c_g g = target.
struct MixedCombination {
  std::vector<Q> theta;
  std::vector<Q> c;
};
std::optional<MixedCombination> mixed_combination(const std::vector<Vec>& points,
                                                  const std::vector<Vec>& gens, const Vec& target) {
  const std::size_t n = target.size();
  const std::size_t k = points.size();
  LinearProgram lp(k + gens.size());
  for (std::size_t r = 0; r < n; ++r) {
    Vec row;
    for (const Vec& p : points) row.push_back(p[r]);
    for (const Vec& g : gens) row.push_back(g[r]);
    lp.add(std::move(row), Sense::EQ, target[r]);
  }
  if (k > 0) {
    Vec row(k + gens.size(), Q(0));
    for (std::size_t j = 0; j < k; ++j) row[j] = 1;
    lp.add(std::move(row), Sense::EQ, 1);
  }
  Vec sol;
  if (!lp_feasible(lp, &sol)) return std::nullopt;
  MixedCombination m;
  m.theta.assign(sol.begin(), sol.begin() + static_cast<long>(k));
  m.c.assign(sol.begin() + static_cast<long>(k), sol.end());
  return m;
}

bool in_subdiff(const SubdiffResult& s, const Vec& v) {
  if (s.kind == SubdiffResult::Kind::Empty) return false;
  if (s.kind == SubdiffResult::Kind::Points)
    return std::find(s.points.begin(), s.points.end(), v) != s.points.end();
  return mixed_combination(s.points, {}, v).has_value();
}

Vec first_nonzero_generator(const ConeRep& c) {
  for (const ConvexPolyCone& p : c.pieces) {
    ConvexPolyCone d = dd_convert(p);
    if (!d.generators.empty()) return primitive(d.generators.front());
  }
  return {};
}

QCVerdict normal_regularity(const IndexedFamily& f, const Vec& x) {
  QCVerdict v;
  v.condition = "normal-regularity";
  const long K = f.policy.K_init;
  v.K_used = f.last_index(K);
  auto members = f.members(K);
  if (std::all_of(members.begin(), members.end(),
                  [](const SetPtr& s) { return structurally_convex(*s); })) {
    v.holds = Holds::Yes;
    v.method = "convex-members";
    return v;
  }
  SetPtr trunc = SetExpr::truncated(std::make_shared<IndexedFamily>(f), K);
  ConeResult fr = frechet_normal_cone(*trunc, x);
  ConeResult li = limiting_normal_cone(*trunc, x);
  v.exact = fr.exact && li.exact && !f.infinite();
  v.method = "normal-cone-comparison";
  v.holds = cone_equal(fr.cone, li.cone) ? Holds::Yes : Holds::No;
  if (f.infinite()) v.note = "compared on the truncated intersection";
  return v;
}

}  // namespace

// ---- extremal systems -----------------------------------------------------

bool shifted_intersection_empty(const std::vector<ConeRep>& cones, const std::vector<Vec>& shifts) {
  if (cones.size() != shifts.size()) throw std::invalid_argument("one shift per cone expected");
  if (cones.empty()) return false;
  const std::size_t n = cones.front().dim();
  bool any_point = for_each_selection(cones, [&](const std::vector<ConvexPolyCone>& sel) {
    LinearProgram lp(n);
    lp.free.assign(n, true);
    for (std::size_t i = 0; i < sel.size(); ++i)
      for (const Vec& a : sel[i].inequalities) lp.add(a, Sense::LE, -dot(a, shifts[i]));
    return lp_feasible(lp);
  });
  return !any_point;
}

ShiftWitness tangential_extremality_witness(const std::vector<ConeRep>& cones, const Q& R) {
  ShiftWitness w;
  w.bound = R;
  if (cones.empty()) {
    w.diagnostic = "empty system";
    return w;
  }
  ConeRep meet = cones.front();
  for (std::size_t i = 1; i < cones.size(); ++i) meet = intersect(meet, cones[i]);
  for (const ConvexPolyCone& p : meet.pieces) {
    if (is_full_dimensional(p)) {
      w.diagnostic = "the cones share an interior direction, so no shifts separate them";
      return w;
    }
  }
  for_each_selection(cones, [&](const std::vector<ConvexPolyCone>& sel) {
    std::vector<ConvexPolyCone> polars;
    for (const ConvexPolyCone& c : sel) polars.push_back(polar(c));
    auto y = vanishing_combination(polars);
    if (!y) return false;
    Q M = 0;
    for (const Vec& v : *y) M = std::max(M, l1(v));
    if (M == 0) return false;
    // |c y_i|_2 <= |c y_i|_1 <= R
    std::vector<Vec> shifts;
    for (const Vec& v : *y) shifts.push_back(scale(R / M, v));
    if (!shifted_intersection_empty(cones, shifts)) return false;
    w.found = true;
    w.shifts = std::move(shifts);
    return true;
  });
  if (!w.found) w.diagnostic = "no separating shifts among the polar candidates";
  return w;
}

ShiftWitness tangential_extremality_witness(const IndexedFamily& f, const Vec& x, const Q& R,
                                            long K) {
  require_base_point(f, x);
  std::vector<ConeRep> cones;
  bool exact = true;
  for (const SetPtr& s : f.members(K)) {
    ConeResult t = tangent_cone(*s, x);
    exact = exact && t.exact;
    cones.push_back(t.cone);
  }
  if (!exact) {
    ShiftWitness w;
    w.bound = R;
    w.diagnostic = "tangent cones are not exact";
    return w;
  }
  return tangential_extremality_witness(cones, R);
}

std::optional<ExtremalCertificate> extremal_certificate(const std::vector<ConeRep>& cones,
                                                        const Q& R) {
  if (cones.empty()) throw std::invalid_argument("empty cone system");
  ConeRep meet = cones.front();
  for (std::size_t i = 1; i < cones.size(); ++i) meet = intersect(meet, cones[i]);
  if (!is_origin_rep(meet))
    throw HypothesisViolation("the cones have a common nonzero direction");

  ExtremalCertificate cert;
  cert.bound = R;
  cert.K_used = static_cast<long>(cones.size());
  ShiftWitness w = tangential_extremality_witness(cones, R);
  cert.extremality_verified = w.found;
  cert.shifts = w.shifts;
  for (const ConeRep& c : cones) cert.homes.push_back(normal_cone_of_cone(c));

  std::optional<std::vector<Vec>> y;
  for_each_selection(cert.homes, [&](const std::vector<ConvexPolyCone>& sel) {
    y = vanishing_combination(sel);
    return y.has_value();
  });
  if (!y) return std::nullopt;
  // y_i = 2^-i x*_i
  Q weighted = 0;
  for (std::size_t i = 0; i < y->size(); ++i) {
    Vec xs = scale(pow2(static_cast<long>(i) + 1), (*y)[i]);
    weighted += norm2(xs) / pow2(static_cast<long>(i) + 1);
    cert.normals.push_back(std::move(xs));
  }
  cert.scale_sq = 1 / weighted;
  return cert;
}

bool verify(const ExtremalCertificate& c, const std::vector<ConeRep>& cones) {
  if (c.normals.size() != cones.size() || c.homes.size() != cones.size()) return false;
  const std::size_t n = cones.front().dim();
  Vec sum = zeros(n);
  Q weighted = 0;
  bool nontrivial = false;
  for (std::size_t i = 0; i < cones.size(); ++i) {
    if (!cone_equal(c.homes[i], normal_cone_of_cone(cones[i]))) return false;
    if (!cone_member(c.homes[i], c.normals[i])) return false;
    Q w = 1 / pow2(static_cast<long>(i) + 1);
    sum = add(sum, scale(w, c.normals[i]));
    weighted += w * norm2(c.normals[i]);
    nontrivial = nontrivial || !is_zero(c.normals[i]);
  }
  if (!nontrivial || !is_zero(sum) || c.scale_sq * weighted != 1) return false;
  if (c.extremality_verified) {
    for (const Vec& a : c.shifts)
      if (norm2(a) > c.bound * c.bound) return false;
    if (!shifted_intersection_empty(cones, c.shifts)) return false;
  }
  return true;
}

// ---- Frechet normals ---------------------------------------------------------

namespace {

FrechetRep represent(const std::vector<ConvexPolyCone>& cones, const Vec& xs) {
  const std::size_t n = xs.size();
  FrechetRep r;
  std::vector<Vec> gens;
  std::vector<std::size_t> owner;
  std::vector<ConvexPolyCone> polars;
  for (std::size_t i = 0; i < cones.size(); ++i) {
    polars.push_back(dd_convert(polar(cones[i])));
    for (const Vec& g : polars.back().generators) {
      gens.push_back(g);
      owner.push_back(i);
    }
  }
  if (auto c = conic_combination(gens, xs)) {
    r.represented = true;
    r.gap_sq = 0;
    std::vector<Vec> parts(cones.size(), zeros(n));
    for (std::size_t k = 0; k < gens.size(); ++k)
      if ((*c)[k] != 0) parts[owner[k]] = add(parts[owner[k]], scale((*c)[k], gens[k]));
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (is_zero(parts[i])) continue;
      r.index_set.push_back(i + 1);
      r.parts.push_back(parts[i]);
    }
    return r;
  }
  ConvexPolyCone hull = conic_sum(polars, n);
  r.gap_sq = squared_distance(cone_polyhedron(hull), xs);
  return r;
}

}  // namespace

FrechetRep frechet_rep_check(const std::vector<ConvexPolyCone>& cones, const Vec& xs) {
  if (cones.empty()) throw std::invalid_argument("empty cone system");
  QCVerdict qc = conic_qc_check(cones);
  if (qc.holds != Holds::Yes) throw HypothesisViolation("conic qualification condition fails");
  ConvexPolyCone meet = intersect(cones);
  if (!cone_member(polar(meet), xs))
    throw DomainError("vector is not a Frechet normal of the intersection");
  FrechetRep r = represent(cones, xs);
  r.qualification = qc;
  return r;
}

FrechetRep frechet_rep_check(const IndexedFamily& f, const Vec& x, const Vec& xs, long K) {
  require_base_point(f, x);
  std::vector<ConvexPolyCone> cones;
  for (const SetPtr& s : f.members(K)) {
    ConeResult t = tangent_cone(*s, x);
    if (t.cone.pieces.size() != 1) throw Unsupported("member tangent cone is not convex");
    cones.push_back(t.cone.pieces.front());
  }
  QCVerdict qc = conic_qc_check(cones);
  if (qc.holds != Holds::Yes) throw HypothesisViolation("conic qualification condition fails");
  ChipSides sides = chip_sides(f, x);
  if (!cone_member(polar(sides.lhs), xs))
    throw DomainError("vector is not a Frechet normal of the intersection");
  FrechetRep r = represent(cones, xs);
  r.qualification = qc;
  return r;
}

// ---- KKT certificates ---------------------------------------------------------

namespace {

// Generators of the finite-sum hull, tagged with their member index.
struct TaggedHull {
  std::vector<Vec> gens;
  std::vector<Vec> range_gens;  // operator form
  std::vector<long> owner;
};

class HullBuilder {
 public:
  HullBuilder(const SipProblem& p, const Vec& x, const Vec& base)
      : p_(p), x_(x), base_(base), fam_(*p.family) {}

  TaggedHull at(long K) {
    TaggedHull h;
    for (long i : fam_.indices(K)) {
      const auto& g = member(i);
      for (std::size_t k = 0; k < g.first.size(); ++k) {
        h.gens.push_back(g.first[k]);
        h.range_gens.push_back(g.second[k]);
        h.owner.push_back(i);
      }
    }
    return h;
  }
  bool exact() const { return exact_; }

 private:
  const std::pair<std::vector<Vec>, std::vector<Vec>>& member(long i) {
    auto it = cache_.find(i);
    if (it != cache_.end()) return it->second;
    std::pair<std::vector<Vec>, std::vector<Vec>> g;
    if (p_.form == ConstraintForm::Inequality) {
      AtomFn a = member_atom(fam_, i);
      Q val = a.value(x_);
      if (val > 0) throw DomainError("point violates constraint " + std::to_string(i));
      if (val == 0) {
        SubdiffResult s = subdifferential(a, x_, Flavor::Basic);
        g.first = s.points;
      }
      g.second = g.first;
    } else {
      ConeResult r = limiting_normal_cone(*fam_.instantiate(i), base_);
      exact_ = exact_ && r.exact;
      if (r.cone.pieces.size() != 1) throw Unsupported("member normal cone is not convex");
      ConvexPolyCone c = dd_convert(r.cone.pieces.front());
      for (const Vec& y : c.generators) {
        g.second.push_back(y);
        g.first.push_back(p_.form == ConstraintForm::Operator ? mat_t_vec(p_.M, y) : y);
      }
    }
    return cache_.emplace(i, std::move(g)).first->second;
  }

  const SipProblem& p_;
  Vec x_;
  Vec base_;
  const IndexedFamily& fam_;
  std::map<long, std::pair<std::vector<Vec>, std::vector<Vec>>> cache_;
  bool exact_ = true;
};

// Groups conic coefficients by member into a term.
void fill_term(KKTTerm& t, const TaggedHull& h, const std::vector<Q>& c, ConstraintForm form,
               std::size_t n, std::size_t range_dim) {
  std::map<long, std::pair<Vec, Vec>> sums;
  std::map<long, Q> lambda;
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] == 0) continue;
    auto& s = sums[h.owner[k]];
    if (s.first.empty()) s = {zeros(n), zeros(range_dim)};
    s.first = add(s.first, scale(c[k], h.gens[k]));
    s.second = add(s.second, scale(c[k], h.range_gens[k]));
    lambda[h.owner[k]] += c[k];
  }
  for (auto& [i, s] : sums) {
    if (is_zero(s.first)) continue;
    t.index_set.push_back(i);
    if (form == ConstraintForm::Inequality) {
      t.multipliers.push_back(lambda[i]);
      t.normals.push_back(scale(1 / lambda[i], s.first));  // an element of d phi_i
    } else {
      t.normals.push_back(s.first);
      if (form == ConstraintForm::Operator) t.range_normals.push_back(s.second);
    }
  }
}

std::optional<GeneratorFamily> closure_generators(const SipProblem& p, const Vec& base) {
  std::optional<GeneratorFamily> g;
  try {
    g = p.form == ConstraintForm::Inequality ? subgradient_generators(*p.family, base)
                                             : normal_generators(*p.family, base);
  } catch (const Unsupported&) {
    return std::nullopt;
  }
  return g;
}

}  // namespace

KKTCertificate sip_certify(const SipProblem& p, const Vec& x, SipMode mode) {
  if (!p.family) throw std::invalid_argument("problem has no constraint family");
  const std::size_t n = p.objective.dim;
  if (x.size() != n) throw std::invalid_argument("point dimension mismatch");
  const IndexedFamily& fam = *p.family;

  KKTCertificate cert;
  cert.mode = mode;
  cert.form = p.form;

  Vec base = x;
  if (p.form == ConstraintForm::Operator) {
    if (p.M.size() != fam.dim || (n > 0 && p.M.front().size() != n))
      throw std::invalid_argument("operator dimensions do not match");
    if (rank(p.M) != p.M.size())
      throw HypothesisViolation("hypotheses failed: surjectivity of the operator derivative");
    base = add(mat_vec(p.M, x), p.m);
  } else if (fam.dim != n) {
    throw std::invalid_argument("family dimension mismatch");
  }

  // Hypotheses.
  std::vector<std::string> failed;
  auto need = [&](const QCVerdict& v) {
    cert.qualifications.push_back(v);
    if (v.holds != Holds::Yes) failed.push_back(v.condition + "=" + to_string(v.holds));
  };
  cert.chip = chip_check(fam, base);
  bool omit_closure = false;
  if (p.form == ConstraintForm::Inequality) {
    bool convex = true;
    for (long i : fam.indices(fam.policy.K_init)) convex = convex && member_atom(fam, i).convex;
    if (auto t = fam.level_atom_template()) convex = convex && t->convex;
    QCVerdict scc = scc_check(fam, x);
    cert.qualifications.push_back(scc);
    if (convex) {
      std::optional<QCVerdict> fm;
      try {
        fm = fmcq_check(fam);
        cert.qualifications.push_back(*fm);
      } catch (const Unsupported&) {
      }
      bool fmcq_yes = fm && fm->holds == Holds::Yes;
      if (!fmcq_yes && cert.chip.holds != Holds::Yes)
        failed.push_back(std::string("CHIP=") + to_string(cert.chip.holds));
      omit_closure = fmcq_yes || scc.holds == Holds::Yes;
    } else {
      if (cert.chip.holds != Holds::Yes)
        failed.push_back(std::string("CHIP=") + to_string(cert.chip.holds));
      need(sqc_check(fam, x));
      omit_closure = scc.holds == Holds::Yes;
    }
  } else {
    if (cert.chip.holds != Holds::Yes)
      failed.push_back(std::string("CHIP=") + to_string(cert.chip.holds));
    need(nqc_check(fam, base));
    if (mode == SipMode::Lower) need(normal_regularity(fam, base));
    QCVerdict ncc = ncc_check(fam, base);
    cert.qualifications.push_back(ncc);
    omit_closure = ncc.holds == Holds::Yes;
  }
  if (mode == SipMode::Lower) {
    QCVerdict sing;
    sing.condition = "singular-subdifferential";
    sing.holds = p.objective.lipschitz_near(x) ? Holds::Yes : Holds::Inconclusive;
    sing.method = "locally-lipschitz-objective";
    need(sing);
  }
  if (!failed.empty()) {
    std::string msg = "hypotheses failed:";
    for (const std::string& s : failed) msg += " " + s;
    throw HypothesisViolation(msg);
  }
  cert.closure_used = !omit_closure;

  // Targets.
  SubdiffResult sd =
      subdifferential(p.objective, x, mode == SipMode::Upper ? Flavor::FrechetUpper : Flavor::Basic);
  if (sd.kind == SubdiffResult::Kind::Empty) {
    if (mode == SipMode::Lower) throw Unsupported("empty basic subdifferential");
    cert.residual = 0;
    cert.note = "upper subdifferential is empty, the inclusion holds vacuously";
    return cert;
  }

  HullBuilder hb(p, x, base);
  std::vector<long> levels =
      fam.infinite() ? tested_levels(fam.policy) : std::vector<long>{static_cast<long>(fam.finite.size())};
  std::optional<HullClosure> closed;
  auto closure = [&]() -> const HullClosure* {
    if (!closed) {
      auto g = closure_generators(p, base);
      if (!g) return nullptr;
      HullClosure h = closed_hull(*g, fam.policy);
      if (p.form == ConstraintForm::Operator) {
        ConvexPolyCone c = dd_convert(h.cone);
        Mat mapped;
        for (const Vec& y : c.generators) mapped.push_back(mat_t_vec(p.M, y));
        h.cone = dd_convert(ConvexPolyCone::from_generators(n, std::move(mapped)));
      }
      closed = std::move(h);
    }
    return &*closed;
  };

  // Each target is a set of points whose convex hull must meet -hull.
  std::vector<std::vector<Vec>> targets;
  if (mode == SipMode::Upper || sd.kind == SubdiffResult::Kind::Points) {
    for (const Vec& v : sd.points) targets.push_back({v});
  } else {
    targets.push_back(sd.points);
  }

  cert.residual = 0;
  bool all_ok = true;
  bool any_ok = false;
  for (const auto& pts : targets) {
    KKTTerm term;
    std::vector<Vec> negated;
    for (const Vec& v : pts) negated.push_back(neg(v));
    bool done = false;
    TaggedHull last;
    for (long K : levels) {
      last = hb.at(K);
      cert.K_used = std::max(cert.K_used, fam.last_index(K));
      // sum theta_k (-v_k) = sum c_g g  <=>  sum theta_k v_k + sum c_g g = 0
      auto mc = mixed_combination(pts, last.gens, zeros(n));
      if (!mc) continue;
      Vec sel = zeros(n);
      for (std::size_t k = 0; k < pts.size(); ++k) sel = add(sel, scale(mc->theta[k], pts[k]));
      term.selection = sel;
      term.residual = 0;
      term.finite = true;
      fill_term(term, last, mc->c, p.form, n, fam.dim);
      done = true;
      break;
    }
    if (!done) {
      Polyhedron sum = minkowski(n, pts, last.gens);
      term.residual = squared_distance(sum, zeros(n));
      term.selection = pts.front();
      const HullClosure* h = closure();
      if (h && !h->exact) cert.exact = false;
      if (!h) cert.exact = false;
      bool in_closure = false;
      if (h) {
        ConvexPolyCone c = dd_convert(h->cone);
        auto mc = mixed_combination(pts, c.generators, zeros(n));
        in_closure = mc.has_value();
        if (!in_closure) term.residual = squared_distance(minkowski(n, pts, c.generators), zeros(n));
      }
      done = in_closure && cert.closure_used;
    }
    if (!done) all_ok = false;
    any_ok = any_ok || done;
    cert.residual = std::max(cert.residual, term.residual);
    cert.terms.push_back(std::move(term));
    if (mode == SipMode::Lower && done) break;
  }
  cert.exact = cert.exact && hb.exact();
  const bool ok = mode == SipMode::Upper ? all_ok : any_ok;
  cert.status = ok ? KKTStatus::Certified : KKTStatus::ConditionViolated;
  if (mode == SipMode::Lower && ok) {
    // keep only the realizing term
    auto it = std::find_if(cert.terms.begin(), cert.terms.end(),
                           [](const KKTTerm& t) { return t.finite; });
    if (it != cert.terms.end()) {
      KKTTerm t = *it;
      cert.terms = {t};
      cert.residual = 0;
    }
  }
  if (ok && std::any_of(cert.terms.begin(), cert.terms.end(),
                        [](const KKTTerm& t) { return !t.finite; }))
    cert.note = "membership holds in the closure only";
  return cert;
}

bool reverify(const KKTCertificate& c, const SipProblem& p, const Vec& x) {
  const std::size_t n = p.objective.dim;
  const IndexedFamily& fam = *p.family;
  Vec base = p.form == ConstraintForm::Operator ? add(mat_vec(p.M, x), p.m) : x;
  SubdiffResult sd = subdifferential(
      p.objective, x, c.mode == SipMode::Upper ? Flavor::FrechetUpper : Flavor::Basic);
  for (const KKTTerm& t : c.terms) {
    if (!t.finite) continue;
    if (t.residual != 0) return false;
    if (!in_subdiff(sd, t.selection)) return false;
    Vec sum = t.selection;
    for (std::size_t k = 0; k < t.index_set.size(); ++k) {
      const long i = t.index_set[k];
      if (p.form == ConstraintForm::Inequality) {
        AtomFn a = member_atom(fam, i);
        if (a.value(x) != 0 || t.multipliers[k] < 0) return false;
        if (!in_subdiff(subdifferential(a, x, Flavor::Basic), t.normals[k])) return false;
        sum = add(sum, scale(t.multipliers[k], t.normals[k]));
      } else {
        SetPtr s = fam.instantiate(i);
        const Vec& home = p.form == ConstraintForm::Operator ? t.range_normals[k] : t.normals[k];
        if (!cone_member(limiting_normal_cone(*s, base).cone, home)) return false;
        if (p.form == ConstraintForm::Operator && mat_t_vec(p.M, home) != t.normals[k]) return false;
        sum = add(sum, t.normals[k]);
      }
    }
    if (!is_zero(sum)) return false;
  }
  if (c.status == KKTStatus::Certified && c.mode == SipMode::Upper && sd.kind != SubdiffResult::Kind::Empty &&
      c.terms.size() != sd.points.size())
    return false;
  (void)n;
  return true;
}

// ---- Pareto optimality --------------------------------------------------------

namespace {

void require_theta(const ParetoProblem& p) {
  ConvexPolyCone t = dd_convert(p.theta);
  if (t.dim != p.m) throw std::invalid_argument("ordering cone dimension mismatch");
  if (t.generators.empty()) throw HypothesisViolation("ordering cone is {0}");
  if (!is_pointed(t)) throw HypothesisViolation("ordering cone is not pointed");
}

Vec x_part(const ParetoProblem& p, const Vec& xy) {
  return Vec(xy.begin(), xy.begin() + static_cast<long>(p.n));
}
Vec y_part(const ParetoProblem& p, const Vec& xy) {
  return Vec(xy.begin() + static_cast<long>(p.n), xy.end());
}

// Polyhedral pieces of Omega, and whether they are exact.
std::vector<BasicPiece> omega_pieces(const ParetoProblem& p, bool* exact) {
  if (!p.constraints) {
    BasicPiece b;
    b.dim = p.n;
    return {b};
  }
  const IndexedFamily& f = *p.constraints;
  if (f.infinite()) {
    if (auto lim = limit_intersection(f)) return *lim;
    *exact = false;
    return compile(*SetExpr::truncated(p.constraints, f.policy.K_max));
  }
  return compile(*SetExpr::truncated(p.constraints, static_cast<long>(f.finite.size())));
}

ParetoDecision sampled_box_check(const ParetoProblem& p, const Vec& xy, bool y_only) {
  ParetoDecision d;
  d.exact = false;
  d.method = "sampled-boxes";
  ConvexPolyCone th = dd_convert(p.theta);
  const Vec yb = y_part(p, xy);
  auto feasible = [&](const Vec& z) {
    if (!member(*p.graph, z)) return false;
    Vec xz = x_part(p, z);
    if (p.constraints)
      for (const SetPtr& s : p.constraints->members(p.constraints->policy.K_init))
        if (!member(*s, xz)) return false;
    return cone_member(th, sub(yb, y_part(p, z)));
  };
  const std::size_t N = p.n + p.m;
  std::vector<Q> radii{Q(1, 10), Q(1, 100), Q(1, 1000), Q(1, 10000)};
  std::size_t hits = 0;
  std::optional<Vec> first;
  for (const Q& r : radii) {
    bool hit = false;
    // the grid {-1, -1/2, 0, 1/2, 1}^N scaled by r
    std::size_t total = 1;
    for (std::size_t k = 0; k < N; ++k) total *= 5;
    for (std::size_t s = 0; s < total && !hit; ++s) {
      std::size_t rest = s;
      Vec z = xy;
      for (std::size_t k = 0; k < N; ++k) {
        z[k] += r * Q(static_cast<long>(rest % 5) - 2, 2);
        rest /= 5;
      }
      Vec diff = sub(z, xy);
      if (y_only) diff = y_part(p, diff);
      if (is_zero(diff) || !feasible(z)) continue;
      hit = true;
      if (!first) first = z;
    }
    hits += hit ? 1 : 0;
  }
  d.box_radius = radii.back();
  if (hits == radii.size()) {
    d.holds = Holds::No;
    d.witness = first;
  } else {
    d.holds = Holds::Yes;
  }
  return d;
}

ConeRep omega_tangent(const ParetoProblem& p, const Vec& x, bool* exact) {
  if (!p.constraints) return ConeRep(ConvexPolyCone::whole(p.n));
  ChipSides s = chip_sides(*p.constraints, x);
  *exact = *exact && s.lhs_exact;
  return s.lhs;
}

}  // namespace

ParetoDecision pareto_check(const ParetoProblem& p, const Vec& xy, ParetoNotion notion) {
  require_theta(p);
  if (xy.size() != p.n + p.m) throw std::invalid_argument("point dimension mismatch");
  const Vec xb = x_part(p, xy);
  if (!member(*p.graph, xy)) throw DomainError("point is not on the graph");
  if (p.constraints) require_base_point(*p.constraints, xb);
  const std::size_t N = p.n + p.m;
  ConvexPolyCone th = dd_convert(p.theta);
  ConvexPolyCone minus_th = dd_convert(ConvexPolyCone::from_inequalities(
      p.m, [&] {
        Mat rows;
        for (const Vec& a : th.inequalities) rows.push_back(neg(a));
        return rows;
      }()));

  if (notion == ParetoNotion::TangentialGraphical) {
    ParetoDecision d;
    d.method = "tangent-cone-intersection";
    ConeResult tg = tangent_cone(*p.graph, xy);
    bool exact = tg.exact;
    ConeRep to = omega_tangent(p, xb, &exact);
    std::vector<ConvexPolyCone> prods;
    for (const ConvexPolyCone& c : to.pieces) prods.push_back(product(c, minus_th));
    ConeRep meet = intersect(tg.cone, ConeRep(prods));
    d.exact = exact;
    if (is_origin_rep(meet)) {
      d.holds = Holds::Yes;
    } else {
      d.holds = Holds::No;
      d.witness = first_nonzero_generator(meet);
    }
    return d;
  }

  const bool y_only = notion == ParetoNotion::FullyLocalized;
  bool exact = true;
  std::vector<BasicPiece> gp = compile(*p.graph);
  std::vector<BasicPiece> op = omega_pieces(p, &exact);
  bool polyhedral = std::all_of(gp.begin(), gp.end(), [](const BasicPiece& b) { return b.polyhedral(); }) &&
                    std::all_of(op.begin(), op.end(), [](const BasicPiece& b) { return b.polyhedral(); });
  if (!polyhedral) return sampled_box_check(p, xy, y_only);

  // Lift Omega pieces and y-bar - Theta to R^N.
  auto lift_x = [&](const BasicPiece& b) {
    BasicPiece l;
    l.dim = N;
    for (std::size_t k = 0; k < b.A.size(); ++k) {
      Vec row = b.A[k];
      row.resize(N, Q(0));
      l.A.push_back(std::move(row));
      l.b.push_back(b.b[k]);
    }
    return l;
  };
  BasicPiece order;
  order.dim = N;
  const Vec yb = y_part(p, xy);
  for (const Vec& a : th.inequalities) {
    // y-bar - y in Theta:  -a.y <= -a.y-bar
    Vec row = zeros(p.n);
    for (const Q& q : a) row.push_back(-q);
    order.A.push_back(std::move(row));
    order.b.push_back(-dot(a, yb));
  }

  std::vector<BasicPiece> combos;
  for (const BasicPiece& g : gp) {
    for (const BasicPiece& o : op) {
      BasicPiece c = g;
      BasicPiece lo = lift_x(o);
      c.A.insert(c.A.end(), lo.A.begin(), lo.A.end());
      c.b.insert(c.b.end(), lo.b.begin(), lo.b.end());
      c.A.insert(c.A.end(), order.A.begin(), order.A.end());
      c.b.insert(c.b.end(), order.b.begin(), order.b.end());
      if (Polyhedron(N, c.A, c.b).empty()) continue;
      combos.push_back(std::move(c));
    }
  }

  // Box radius: inactive rows stay inactive and pieces missing the point stay away.
  Q r = 1;
  for (const BasicPiece& c : combos) {
    if (!c.contains(xy)) {
      Q d2 = squared_distance(c.linear_part(), xy);
      while (4 * r * r * static_cast<long>(N) >= d2) r /= 2;
      continue;
    }
    for (std::size_t k = 0; k < c.A.size(); ++k) {
      Q slack = c.b[k] - dot(c.A[k], xy);
      if (slack > 0) {
        Q norm = l1(c.A[k]);
        while (2 * r * norm >= slack) r /= 2;
      }
    }
  }

  ParetoDecision d;
  d.exact = exact;
  d.box_radius = r;
  d.method = "box-lp";
  d.holds = Holds::Yes;
  const std::size_t lo = y_only ? p.n : 0;
  for (const BasicPiece& c : combos) {
    if (!c.contains(xy)) continue;
    for (std::size_t k = lo; k < N && d.holds == Holds::Yes; ++k) {
      for (int sgn : {1, -1}) {
        LinearProgram lp(N);
        lp.free.assign(N, true);
        for (std::size_t j = 0; j < c.A.size(); ++j) lp.add(c.A[j], Sense::LE, c.b[j]);
        for (std::size_t j = 0; j < N; ++j) {
          lp.add(unit(N, j), Sense::LE, xy[j] + r);
          lp.add(unit(N, j), Sense::GE, xy[j] - r);
        }
        lp.objective = scale(Q(sgn), unit(N, k));
        LPResult res = solve_lp(lp);
        if (res.status == LPStatus::Optimal && res.value > sgn * xy[k]) {
          d.holds = Holds::No;
          d.witness = res.x;
          break;
        }
      }
    }
    if (d.holds == Holds::No) break;
  }
  return d;
}

std::optional<ParetoCertificate> pareto_necessary_cond(const ParetoProblem& p, const Vec& xy) {
  require_theta(p);
  const Vec xb = x_part(p, xy);
  ParetoCertificate cert;
  std::vector<std::string> failed;
  auto need = [&](const QCVerdict& v) {
    cert.qualifications.push_back(v);
    if (v.holds != Holds::Yes) failed.push_back(v.condition + "=" + to_string(v.holds));
  };

  // Tagged normals of the constraint members.
  std::vector<Vec> gens;
  std::vector<long> owner;
  if (p.constraints) {
    const IndexedFamily& f = *p.constraints;
    need(nqc_check(f, xb));
    ChipVerdict chip = chip_check(f, xb);
    if (chip.holds != Holds::Yes) failed.push_back(std::string("CHIP=") + to_string(chip.holds));
    const long K = f.infinite() ? f.policy.K_init : static_cast<long>(f.finite.size());
    auto idx = f.indices(K);
    bool exact = true;
    auto cones = member_normal_cones(f, xb, K, &exact);
    cert.exact = cert.exact && exact && !f.infinite();
    for (std::size_t k = 0; k < cones.size(); ++k)
      for (const Vec& g : cones[k].generators) {
        gens.push_back(g);
        owner.push_back(idx[k]);
      }
  }

  // Coderivative qualification: D*F(x,y)(0) meets -hull only at 0.
  {
    QCVerdict qc;
    qc.condition = "coderivative-QC";
    qc.method = "cone-intersection";
    CoderivativeResult d0 = coderivative(*p.graph, p.n, xy, zeros(p.m));
    qc.exact = d0.exact;
    Mat neg_gens;
    for (const Vec& g : gens) neg_gens.push_back(neg(g));
    ConvexPolyCone minus_hull = neg_gens.empty()
                                    ? ConvexPolyCone::origin(p.n)
                                    : dd_convert(ConvexPolyCone::from_generators(p.n, neg_gens));
    qc.holds = Holds::Yes;
    for (const Polyhedron& s : d0.slices) {
      // slices at y* = 0 are cones
      ConvexPolyCone c = dd_convert(ConvexPolyCone::from_inequalities(p.n, s.A));
      ConvexPolyCone meet = dd_convert(intersect({c, minus_hull}));
      if (!meet.generators.empty()) {
        qc.holds = Holds::No;
        qc.witness = primitive(meet.generators.front());
        break;
      }
    }
    need(qc);
  }

  // Which theorem applies.
  QCVerdict path;
  path.condition = "minimality";
  bool regular = true;
  if (p.constraints) {
    QCVerdict nr = normal_regularity(*p.constraints, xb);
    cert.qualifications.push_back(nr);
    regular = nr.holds == Holds::Yes;
  }
  std::vector<std::string> path_fail;
  if (regular) {
    ParetoDecision fl = pareto_check(p, xy, ParetoNotion::FullyLocalized);
    if (fl.holds == Holds::Yes) {
      cert.path = "fully-localized+normal-regularity";
      cert.exact = cert.exact && fl.exact;
    } else {
      path_fail.push_back("fully-localized=" + std::string(to_string(fl.holds)));
    }
  } else {
    path_fail.push_back("normal-regularity=no");
  }
  if (cert.path.empty()) {
    bool fat = is_full_dimensional(p.theta);
    ParetoDecision tg = pareto_check(p, xy, ParetoNotion::TangentialGraphical);
    if (fat && tg.holds == Holds::Yes) {
      cert.path = "tangential-graphical+interior";
      cert.exact = cert.exact && tg.exact;
    } else {
      if (!fat) path_fail.push_back("interior-of-ordering-cone=empty");
      if (tg.holds != Holds::Yes)
        path_fail.push_back("tangential-graphical=" + std::string(to_string(tg.holds)));
    }
  }
  if (cert.path.empty())
    for (const std::string& s : path_fail) failed.push_back(s);
  if (!failed.empty()) {
    std::string msg = "hypotheses failed:";
    for (const std::string& s : failed) msg += " " + s;
    throw HypothesisViolation(msg);
  }

  // Candidate multipliers: extreme rays of -N(0; Theta), then their sum.
  ConvexPolyCone np = dd_convert(polar(p.theta));
  std::vector<Vec> cands;
  Vec total = zeros(p.m);
  for (const Vec& g : np.generators) {
    Vec y = primitive(neg(g));
    if (std::find(cands.begin(), cands.end(), y) == cands.end()) cands.push_back(y);
    total = add(total, y);
  }
  if (!is_zero(total)) cands.push_back(primitive(total));

  for (const Vec& ys : cands) {
    CoderivativeResult d = coderivative(*p.graph, p.n, xy, ys);
    for (const Polyhedron& s : d.slices) {
      // x0 free, c >= 0: A x0 <= b, x0 + sum c g = 0
      const std::size_t nv = 2 * p.n + gens.size();
      LinearProgram lp(nv);
      // x0 = u - w with u, w >= 0
      for (std::size_t r = 0; r < s.A.size(); ++r) {
        Vec row(nv, Q(0));
        for (std::size_t j = 0; j < p.n; ++j) {
          row[j] = s.A[r][j];
          row[p.n + j] = -s.A[r][j];
        }
        lp.add(std::move(row), Sense::LE, s.b[r]);
      }
      for (std::size_t j = 0; j < p.n; ++j) {
        Vec row(nv, Q(0));
        row[j] = 1;
        row[p.n + j] = -1;
        for (std::size_t k = 0; k < gens.size(); ++k) row[2 * p.n + k] = gens[k][j];
        lp.add(std::move(row), Sense::EQ, 0);
      }
      Vec sol;
      if (!lp_feasible(lp, &sol)) continue;
      cert.ystar = ys;
      cert.x0 = zeros(p.n);
      for (std::size_t j = 0; j < p.n; ++j) cert.x0[j] = sol[j] - sol[p.n + j];
      std::map<long, Vec> parts;
      for (std::size_t k = 0; k < gens.size(); ++k) {
        const Q& c = sol[2 * p.n + k];
        if (c == 0) continue;
        auto& v = parts[owner[k]];
        if (v.empty()) v = zeros(p.n);
        v = add(v, scale(c, gens[k]));
      }
      for (auto& [i, v] : parts) {
        if (is_zero(v)) continue;
        cert.index_set.push_back(i);
        cert.normals.push_back(v);
      }
      cert.residual = 0;
      cert.exact = cert.exact && d.exact;
      return cert;
    }
  }
  return std::nullopt;
}

bool verify(const ParetoCertificate& c, const ParetoProblem& p, const Vec& xy) {
  if (is_zero(c.ystar)) return false;
  if (!cone_member(polar(p.theta), neg(c.ystar))) return false;
  if (!coderivative(*p.graph, p.n, xy, c.ystar).contains(c.x0)) return false;
  Vec sum = c.x0;
  const Vec xb = x_part(p, xy);
  for (std::size_t k = 0; k < c.index_set.size(); ++k) {
    if (!p.constraints) return false;
    SetPtr s = p.constraints->instantiate(c.index_set[k]);
    if (!cone_member(limiting_normal_cone(*s, xb).cone, c.normals[k])) return false;
    sum = add(sum, c.normals[k]);
  }
  return is_zero(sum) && c.residual == 0;
}

}  // namespace conekit
