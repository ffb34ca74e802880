#include "conekit/pieces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <type_traits>

#include "conekit/lp.hpp"

namespace conekit {

bool BasicPiece::contains(const Vec& x) const {
  for (std::size_t k = 0; k < A.size(); ++k)
    if (dot(A[k], x) > b[k]) return false;
  for (const QuadFn& q : quads)
    if (sgn(q.eval(x)) > 0) return false;
  return true;
}

namespace {

BasicPiece whole_piece(std::size_t n) {
  BasicPiece p;
  p.dim = n;
  return p;
}

// Adds q <= 0 either as a linear row or as a quadratic constraint.
void add_constraint(BasicPiece& p, const QuadFn& q) {
  if (q.is_affine()) {
    p.A.push_back(q.g);
    p.b.push_back(-q.c);
  } else {
    p.quads.push_back(q);
  }
}

BasicPiece from_region(const Polyhedron& region, std::size_t n) {
  BasicPiece p = whole_piece(n);
  for (std::size_t k = 0; k < region.A.size(); ++k) {
    Vec row = region.A[k];
    row.resize(n, Q(0));
    p.A.push_back(std::move(row));
    p.b.push_back(region.b[k]);
  }
  return p;
}

BasicPiece merge(const BasicPiece& a, const BasicPiece& b) {
  BasicPiece out = a;
  out.A.insert(out.A.end(), b.A.begin(), b.A.end());
  out.b.insert(out.b.end(), b.b.begin(), b.b.end());
  out.quads.insert(out.quads.end(), b.quads.begin(), b.quads.end());
  return out;
}

std::string piece_key(const BasicPiece& p) {
  std::vector<std::string> rows, quads;
  for (std::size_t k = 0; k < p.A.size(); ++k) rows.push_back(to_string(p.A[k]) + "<=" + to_string(p.b[k]));
  for (const QuadFn& q : p.quads) {
    std::string s;
    for (const Vec& r : q.quad_matrix()) s += to_string(r);
    quads.push_back(s + "|" + to_string(q.g) + "|" + to_string(q.c));
  }
  std::sort(rows.begin(), rows.end());
  std::sort(quads.begin(), quads.end());
  std::string key;
  for (const auto& r : rows) key += r + ";";
  key += "#";
  for (const auto& q : quads) key += q + ";";
  return key;
}

// True when q_outer(x) >= q_inner(x) for every x, so q_outer <= 0 implies q_inner <= 0.
bool dominates(const QuadFn& outer, const QuadFn& inner) {
  const std::size_t n = outer.dim;
  Mat M(n + 1, zeros(n + 1));
  Mat Ho = outer.quad_matrix(), Hi = inner.quad_matrix();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t s = 0; s < n; ++s) M[r][s] = Ho[r][s] - Hi[r][s];
    M[r][n] = M[n][r] = (outer.g[r] - inner.g[r]) / 2;
  }
  M[n][n] = outer.c - inner.c;
  return is_psd(M);
}

// The polyhedron cut out by p's linear rows lies inside polyhedral q.
bool linear_part_within(const BasicPiece& p, const BasicPiece& q) {
  const std::size_t n = p.dim;
  for (std::size_t r = 0; r < q.A.size(); ++r) {
    LinearProgram lp(n);
    for (std::size_t j = 0; j < n; ++j) lp.free[j] = true;
    for (std::size_t k = 0; k < p.A.size(); ++k) lp.add(p.A[k], Sense::LE, p.b[k]);
    lp.objective = q.A[r];
    LPResult res = solve_lp(lp);
    if (res.status != LPStatus::Optimal || res.value > q.b[r]) return false;
  }
  return true;
}

std::vector<BasicPiece> dedupe(std::vector<BasicPiece> pieces) {
  std::map<std::string, BasicPiece> seen;
  std::vector<std::string> order;
  for (BasicPiece& p : pieces) {
    std::string k = piece_key(p);
    if (seen.emplace(k, p).second) order.push_back(k);
  }
  std::vector<BasicPiece> out;
  for (const auto& k : order) out.push_back(seen.at(k));
  // Drop pieces whose linear part already lies in a kept polyhedral piece.
  std::vector<bool> dropped(out.size(), false);
  for (std::size_t i = 0; i < out.size(); ++i)
    for (std::size_t j = 0; j < out.size() && !dropped[i]; ++j)
      if (i != j && !dropped[j] && out[j].polyhedral() && linear_part_within(out[i], out[j]))
        dropped[i] = true;
  std::vector<BasicPiece> kept;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!dropped[i]) kept.push_back(std::move(out[i]));
  return kept;
}

std::vector<BasicPiece> product(const std::vector<std::vector<BasicPiece>>& factors, std::size_t n) {
  std::vector<BasicPiece> acc{whole_piece(n)};
  for (const auto& f : factors) {
    std::vector<BasicPiece> next;
    for (const BasicPiece& a : acc)
      for (const BasicPiece& b : f)
        if (auto s = simplify(merge(a, b))) next.push_back(std::move(*s));
    acc = dedupe(std::move(next));
    if (acc.size() > kMaxPieces) throw Unsupported("intersection has too many pieces");
  }
  return acc;
}

bool full_dim(const Polyhedron& P) {
  LinearProgram lp(P.dim + 1);
  for (std::size_t j = 0; j <= P.dim; ++j) lp.free[j] = true;
  for (std::size_t k = 0; k < P.A.size(); ++k) {
    Vec row = P.A[k];
    row.push_back(1);
    lp.add(row, Sense::LE, P.b[k]);
  }
  lp.add(unit(P.dim + 1, P.dim), Sense::LE, 1);
  lp.objective = unit(P.dim + 1, P.dim);
  LPResult r = solve_lp(lp);
  return r.status == LPStatus::Optimal && sgn(r.value) > 0;
}

}  // namespace

std::optional<BasicPiece> simplify(BasicPiece p) {
  BasicPiece out = whole_piece(p.dim);
  // quads that are really affine become rows
  std::vector<QuadFn> quads;
  for (QuadFn& q : p.quads) {
    if (q.is_affine()) {
      p.A.push_back(q.g);
      p.b.push_back(-q.c);
    } else {
      quads.push_back(std::move(q));
    }
  }
  std::vector<std::pair<Vec, Q>> rows;
  for (std::size_t k = 0; k < p.A.size(); ++k) {
    const Vec& a = p.A[k];
    auto it = std::find_if(a.begin(), a.end(), [](const Q& q) { return sgn(q) != 0; });
    if (it == a.end()) {
      if (sgn(p.b[k]) < 0) return std::nullopt;
      continue;
    }
    Q s = abs(*it);
    rows.emplace_back(scale(1 / s, a), p.b[k] / s);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return lex_less(x.first, y.first);
    return x.second < y.second;
  });
  for (std::size_t k = 0; k < rows.size(); ++k) {
    // identical normals: keep the tightest bound (sorted ascending, so the first)
    if (k > 0 && rows[k].first == rows[k - 1].first) continue;
    out.A.push_back(rows[k].first);
    out.b.push_back(rows[k].second);
  }
  std::vector<bool> drop(quads.size(), false);
  for (std::size_t j = 0; j < quads.size(); ++j) {
    if (quads[j].is_affine()) continue;
    for (std::size_t k = 0; k < quads.size() && !drop[j]; ++k) {
      if (k == j || drop[k]) continue;
      if (dominates(quads[k], quads[j])) drop[j] = true;
    }
  }
  for (std::size_t j = 0; j < quads.size(); ++j)
    if (!drop[j]) out.quads.push_back(quads[j]);
  if (out.linear_part().empty()) return std::nullopt;
  return out;
}

std::vector<BasicPiece> compile(const SetExpr& s) {
  const std::size_t n = s.dim;
  std::vector<BasicPiece> out = std::visit(
      [&](const auto& node) -> std::vector<BasicPiece> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, PolySet>) {
          return {from_region(node.P, n)};
        } else if constexpr (std::is_same_v<T, LevelSet>) {
          std::vector<BasicPiece> ps;
          for (const AtomPiece& ap : node.atom->pieces) {
            BasicPiece p = from_region(ap.region, n);
            add_constraint(p, ap.f);
            ps.push_back(std::move(p));
          }
          return ps;
        } else if constexpr (std::is_same_v<T, EpigraphSet>) {
          std::vector<BasicPiece> ps;
          for (const AtomPiece& ap : node.atom->pieces) {
            BasicPiece p = from_region(ap.region, n);
            QuadFn f = ap.f.widen(n);
            f.g[n - 1] = -1;
            add_constraint(p, f);
            ps.push_back(std::move(p));
          }
          return ps;
        } else if constexpr (std::is_same_v<T, ComplementSet>) {
          if (!full_dim(node.P)) return {whole_piece(n)};
          std::vector<BasicPiece> ps;
          for (std::size_t k = 0; k < node.P.A.size(); ++k) {
            BasicPiece p = whole_piece(n);
            p.A.push_back(neg(node.P.A[k]));
            p.b.push_back(-node.P.b[k]);
            ps.push_back(std::move(p));
          }
          return ps;
        } else if constexpr (std::is_same_v<T, PreimageSet>) {
          std::vector<BasicPiece> ps;
          for (const BasicPiece& inner : compile(*node.inner)) {
            BasicPiece p = whole_piece(n);
            for (std::size_t k = 0; k < inner.A.size(); ++k) {
              p.A.push_back(mat_t_vec(node.M, inner.A[k]));
              p.b.push_back(inner.b[k] - dot(inner.A[k], node.m));
            }
            for (const QuadFn& q : inner.quads) add_constraint(p, q.substitute(node.M, node.m, n));
            ps.push_back(std::move(p));
          }
          return ps;
        } else if constexpr (std::is_same_v<T, UnionSet>) {
          std::vector<BasicPiece> ps;
          for (const SetPtr& part : node.parts) {
            auto sub = compile(*part);
            ps.insert(ps.end(), sub.begin(), sub.end());
          }
          return ps;
        } else {
          std::vector<std::vector<BasicPiece>> factors;
          for (const SetPtr& m : node.family->members(node.K)) factors.push_back(compile(*m));
          return product(factors, n);
        }
      },
      s.node);
  std::vector<BasicPiece> simplified;
  for (BasicPiece& p : out)
    if (auto q = simplify(std::move(p))) simplified.push_back(std::move(*q));
  simplified = dedupe(std::move(simplified));
  if (simplified.size() > kMaxPieces) throw Unsupported("set has too many pieces");
  return simplified;
}

// ---- tangent cones of pieces ---------------------------------------------

std::optional<PieceTangent> piece_tangent(const BasicPiece& p, const Vec& x) {
  if (!p.contains(x)) return std::nullopt;
  const std::size_t n = p.dim;
  Mat rows;
  for (std::size_t k = 0; k < p.A.size(); ++k)
    if (dot(p.A[k], x) == p.b[k]) rows.push_back(p.A[k]);
  struct ActiveQuad {
    Vec grad;
    Mat H;
  };
  std::vector<ActiveQuad> quads;
  for (const QuadFn& q : p.quads)
    if (sgn(q.eval(x)) == 0) quads.push_back({q.grad(x), q.quad_matrix()});

  PieceTangent out;
  Mat eqs;
  for (;;) {
    // f(x+d) = grad.d + d^T H d; with zero gradient and H <= 0 the constraint is void.
    quads.erase(std::remove_if(quads.begin(), quads.end(),
                               [](const ActiveQuad& q) { return is_zero(q.grad) && is_nsd(q.H); }),
                quads.end());
    if (quads.empty()) break;
    // Fritz John system: sum mu_j grad_j + sum lam_k a_k + sum nu_e e = 0, sum mu = 1.
    const std::size_t nq = quads.size(), nr = rows.size(), ne = eqs.size();
    LinearProgram lp(nq + nr + ne);
    for (std::size_t e = 0; e < ne; ++e) lp.free[nq + nr + e] = true;
    for (std::size_t c = 0; c < n; ++c) {
      Vec coeffs = zeros(nq + nr + ne);
      for (std::size_t j = 0; j < nq; ++j) coeffs[j] = quads[j].grad[c];
      for (std::size_t k = 0; k < nr; ++k) coeffs[nq + k] = rows[k][c];
      for (std::size_t e = 0; e < ne; ++e) coeffs[nq + nr + e] = eqs[e][c];
      lp.add(std::move(coeffs), Sense::EQ, 0);
    }
    Vec sum = zeros(nq + nr + ne);
    for (std::size_t j = 0; j < nq; ++j) sum[j] = 1;
    lp.add(std::move(sum), Sense::EQ, 1);
    Vec sol;
    if (!lp_feasible(lp, &sol)) break;  // constraint qualification holds on the subspace

    std::vector<ActiveQuad> keep_q;
    for (std::size_t j = 0; j < nq; ++j) {
      if (sgn(sol[j]) == 0) {
        keep_q.push_back(quads[j]);
        continue;
      }
      if (!is_psd(quads[j].H)) {
        out.exact = false;
        keep_q.push_back(quads[j]);
        continue;
      }
      eqs.push_back(quads[j].grad);
      for (const Vec& r : quads[j].H) eqs.push_back(r);
    }
    Mat keep_r;
    for (std::size_t k = 0; k < nr; ++k) {
      if (sgn(sol[nq + k]) == 0)
        keep_r.push_back(rows[k]);
      else
        eqs.push_back(rows[k]);
    }
    if (!out.exact) break;
    out.reduced = true;
    eqs = rref(eqs);
    quads = std::move(keep_q);
    rows = std::move(keep_r);
  }

  Mat ineqs;
  for (const Vec& e : eqs) {
    ineqs.push_back(e);
    ineqs.push_back(neg(e));
  }
  for (const Vec& r : rows) ineqs.push_back(r);
  for (const ActiveQuad& q : quads)
    if (!is_zero(q.grad)) ineqs.push_back(q.grad);
  out.cone = dd_convert(ConvexPolyCone::from_inequalities(n, std::move(ineqs)));
  out.cone.exact = out.exact;
  return out;
}

// ---- limits over the index -------------------------------------------------

namespace {

Poly poly_lcm(const Poly& a, const Poly& b) {
  Poly g = Poly::gcd(a, b), q, r;
  Poly::divmod(a * b, g, q, r);
  return q;
}

// num(e) * (D / den(e)) as a polynomial.
Poly scaled_numerator(const RatFunc& e, const Poly& D) {
  Poly q, r;
  Poly::divmod(D, e.den(), q, r);
  return e.num() * q;
}

}  // namespace

std::optional<std::vector<QuadFn>> limit_constraints(const QuadFnT& q, long i0) {
  std::vector<const RatFunc*> entries;
  for (const TVec& row : q.H)
    for (const RatFunc& e : row) entries.push_back(&e);
  for (const RatFunc& e : q.g) entries.push_back(&e);
  entries.push_back(&q.c);
  Poly D = Poly::constant(1);
  for (const RatFunc* e : entries) D = poly_lcm(D, e->den());
  SignPattern sp = RatFunc(D, Poly::constant(1)).sign_from(i0);
  if (!sp.decided || !(sp.positive || sp.negative)) return std::nullopt;
  Q flip = sp.positive ? Q(1) : Q(-1);

  QuadFn F0, F1;
  F0.dim = F1.dim = q.dim;
  F0.g = F1.g = zeros(q.dim);
  bool quadratic = !q.H.empty();
  if (quadratic) F0.H = F1.H = Mat(q.dim, zeros(q.dim));
  auto split = [&](const RatFunc& e, Q& c0, Q& c1) {
    Poly p = scaled_numerator(e, D);
    if (p.degree() > 1) return false;
    c0 = flip * p.coeff(0);
    c1 = flip * p.coeff(1);
    return true;
  };
  for (std::size_t r = 0; r < q.H.size(); ++r)
    for (std::size_t s = 0; s < q.H[r].size(); ++s)
      if (!split(q.H[r][s], F0.H[r][s], F1.H[r][s])) return std::nullopt;
  for (std::size_t r = 0; r < q.dim; ++r)
    if (!split(q.g[r], F0.g[r], F1.g[r])) return std::nullopt;
  if (!split(q.c, F0.c, F1.c)) return std::nullopt;

  // F0 + i F1 <= 0 for all i >= i0  <=>  F0 + i0 F1 <= 0 and F1 <= 0.
  QuadFn at0 = F0;
  at0.c += Q(i0) * F1.c;
  for (std::size_t r = 0; r < q.dim; ++r) at0.g[r] += Q(i0) * F1.g[r];
  for (std::size_t r = 0; r < F0.H.size(); ++r)
    for (std::size_t s = 0; s < q.dim; ++s) at0.H[r][s] += Q(i0) * F1.H[r][s];
  std::vector<QuadFn> out{at0};
  bool f1_zero = sgn(F1.c) == 0 && is_zero(F1.g) && F1.is_affine();
  if (!f1_zero) out.push_back(F1);
  return out;
}

namespace {

QuadFnT row_template(const TVec& a, const RatFunc& b) {
  QuadFnT q;
  q.dim = a.size();
  q.g = a;
  q.c = -b;
  return q;
}

QuadFnT lifted_epigraph(const QuadFnT& f, std::size_t n) {
  QuadFnT q;
  q.dim = n;
  q.g = f.g;
  q.g.resize(n, RatFunc(Q(0)));
  q.g[n - 1] = RatFunc(Q(-1));
  q.c = f.c;
  if (!f.H.empty()) {
    q.H.assign(n, TVec(n, RatFunc(Q(0))));
    for (std::size_t r = 0; r < f.H.size(); ++r)
      for (std::size_t s = 0; s < f.H[r].size(); ++s) q.H[r][s] = f.H[r][s];
  }
  return q;
}

std::optional<std::vector<BasicPiece>> limit_atom(const AtomT& atom, std::size_t n, bool epi,
                                                  long i0) {
  std::vector<BasicPiece> out;
  for (const AtomPieceT& ap : atom.pieces) {
    if (!ap.region.index_free()) return std::nullopt;
    BasicPiece p = from_region(ap.region.at(i0), n);
    QuadFnT f = epi ? lifted_epigraph(ap.f, n) : ap.f;
    auto cons = limit_constraints(f, i0);
    if (!cons) return std::nullopt;
    for (const QuadFn& c : *cons) add_constraint(p, c);
    if (auto s = simplify(std::move(p))) out.push_back(std::move(*s));
  }
  return dedupe(std::move(out));
}

}  // namespace

std::optional<std::vector<BasicPiece>> limit_intersection(const IndexedFamily& f) {
  const std::size_t n = f.dim;
  if (!f.infinite()) {
    std::vector<std::vector<BasicPiece>> factors;
    for (const SetPtr& m : f.members(0)) factors.push_back(compile(*m));
    return product(factors, n);
  }
  const long i0 = f.first;
  const SetTemplate& t = *f.tmpl;
  if (t.index_free()) return compile(*t.at(i0));
  return std::visit(
      [&](const auto& node) -> std::optional<std::vector<BasicPiece>> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, TPolySet>) {
          BasicPiece p = whole_piece(n);
          for (std::size_t k = 0; k < node.P.A.size(); ++k) {
            auto cons = limit_constraints(row_template(node.P.A[k], node.P.b[k]), i0);
            if (!cons) return std::nullopt;
            for (const QuadFn& c : *cons) add_constraint(p, c);
          }
          auto s = simplify(std::move(p));
          if (!s) return std::vector<BasicPiece>{};
          return std::vector<BasicPiece>{*s};
        } else if constexpr (std::is_same_v<T, TLevelSet>) {
          return limit_atom(*node.atom, n, false, i0);
        } else if constexpr (std::is_same_v<T, TEpigraphSet>) {
          return limit_atom(*node.atom, n, true, i0);
        } else if constexpr (std::is_same_v<T, TFixedSet>) {
          return compile(*node.set);
        } else {
          return std::nullopt;
        }
      },
      t.node);
}

std::optional<ConeRep> tangent_from_pieces(const std::vector<BasicPiece>& pieces, const Vec& x) {
  std::vector<ConvexPolyCone> cones;
  for (const BasicPiece& p : pieces) {
    auto t = piece_tangent(p, x);
    if (!t) continue;
    bool covered = false;
    for (const ConvexPolyCone& c : cones)
      if (cone_contains(c, t->cone)) covered = true;
    if (covered) continue;
    cones.erase(std::remove_if(cones.begin(), cones.end(),
                               [&](const ConvexPolyCone& c) { return cone_contains(t->cone, c); }),
                cones.end());
    cones.push_back(t->cone);
  }
  if (cones.empty()) return std::nullopt;
  return ConeRep(std::move(cones));
}

namespace {

TVec gradient_template(const QuadFnT& f, const Vec& y) {
  TVec g = f.g;
  for (std::size_t r = 0; r < f.H.size(); ++r)
    for (std::size_t s = 0; s < f.H[r].size(); ++s) g[r] = g[r] + RatFunc(Q(2) * y[s]) * f.H[r][s];
  return g;
}

RatFunc value_template(const QuadFnT& f, const Vec& y) {
  RatFunc v = f.c + tdot(f.g, y);
  for (std::size_t r = 0; r < f.H.size(); ++r)
    for (std::size_t s = 0; s < f.H[r].size(); ++s) v = v + RatFunc(y[r] * y[s]) * f.H[r][s];
  return v;
}

// Returns the positive constant-direction check of a gradient template.
bool constant_direction(const TVec& g, long i0) {
  Vec v0 = eval_tvec(g, i0);
  auto it = std::find_if(v0.begin(), v0.end(), [](const Q& q) { return sgn(q) != 0; });
  if (it == v0.end()) return false;
  std::size_t k = static_cast<std::size_t>(it - v0.begin());
  RatFunc s = g[k] / RatFunc(v0[k]);
  SignPattern sp = s.sign_from(i0);
  if (!sp.decided || !sp.positive) return false;
  for (std::size_t r = 0; r < g.size(); ++r)
    if (!(g[r] - s * RatFunc(v0[r]) == RatFunc(Q(0)))) return false;
  return true;
}

bool nonvanishing(const TVec& g, long i0) {
  for (const RatFunc& e : g) {
    SignPattern sp = e.sign_from(i0);
    if (sp.decided && (sp.positive || sp.negative)) return true;
  }
  return false;
}

enum class Activity { Active, Inactive, Unknown };

Activity classify(const RatFunc& v, long i0) {
  if (v == RatFunc(Q(0))) return Activity::Active;
  SignPattern sp = v.sign_from(i0);
  if (sp.decided && sp.negative) return Activity::Inactive;
  return Activity::Unknown;
}

std::optional<TangentIntersection> atom_tangent_limit(const IndexedFamily& f, const AtomT& atom,
                                                      bool epi, const Vec& x) {
  const long i0 = f.first;
  const std::size_t n = f.dim;
  Vec y(x.begin(), x.begin() + static_cast<long>(atom.dim));
  struct Active {
    std::size_t piece;
    bool quad_active;
    TVec grad;
  };
  std::vector<Active> act;
  for (std::size_t p = 0; p < atom.pieces.size(); ++p) {
    const AtomPieceT& ap = atom.pieces[p];
    if (!ap.region.index_free()) return std::nullopt;
    if (!ap.region.at(i0).contains(y)) continue;
    QuadFnT lifted = epi ? lifted_epigraph(ap.f, n) : ap.f;
    RatFunc v = value_template(lifted, x);
    Activity a = classify(v, i0);
    if (a == Activity::Unknown) return std::nullopt;
    act.push_back({p, a == Activity::Active, gradient_template(lifted, x)});
  }
  if (act.empty()) throw DomainError("base point outside the family members");

  bool constant = true;
  for (const Active& a : act)
    if (a.quad_active && !constant_direction(a.grad, i0)) constant = false;
  if (constant) {
    std::vector<BasicPiece> pieces = compile(*f.instantiate(i0));
    std::vector<ConvexPolyCone> cones;
    for (const BasicPiece& p : pieces) {
      auto t = piece_tangent(p, x);
      if (!t) continue;
      if (t->reduced || !t->exact) {
        constant = false;
        break;
      }
      cones.push_back(t->cone);
    }
    if (constant && !cones.empty())
      return TangentIntersection{ConeRep(std::move(cones)), "constant-gradient-directions"};
  }

  if (act.size() == 1 && act[0].quad_active) {
    const AtomPieceT& ap = atom.pieces[act[0].piece];
    if (ap.region.at(i0).active(y).empty() && nonvanishing(act[0].grad, i0)) {
      QuadFnT h;
      h.dim = n;
      h.g = act[0].grad;
      h.c = RatFunc(Q(0));
      auto cons = limit_constraints(h, i0);
      if (!cons) return std::nullopt;
      Mat ineqs;
      for (const QuadFn& c : *cons)
        if (!is_zero(c.g)) ineqs.push_back(c.g);
      return TangentIntersection{
          ConeRep(dd_convert(ConvexPolyCone::from_inequalities(n, std::move(ineqs)))),
          "templated-halfspaces"};
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<TangentIntersection> limit_tangent_intersection(const IndexedFamily& f,
                                                              const Vec& x) {
  const std::size_t n = f.dim;
  if (!f.infinite()) {
    std::optional<ConeRep> acc;
    for (const SetPtr& m : f.members(0)) {
      auto t = tangent_from_pieces(compile(*m), x);
      if (!t) throw DomainError("base point outside a family member");
      acc = acc ? intersect(*acc, *t) : *t;
    }
    return TangentIntersection{*acc, "finite-family"};
  }
  const long i0 = f.first;
  const SetTemplate& t = *f.tmpl;
  if (t.index_free()) {
    auto c = tangent_from_pieces(compile(*t.at(i0)), x);
    if (!c) throw DomainError("base point outside the family members");
    return TangentIntersection{*c, "constant-members"};
  }
  return std::visit(
      [&](const auto& node) -> std::optional<TangentIntersection> {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, TPolySet>) {
          Mat ineqs;
          for (std::size_t k = 0; k < node.P.A.size(); ++k) {
            RatFunc v = tdot(node.P.A[k], x) - node.P.b[k];
            Activity a = classify(v, i0);
            if (a == Activity::Unknown) return std::nullopt;
            if (a == Activity::Inactive) continue;
            QuadFnT h;
            h.dim = n;
            h.g = node.P.A[k];
            h.c = RatFunc(Q(0));
            auto cons = limit_constraints(h, i0);
            if (!cons) return std::nullopt;
            for (const QuadFn& c : *cons)
              if (!is_zero(c.g)) ineqs.push_back(c.g);
          }
          return TangentIntersection{
              ConeRep(dd_convert(ConvexPolyCone::from_inequalities(n, std::move(ineqs)))),
              "templated-halfspaces"};
        } else if constexpr (std::is_same_v<T, TLevelSet>) {
          return atom_tangent_limit(f, *node.atom, false, x);
        } else if constexpr (std::is_same_v<T, TEpigraphSet>) {
          return atom_tangent_limit(f, *node.atom, true, x);
        } else {
          return std::nullopt;
        }
      },
      t.node);
}

// ---- distance ---------------------------------------------------------------

namespace {

struct Nearest {
  std::vector<double> point;
  double value = 0;  // squared distance at point
  double gap = 0;    // value - optimum <= gap
  double slack = 0;  // constraint relaxation used
};

// q(x + rho z) / rho as a quadratic in z.
QuadForm recentered(const QuadForm& q, const std::vector<double>& x, double rho) {
  const std::size_t n = x.size();
  QuadForm r;
  r.c = q.value(x) / rho;
  r.g.assign(n, 0.0);
  for (std::size_t k = 0; k < n && k < q.g.size(); ++k) r.g[k] = q.g[k];
  if (!q.H.empty()) {
    r.H.assign(n, std::vector<double>(n, 0.0));
    for (std::size_t a = 0; a < q.H.size(); ++a)
      for (std::size_t b = 0; b < q.H[a].size(); ++b) {
        r.H[a][b] = rho * q.H[a][b];
        // gradient of x^T H x contributes (H + H^T) x
        r.g[b] += q.H[a][b] * x[a];
        r.g[a] += q.H[a][b] * x[b];
      }
  }
  return r;
}

std::optional<Nearest> nearest_in_piece(const BasicPiece& p, const std::vector<double>& x) {
  Nearest out;
  if (p.polyhedral()) {
    Vec xq;
    for (double v : x) xq.emplace_back(v);
    Vec pr;
    try {
      pr = project(p.linear_part(), xq);
    } catch (const InfeasibleSet&) {
      return std::nullopt;
    }
    for (const Q& v : pr) out.point.push_back(to_double(v));
    out.value = to_double(norm2(sub(pr, xq)));
    return out;
  }
  ConvexProblem prob;
  prob.n = p.dim;
  prob.objective.H.assign(p.dim, std::vector<double>(p.dim, 0.0));
  prob.objective.g.assign(p.dim, 0.0);
  for (std::size_t k = 0; k < p.dim; ++k) {
    prob.objective.H[k][k] = 1.0;
    prob.objective.g[k] = -2.0 * x[k];
    prob.objective.c += x[k] * x[k];
  }
  prob.start = x;
  for (std::size_t k = 0; k < p.A.size(); ++k) {
    QuadForm row;
    for (const Q& v : p.A[k]) row.g.push_back(to_double(v));
    row.c = -to_double(p.b[k]);
    prob.constraints.push_back(row);
  }
  for (const QuadFn& q : p.quads) prob.constraints.push_back(q.to_double());
  ConvexSolution sol = minimize_convex(prob);
  if (!sol.feasible) {
    // pieces with empty interior: relax every constraint slightly
    out.slack = 1e-9;
    for (QuadForm& c : prob.constraints) c.c -= out.slack;
    sol = minimize_convex(prob);
    if (!sol.feasible) return std::nullopt;
  }
  out.point = sol.x;
  out.value = std::max(0.0, sol.value);
  out.gap = sol.gap;
  // The solver's tolerances are absolute; near x they swamp distances of
  // order 1e-4, so re-solve in coordinates rescaled to the distance found.
  const double rho = std::sqrt(out.value);
  if (rho > 0 && rho < 1e-2 && out.slack == 0) {
    ConvexProblem local;
    local.n = p.dim;
    local.objective.H.assign(p.dim, std::vector<double>(p.dim, 0.0));
    for (std::size_t k = 0; k < p.dim; ++k) local.objective.H[k][k] = 1.0;
    local.objective.g.assign(p.dim, 0.0);
    for (const QuadForm& c : prob.constraints) local.constraints.push_back(recentered(c, x, rho));
    local.start.resize(p.dim);
    for (std::size_t k = 0; k < p.dim; ++k) local.start[k] = (sol.x[k] - x[k]) / rho;
    ConvexSolution fine = minimize_convex(local);
    if (fine.feasible) {
      for (std::size_t k = 0; k < p.dim; ++k) out.point[k] = x[k] + rho * fine.x[k];
      out.value = std::max(0.0, fine.value) * rho * rho;
      out.gap = fine.gap * rho * rho;
    }
  }
  return out;
}

}  // namespace

std::vector<double> approx_projection(const std::vector<BasicPiece>& pieces,
                                      const std::vector<double>& x) {
  std::optional<Nearest> best;
  for (const BasicPiece& p : pieces) {
    auto n = nearest_in_piece(p, x);
    if (n && (!best || n->value < best->value)) best = std::move(n);
  }
  if (!best) throw InfeasibleSet("projection onto an empty set");
  return best->point;
}

DistanceResult distance(const SetExpr& s, const Vec& x) {
  if (x.size() != s.dim) throw MalformedInput("distance: dimension mismatch");
  DistanceResult res;
  if (const auto* tr = std::get_if<TruncatedSet>(&s.node)) res.truncation = tr->K;
  std::vector<BasicPiece> pieces = compile(s);
  if (pieces.empty()) throw InfeasibleSet("distance to an empty set");
  std::optional<Q> best_exact;
  double lo = std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool all_exact = true;
  std::vector<double> xd;
  for (const Q& v : x) xd.push_back(to_double(v));
  for (const BasicPiece& p : pieces) {
    if (p.polyhedral()) {
      Q d2;
      try {
        d2 = squared_distance(p.linear_part(), x);
      } catch (const InfeasibleSet&) {
        continue;
      }
      if (!best_exact || d2 < *best_exact) best_exact = d2;
      double d = std::sqrt(to_double(d2));
      lo = std::min(lo, d);
      hi = std::min(hi, d);
      continue;
    }
    all_exact = false;
    if (p.contains(x)) {
      lo = hi = 0;
      continue;
    }
    auto n = nearest_in_piece(p, xd);
    if (!n) continue;
    lo = std::min(lo, std::sqrt(std::max(0.0, n->value - n->gap)) - std::sqrt(n->slack));
    hi = std::min(hi, std::sqrt(n->value) + std::sqrt(n->slack));
  }
  if (!best_exact && !std::isfinite(hi)) throw InfeasibleSet("distance: no feasible piece");
  res.exact = all_exact;
  if (all_exact) res.squared = *best_exact;
  res.lower = std::max(0.0, lo);
  res.upper = hi;
  return res;
}

}  // namespace conekit
