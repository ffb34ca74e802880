#include "conekit/setalg.hpp"

#include "conekit/lp.hpp"

#include <cstdlib>
#include <type_traits>
#include <random>

namespace conekit {

// ---- QuadFn ---------------------------------------------------------------

QuadFn QuadFn::affine(Vec a, Q c0) {
  QuadFn f;
  f.dim = a.size();
  f.g = std::move(a);
  f.c = std::move(c0);
  return f;
}

bool QuadFn::is_affine() const {
  for (const Vec& row : H)
    for (const Q& q : row)
      if (sgn(q) != 0) return false;
  return true;
}

Mat QuadFn::quad_matrix() const {
  Mat m(dim, zeros(dim));
  for (std::size_t r = 0; r < H.size(); ++r)
    for (std::size_t s = 0; s < H[r].size(); ++s) m[r][s] = H[r][s];
  return m;
}

Q QuadFn::eval(const Vec& x) const {
  Q v = c + dot(g, x);
  for (std::size_t r = 0; r < H.size(); ++r) v += x[r] * dot(H[r], x);
  return v;
}

Vec QuadFn::grad(const Vec& x) const {
  Vec out = g;
  for (std::size_t r = 0; r < H.size(); ++r) out[r] += 2 * dot(H[r], x);
  return out;
}

QuadFn QuadFn::substitute(const Mat& M, const Vec& m, std::size_t new_dim) const {
  // f(Mx+m) = x^T (M^T H M) x + (M^T (2 H m + g))^T x + f(m)
  QuadFn out;
  out.dim = new_dim;
  out.c = eval(m);
  Vec lin = grad(m);
  out.g = zeros(new_dim);
  for (std::size_t r = 0; r < dim; ++r)
    for (std::size_t j = 0; j < new_dim; ++j) out.g[j] += M[r][j] * lin[r];
  if (!is_affine()) {
    Mat Hm = quad_matrix();
    out.H.assign(new_dim, zeros(new_dim));
    for (std::size_t a = 0; a < new_dim; ++a)
      for (std::size_t b = 0; b < new_dim; ++b) {
        Q s = 0;
        for (std::size_t r = 0; r < dim; ++r) {
          if (sgn(M[r][a]) == 0) continue;
          for (std::size_t t = 0; t < dim; ++t) s += M[r][a] * Hm[r][t] * M[t][b];
        }
        out.H[a][b] = s;
      }
  }
  return out;
}

QuadFn QuadFn::widen(std::size_t new_dim) const {
  QuadFn out;
  out.dim = new_dim;
  out.c = c;
  out.g = zeros(new_dim);
  for (std::size_t k = 0; k < dim; ++k) out.g[k] = g[k];
  if (!is_affine()) {
    out.H.assign(new_dim, zeros(new_dim));
    for (std::size_t r = 0; r < H.size(); ++r)
      for (std::size_t s = 0; s < H[r].size(); ++s) out.H[r][s] = H[r][s];
  }
  return out;
}

QuadForm QuadFn::to_double() const {
  QuadForm q;
  q.c = conekit::to_double(c);
  for (const Q& v : g) q.g.push_back(conekit::to_double(v));
  for (const Vec& row : H) {
    std::vector<double> r;
    for (const Q& v : row) r.push_back(conekit::to_double(v));
    q.H.push_back(std::move(r));
  }
  return q;
}

bool QuadFn::operator==(const QuadFn& o) const {
  return dim == o.dim && g == o.g && c == o.c && quad_matrix() == o.quad_matrix();
}

bool is_psd(const Mat& input) {
  Mat m = input;
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k) {
    int s = sgn(m[k][k]);
    if (s < 0) return false;
    if (s == 0) {
      for (std::size_t j = k; j < n; ++j)
        if (sgn(m[k][j]) != 0 || sgn(m[j][k]) != 0) return false;
      continue;
    }
    for (std::size_t r = k + 1; r < n; ++r) {
      if (sgn(m[r][k]) == 0) continue;
      Q f = m[r][k] / m[k][k];
      for (std::size_t j = k; j < n; ++j) m[r][j] -= f * m[k][j];
    }
  }
  return true;
}

bool is_nsd(const Mat& m) {
  Mat n = m;
  for (Vec& row : n)
    for (Q& q : row) q = -q;
  return is_psd(n);
}

// ---- atoms ----------------------------------------------------------------

AtomFn AtomFn::affine(std::string name, Vec a, Q c0) {
  AtomFn f;
  f.name = std::move(name);
  f.dim = a.size();
  f.convex = true;
  // phi*(lam) = -c on {lam = a}
  Mat A;
  Vec b;
  for (std::size_t k = 0; k < f.dim; ++k) {
    A.push_back(unit(f.dim, k));
    b.push_back(a[k]);
    A.push_back(neg(unit(f.dim, k)));
    b.push_back(-a[k]);
  }
  f.conjugate = Conjugate{Polyhedron(f.dim, A, b), QuadFn::affine(zeros(f.dim), -c0)};
  f.pieces.push_back({Polyhedron::whole(f.dim), QuadFn::affine(std::move(a), std::move(c0))});
  return f;
}

AtomFn AtomFn::quadratic(std::string name, QuadFn q, bool convex) {
  AtomFn f;
  f.name = std::move(name);
  f.dim = q.dim;
  f.convex = convex;
  f.pieces.push_back({Polyhedron::whole(q.dim), std::move(q)});
  return f;
}

std::vector<std::size_t> AtomFn::active_pieces(const Vec& x) const {
  std::vector<std::size_t> out;
  for (std::size_t p = 0; p < pieces.size(); ++p)
    if (pieces[p].region.contains(x)) out.push_back(p);
  return out;
}

Q AtomFn::value(const Vec& x) const {
  if (x.size() != dim) throw MalformedInput("atom " + name + ": dimension mismatch");
  for (const AtomPiece& p : pieces)
    if (p.region.contains(x)) return p.f.eval(x);
  throw DomainError("atom " + name + ": no piece covers " + to_string(x));
}

namespace {

Vec random_point(std::mt19937& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(-64, 64);
  Vec x(n);
  for (Q& q : x) q = Q(d(rng), 32);
  return x;
}

}  // namespace

std::optional<std::string> check_atom(const AtomFn& atom, unsigned seed, int samples) {
  std::mt19937 rng(seed);
  const std::size_t n = atom.dim;
  for (int s = 0; s < samples; ++s) {
    Vec x = random_point(rng, n);
    if (atom.active_pieces(x).empty()) return "pieces do not cover " + to_string(x);
  }
  // Boundary agreement: project random points onto each region facet.
  for (const AtomPiece& piece : atom.pieces) {
    for (std::size_t k = 0; k < piece.region.A.size(); ++k) {
      const Vec& a = piece.region.A[k];
      Q nn = norm2(a);
      if (sgn(nn) == 0) continue;
      for (int s = 0; s < samples; ++s) {
        Vec x = random_point(rng, n);
        x = sub(x, scale((dot(a, x) - piece.region.b[k]) / nn, a));
        auto act = atom.active_pieces(x);
        for (std::size_t p = 1; p < act.size(); ++p)
          if (atom.pieces[act[p]].f.eval(x) != atom.pieces[act[0]].f.eval(x))
            return "pieces disagree at " + to_string(x);
      }
    }
  }
  if (atom.convex) {
    for (int s = 0; s < samples; ++s) {
      Vec x = random_point(rng, n), y = random_point(rng, n);
      Vec mid = scale(Q(1, 2), add(x, y));
      if (2 * atom.value(mid) > atom.value(x) + atom.value(y))
        return "midpoint convexity fails between " + to_string(x) + " and " + to_string(y);
    }
  }
  return std::nullopt;
}

// ---- templates ------------------------------------------------------------

namespace {

bool all_const(const TVec& v) { return tvec_constant(v); }

}  // namespace

QuadFn QuadFnT::at(long i) const {
  QuadFn f;
  f.dim = dim;
  f.g = eval_tvec(g, i);
  f.c = c.eval(Q(i));
  for (const TVec& row : H) f.H.push_back(eval_tvec(row, i));
  return f;
}

bool QuadFnT::index_free() const {
  if (!all_const(g) || !c.is_constant()) return false;
  for (const TVec& row : H)
    if (!all_const(row)) return false;
  return true;
}

Polyhedron PolyhedronT::at(long i) const {
  Mat A2;
  for (const TVec& row : A) A2.push_back(eval_tvec(row, i));
  return Polyhedron(dim, std::move(A2), eval_tvec(b, i));
}

bool PolyhedronT::index_free() const {
  if (!all_const(b)) return false;
  for (const TVec& row : A)
    if (!all_const(row)) return false;
  return true;
}

AtomFn AtomT::at(long i) const {
  AtomFn f;
  f.name = name + "[" + std::to_string(i) + "]";
  f.dim = dim;
  f.convex = convex;
  for (const AtomPieceT& p : pieces) f.pieces.push_back({p.region.at(i), p.f.at(i)});
  if (conjugate) f.conjugate = Conjugate{conjugate->domain.at(i), conjugate->value.at(i)};
  return f;
}

// ---- set expressions ------------------------------------------------------

namespace {

SetPtr make(std::size_t dim, decltype(SetExpr::node) node) {
  auto s = std::make_shared<SetExpr>();
  s->dim = dim;
  s->node = std::move(node);
  return s;
}

}  // namespace

SetPtr SetExpr::polyhedron(Polyhedron P) {
  std::size_t n = P.dim;
  return make(n, PolySet{std::move(P)});
}

SetPtr SetExpr::level(AtomFn atom) {
  std::size_t n = atom.dim;
  return make(n, LevelSet{std::make_shared<const AtomFn>(std::move(atom))});
}

SetPtr SetExpr::epigraph(AtomFn atom) {
  std::size_t n = atom.dim + 1;
  return make(n, EpigraphSet{std::make_shared<const AtomFn>(std::move(atom))});
}

SetPtr SetExpr::complement(Polyhedron P) {
  std::size_t n = P.dim;
  return make(n, ComplementSet{std::move(P)});
}

SetPtr SetExpr::preimage(Mat M, Vec m, SetPtr inner) {
  if (!inner || M.size() != inner->dim || m.size() != inner->dim || M.empty())
    throw MalformedInput("preimage: map does not match the inner set dimension");
  std::size_t n = M[0].size();
  for (const Vec& row : M)
    if (row.size() != n) throw MalformedInput("preimage: ragged matrix");
  bool surj = rank(M) == M.size();
  return make(n, PreimageSet{std::move(M), std::move(m), std::move(inner), surj});
}

SetPtr SetExpr::union_of(std::vector<SetPtr> parts) {
  if (parts.empty()) throw MalformedInput("union of no sets");
  std::size_t n = parts.front()->dim;
  for (const SetPtr& p : parts)
    if (p->dim != n) throw MalformedInput("union: dimension mismatch");
  return make(n, UnionSet{std::move(parts)});
}

SetPtr SetExpr::truncated(FamilyPtr family, long K) {
  std::size_t n = family->dim;
  return make(n, TruncatedSet{std::move(family), K});
}

const char* SetExpr::kind() const {
  static const char* names[] = {"polyhedron", "level-set",   "epigraph",  "complement",
                                "preimage",   "finite-union", "truncated"};
  return names[node.index()];
}

namespace {

bool full_dimensional(const Polyhedron& P) {
  // max s subject to A x + s 1 <= b, s <= 1
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

bool structurally_convex(const SetExpr& s) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PolySet>) {
          return true;
        } else if constexpr (std::is_same_v<T, LevelSet> || std::is_same_v<T, EpigraphSet>) {
          return n.atom->convex;
        } else if constexpr (std::is_same_v<T, ComplementSet>) {
          return n.P.A.size() <= 1 || !full_dimensional(n.P);
        } else if constexpr (std::is_same_v<T, PreimageSet>) {
          return structurally_convex(*n.inner);
        } else if constexpr (std::is_same_v<T, UnionSet>) {
          return n.parts.size() == 1 && structurally_convex(*n.parts[0]);
        } else {
          for (const SetPtr& m : n.family->members(n.K))
            if (!structurally_convex(*m)) return false;
          return true;
        }
      },
      s.node);
}

bool structurally_polyhedral(const SetExpr& s) {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PolySet> || std::is_same_v<T, ComplementSet>) {
          return true;
        } else if constexpr (std::is_same_v<T, LevelSet> || std::is_same_v<T, EpigraphSet>) {
          for (const AtomPiece& p : n.atom->pieces)
            if (!p.f.is_affine()) return false;
          return true;
        } else if constexpr (std::is_same_v<T, PreimageSet>) {
          return structurally_polyhedral(*n.inner);
        } else if constexpr (std::is_same_v<T, UnionSet>) {
          for (const SetPtr& p : n.parts)
            if (!structurally_polyhedral(*p)) return false;
          return true;
        } else {
          for (const SetPtr& m : n.family->members(n.K))
            if (!structurally_polyhedral(*m)) return false;
          return true;
        }
      },
      s.node);
}

bool member(const SetExpr& s, const Vec& x) {
  if (x.size() != s.dim) throw MalformedInput("member: dimension mismatch");
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, PolySet>) {
          return n.P.contains(x);
        } else if constexpr (std::is_same_v<T, LevelSet>) {
          return sgn(n.atom->value(x)) <= 0;
        } else if constexpr (std::is_same_v<T, EpigraphSet>) {
          Vec y(x.begin(), x.end() - 1);
          return n.atom->value(y) <= x.back();
        } else if constexpr (std::is_same_v<T, ComplementSet>) {
          if (!full_dimensional(n.P)) return true;
          for (std::size_t k = 0; k < n.P.A.size(); ++k)
            if (dot(n.P.A[k], x) >= n.P.b[k]) return true;
          return false;
        } else if constexpr (std::is_same_v<T, PreimageSet>) {
          return member(*n.inner, add(mat_vec(n.M, x), n.m));
        } else if constexpr (std::is_same_v<T, UnionSet>) {
          for (const SetPtr& p : n.parts)
            if (member(*p, x)) return true;
          return false;
        } else {
          for (const SetPtr& m : n.family->members(n.K))
            if (!member(*m, x)) return false;
          return true;
        }
      },
      s.node);
}

// ---- families -------------------------------------------------------------

SetPtr SetTemplate::at(long i) const {
  return std::visit(
      [&](const auto& n) -> SetPtr {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TPolySet>) {
          return SetExpr::polyhedron(n.P.at(i));
        } else if constexpr (std::is_same_v<T, TLevelSet>) {
          return SetExpr::level(n.atom->at(i));
        } else if constexpr (std::is_same_v<T, TEpigraphSet>) {
          return SetExpr::epigraph(n.atom->at(i));
        } else if constexpr (std::is_same_v<T, TComplementSet>) {
          return SetExpr::complement(n.P.at(i));
        } else {
          return n.set;
        }
      },
      node);
}

bool SetTemplate::index_free() const {
  return std::visit(
      [&](const auto& n) -> bool {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, TPolySet> || std::is_same_v<T, TComplementSet>) {
          return n.P.index_free();
        } else if constexpr (std::is_same_v<T, TLevelSet> || std::is_same_v<T, TEpigraphSet>) {
          for (const AtomPieceT& p : n.atom->pieces)
            if (!p.region.index_free() || !p.f.index_free()) return false;
          return true;
        } else {
          return true;
        }
      },
      node);
}

TruncationPolicy TruncationPolicy::from_env() {
  TruncationPolicy p;
  if (const char* env = std::getenv("CONEKIT_KMAX")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) {
      p.K_max = v;
      if (p.K_init > v) p.K_init = v;
    }
  }
  return p;
}

long IndexedFamily::last_index(long K) const {
  return infinite() ? K : static_cast<long>(finite.size());
}

std::vector<long> IndexedFamily::indices(long K) const {
  std::vector<long> out;
  for (long i = first_index(); i <= last_index(K); ++i) out.push_back(i);
  return out;
}

SetPtr IndexedFamily::instantiate(long i) const {
  if (!infinite()) {
    if (i < 1 || i > static_cast<long>(finite.size()))
      throw IndexError("family " + name + ": index " + std::to_string(i) + " out of range");
    return finite[static_cast<std::size_t>(i - 1)];
  }
  if (i < first || i > policy.K_max)
    throw IndexError("family " + name + ": index " + std::to_string(i) + " outside [" +
                     std::to_string(first) + ", " + std::to_string(policy.K_max) + "]");
  return tmpl->at(i);
}

std::vector<SetPtr> IndexedFamily::members(long K) const {
  std::vector<SetPtr> out;
  for (long i : indices(K)) out.push_back(instantiate(i));
  return out;
}

std::shared_ptr<const AtomT> IndexedFamily::level_atom_template() const {
  if (!tmpl) return nullptr;
  if (const auto* lv = std::get_if<TLevelSet>(&tmpl->node)) return lv->atom;
  return nullptr;
}

FamilyPtr make_finite_family(std::string name, std::vector<SetPtr> members) {
  if (members.empty()) throw MalformedInput("family " + name + " has no members");
  auto f = std::make_shared<IndexedFamily>();
  f->name = std::move(name);
  f->dim = members.front()->dim;
  for (const SetPtr& m : members)
    if (m->dim != f->dim) throw MalformedInput("family " + f->name + ": dimension mismatch");
  f->finite = std::move(members);
  return f;
}

FamilyPtr make_template_family(std::string name, SetTemplate tmpl, long first) {
  auto f = std::make_shared<IndexedFamily>();
  f->name = std::move(name);
  f->dim = tmpl.dim;
  f->tmpl = std::move(tmpl);
  f->first = first;
  return f;
}

namespace {

template <class T, class Eq>
ScanResult<T> scan(const IndexedFamily& f, const std::function<T(long)>& q, Eq eq) {
  ScanResult<T> res;
  if (!f.infinite()) {
    long K = f.last_index(0);
    res.value = q(K);
    res.K_star = K;
    res.K_last = K;
    res.stagnated = true;
    return res;
  }
  const long w = std::max<long>(1, f.policy.window);
  long run_start = f.policy.K_init;
  T run_value = q(run_start);
  res.K_last = run_start;
  if (w == 1) {
    res.value = run_value;
    res.K_star = run_start;
    res.stagnated = true;
    return res;
  }
  for (long K = f.policy.K_init + 1; K <= f.policy.K_max; ++K) {
    T v = q(K);
    res.K_last = K;
    if (!eq(v, run_value)) {
      run_start = K;
      run_value = std::move(v);
      continue;
    }
    if (K - run_start + 1 >= w) {
      res.value = run_value;
      res.K_star = run_start;
      res.stagnated = true;
      return res;
    }
  }
  res.value = run_value;
  res.K_star = res.K_last;
  res.stagnated = false;
  return res;
}

}  // namespace

ScanResult<ConeRep> stagnation_scan(const IndexedFamily& f,
                                    const std::function<ConeRep(long)>& quantity) {
  return scan<ConeRep>(f, quantity,
                       [](const ConeRep& a, const ConeRep& b) { return cone_equal(a, b); });
}

ScanResult<Q> stagnation_scan(const IndexedFamily& f, const std::function<Q(long)>& quantity) {
  return scan<Q>(f, quantity, [](const Q& a, const Q& b) { return a == b; });
}

}  // namespace conekit
