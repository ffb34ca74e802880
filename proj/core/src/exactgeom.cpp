#include "conekit/exactgeom.hpp"

#include <algorithm>
#include <cctype>

#include "conekit/lp.hpp"

namespace conekit {

namespace {

struct DD {
  Mat lines;
  Mat rays;
};

void check_dims(std::size_t dim, const Mat& rows) {
  for (const Vec& r : rows)
    if (r.size() != dim) throw MalformedInput("dimension mismatch: expected " + std::to_string(dim) + " coordinates");
}

// Generators of {x : <a,x> <= 0 for a in ineqs} by incremental double description.
DD double_description(std::size_t dim, const Mat& ineqs) {
  check_dims(dim, ineqs);
  Mat L;
  for (std::size_t k = 0; k < dim; ++k) L.push_back(unit(dim, k));
  Mat R;
  // Z[r][c]: ray r is tight on the c-th processed constraint.
  std::vector<std::vector<bool>> Z;
  std::size_t processed = 0;

  for (const Vec& a : ineqs) {
    if (is_zero(a)) continue;
    std::size_t k = 0;
    while (k < L.size() && sgn(dot(a, L[k])) == 0) ++k;
    if (k < L.size()) {
      // Lines are tight on every processed constraint, so shifting along l0
      // keeps the old zero sets.
      Vec l0 = L[k];
      Q s = dot(a, l0);
      L.erase(L.begin() + static_cast<long>(k));
      for (Vec& l : L) {
        Q t = dot(a, l);
        if (sgn(t) != 0) l = sub(l, scale(t / s, l0));
      }
      for (std::size_t r = 0; r < R.size(); ++r) {
        Q t = dot(a, R[r]);
        if (sgn(t) != 0) R[r] = primitive(sub(R[r], scale(t / s, l0)));
        Z[r].push_back(true);
      }
      R.push_back(primitive(sgn(s) > 0 ? neg(l0) : l0));
      std::vector<bool> z(processed, true);
      z.push_back(false);
      Z.push_back(std::move(z));
      ++processed;
      continue;
    }

    std::vector<Q> val(R.size());
    std::vector<std::size_t> pos, negs;
    Mat next;
    std::vector<std::vector<bool>> next_z;
    for (std::size_t r = 0; r < R.size(); ++r) {
      val[r] = dot(a, R[r]);
      if (sgn(val[r]) > 0) pos.push_back(r);
      else {
        if (sgn(val[r]) < 0) negs.push_back(r);
        next.push_back(R[r]);
        next_z.push_back(Z[r]);
        next_z.back().push_back(sgn(val[r]) == 0);
      }
    }
    if (pos.empty()) {
      Z = std::move(next_z);
      R = std::move(next);
      ++processed;
      continue;
    }
    for (std::size_t p : pos) {
      for (std::size_t q : negs) {
        bool adjacent = true;
        for (std::size_t r = 0; r < R.size() && adjacent; ++r) {
          if (r == p || r == q) continue;
          bool superset = true;
          for (std::size_t c = 0; c < processed; ++c)
            if (Z[p][c] && Z[q][c] && !Z[r][c]) {
              superset = false;
              break;
            }
          if (superset) adjacent = false;
        }
        if (!adjacent) continue;
        next.push_back(primitive(sub(scale(val[p], R[q]), scale(val[q], R[p]))));
        std::vector<bool> z(processed + 1, false);
        for (std::size_t c = 0; c < processed; ++c) z[c] = Z[p][c] && Z[q][c];
        z[processed] = true;
        next_z.push_back(std::move(z));
      }
    }
    R = std::move(next);
    Z = std::move(next_z);
    ++processed;
  }

  DD out;
  for (Vec& l : rref(L)) out.lines.push_back(canonical_line(l));
  for (const Vec& r : R) {
    Vec pr = primitive(project_out(r, out.lines));
    if (is_zero(pr)) continue;
    if (std::find(out.rays.begin(), out.rays.end(), pr) == out.rays.end()) out.rays.push_back(pr);
  }
  std::sort(out.rays.begin(), out.rays.end(), lex_less);
  return out;
}

Mat expand(const DD& d) {
  Mat m;
  for (const Vec& l : d.lines) {
    m.push_back(l);
    m.push_back(neg(l));
  }
  m.insert(m.end(), d.rays.begin(), d.rays.end());
  return m;
}

ConvexPolyCone assemble(std::size_t dim, const DD& v, const DD& h) {
  ConvexPolyCone c;
  c.dim = dim;
  c.generators = expand(v);
  c.n_lines = v.lines.size();
  c.inequalities = expand(h);
  c.n_eqs = h.lines.size();
  c.has_v = c.has_h = true;
  c.synced = true;
  c.exact = true;
  return c;
}

bool satisfies(const Mat& ineqs, const Vec& v) {
  for (const Vec& a : ineqs)
    if (sgn(dot(a, v)) > 0) return false;
  return true;
}

}  // namespace

ConvexPolyCone ConvexPolyCone::from_generators(std::size_t dim, Mat gens) {
  check_dims(dim, gens);
  ConvexPolyCone c;
  c.dim = dim;
  c.generators = std::move(gens);
  c.has_v = true;
  return c;
}

ConvexPolyCone ConvexPolyCone::from_inequalities(std::size_t dim, Mat ineqs) {
  check_dims(dim, ineqs);
  ConvexPolyCone c;
  c.dim = dim;
  c.inequalities = std::move(ineqs);
  c.has_h = true;
  return c;
}

ConvexPolyCone ConvexPolyCone::whole(std::size_t dim) { return dd_convert(from_inequalities(dim, {})); }
ConvexPolyCone ConvexPolyCone::origin(std::size_t dim) { return dd_convert(from_generators(dim, {})); }
ConvexPolyCone ConvexPolyCone::ray(const Vec& v) { return dd_convert(from_generators(v.size(), {v})); }

Mat ConvexPolyCone::lines() const {
  Mat out;
  for (std::size_t k = 0; k < n_lines; ++k) out.push_back(generators[2 * k]);
  return out;
}

Mat ConvexPolyCone::rays() const {
  return Mat(generators.begin() + static_cast<long>(2 * n_lines), generators.end());
}

ConeRep::ConeRep(ConvexPolyCone c) : exact(c.exact) { pieces.push_back(std::move(c)); }

ConeRep::ConeRep(std::vector<ConvexPolyCone> cs) : pieces(std::move(cs)) {
  if (pieces.empty()) throw MalformedInput("a cone union needs at least one piece");
  exact = std::all_of(pieces.begin(), pieces.end(), [](const ConvexPolyCone& c) { return c.exact; });
}

Polyhedron::Polyhedron(std::size_t n, Mat a, Vec rhs) : dim(n), A(std::move(a)), b(std::move(rhs)) {
  if (A.size() != b.size()) throw MalformedInput("polyhedron: row count of A differs from length of b");
  check_dims(n, A);
}

bool Polyhedron::contains(const Vec& x) const {
  for (std::size_t k = 0; k < A.size(); ++k)
    if (dot(A[k], x) > b[k]) return false;
  return true;
}

bool Polyhedron::empty() const {
  LinearProgram lp(dim);
  std::fill(lp.free.begin(), lp.free.end(), true);
  for (std::size_t k = 0; k < A.size(); ++k) lp.add(A[k], Sense::LE, b[k]);
  return !lp_feasible(lp);
}

std::vector<std::size_t> Polyhedron::active(const Vec& x) const {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < A.size(); ++k)
    if (dot(A[k], x) == b[k]) out.push_back(k);
  return out;
}

ConvexPolyCone dd_convert(const ConvexPolyCone& cone) {
  if (!cone.has_v && !cone.has_h) throw MalformedInput("cone has no representation");
  if (cone.synced) return cone;
  const std::size_t dim = cone.dim;
  if (dim == 0) throw MalformedInput("cone dimension must be positive");
  DD v, h;
  if (cone.has_v) {
    h = double_description(dim, cone.generators);
    v = double_description(dim, expand(h));
  } else {
    v = double_description(dim, cone.inequalities);
    h = double_description(dim, expand(v));
  }
  ConvexPolyCone out = assemble(dim, v, h);
  out.exact = cone.exact;
  return out;
}

ConvexPolyCone polar(const ConvexPolyCone& cone) {
  ConvexPolyCone c = dd_convert(cone);
  ConvexPolyCone p;
  p.dim = c.dim;
  p.generators = c.inequalities;
  p.n_lines = c.n_eqs;
  p.inequalities = c.generators;
  p.n_eqs = c.n_lines;
  p.has_v = p.has_h = p.synced = true;
  p.exact = c.exact;
  return p;
}

ConvexPolyCone polar(const ConeRep& cone) {
  if (cone.pieces.size() == 1) return polar(cone.pieces.front());
  Mat ineqs;
  for (const ConvexPolyCone& piece : cone.pieces) {
    ConvexPolyCone c = dd_convert(piece);
    ineqs.insert(ineqs.end(), c.generators.begin(), c.generators.end());
  }
  ConvexPolyCone out = dd_convert(ConvexPolyCone::from_inequalities(cone.dim(), std::move(ineqs)));
  out.exact = cone.exact;
  return out;
}

ConvexPolyCone intersect(const std::vector<ConvexPolyCone>& cones) {
  if (cones.empty()) throw MalformedInput("intersection of an empty cone list");
  Mat ineqs;
  bool exact = true;
  for (const ConvexPolyCone& c0 : cones) {
    ConvexPolyCone c = c0.has_h ? c0 : dd_convert(c0);
    ineqs.insert(ineqs.end(), c.inequalities.begin(), c.inequalities.end());
    exact = exact && c.exact;
  }
  ConvexPolyCone out = dd_convert(ConvexPolyCone::from_inequalities(cones.front().dim, std::move(ineqs)));
  out.exact = exact;
  return out;
}

ConeRep intersect(const ConeRep& a, const ConeRep& b) {
  std::vector<ConvexPolyCone> out;
  for (const ConvexPolyCone& p : a.pieces)
    for (const ConvexPolyCone& q : b.pieces) {
      ConvexPolyCone c = intersect({p, q});
      bool dup = false;
      for (const ConvexPolyCone& e : out)
        if (e.generators == c.generators) dup = true;
      if (!dup) out.push_back(std::move(c));
    }
  ConeRep r(std::move(out));
  r.exact = a.exact && b.exact;
  return r;
}

ConvexPolyCone conic_sum(const std::vector<ConvexPolyCone>& cones, std::size_t dim) {
  Mat gens;
  bool exact = true;
  for (const ConvexPolyCone& c0 : cones) {
    if (c0.dim != dim) throw MalformedInput("conic_sum: dimension mismatch");
    ConvexPolyCone c = c0.has_v ? c0 : dd_convert(c0);
    gens.insert(gens.end(), c.generators.begin(), c.generators.end());
    exact = exact && c.exact;
  }
  ConvexPolyCone out = dd_convert(ConvexPolyCone::from_generators(dim, std::move(gens)));
  out.exact = exact;
  return out;
}

ConvexPolyCone preimage(const Mat& M, const ConvexPolyCone& c0) {
  if (M.empty()) throw MalformedInput("preimage: empty map");
  ConvexPolyCone c = dd_convert(c0);
  if (M.size() != c.dim) throw MalformedInput("preimage: map range does not match cone dimension");
  const std::size_t n = M.front().size();
  Mat ineqs;
  for (const Vec& a : c.inequalities) ineqs.push_back(mat_t_vec(M, a));
  ConvexPolyCone out = dd_convert(ConvexPolyCone::from_inequalities(n, std::move(ineqs)));
  out.exact = c.exact;
  return out;
}

ConvexPolyCone product(const ConvexPolyCone& a0, const ConvexPolyCone& b0) {
  ConvexPolyCone a = dd_convert(a0), b = dd_convert(b0);
  Mat ineqs;
  for (const Vec& r : a.inequalities) ineqs.push_back(concat(r, zeros(b.dim)));
  for (const Vec& r : b.inequalities) ineqs.push_back(concat(zeros(a.dim), r));
  ConvexPolyCone out = dd_convert(ConvexPolyCone::from_inequalities(a.dim + b.dim, std::move(ineqs)));
  out.exact = a.exact && b.exact;
  return out;
}

namespace {

std::optional<Vec> solve_square(Mat m, Vec rhs) {
  const std::size_t n = m.size();
  for (std::size_t k = 0; k < n; ++k) m[k].push_back(rhs[k]);
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && sgn(m[p][c]) == 0) ++p;
    if (p == n) return std::nullopt;
    std::swap(m[p], m[c]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == c || sgn(m[r][c]) == 0) continue;
      Q f = m[r][c] / m[c][c];
      for (std::size_t j = c; j <= n; ++j) m[r][j] -= f * m[c][j];
    }
  }
  Vec x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = m[k][n] / m[k][k];
  return x;
}

bool next_subset(std::vector<std::size_t>& idx, std::size_t m) {
  const std::size_t k = idx.size();
  for (std::size_t p = k; p-- > 0;) {
    if (idx[p] < m - k + p) {
      ++idx[p];
      for (std::size_t q = p + 1; q < k; ++q) idx[q] = idx[q - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace

Vec project(const Polyhedron& P, const Vec& x) {
  constexpr std::size_t kMaxConstraints = 20;
  if (x.size() != P.dim) throw MalformedInput("project: dimension mismatch");
  if (P.A.size() > kMaxConstraints)
    throw MalformedInput("project: more than 20 constraints is outside the face-enumeration budget");
  if (P.empty()) throw InfeasibleSet("project: polyhedron is empty");
  if (P.contains(x)) return x;

  const std::size_t m = P.A.size();
  const std::size_t top = std::min(m, P.dim);
  std::optional<Vec> best;
  Q best_d;
  for (std::size_t k = 1; k <= top; ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t j = 0; j < k; ++j) idx[j] = j;
    do {
      Mat AS;
      Vec rs;
      for (std::size_t j : idx) {
        AS.push_back(P.A[j]);
        rs.push_back(dot(P.A[j], x) - P.b[j]);
      }
      Mat G(k, zeros(k));
      for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c) G[r][c] = dot(AS[r], AS[c]);
      auto lam = solve_square(G, rs);
      if (!lam) continue;
      Vec y = sub(x, mat_t_vec(AS, *lam));
      if (!P.contains(y)) continue;
      bool kkt = std::all_of(lam->begin(), lam->end(), [](const Q& q) { return sgn(q) >= 0; });
      if (kkt) return y;
      Q d = norm2(sub(y, x));
      if (!best || d < best_d) {
        best = y;
        best_d = d;
      }
    } while (next_subset(idx, m));
  }
  if (best) return *best;
  throw InfeasibleSet("project: no feasible face candidate");
}

Q squared_distance(const Polyhedron& P, const Vec& x) { return norm2(sub(project(P, x), x)); }

bool cone_member(const ConvexPolyCone& cone, const Vec& v) {
  if (v.size() != cone.dim) throw MalformedInput("cone_member: dimension mismatch");
  if (cone.has_h) return satisfies(cone.inequalities, v);
  return satisfies(dd_convert(cone).inequalities, v);
}

bool cone_member(const ConeRep& cone, const Vec& v) {
  return std::any_of(cone.pieces.begin(), cone.pieces.end(),
                     [&](const ConvexPolyCone& c) { return cone_member(c, v); });
}

bool cone_contains(const ConvexPolyCone& outer0, const ConvexPolyCone& inner0) {
  ConvexPolyCone outer = dd_convert(outer0), inner = dd_convert(inner0);
  for (const Vec& g : inner.generators)
    if (!satisfies(outer.inequalities, g)) return false;
  return true;
}

namespace {

std::optional<Vec> uncovered_rec(std::size_t dim, const Mat& cell, const Mat& strict, const ConeRep& outer,
                                 std::size_t idx) {
  LinearProgram lp(dim);
  std::fill(lp.free.begin(), lp.free.end(), true);
  for (const Vec& a : cell) lp.add(a, Sense::LE, 0);
  for (const Vec& s : strict) lp.add(s, Sense::GE, 1);
  Vec point;
  if (!lp_feasible(lp, &point)) return std::nullopt;
  if (idx == outer.pieces.size()) {
    if (strict.empty()) return std::nullopt;
    return primitive(point);
  }
  const ConvexPolyCone& piece = outer.pieces[idx];
  const Mat& rows = piece.inequalities;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    Mat c2 = cell;
    c2.insert(c2.end(), rows.begin(), rows.begin() + static_cast<long>(k));
    Mat s2 = strict;
    s2.push_back(rows[k]);
    if (auto w = uncovered_rec(dim, c2, s2, outer, idx + 1)) return w;
  }
  return std::nullopt;
}

}  // namespace

std::optional<Vec> uncovered_direction(const ConvexPolyCone& inner0, const ConeRep& outer0) {
  ConvexPolyCone inner = dd_convert(inner0);
  ConeRep outer = outer0;
  for (ConvexPolyCone& p : outer.pieces) p = dd_convert(p);
  for (const ConvexPolyCone& p : outer.pieces)
    if (cone_contains(p, inner)) return std::nullopt;
  // Prefer a generator of inner as the witness when one is uncovered.
  for (const Vec& g : inner.generators)
    if (!cone_member(outer, g)) return g;
  return uncovered_rec(inner.dim, inner.inequalities, {}, outer, 0);
}

bool cone_contains(const ConeRep& outer, const ConeRep& inner) {
  for (const ConvexPolyCone& p : inner.pieces)
    if (uncovered_direction(p, outer)) return false;
  return true;
}

bool cone_equal(const ConvexPolyCone& a, const ConvexPolyCone& b) {
  return cone_contains(a, b) && cone_contains(b, a);
}

bool cone_equal(const ConeRep& a, const ConeRep& b) { return cone_contains(a, b) && cone_contains(b, a); }

bool is_pointed(const ConvexPolyCone& cone) { return dd_convert(cone).n_lines == 0; }

bool is_full_dimensional(const ConvexPolyCone& cone) { return dd_convert(cone).n_eqs == 0; }

Vec interior_point(const ConvexPolyCone& cone) {
  ConvexPolyCone c = dd_convert(cone);
  Vec s = zeros(c.dim);
  for (const Vec& r : c.rays()) s = add(s, r);
  return s;
}

namespace {

std::string mat_str(const Mat& m) {
  std::string out = "[";
  for (std::size_t k = 0; k < m.size(); ++k) {
    if (k) out += ",";
    out += to_string(m[k]);
  }
  return out + "]";
}

struct ConeTextParser {
  const std::string& s;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) {
    throw MalformedInput("cone text: " + what + " at offset " + std::to_string(pos));
  }
  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  void expect(const std::string& tok) {
    skip();
    if (s.compare(pos, tok.size(), tok) != 0) fail("expected '" + tok + "'");
    pos += tok.size();
  }
  bool peek(char c) {
    skip();
    return pos < s.size() && s[pos] == c;
  }
  Vec vec() {
    expect("[");
    Vec v;
    if (peek(']')) {
      ++pos;
      return v;
    }
    for (;;) {
      skip();
      std::size_t start = pos;
      while (pos < s.size() && s[pos] != ',' && s[pos] != ']') ++pos;
      v.push_back(parse_rational(s.substr(start, pos - start)));
      if (peek(',')) {
        ++pos;
        continue;
      }
      expect("]");
      return v;
    }
  }
  Mat mat() {
    expect("[");
    Mat m;
    if (peek(']')) {
      ++pos;
      return m;
    }
    for (;;) {
      m.push_back(vec());
      if (peek(',')) {
        ++pos;
        continue;
      }
      expect("]");
      return m;
    }
  }
};

}  // namespace

std::string serialize(const ConvexPolyCone& cone0) {
  ConvexPolyCone c = dd_convert(cone0);
  return "cone { rays: " + mat_str(c.generators) + ", ineqs: " + mat_str(c.inequalities) + " }";
}

std::string serialize(const ConeRep& cone) {
  if (cone.pieces.size() == 1) return serialize(cone.pieces.front());
  std::string out = "union [ ";
  for (std::size_t k = 0; k < cone.pieces.size(); ++k) {
    if (k) out += ", ";
    out += serialize(cone.pieces[k]);
  }
  return out + " ]";
}

ConvexPolyCone parse_cone(const std::string& text) {
  ConeTextParser p{text};
  p.expect("cone");
  p.expect("{");
  p.expect("rays:");
  Mat rays = p.mat();
  p.expect(",");
  p.expect("ineqs:");
  Mat ineqs = p.mat();
  p.expect("}");
  std::size_t dim = !rays.empty() ? rays.front().size() : (!ineqs.empty() ? ineqs.front().size() : 0);
  if (dim == 0) throw MalformedInput("cone text: cannot infer dimension");
  if (!rays.empty()) return dd_convert(ConvexPolyCone::from_generators(dim, rays));
  return dd_convert(ConvexPolyCone::from_inequalities(dim, ineqs));
}

}  // namespace conekit
