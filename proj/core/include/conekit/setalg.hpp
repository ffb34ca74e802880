#pragma once

// Set expressions, function atoms and index-templated families.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "conekit/convexsolve.hpp"
#include "conekit/errors.hpp"
#include "conekit/exactgeom.hpp"
#include "conekit/ratfunc.hpp"

namespace conekit {

// f(x) = x^T H x + g^T x + c with H symmetric (an empty H means zero).
struct QuadFn {
  std::size_t dim = 0;
  Mat H;
  Vec g;
  Q c;

  static QuadFn affine(Vec a, Q c0);
  bool is_affine() const;
  Q eval(const Vec& x) const;
  Vec grad(const Vec& x) const;
  // Hessian is 2H; this returns H with zero fill.
  Mat quad_matrix() const;
  // x -> f(M x + m) where M has dim rows.
  QuadFn substitute(const Mat& M, const Vec& m, std::size_t new_dim) const;
  // Embeds into a larger space, variables keep their positions.
  QuadFn widen(std::size_t new_dim) const;
  QuadForm to_double() const;
  bool operator==(const QuadFn& o) const;
};

// Exact positive-semidefiniteness test of a symmetric rational matrix.
bool is_psd(const Mat& m);
bool is_nsd(const Mat& m);

// Conjugate function given in closed form: value(lambda) on domain, +inf off it.
struct Conjugate {
  Polyhedron domain;
  QuadFn value;
};

struct AtomPiece {
  Polyhedron region;
  QuadFn f;
};

// Continuous piecewise polynomial of degree <= 2 on polyhedral pieces.
struct AtomFn {
  std::string name;
  std::size_t dim = 0;
  std::vector<AtomPiece> pieces;
  std::optional<Conjugate> conjugate;
  bool convex = false;

  static AtomFn affine(std::string name, Vec a, Q c0);
  static AtomFn quadratic(std::string name, QuadFn f, bool convex);

  Q value(const Vec& x) const;
  std::vector<std::size_t> active_pieces(const Vec& x) const;
  // Continuous piecewise polynomials are locally Lipschitz everywhere.
  bool lipschitz_near(const Vec&) const { return true; }
  bool is_affine() const { return pieces.size() == 1 && pieces[0].f.is_affine(); }
};

// Sampled validation of an atom: pieces cover, agree on boundaries, and the
// convex flag passes midpoint convexity. Returns a failure description.
std::optional<std::string> check_atom(const AtomFn& atom, unsigned seed, int samples = 100);

// ---- index templates ------------------------------------------------------

struct QuadFnT {
  std::size_t dim = 0;
  std::vector<TVec> H;  // empty means zero
  TVec g;
  RatFunc c;

  QuadFn at(long i) const;
  bool index_free() const;
};

struct PolyhedronT {
  std::size_t dim = 0;
  std::vector<TVec> A;
  TVec b;

  Polyhedron at(long i) const;
  bool index_free() const;
};

struct ConjugateT {
  PolyhedronT domain;
  QuadFnT value;
};

struct AtomPieceT {
  PolyhedronT region;
  QuadFnT f;
};

struct AtomT {
  std::string name;
  std::size_t dim = 0;
  std::vector<AtomPieceT> pieces;
  std::optional<ConjugateT> conjugate;
  bool convex = false;

  AtomFn at(long i) const;
};

// ---- set expressions ------------------------------------------------------

struct SetExpr;
struct IndexedFamily;
using SetPtr = std::shared_ptr<const SetExpr>;
using FamilyPtr = std::shared_ptr<const IndexedFamily>;
using AtomPtr = std::shared_ptr<const AtomFn>;

struct PolySet {
  Polyhedron P;
};
struct LevelSet {  // {x : phi(x) <= 0}
  AtomPtr atom;
};
struct EpigraphSet {  // {(x,t) : phi(x) <= t}
  AtomPtr atom;
};
struct ComplementSet {  // closure of the complement of int P
  Polyhedron P;
};
struct PreimageSet {  // {x : M x + m in inner}
  Mat M;
  Vec m;
  SetPtr inner;
  bool surjective = false;
};
struct UnionSet {
  std::vector<SetPtr> parts;
};
struct TruncatedSet {  // intersection of the first K members of a family
  FamilyPtr family;
  long K = 0;
};

struct SetExpr {
  std::size_t dim = 0;
  std::variant<PolySet, LevelSet, EpigraphSet, ComplementSet, PreimageSet, UnionSet, TruncatedSet>
      node;

  static SetPtr polyhedron(Polyhedron P);
  static SetPtr level(AtomFn atom);
  static SetPtr epigraph(AtomFn atom);
  static SetPtr complement(Polyhedron P);
  static SetPtr preimage(Mat M, Vec m, SetPtr inner);
  static SetPtr union_of(std::vector<SetPtr> parts);
  static SetPtr truncated(FamilyPtr family, long K);

  const char* kind() const;
};

// Structural convexity (sufficient, never claims convexity wrongly).
bool structurally_convex(const SetExpr& s);
// True when the set is a finite union of polyhedra by construction.
bool structurally_polyhedral(const SetExpr& s);

bool member(const SetExpr& s, const Vec& x);

struct DistanceResult {
  bool exact = false;
  Q squared;          // exact squared distance when exact
  double lower = 0;   // bounds on the (unsquared) distance
  double upper = 0;
  long truncation = 0;  // K used when the set is a truncated family, else 0
};
DistanceResult distance(const SetExpr& s, const Vec& x);

// ---- templated families ---------------------------------------------------

struct TPolySet {
  PolyhedronT P;
};
struct TLevelSet {
  std::shared_ptr<const AtomT> atom;
};
struct TEpigraphSet {
  std::shared_ptr<const AtomT> atom;
};
struct TComplementSet {
  PolyhedronT P;
};
struct TFixedSet {
  SetPtr set;
};

struct SetTemplate {
  std::size_t dim = 0;
  std::variant<TPolySet, TLevelSet, TEpigraphSet, TComplementSet, TFixedSet> node;

  SetPtr at(long i) const;
  bool index_free() const;
};

struct TruncationPolicy {
  long K_init = 8;
  long K_max = 512;
  long window = 5;

  // Defaults with K_max taken from CONEKIT_KMAX when set.
  static TruncationPolicy from_env();
};

// A countable system: either a finite list (indices 1..m) or a template
// instantiated at indices first, first+1, ...
struct IndexedFamily {
  std::string name;
  std::size_t dim = 0;
  std::vector<SetPtr> finite;
  std::optional<SetTemplate> tmpl;
  long first = 1;
  TruncationPolicy policy = TruncationPolicy::from_env();
  std::optional<Vec> base_point;

  bool infinite() const { return tmpl.has_value(); }
  long first_index() const { return infinite() ? first : 1; }
  // Largest index included at truncation K.
  long last_index(long K) const;
  std::vector<long> indices(long K) const;
  SetPtr instantiate(long i) const;
  std::vector<SetPtr> members(long K) const;
  // Atom template when every member is a level set of one atom template.
  std::shared_ptr<const AtomT> level_atom_template() const;
};

FamilyPtr make_finite_family(std::string name, std::vector<SetPtr> members);
FamilyPtr make_template_family(std::string name, SetTemplate tmpl, long first = 1);

template <class T>
struct ScanResult {
  T value;
  long K_star = 0;
  bool stagnated = false;
  long K_last = 0;  // last truncation evaluated
};

ScanResult<ConeRep> stagnation_scan(const IndexedFamily& f,
                                    const std::function<ConeRep(long)>& quantity);
ScanResult<Q> stagnation_scan(const IndexedFamily& f, const std::function<Q(long)>& quantity);

}  // namespace conekit
