#include "conekit_cli/instance.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace conekit::cli {

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw InstanceError(where + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) fail(where, std::string("missing field \"") + key + "\"");
  return j.at(key);
}

RatFunc json_template(const Json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return RatFunc(Q(j.get<long>()));
    if (j.is_string()) return parse_template(j.get<std::string>());
  } catch (const MalformedInput& e) {
    fail(where, e.what());
  }
  fail(where, "expected an integer or a template string");
}

TVec json_tvec(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  TVec v;
  for (std::size_t k = 0; k < j.size(); ++k)
    v.push_back(json_template(j[k], where + "[" + std::to_string(k) + "]"));
  return v;
}

std::vector<TVec> json_tmat(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of rows");
  std::vector<TVec> m;
  for (std::size_t k = 0; k < j.size(); ++k)
    m.push_back(json_tvec(j[k], where + "[" + std::to_string(k) + "]"));
  return m;
}

void check_rows(const std::vector<TVec>& A, std::size_t n, const std::string& where) {
  for (const TVec& r : A)
    if (r.size() != n) fail(where, "row length " + std::to_string(r.size()) + " != dimension " + std::to_string(n));
}

PolyhedronT json_polyhedron_t(const Json& j, std::size_t n, const std::string& where) {
  PolyhedronT P;
  P.dim = n;
  if (j.contains("A")) P.A = json_tmat(j.at("A"), where + ".A");
  check_rows(P.A, n, where + ".A");
  if (j.contains("b")) {
    P.b = json_tvec(j.at("b"), where + ".b");
  } else {
    P.b.assign(P.A.size(), RatFunc(Q(0)));
  }
  if (P.b.size() != P.A.size()) fail(where, "A and b have different lengths");
  return P;
}

QuadFnT json_quad_t(const Json& j, std::size_t n, const std::string& where) {
  QuadFnT f;
  f.dim = n;
  if (j.contains("H")) {
    f.H = json_tmat(j.at("H"), where + ".H");
    if (f.H.size() != n) fail(where + ".H", "expected " + std::to_string(n) + " rows");
    check_rows(f.H, n, where + ".H");
  }
  f.g = j.contains("g") ? json_tvec(j.at("g"), where + ".g") : TVec(n, RatFunc(Q(0)));
  if (f.g.size() != n) fail(where + ".g", "length != dimension");
  f.c = j.contains("c") ? json_template(j.at("c"), where + ".c") : RatFunc(Q(0));
  return f;
}

// Conjugate of an affine template a(i).x + c(i): -c(i) on {lam = a(i)}.
ConjugateT affine_conjugate(const TVec& a, const RatFunc& c) {
  const std::size_t n = a.size();
  ConjugateT cj;
  cj.domain.dim = n;
  for (std::size_t k = 0; k < n; ++k) {
    cj.domain.A.push_back(constant_tvec(unit(n, k)));
    cj.domain.b.push_back(a[k]);
    cj.domain.A.push_back(constant_tvec(neg(unit(n, k))));
    cj.domain.b.push_back(-a[k]);
  }
  cj.value.dim = n;
  cj.value.g = TVec(n, RatFunc(Q(0)));
  cj.value.c = -c;
  return cj;
}

bool atom_index_free(const AtomT& a) {
  for (const AtomPieceT& p : a.pieces)
    if (!p.region.index_free() || !p.f.index_free()) return false;
  return true;
}

class Parser {
 public:
  Parser(const Json& doc, Instance& inst) : doc_(doc), inst_(inst) {}

  void run() {
    inst_.dim = field(doc_, "dimension", "$").get<std::size_t>();
    if (doc_.contains("atoms"))
      for (const auto& [name, j] : doc_.at("atoms").items()) atom(name);
    if (doc_.contains("sets"))
      for (const auto& [name, j] : doc_.at("sets").items()) set_named(name);
    if (doc_.contains("families"))
      for (const auto& [name, j] : doc_.at("families").items()) family(name);
    if (doc_.contains("points"))
      for (const auto& [name, j] : doc_.at("points").items())
        inst_.points[name] = json_vec(j, "$.points." + name);
    if (doc_.contains("problems"))
      for (const auto& [name, j] : doc_.at("problems").items()) problem(name, j);
    if (doc_.contains("requests")) inst_.requests = doc_.at("requests");
    if (doc_.contains("expected")) inst_.expected = doc_.at("expected");
    if (!inst_.requests.is_array()) fail("$.requests", "expected an array");
  }

 private:
  std::shared_ptr<const AtomT> atom(const std::string& name) {
    if (auto it = inst_.atoms.find(name); it != inst_.atoms.end()) return it->second;
    const std::string where = "$.atoms." + name;
    if (!doc_.contains("atoms") || !doc_.at("atoms").contains(name)) fail(where, "unknown atom");
    const Json& j = doc_.at("atoms").at(name);
    auto a = std::make_shared<AtomT>();
    a->name = name;
    a->dim = j.value("dim", inst_.dim);
    a->convex = j.value("convex", false);
    if (j.contains("affine")) {
      const Json& af = j.at("affine");
      TVec g = json_tvec(field(af, "a", where + ".affine"), where + ".affine.a");
      a->dim = g.size();
      RatFunc c = af.contains("c") ? json_template(af.at("c"), where + ".affine.c") : RatFunc(Q(0));
      AtomPieceT p;
      p.region.dim = a->dim;
      p.f.dim = a->dim;
      p.f.g = g;
      p.f.c = c;
      a->pieces.push_back(std::move(p));
      a->convex = true;
      a->conjugate = affine_conjugate(g, c);
    } else if (j.contains("quadratic")) {
      AtomPieceT p;
      p.region.dim = a->dim;
      p.f = json_quad_t(j.at("quadratic"), a->dim, where + ".quadratic");
      a->pieces.push_back(std::move(p));
    } else {
      const Json& ps = field(j, "pieces", where);
      if (!ps.is_array() || ps.empty()) fail(where + ".pieces", "expected a nonempty array");
      for (std::size_t k = 0; k < ps.size(); ++k) {
        const std::string w = where + ".pieces[" + std::to_string(k) + "]";
        AtomPieceT p;
        p.region = ps[k].contains("region") ? json_polyhedron_t(ps[k].at("region"), a->dim, w + ".region")
                                            : json_polyhedron_t(Json::object(), a->dim, w + ".region");
        p.f = json_quad_t(ps[k], a->dim, w);
        a->pieces.push_back(std::move(p));
      }
    }
    if (j.contains("conjugate")) {
      const Json& cj = j.at("conjugate");
      ConjugateT c;
      c.domain = json_polyhedron_t(field(cj, "domain", where + ".conjugate"), a->dim,
                                   where + ".conjugate.domain");
      c.value = json_quad_t(cj, a->dim, where + ".conjugate");
      a->conjugate = std::move(c);
    }
    inst_.atoms[name] = a;
    return a;
  }

  AtomFn fixed_atom(const std::string& name, const std::string& where) {
    auto a = atom(name);
    if (!atom_index_free(*a)) fail(where, "atom " + name + " depends on the index i");
    AtomFn f = a->at(1);
    f.name = name;
    return f;
  }

  SetPtr set_named(const std::string& name) {
    if (auto it = inst_.sets.find(name); it != inst_.sets.end()) return it->second;
    const std::string where = "$.sets." + name;
    if (!doc_.contains("sets") || !doc_.at("sets").contains(name)) fail(where, "unknown set");
    if (!resolving_.insert(name).second) fail(where, "cyclic set reference");
    SetPtr s = set_expr(doc_.at("sets").at(name), where);
    resolving_.erase(name);
    inst_.sets[name] = s;
    return s;
  }

  Polyhedron polyhedron(const Json& j, std::size_t n, const std::string& where) {
    Mat A = j.contains("A") ? json_mat(j.at("A"), where + ".A") : Mat{};
    for (const Vec& r : A)
      if (r.size() != n) fail(where + ".A", "row length != dimension");
    Vec b = j.contains("b") ? json_vec(j.at("b"), where + ".b") : Vec(A.size(), Q(0));
    if (b.size() != A.size()) fail(where, "A and b have different lengths");
    return Polyhedron(n, std::move(A), std::move(b));
  }

  SetPtr set_expr(const Json& j, const std::string& where) {
    if (j.is_string()) return set_named(j.get<std::string>());
    if (!j.is_object()) fail(where, "expected a set name or object");
    const std::size_t n = j.value("dim", inst_.dim);
    if (j.contains("poly")) return SetExpr::polyhedron(polyhedron(j.at("poly"), n, where + ".poly"));
    if (j.contains("whole")) return SetExpr::polyhedron(Polyhedron::whole(n));
    if (j.contains("level"))
      return SetExpr::level(fixed_atom(j.at("level").get<std::string>(), where + ".level"));
    if (j.contains("epigraph"))
      return SetExpr::epigraph(fixed_atom(j.at("epigraph").get<std::string>(), where + ".epigraph"));
    if (j.contains("complement"))
      return SetExpr::complement(polyhedron(j.at("complement"), n, where + ".complement"));
    if (j.contains("union")) {
      std::vector<SetPtr> parts;
      const Json& u = j.at("union");
      for (std::size_t k = 0; k < u.size(); ++k)
        parts.push_back(set_expr(u[k], where + ".union[" + std::to_string(k) + "]"));
      try {
        return SetExpr::union_of(std::move(parts));
      } catch (const MalformedInput& e) {
        fail(where, e.what());
      }
    }
    if (j.contains("preimage")) {
      const Json& p = j.at("preimage");
      Mat M = json_mat(field(p, "M", where + ".preimage"), where + ".preimage.M");
      SetPtr inner = set_expr(field(p, "set", where + ".preimage"), where + ".preimage.set");
      Vec m = p.contains("m") ? json_vec(p.at("m"), where + ".preimage.m") : zeros(M.size());
      try {
        return SetExpr::preimage(std::move(M), std::move(m), inner);
      } catch (const MalformedInput& e) {
        fail(where, e.what());
      }
    }
    if (j.contains("member")) {
      const Json& t = j.at("member");
      FamilyPtr f = family(field(t, "family", where + ".member").get<std::string>());
      try {
        // Independent of the truncation policy, unlike IndexedFamily::instantiate.
        const long i = field(t, "index", where + ".member").get<long>();
        if (f->tmpl) {
          if (i < f->first) fail(where + ".member", "index below the first index");
          return f->tmpl->at(i);
        }
        if (i < 1 || i > static_cast<long>(f->finite.size())) fail(where + ".member", "index out of range");
        return f->finite[static_cast<std::size_t>(i - 1)];
      } catch (const std::exception& e) {
        fail(where + ".member", e.what());
      }
    }
    if (j.contains("truncated")) {
      const Json& t = j.at("truncated");
      FamilyPtr f = family(field(t, "family", where + ".truncated").get<std::string>());
      return SetExpr::truncated(f, field(t, "K", where + ".truncated").get<long>());
    }
    fail(where, "unknown set kind");
  }

  FamilyPtr family(const std::string& name) {
    if (auto it = inst_.families.find(name); it != inst_.families.end()) return it->second;
    const std::string where = "$.families." + name;
    if (!doc_.contains("families") || !doc_.at("families").contains(name)) fail(where, "unknown family");
    if (!resolving_.insert("family:" + name).second) fail(where, "cyclic family reference");
    const Json& j = doc_.at("families").at(name);
    auto f = std::make_shared<IndexedFamily>();
    f->name = name;
    if (j.contains("members")) {
      const Json& ms = j.at("members");
      if (!ms.is_array() || ms.empty()) fail(where + ".members", "expected a nonempty array");
      for (std::size_t k = 0; k < ms.size(); ++k)
        f->finite.push_back(set_expr(ms[k], where + ".members[" + std::to_string(k) + "]"));
      f->dim = f->finite.front()->dim;
      for (const SetPtr& s : f->finite)
        if (s->dim != f->dim) fail(where, "members have different dimensions");
    } else {
      const Json& t = field(j, "template", where);
      const std::string w = where + ".template";
      SetTemplate st;
      st.dim = t.value("dim", inst_.dim);
      if (t.contains("level")) {
        auto a = atom(t.at("level").get<std::string>());
        st.dim = a->dim;
        st.node = TLevelSet{a};
      } else if (t.contains("epigraph")) {
        auto a = atom(t.at("epigraph").get<std::string>());
        st.dim = a->dim + 1;
        st.node = TEpigraphSet{a};
      } else if (t.contains("poly")) {
        st.node = TPolySet{json_polyhedron_t(t.at("poly"), st.dim, w + ".poly")};
      } else if (t.contains("complement")) {
        st.node = TComplementSet{json_polyhedron_t(t.at("complement"), st.dim, w + ".complement")};
      } else {
        fail(w, "unknown template kind");
      }
      f->dim = st.dim;
      f->tmpl = std::move(st);
      f->first = j.value("first", 1L);
    }
    f->policy = inst_.policy;
    if (j.contains("base_point")) f->base_point = json_vec(j.at("base_point"), where + ".base_point");
    resolving_.erase("family:" + name);
    inst_.families[name] = f;
    return f;
  }

  void problem(const std::string& name, const Json& j) {
    const std::string where = "$.problems." + name;
    const std::string kind = field(j, "kind", where).get<std::string>();
    Vec x = inst_.point(field(j, "point", where));
    if (kind == "sip") {
      SipProblem p;
      p.objective = fixed_atom(field(j, "objective", where).get<std::string>(), where + ".objective");
      const std::string form = field(j, "form", where).get<std::string>();
      if (form == "geometric") {
        p.form = ConstraintForm::Geometric;
      } else if (form == "operator") {
        p.form = ConstraintForm::Operator;
        p.M = json_mat(field(j, "M", where), where + ".M");
        p.m = j.contains("m") ? json_vec(j.at("m"), where + ".m") : zeros(p.M.size());
      } else if (form == "inequality") {
        p.form = ConstraintForm::Inequality;
      } else {
        fail(where + ".form", "expected geometric, operator or inequality");
      }
      p.family = family(field(j, "family", where).get<std::string>());
      if (x.size() != p.objective.dim) fail(where + ".point", "dimension mismatch");
      inst_.sips[name] = {std::move(p), std::move(x)};
    } else if (kind == "pareto") {
      ParetoProblem p;
      p.graph = set_expr(field(j, "graph", where), where + ".graph");
      p.n = field(j, "n", where).get<std::size_t>();
      p.m = field(j, "m", where).get<std::size_t>();
      if (p.graph->dim != p.n + p.m) fail(where + ".graph", "graph dimension != n + m");
      const Json& th = field(j, "theta", where);
      if (th.contains("generators")) {
        p.theta = ConvexPolyCone::from_generators(p.m, json_mat(th.at("generators"), where + ".theta"));
      } else {
        p.theta = ConvexPolyCone::from_inequalities(
            p.m, json_mat(field(th, "inequalities", where + ".theta"), where + ".theta"));
      }
      if (j.contains("constraints")) p.constraints = family(j.at("constraints").get<std::string>());
      if (x.size() != p.n + p.m) fail(where + ".point", "dimension mismatch");
      inst_.paretos[name] = {std::move(p), std::move(x)};
    } else {
      fail(where + ".kind", "expected sip or pareto");
    }
  }

  const Json& doc_;
  Instance& inst_;
  std::set<std::string> resolving_;
};

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Q json_rational(const Json& j, const std::string& where) {
  try {
    if (j.is_number_integer()) return Q(j.get<long>());
    if (j.is_string()) return parse_rational(j.get<std::string>());
  } catch (const MalformedInput& e) {
    fail(where, e.what());
  }
  fail(where, "expected an integer or a rational string such as \"3/4\"");
}

Vec json_vec(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array");
  Vec v;
  for (std::size_t k = 0; k < j.size(); ++k)
    v.push_back(json_rational(j[k], where + "[" + std::to_string(k) + "]"));
  return v;
}

Mat json_mat(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(where, "expected an array of rows");
  Mat m;
  for (std::size_t k = 0; k < j.size(); ++k) m.push_back(json_vec(j[k], where + "[" + std::to_string(k) + "]"));
  return m;
}

AtomFn Instance::atom(const std::string& n) const {
  auto it = atoms.find(n);
  if (it == atoms.end()) throw InstanceError("unknown atom " + n);
  if (!atom_index_free(*it->second)) throw InstanceError("atom " + n + " depends on the index i");
  AtomFn f = it->second->at(1);
  f.name = n;
  return f;
}

const SetPtr& Instance::set(const std::string& n) const {
  auto it = sets.find(n);
  if (it == sets.end()) throw InstanceError("unknown set " + n);
  return it->second;
}

const FamilyPtr& Instance::family(const std::string& n) const {
  auto it = families.find(n);
  if (it == families.end()) throw InstanceError("unknown family " + n);
  return it->second;
}

Vec Instance::point(const Json& ref) const {
  if (ref.is_string()) {
    auto it = points.find(ref.get<std::string>());
    if (it == points.end()) throw InstanceError("unknown point " + ref.get<std::string>());
    return it->second;
  }
  return json_vec(ref, "point");
}

TruncationPolicy effective_policy(const Json& t, const Overrides& o) {
  TruncationPolicy p;
  if (t.is_object()) {
    p.K_init = t.value("K_init", p.K_init);
    p.K_max = t.value("K_max", p.K_max);
    p.window = t.value("window", p.window);
  }
  TruncationPolicy env = TruncationPolicy::from_env();
  if (std::getenv("CONEKIT_KMAX")) p.K_max = env.K_max;
  if (o.K_max) p.K_max = *o.K_max;
  if (p.K_max < 1) throw InstanceError("K_max must be at least 1");
  p.K_init = std::min(p.K_init, p.K_max);
  return p;
}

Instance parse_instance(const std::string& text, const std::string& source, const Overrides& o) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InstanceError(source + ": " + line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " + e.what());
  }
  if (!doc.is_object()) throw InstanceError(source + ": top level must be an object");
  if (doc.contains("schema") && doc.at("schema") != kSchema)
    throw InstanceError(source + ": unsupported schema " + doc.at("schema").dump());
  Instance inst;
  inst.name = doc.value("name", source);
  inst.description = doc.value("description", "");
  inst.policy = effective_policy(doc.contains("truncation") ? doc.at("truncation") : Json(), o);
  try {
    Parser(doc, inst).run();
  } catch (const InstanceError& e) {
    throw InstanceError(source + ": " + e.what());
  } catch (const Json::exception& e) {
    throw InstanceError(source + ": " + e.what());
  }
  return inst;
}

Instance load_instance(const std::string& path, const Overrides& o) {
  std::ifstream in(path);
  if (!in) throw InstanceError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_instance(ss.str(), path, o);
}

}  // namespace conekit::cli
