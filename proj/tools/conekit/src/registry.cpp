#include "conekit_cli/registry.hpp"

#include <algorithm>
#include <future>

#include "conekit_cli/report.hpp"

namespace conekit::cli {

namespace {

const char* const kEx34i = R"json({
  "schema": "conekit-instance/1",
  "name": "ex3.4i",
  "description": "Two parabolic level sets in R^2: Ω₁={x : x₁²−x₂≤0}, Ω₂={x : x₁²+x₂≤0}. They meet only at the origin, so T(0;Ω₁∩Ω₂)={0} while T(0;Ω₁)∩T(0;Ω₂)=ℝ×{0}.",
  "dimension": 2,
  "atoms": {
    "p1": {"convex": true, "quadratic": {"H": [[1, 0], [0, 0]], "g": [0, -1]}},
    "p2": {"convex": true, "quadratic": {"H": [[1, 0], [0, 0]], "g": [0, 1]}}
  },
  "sets": {
    "omega1": {"level": "p1"},
    "omega2": {"level": "p2"},
    "both": {"truncated": {"family": "F", "K": 2}}
  },
  "families": {"F": {"members": ["omega1", "omega2"], "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "requests": [
    {"cmd": "cone", "set": "omega1", "which": ["tangent", "frechet", "limiting"]},
    {"cmd": "cone", "set": "omega2", "which": ["tangent"]},
    {"cmd": "cone", "set": "both", "which": ["tangent"]},
    {"cmd": "chip", "family": "F"},
    {"cmd": "qualify", "family": "F", "conditions": ["chip", "nqc", "strong-chip"]}
  ],
  "expected": {
    "cone.omega1.tangent": {"generators": [[1, 0], [-1, 0], [0, 1]]},
    "cone.omega1.frechet": {"generators": [[0, -1]]},
    "cone.omega1.limiting": {"generators": [[0, -1]]},
    "cone.omega2.tangent": {"generators": [[1, 0], [-1, 0], [0, -1]]},
    "cone.both.tangent": {"generators": []},
    "chip.F": "no",
    "qualify.F.chip": "no",
    "qualify.F.nqc": "no",
    "qualify.F.strong-chip": "no"
  }
})json";

const char* const kEx34ii = R"json({
  "schema": "conekit-instance/1",
  "name": "ex3.4ii",
  "description": "Epigraphs Ω_i = epi φ_i in R^2 with φ_i(x):=i x² if x<0 and φ_i(x):=0 if x≥0, i=1,2,... Every T(0;Ω_i)=ℝ×ℝ₊, every finite intersection has tangent cone ℝ×ℝ₊, but the full intersection is ℝ₊×ℝ₊.",
  "dimension": 2,
  "atoms": {
    "phi": {"dim": 1, "convex": true, "pieces": [
      {"region": {"A": [[1]], "b": [0]}, "H": [["i"]]},
      {"region": {"A": [[-1]], "b": [0]}}
    ]}
  },
  "families": {"G": {"template": {"epigraph": "phi"}, "first": 1, "base_point": [0, 0]}},
  "sets": {
    "omega1": {"member": {"family": "G", "index": 1}},
    "omega64": {"member": {"family": "G", "index": 64}},
    "first8": {"truncated": {"family": "G", "K": 8}}
  },
  "points": {"x": [0, 0]},
  "requests": [
    {"cmd": "cone", "set": "omega1", "which": ["tangent", "frechet"]},
    {"cmd": "cone", "set": "omega64", "which": ["tangent"]},
    {"cmd": "cone", "set": "first8", "which": ["tangent"]},
    {"cmd": "chip", "family": "G"}
  ],
  "expected": {
    "cone.omega1.tangent": {"generators": [[1, 0], [-1, 0], [0, 1]]},
    "cone.omega1.frechet": {"generators": [[0, -1]]},
    "cone.omega64.tangent": {"generators": [[1, 0], [-1, 0], [0, 1]]},
    "cone.first8.tangent": {"generators": [[1, 0], [-1, 0], [0, 1]]},
    "chip.G": "no"
  }
})json";

const char* const kCor33 = R"json({
  "schema": "conekit-instance/1",
  "name": "cor3.3",
  "description": "Half-planes Ω_i={x : x₁+i x₂≤0}, i=0,1,2,... with normals a_i=(1,i). The finite sums of normals are not closed: their closure {x₁≥0, x₂≥0} adds the limit direction (0,1).",
  "dimension": 2,
  "families": {"H": {"template": {"poly": {"A": [["1", "i"]], "b": [0]}}, "first": 0, "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "requests": [
    {"cmd": "chip", "family": "H"},
    {"cmd": "qualify", "family": "H", "conditions": ["chip", "nqc", "ncc", "strong-chip"]},
    {"cmd": "certify", "label": "limit-normal", "frechet": {"family": "H", "xstar": [0, 1], "K": 64}}
  ],
  "expected": {
    "chip.H": "yes",
    "qualify.H.chip": "yes",
    "qualify.H.nqc": "yes",
    "qualify.H.ncc": "no",
    "qualify.H.strong-chip": "yes",
    "certify.limit-normal.frechet": "gap"
  }
})json";

const char* const kEx48iLin = R"json({
  "schema": "conekit-instance/1",
  "name": "ex4.8i-lin",
  "description": "Linear inequalities φ_i(x)=x₁+i x₂≤0, i=0,1,2,... at the origin, objective −x₁. CHIP holds but the subgradient cone is not closed.",
  "dimension": 2,
  "atoms": {
    "lin": {"affine": {"a": ["1", "i"], "c": 0}},
    "obj": {"affine": {"a": [-1, 0], "c": 0}}
  },
  "families": {"L": {"template": {"level": "lin"}, "first": 0, "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "problems": {"sip": {"kind": "sip", "objective": "obj", "form": "inequality", "family": "L", "point": "x"}},
  "requests": [
    {"cmd": "chip", "family": "L"},
    {"cmd": "qualify", "family": "L", "conditions": ["chip", "scc", "nqc", "sqc", "fmcq"]},
    {"cmd": "certify", "problem": "sip"}
  ],
  "expected": {
    "chip.L": "yes",
    "qualify.L.chip": "yes",
    "qualify.L.scc": "no",
    "qualify.L.nqc": "yes",
    "qualify.L.sqc": "yes",
    "qualify.L.fmcq": "no",
    "certify.sip.upper": "certified",
    "certify.sip.lower": "certified"
  }
})json";

const char* const kEx48iQuad = R"json({
  "schema": "conekit-instance/1",
  "name": "ex4.8i-quad",
  "description": "Quadratic inequalities φ_i(x)=i x₁²−x₂≤0, i=1,2,... at the origin. The subgradient cone is closed but CHIP fails.",
  "dimension": 2,
  "atoms": {"q": {"convex": true, "quadratic": {"H": [["i", 0], [0, 0]], "g": [0, -1]}}},
  "families": {"Q": {"template": {"level": "q"}, "first": 1, "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "requests": [
    {"cmd": "chip", "family": "Q"},
    {"cmd": "qualify", "family": "Q", "conditions": ["chip", "scc", "sqc", "nqc"]}
  ],
  "expected": {
    "chip.Q": "no",
    "qualify.Q.chip": "no",
    "qualify.Q.scc": "yes",
    "qualify.Q.sqc": "yes",
    "qualify.Q.nqc": "yes"
  }
})json";

const char* const kEx48ii = R"json({
  "schema": "conekit-instance/1",
  "name": "ex4.8ii",
  "description": "Piecewise inequalities φ_i(x)=i x₁²−x₂ for x₁≤0 and −x₂ for x₁≥0, i=1,2,... at the origin, objective −x₂. The intersection is the closed first quadrant, so CHIP fails at the origin; SCC holds and both conjugate closedness conditions fail.",
  "dimension": 2,
  "atoms": {
    "phi": {"convex": true, "pieces": [
      {"region": {"A": [[1, 0]], "b": [0]}, "H": [["i", 0], [0, 0]], "g": [0, -1]},
      {"region": {"A": [[-1, 0]], "b": [0]}, "g": [0, -1]}
    ], "conjugate": {
      "domain": {"A": [[1, 0], [0, 1], [0, -1]], "b": [0, -1, 1]},
      "H": [["1/(4*i)", 0], [0, 0]]
    }},
    "obj": {"affine": {"a": [0, -1], "c": 0}}
  },
  "families": {"E": {"template": {"level": "phi"}, "first": 1, "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "problems": {"sip": {"kind": "sip", "objective": "obj", "form": "inequality", "family": "E", "point": "x"}},
  "requests": [
    {"cmd": "chip", "family": "E"},
    {"cmd": "qualify", "family": "E", "conditions": ["chip", "scc", "fmcq", "cqc"], "objective": "obj"},
    {"cmd": "certify", "problem": "sip"}
  ],
  "expected": {
    "chip.E": "no",
    "qualify.E.chip": "no",
    "qualify.E.scc": "yes",
    "qualify.E.fmcq": "no",
    "qualify.E.cqc": "no",
    "certify.sip.upper": "hypothesis-violation",
    "certify.sip.lower": "hypothesis-violation"
  }
})json";

const char* const kFourQuadrant = R"json({
  "schema": "conekit-instance/1",
  "name": "four-quadrant",
  "description": "The four closed quadrants of R^2 as cones Λ₁..Λ₄ meeting only at the origin. Bounded shifts separate them and weighted normals x*_i with Σ2^{-i}x*_i=0 exist.",
  "dimension": 2,
  "sets": {
    "q1": {"poly": {"A": [[-1, 0], [0, -1]], "b": [0, 0]}},
    "q2": {"poly": {"A": [[1, 0], [0, -1]], "b": [0, 0]}},
    "q3": {"poly": {"A": [[1, 0], [0, 1]], "b": [0, 0]}},
    "q4": {"poly": {"A": [[-1, 0], [0, 1]], "b": [0, 0]}}
  },
  "families": {"Q": {"members": ["q1", "q2", "q3", "q4"], "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "requests": [
    {"cmd": "cone", "set": "q1", "which": ["tangent", "frechet", "limiting"]},
    {"cmd": "extremal", "label": "quadrants", "sets": ["q1", "q2", "q3", "q4"], "point": "x", "R": 4},
    {"cmd": "extremal", "label": "family", "family": "Q", "point": "x", "R": 4},
    {"cmd": "certify", "label": "corner", "frechet": {"cones": [
      {"inequalities": [[0, -1]]}, {"inequalities": [[-1, 0]]}], "xstar": [-1, -1]}}
  ],
  "expected": {
    "cone.q1.tangent": {"generators": [[1, 0], [0, 1]]},
    "cone.q1.frechet": {"generators": [[-1, 0], [0, -1]]},
    "cone.q1.limiting": {"generators": [[-1, 0], [0, -1]]},
    "extremal.quadrants": "certified",
    "extremal.quadrants.witness": "found",
    "extremal.family.witness": "found",
    "certify.corner.frechet": "represented"
  }
})json";

const char* const kAbsxPareto = R"json({
  "schema": "conekit-instance/1",
  "name": "absx-pareto",
  "description": "Set-valued map F(x)={y : y≥|x|} on R with the order cone ℝ₊. The point (0,0) is minimal in every sense; the multiplier is y*=1 with x*=0 in D*F(0,0)(1).",
  "dimension": 2,
  "atoms": {"abs": {"dim": 1, "convex": true, "pieces": [
    {"region": {"A": [[-1]], "b": [0]}, "g": [1]},
    {"region": {"A": [[1]], "b": [0]}, "g": [-1]}
  ]}},
  "sets": {"graph": {"epigraph": "abs"}},
  "points": {"x": [0, 0]},
  "problems": {"P": {"kind": "pareto", "graph": "graph", "n": 1, "m": 1, "theta": {"generators": [[1]]}, "point": "x"}},
  "requests": [
    {"cmd": "cone", "set": "graph", "which": ["tangent", "limiting"]},
    {"cmd": "pareto", "problem": "P"}
  ],
  "expected": {
    "cone.graph.tangent": {"generators": [[1, 1], [-1, 1]]},
    "cone.graph.limiting": {"generators": [[1, -1], [-1, -1]]},
    "pareto.P.tangential-graphical": "yes",
    "pareto.P.graphical": "yes",
    "pareto.P.fully-localized": "yes",
    "pareto.P.necessary": "certified"
  }
})json";

const char* const kConstrainedPareto = R"json({
  "schema": "conekit-instance/1",
  "name": "constrained-pareto",
  "description": "F(x)={y : y≥−x} minimized over Ω={x≤0} with order cone ℝ₊. The minimizer (0,0) needs the constraint normal: y*=1, x*=−1 and 1∈N(0;Ω).",
  "dimension": 2,
  "sets": {
    "graph": {"poly": {"A": [[-1, -1]], "b": [0]}},
    "omega": {"dim": 1, "poly": {"A": [[1]], "b": [0]}}
  },
  "families": {"C": {"members": ["omega"], "base_point": [0]}},
  "points": {"x": [0, 0]},
  "problems": {"P": {"kind": "pareto", "graph": "graph", "n": 1, "m": 1, "theta": {"generators": [[1]]}, "constraints": "C", "point": "x"}},
  "requests": [{"cmd": "pareto", "problem": "P"}],
  "expected": {
    "pareto.P.tangential-graphical": "yes",
    "pareto.P.graphical": "yes",
    "pareto.P.fully-localized": "yes",
    "pareto.P.necessary": "certified"
  }
})json";

const char* const kFatImage = R"json({
  "schema": "conekit-instance/1",
  "name": "fat-image",
  "description": "Constant map F(x)=[−1,1] on R with order cone ℝ₊ at (0,0). The value 0 is not minimal in F(0), so every minimality notion fails and no multiplier rule applies.",
  "dimension": 2,
  "sets": {
    "graph": {"poly": {"A": [[0, 1], [0, -1]], "b": [1, 1]}},
    "plane": {"whole": true}
  },
  "points": {"x": [0, 0]},
  "problems": {"P": {"kind": "pareto", "graph": "graph", "n": 1, "m": 1, "theta": {"generators": [[1]]}, "point": "x"}},
  "requests": [
    {"cmd": "cone", "set": "graph", "which": ["tangent", "frechet"]},
    {"cmd": "cone", "set": "plane", "which": ["tangent"]},
    {"cmd": "pareto", "problem": "P"}
  ],
  "expected": {
    "cone.graph.tangent": {"inequalities": []},
    "cone.graph.frechet": {"generators": []},
    "cone.plane.tangent": {"inequalities": []},
    "pareto.P.tangential-graphical": "no",
    "pareto.P.graphical": "no",
    "pareto.P.fully-localized": "no",
    "pareto.P.necessary": "hypothesis-violation"
  }
})json";

}  // namespace

const std::vector<RegistryEntry>& registry() {
  static const std::vector<RegistryEntry> entries = [] {
    std::vector<RegistryEntry> v = {
        {"ex3.4i", kEx34i},           {"ex3.4ii", kEx34ii},
        {"cor3.3", kCor33},           {"ex4.8i-lin", kEx48iLin},
        {"ex4.8i-quad", kEx48iQuad},  {"ex4.8ii", kEx48ii},
        {"four-quadrant", kFourQuadrant}, {"absx-pareto", kAbsxPareto},
        {"constrained-pareto", kConstrainedPareto}, {"fat-image", kFatImage},
    };
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return v;
  }();
  return entries;
}

std::optional<RegistryEntry> find_entry(const std::string& name) {
  for (const RegistryEntry& e : registry())
    if (e.name == name) return e;
  return std::nullopt;
}

Instance load_entry(const RegistryEntry& e, const Overrides& o) {
  return parse_instance(e.document, "registry:" + e.name, o);
}

EntryRun run_entry(const Instance& inst, const RunOptions& opt) {
  EntryRun run;
  Json results = Json::array();
  Json verdicts = Json::object();
  for (const Json& r : inst.requests) {
    RequestOutcome o = run_request(inst, r, opt);
    run.inconclusive = run.inconclusive || o.inconclusive;
    run.error = run.error || o.error;
    for (const auto& [k, v] : o.verdicts.items()) verdicts[k] = v;
    results.push_back(std::move(o.result));
  }
  Json mism = compare_expected(inst, verdicts);
  run.mismatches = mism.size();
  run.doc["name"] = inst.name;
  run.doc["verdicts"] = std::move(verdicts);
  run.doc["mismatches"] = std::move(mism);
  run.doc["results"] = std::move(results);
  return run;
}

static Json header(const std::string& cmd) {
  Json d;
  d["tool"] = "conekit";
  d["version"] = kToolVersion;
  d["command"] = cmd;
  return d;
}

CommandReport registry_list() {
  CommandReport rep;
  rep.doc = header("registry list");
  Json es = Json::array();
  for (const RegistryEntry& e : registry()) {
    Json d = Json::parse(e.document);
    es.push_back({{"name", e.name}, {"description", d.value("description", "")}});
  }
  rep.doc["entries"] = std::move(es);
  return rep;
}

CommandReport registry_show(const std::string& name) {
  CommandReport rep;
  rep.doc = header("registry show");
  auto e = find_entry(name);
  if (!e) {
    rep.doc["error"] = "no registry entry named " + name;
    rep.exit_code = 1;
    return rep;
  }
  rep.doc["entry"] = Json::parse(e->document);
  return rep;
}

CommandReport registry_run_all(const RunOptions& opt, const Overrides& o) {
  CommandReport rep;
  rep.doc = header("registry run-all");
  std::vector<std::future<EntryRun>> jobs;
  for (const RegistryEntry& e : registry())
    jobs.push_back(std::async(std::launch::async, [e, &opt, &o] {
      try {
        return run_entry(load_entry(e, o), opt);
      } catch (const std::exception& ex) {
        EntryRun r;
        r.error = true;
        r.doc["name"] = e.name;
        r.doc["error"] = ex.what();
        return r;
      }
    }));
  Json entries = Json::array();
  std::size_t total = 0;
  bool error = false;
  for (auto& j : jobs) {
    EntryRun r = j.get();
    total += r.mismatches;
    error = error || r.error;
    entries.push_back(std::move(r.doc));
  }
  rep.doc["entries"] = std::move(entries);
  rep.doc["total_mismatches"] = total;
  rep.exit_code = (total > 0 || error) ? 1 : 0;
  return rep;
}

}  // namespace conekit::cli
