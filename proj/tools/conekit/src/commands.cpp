#include "conekit_cli/commands.hpp"

#include <chrono>

#include "conekit/families.hpp"
#include "conekit/oracle.hpp"
#include "conekit/qualconds.hpp"
#include "conekit_cli/report.hpp"

namespace conekit::cli {

namespace {

std::string req_str(const Json& req, const char* key) {
  if (!req.contains(key) || !req.at(key).is_string())
    throw InstanceError(std::string("request: missing string field \"") + key + "\"");
  return req.at(key).get<std::string>();
}

std::vector<std::string> str_list(const Json& req, const char* key, std::vector<std::string> dflt) {
  if (!req.contains(key)) return dflt;
  return req.at(key).get<std::vector<std::string>>();
}

Vec family_point(const Instance& inst, const Json& req, const IndexedFamily& f) {
  if (req.contains("point")) return inst.point(req.at("point"));
  if (f.base_point) return *f.base_point;
  if (inst.points.count("x")) return inst.points.at("x");
  return zeros(f.dim);
}

bool is_inconclusive(Holds h) { return h == Holds::Inconclusive; }

std::string violation_verdict(const HypothesisViolation& e, RequestOutcome& out) {
  if (std::string(e.what()).find("inconclusive") != std::string::npos) out.inconclusive = true;
  return "hypothesis-violation";
}

// ---- cone ----------------------------------------------------------------

void run_cone(const Instance& inst, const Json& req, const RunOptions& opt, const std::string& label,
              RequestOutcome& out) {
  const std::string set = req_str(req, "set");
  const SetPtr& s = inst.set(set);
  Vec x = req.contains("point") ? inst.point(req.at("point")) : inst.points.count("x") ? inst.points.at("x") : zeros(s->dim);
  if (x.size() != s->dim) throw InstanceError("cone " + label + ": point dimension != set dimension");
  std::vector<std::string> which = str_list(req, "which", {"tangent"});
  out.result["set"] = set;
  out.result["point"] = vec_json(x);
  for (const std::string& w : which) {
    ConeResult r;
    if (w == "tangent") {
      r = tangent_cone(*s, x);
    } else if (w == "frechet") {
      r = frechet_normal_cone(*s, x);
    } else if (w == "limiting") {
      r = limiting_normal_cone(*s, x);
    } else {
      throw InstanceError("cone: unknown kind " + w);
    }
    Json rj = to_json(r);
    if (opt.tol && w != "frechet") {
      OracleOptions oo;
      oo.seed = opt.seed;
      oo.angular_tolerance_deg = *opt.tol;
      Agreement a = w == "tangent" ? compare_tangent(r.cone, oracle_tangent(*s, x, oo))
                                   : compare_normal(r.cone, oracle_normal(*s, x, oo));
      rj["oracle"] = {{"total", a.total},
                      {"agree", a.agree},
                      {"disagree_in_band", a.disagree_in_band},
                      {"disagree_outside_band", a.disagree_outside_band},
                      {"band_deg", approx(*opt.tol)},
                      {"seed", opt.seed},
                      {"exact", false}};
    }
    out.result[w] = std::move(rj);
    out.verdicts["cone." + label + "." + w] = cone_json(r.cone);
  }
}

// ---- chip / qualify ---------------------------------------------------------

Json qualify_one(const Instance& inst, const std::string& cond, const IndexedFamily& f, const Vec& x,
                 const Json& req, Holds& holds) {
  if (cond == "chip") {
    ChipVerdict v = chip_check(f, x);
    holds = v.holds;
    return to_json(v);
  }
  if (cond == "chip-regularity" || cond == "chip-rank" || cond == "chip-invex") {
    ChipVerdict v = cond == "chip-regularity" ? chip_via_regularity(f, x)
                    : cond == "chip-rank"     ? chip_via_rank(f, x)
                                              : invex_chip_check(f, x);
    holds = v.holds;
    Json j = to_json(v);
    j["property"] = cond;
    return j;
  }
  if (cond == "strong-chip") {
    StrongChipReport r = asymptotic_strong_chip_check(f, x);
    holds = r.holds;
    return to_json(r);
  }
  QCVerdict v;
  if (cond == "nqc") {
    v = nqc_check(f, x);
  } else if (cond == "interior-nqc") {
    v = interior_point_nqc(f, x);
  } else if (cond == "ncc") {
    v = ncc_check(f, x);
  } else if (cond == "scc") {
    v = scc_check(f, x);
  } else if (cond == "sqc") {
    v = sqc_check(f, x);
  } else if (cond == "fmcq") {
    v = fmcq_check(f);
  } else if (cond == "cqc") {
    v = cqc_check(inst.atom(req_str(req, "objective")), f);
  } else {
    throw InstanceError("qualify: unknown condition " + cond);
  }
  holds = v.holds;
  return to_json(v);
}

void run_qualify(const Instance& inst, const Json& req, const std::string& label, bool chip_only,
                 RequestOutcome& out) {
  const std::string fam = req_str(req, "family");
  const IndexedFamily& f = *inst.family(fam);
  Vec x = family_point(inst, req, f);
  std::vector<std::string> conds =
      chip_only ? std::vector<std::string>{"chip"}
                : str_list(req, "conditions", {"chip", "nqc", "ncc", "scc", "sqc"});
  out.result["family"] = fam;
  out.result["point"] = vec_json(x);
  Json vs = Json::object();
  for (const std::string& c : conds) {
    Holds h = Holds::Inconclusive;
    try {
      vs[c] = qualify_one(inst, c, f, x, req, h);
    } catch (const Unsupported& e) {
      vs[c] = {{"property", c}, {"holds", "unsupported"}, {"note", e.what()}};
      h = Holds::NotApplicable;
    }
    out.inconclusive = out.inconclusive || is_inconclusive(h);
    const std::string key = chip_only ? "chip." + label : "qualify." + label + "." + c;
    out.verdicts[key] = vs[c].at("holds");
  }
  out.result["verdicts"] = std::move(vs);
}

// ---- certify -----------------------------------------------------------------

void run_frechet(const Instance& inst, const Json& req, const std::string& label, RequestOutcome& out) {
  const Json& fr = req.at("frechet");
  Vec xs = json_vec(fr.at("xstar"), "xstar");
  FrechetRep r;
  if (fr.contains("family")) {
    const IndexedFamily& f = *inst.family(fr.at("family").get<std::string>());
    Vec x = family_point(inst, fr, f);
    r = frechet_rep_check(f, x, xs, fr.value("K", f.policy.K_init));
  } else {
    std::vector<ConvexPolyCone> cones;
    for (const Json& c : fr.at("cones")) {
      ConeRep cr = cone_from_json(c, xs.size());
      if (cr.pieces.size() != 1) throw InstanceError("frechet: cones must be convex");
      cones.push_back(cr.pieces.front());
    }
    r = frechet_rep_check(cones, xs);
  }
  out.result["frechet"] = to_json(r);
  out.verdicts["certify." + label + ".frechet"] = r.represented ? "represented" : "gap";
}

void run_certify(const Instance& inst, const Json& req, const std::string& label, RequestOutcome& out) {
  if (req.contains("frechet")) return run_frechet(inst, req, label, out);
  const std::string name = req_str(req, "problem");
  auto it = inst.sips.find(name);
  if (it == inst.sips.end()) throw InstanceError("certify: unknown sip problem " + name);
  const auto& [p, x] = it->second;
  out.result["problem"] = name;
  out.result["point"] = vec_json(x);
  for (const std::string& m : str_list(req, "modes", {"upper", "lower"})) {
    SipMode mode;
    if (m == "upper") {
      mode = SipMode::Upper;
    } else if (m == "lower") {
      mode = SipMode::Lower;
    } else {
      throw InstanceError("certify: unknown mode " + m);
    }
    std::string verdict;
    try {
      KKTCertificate c = sip_certify(p, x, mode);
      Json cj = to_json(c);
      cj["reverified"] = reverify(c, p, x);
      out.result[m] = std::move(cj);
      verdict = c.status == KKTStatus::Certified ? "certified" : "condition-violated";
    } catch (const HypothesisViolation& e) {
      out.result[m] = {{"status", "hypothesis-violation"}, {"reason", e.what()}};
      verdict = violation_verdict(e, out);
    }
    out.verdicts["certify." + label + "." + m] = verdict;
  }
}

// ---- extremal ------------------------------------------------------------------

void run_extremal(const Instance& inst, const Json& req, const std::string& label, RequestOutcome& out) {
  const Q R = req.contains("R") ? json_rational(req.at("R"), "R") : Q(4);
  if (req.contains("family")) {
    const IndexedFamily& f = *inst.family(req_str(req, "family"));
    Vec x = family_point(inst, req, f);
    ShiftWitness w = tangential_extremality_witness(f, x, R, req.value("K", f.policy.K_init));
    out.result["witness"] = to_json(w);
    out.verdicts["extremal." + label + ".witness"] = w.found ? "found" : "not-found";
    return;
  }
  std::vector<ConeRep> cones;
  if (req.contains("sets")) {
    Vec x = inst.point(req.at("point"));
    for (const Json& s : req.at("sets")) {
      ConeResult t = tangent_cone(*inst.set(s.get<std::string>()), x);
      if (!t.exact) throw Unsupported("extremal: tangent cone of " + s.get<std::string>() + " is not exact");
      cones.push_back(t.cone);
    }
  } else {
    const std::size_t n = req.value("dim", inst.dim);
    for (const Json& c : req.at("cones")) cones.push_back(cone_from_json(c, n));
  }
  Json cs = Json::array();
  for (const ConeRep& c : cones) cs.push_back(cone_json(c));
  out.result["cones"] = std::move(cs);
  ShiftWitness w = tangential_extremality_witness(cones, R);
  out.result["witness"] = to_json(w);
  out.verdicts["extremal." + label + ".witness"] = w.found ? "found" : "not-found";
  std::string verdict;
  try {
    auto c = extremal_certificate(cones, R);
    if (c) {
      Json cj = to_json(*c);
      cj["verified"] = verify(*c, cones);
      out.result["certificate"] = std::move(cj);
      verdict = "certified";
    } else {
      out.result["certificate"] = nullptr;
      verdict = "not-found";
    }
  } catch (const HypothesisViolation& e) {
    out.result["certificate"] = {{"status", "hypothesis-violation"}, {"reason", e.what()}};
    verdict = violation_verdict(e, out);
  }
  out.verdicts["extremal." + label] = verdict;
}

// ---- pareto ---------------------------------------------------------------------

void run_pareto(const Instance& inst, const Json& req, const std::string& label, RequestOutcome& out) {
  const std::string name = req_str(req, "problem");
  auto it = inst.paretos.find(name);
  if (it == inst.paretos.end()) throw InstanceError("pareto: unknown problem " + name);
  const auto& [p, xy] = it->second;
  out.result["problem"] = name;
  out.result["point"] = vec_json(xy);
  for (const std::string& n :
       str_list(req, "notions", {"tangential-graphical", "graphical", "fully-localized"})) {
    ParetoNotion notion;
    if (n == "tangential-graphical") {
      notion = ParetoNotion::TangentialGraphical;
    } else if (n == "graphical") {
      notion = ParetoNotion::Graphical;
    } else if (n == "fully-localized") {
      notion = ParetoNotion::FullyLocalized;
    } else {
      throw InstanceError("pareto: unknown notion " + n);
    }
    ParetoDecision d = pareto_check(p, xy, notion);
    out.inconclusive = out.inconclusive || is_inconclusive(d.holds);
    out.result[n] = to_json(d);
    out.verdicts["pareto." + label + "." + n] = to_string(d.holds);
  }
  if (req.value("necessary", true)) {
    std::string verdict;
    try {
      auto c = pareto_necessary_cond(p, xy);
      if (c) {
        Json cj = to_json(*c);
        cj["verified"] = verify(*c, p, xy);
        out.result["necessary"] = std::move(cj);
        verdict = "certified";
      } else {
        out.result["necessary"] = nullptr;
        verdict = "not-found";
      }
    } catch (const HypothesisViolation& e) {
      out.result["necessary"] = {{"status", "hypothesis-violation"}, {"reason", e.what()}};
      verdict = violation_verdict(e, out);
    }
    out.verdicts["pareto." + label + ".necessary"] = verdict;
  }
}

std::string default_label(const Json& req) {
  if (req.contains("label")) return req.at("label").get<std::string>();
  for (const char* k : {"set", "family", "problem"})
    if (req.contains(k) && req.at(k).is_string()) return req.at(k).get<std::string>();
  return "request";
}

Json adhoc_request(const std::string& cmd, const RunOptions& o) {
  Json r;
  r["cmd"] = cmd;
  if (o.set) r["set"] = *o.set;
  if (o.point) r["point"] = *o.point;
  if (o.which) {
    // comma list, e.g. "tangent,limiting"
    Json kinds = Json::array();
    std::size_t start = 0;
    for (std::size_t end; (end = o.which->find(',', start)) != std::string::npos; start = end + 1)
      kinds.push_back(o.which->substr(start, end - start));
    kinds.push_back(o.which->substr(start));
    r["which"] = std::move(kinds);
  }
  if (o.family) r["family"] = *o.family;
  if (o.problem) r["problem"] = *o.problem;
  if (o.objective) r["objective"] = *o.objective;
  if (!o.conditions.empty()) r["conditions"] = o.conditions;
  if (!o.modes.empty()) r["modes"] = o.modes;
  if (!o.notions.empty()) r["notions"] = o.notions;
  return r;
}

bool has_adhoc(const RunOptions& o) {
  return o.set || o.point || o.which || o.family || o.problem || o.objective || !o.conditions.empty() ||
         !o.modes.empty() || !o.notions.empty();
}

// Requests implied by the instance when it lists none for the command.
Json implied_requests(const std::string& cmd, const Instance& inst) {
  Json rs = Json::array();
  if (cmd == "chip" || cmd == "qualify") {
    for (const auto& [name, f] : inst.families)
      if (f->base_point) rs.push_back({{"cmd", cmd}, {"family", name}});
  } else if (cmd == "certify") {
    for (const auto& [name, p] : inst.sips) rs.push_back({{"cmd", cmd}, {"problem", name}});
  } else if (cmd == "pareto") {
    for (const auto& [name, p] : inst.paretos) rs.push_back({{"cmd", cmd}, {"problem", name}});
  }
  return rs;
}

}  // namespace

RequestOutcome run_request(const Instance& inst, const Json& req, const RunOptions& opt) {
  RequestOutcome out;
  out.result = Json::object();
  out.verdicts = Json::object();
  const std::string cmd = req_str(req, "cmd");
  const std::string label = default_label(req);
  out.result["cmd"] = cmd;
  out.result["label"] = label;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    if (cmd == "cone") {
      run_cone(inst, req, opt, label, out);
    } else if (cmd == "chip" || cmd == "qualify") {
      run_qualify(inst, req, label, cmd == "chip", out);
    } else if (cmd == "certify") {
      run_certify(inst, req, label, out);
    } else if (cmd == "extremal") {
      run_extremal(inst, req, label, out);
    } else if (cmd == "pareto") {
      run_pareto(inst, req, label, out);
    } else {
      throw InstanceError("unknown request kind " + cmd);
    }
  } catch (const std::exception& e) {
    out.error = true;
    out.result["error"] = e.what();
  }
  if (opt.timing)
    out.result["elapsed_s"] =
        approx(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  return out;
}

Json compare_expected(const Instance& inst, const Json& verdicts) {
  Json mismatches = Json::array();
  for (const auto& [key, want] : inst.expected.items()) {
    if (!verdicts.contains(key)) {
      mismatches.push_back({{"key", key}, {"expected", want}, {"actual", nullptr}});
      continue;
    }
    const Json& got = verdicts.at(key);
    bool ok;
    if (want.is_object()) {
      ok = got.is_object() && cone_equal(cone_from_json(got, got.at("dim").get<std::size_t>()),
                                         cone_from_json(want, got.at("dim").get<std::size_t>()));
    } else {
      ok = got == want;
    }
    if (!ok) mismatches.push_back({{"key", key}, {"expected", want}, {"actual", got}});
  }
  return mismatches;
}

CommandReport run_command(const std::string& cmd, const Instance& inst, const RunOptions& opt) {
  Json reqs = Json::array();
  if (has_adhoc(opt)) {
    Json r = adhoc_request(cmd, opt);
    // A lone family or problem is the implied target.
    if (!r.contains("family") && inst.families.size() == 1 && (cmd == "chip" || cmd == "qualify"))
      r["family"] = inst.families.begin()->first;
    if (!r.contains("problem") && cmd == "certify" && inst.sips.size() == 1) r["problem"] = inst.sips.begin()->first;
    if (!r.contains("problem") && cmd == "pareto" && inst.paretos.size() == 1)
      r["problem"] = inst.paretos.begin()->first;
    reqs.push_back(std::move(r));
  } else {
    for (const Json& r : inst.requests)
      if (r.value("cmd", "") == cmd) reqs.push_back(r);
    if (reqs.empty()) reqs = implied_requests(cmd, inst);
  }
  CommandReport rep;
  Json& d = rep.doc;
  d["tool"] = "conekit";
  d["version"] = kToolVersion;
  d["command"] = cmd;
  d["instance"] = inst.name;
  d["seed"] = opt.seed;
  d["truncation"] = {{"K_init", inst.policy.K_init}, {"K_max", inst.policy.K_max}, {"window", inst.policy.window}};
  if (reqs.empty()) {
    d["error"] = "no " + cmd + " requests in the instance; pass the target on the command line";
    rep.exit_code = 1;
    return rep;
  }
  Json results = Json::array();
  Json verdicts = Json::object();
  bool inconclusive = false, error = false, all_exact = true;
  const auto t0 = std::chrono::steady_clock::now();
  for (const Json& r : reqs) {
    RequestOutcome o = run_request(inst, r, opt);
    inconclusive = inconclusive || o.inconclusive;
    error = error || o.error;
    for (const auto& [k, v] : o.verdicts.items()) verdicts[k] = v;
    const std::string dump = o.result.dump();
    if (dump.find("\"exact\":false") != std::string::npos) all_exact = false;
    results.push_back(std::move(o.result));
  }
  d["results"] = std::move(results);
  d["verdicts"] = verdicts;
  d["exactness"] = all_exact ? "all-exact" : "contains-approximate-or-truncated";
  Json filtered = Json::object();
  for (const auto& [k, v] : inst.expected.items())
    if (verdicts.contains(k)) filtered[k] = v;
  if (!filtered.empty()) {
    Instance probe;
    probe.expected = filtered;
    d["expectation_mismatches"] = compare_expected(probe, verdicts);
  }
  if (opt.timing)
    d["elapsed_s"] = approx(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  rep.exit_code = error ? 1 : inconclusive ? 2 : 0;
  return rep;
}

}  // namespace conekit::cli
