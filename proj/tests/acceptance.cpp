// Acceptance run: one PASS/FAIL line per criterion with its timing.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "conekit/certify.hpp"
#include "conekit/families.hpp"
#include "conekit/generators.hpp"
#include "conekit/oracle.hpp"
#include "conekit/qualconds.hpp"
#include "conekit/varcalc.hpp"
#include "conekit_cli/registry.hpp"

using namespace conekit;
using namespace conekit::cli;

namespace {

// Pinned limits (seconds) and tolerances.
constexpr double kLimit1 = 1.0;
constexpr double kLimit2 = 2.0;
constexpr double kLimit3 = 30.0;
constexpr double kLimit4 = 5.0;
constexpr double kLimit5 = 30.0;
constexpr double kLimit6 = 30.0;
constexpr double kLimit7 = 60.0;
constexpr double kLimit8 = 2.0;
constexpr double kLimit9 = 5.0;
constexpr double kLimitTotal = 180.0;
constexpr double kOracleAgreement = 0.999;
constexpr double kAngularBandDeg = 1.0;
constexpr int kSamplePoints = 10000;
constexpr int kRandomChipFamilies = 100;
constexpr int kRandomExtremalSystems = 50;
constexpr int kRandomPolarCones = 200;
constexpr unsigned kSeed = 20241017;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  std::string failures;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      failures += " [fail: " + what + "]";
    }
  }
};

const Vec kOrigin2{0, 0};

ConeRep gens(std::size_t n, Mat g) { return ConeRep(ConvexPolyCone::from_generators(n, std::move(g))); }
ConeRep upper_half() { return gens(2, {{1, 0}, {-1, 0}, {0, 1}}); }
ConeRep lower_half() { return gens(2, {{1, 0}, {-1, 0}, {0, -1}}); }
ConeRep quadrant() { return gens(2, {{1, 0}, {0, 1}}); }

Instance entry(const std::string& name) { return load_entry(*find_entry(name)); }

Vec random_vec(std::mt19937& rng, std::size_t n, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  for (;;) {
    Vec v(n);
    for (Q& q : v) q = d(rng);
    if (!is_zero(v)) return v;
  }
}

// ---- criteria ------------------------------------------------------------

void two_parabolas(Outcome& o) {
  Instance inst = entry("ex3.4i");
  const IndexedFamily& f = *inst.family("F");
  o.check(cone_equal(tangent_cone(*inst.set("omega1"), kOrigin2).cone, upper_half()), "T(0;O1)");
  o.check(cone_equal(tangent_cone(*inst.set("omega2"), kOrigin2).cone, lower_half()), "T(0;O2)");
  o.check(cone_equal(tangent_cone(*inst.set("both"), kOrigin2).cone, gens(2, {})), "T(0;O1nO2)");
  ChipSides s = chip_sides(f, kOrigin2);
  o.check(cone_equal(s.rhs, gens(2, {{1, 0}, {-1, 0}})), "intersection of tangents");
  ChipVerdict v = chip_check(f, kOrigin2);
  o.check(v.holds == Holds::No && v.exact, "CHIP verdict");
  o.check(v.witness && (*v.witness)[1] == 0 && (*v.witness)[0] != 0, "witness");
  if (v.witness) o.detail << "witness " << to_string(*v.witness);
}

void steepening(Outcome& o) {
  Instance inst = entry("ex3.4ii");
  const IndexedFamily& f = *inst.family("G");
  bool all = true;
  for (long i = 1; i <= 64; ++i) all = all && cone_equal(tangent_cone(*f.tmpl->at(i), kOrigin2).cone, upper_half());
  o.check(all, "member tangents");
  ChipSides s = chip_sides(f, kOrigin2);
  o.check(cone_equal(s.lhs, quadrant()), "T(0;intersection)");
  ChipVerdict v = chip_check(f, kOrigin2);
  o.check(v.holds == Holds::No, "CHIP verdict");
  o.detail << "64 members R x R_+, intersection R_+ x R_+, CHIP " << to_string(v.holds);
}

void closed_hull_of_normals(Outcome& o) {
  Instance inst = entry("cor3.3");
  const IndexedFamily& f = *inst.family("H");
  auto g = normal_generators(f, kOrigin2);
  o.check(g.has_value(), "normal generators");
  if (!g) return;
  TruncationPolicy p = f.policy;
  p.K_init = 64;
  p.K_max = 64;
  HullClosure h = closed_hull(*g, p);
  o.check(h.K == 64, "K=64");
  o.check(h.limits == std::vector<Vec>{{0, 1}}, "limit direction (0,1)");
  const ConvexPolyCone symbolic = ConvexPolyCone::from_inequalities(2, {{-1, 0}, {0, -1}});
  o.check(cone_equal(h.cone, symbolic), "hull equals {x>=0,y>=0}");
  std::mt19937 rng(kSeed);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 20);
  int disagree = 0;
  for (int s = 0; s < kSamplePoints; ++s) {
    Vec v{Q(num(rng), den(rng)), Q(num(rng), den(rng))};
    const bool expected = v[0] >= 0 && v[1] >= 0;
    if (cone_member(h.cone, v) != expected) ++disagree;
  }
  o.check(disagree == 0, "sampled membership");
  o.detail << kSamplePoints << " samples, " << disagree << " disagreements";
}

void qualification_table(Outcome& o) {
  struct Cell {
    const char* entry;
    const char* key;
    const char* stated;
  };
  const Cell cells[] = {
      {"ex4.8i-lin", "qualify.L.chip", "yes"},  {"ex4.8i-lin", "qualify.L.scc", "no"},
      {"ex4.8i-quad", "qualify.Q.chip", "no"},  {"ex4.8i-quad", "qualify.Q.scc", "yes"},
      {"ex4.8ii", "qualify.E.chip", "yes"},     {"ex4.8ii", "qualify.E.scc", "yes"},
      {"ex4.8ii", "qualify.E.fmcq", "no"},      {"ex4.8ii", "qualify.E.cqc", "no"},
  };
  Json verdicts = Json::object();
  for (const char* name : {"ex4.8i-lin", "ex4.8i-quad", "ex4.8ii"}) {
    Instance inst = entry(name);
    RunOptions ro;
    for (const Json& r : inst.requests)
      if (r.at("cmd") == "qualify") {
        const RequestOutcome out = run_request(inst, r, ro);
        for (const auto& [k, v] : out.verdicts.items()) verdicts[k] = v;
      }
  }
  int agree = 0;
  for (const Cell& c : cells) {
    const std::string got = verdicts.value(c.key, "missing");
    const bool ok = got == c.stated;
    agree += ok;
    o.check(ok, std::string(c.entry) + " " + c.key + " computed " + got + ", stated " + c.stated);
  }
  o.detail << agree << "/" << std::size(cells) << " cells agree";
}

void chip_equivalence(Outcome& o) {
  std::mt19937 rng(kSeed + 5);
  int agree = 0;
  for (int k = 0; k < kRandomChipFamilies; ++k) {
    const std::size_t n = 1 + k % 3;
    const std::size_t m = 1 + (k / 3) % 6;
    std::vector<SetPtr> members;
    for (std::size_t i = 0; i < m; ++i)
      members.push_back(SetExpr::polyhedron(Polyhedron(n, {random_vec(rng, n, -3, 3)}, {Q(0)})));
    auto f = make_finite_family("random", std::move(members));
    const Vec x = zeros(n);
    if (chip_check(*f, x).holds == asymptotic_strong_chip_check(*f, x).holds) ++agree;
  }
  o.check(agree == kRandomChipFamilies, "verdict agreement");
  o.detail << agree << "/" << kRandomChipFamilies << " families agree";
}

bool identities_hold(const ExtremalCertificate& c) {
  Vec sum = zeros(c.normals.front().size());
  Q weighted, w = 1;
  for (const Vec& x : c.normals) {
    w /= 2;
    sum = add(sum, scale(w, x));
    weighted += w * norm2(x);
  }
  // Both residuals must be literally zero.
  return is_zero(sum) && Q(c.scale_sq * weighted) == 1;
}

void extremal_identities(Outcome& o) {
  Instance inst = entry("four-quadrant");
  std::vector<ConeRep> quads;
  for (const char* s : {"q1", "q2", "q3", "q4"}) quads.push_back(tangent_cone(*inst.set(s), kOrigin2).cone);
  auto demo = extremal_certificate(quads);
  o.check(demo && identities_hold(*demo) && verify(*demo, quads), "four-quadrant certificate");
  std::mt19937 rng(kSeed + 6);
  int systems = 0, emitted = 0, good = 0;
  while (systems < kRandomExtremalSystems) {
    const std::size_t n = 2 + systems % 2;
    const std::size_t K = 2 + systems % 5;
    std::vector<ConvexPolyCone> raw;
    for (std::size_t i = 0; i < K; ++i) {
      Mat g;
      const int m = 1 + static_cast<int>(rng() % 3);
      for (int j = 0; j < m; ++j) g.push_back(random_vec(rng, n, -3, 3));
      raw.push_back(ConvexPolyCone::from_generators(n, g));
    }
    if (!dd_convert(intersect(raw)).is_origin()) continue;
    ++systems;
    std::vector<ConeRep> cs(raw.begin(), raw.end());
    auto c = extremal_certificate(cs);
    if (!c) continue;
    ++emitted;
    good += identities_hold(*c) && verify(*c, cs);
  }
  o.check(good == emitted, "random certificates");
  o.detail << systems << " systems, " << emitted << " certificates, " << good << " exact";
}

void duality_and_oracles(Outcome& o) {
  std::mt19937 rng(kSeed + 7);
  int involution = 0;
  for (int k = 0; k < kRandomPolarCones; ++k) {
    const std::size_t n = 1 + k % 3;
    Mat g;
    const int m = 1 + static_cast<int>(rng() % 5);
    for (int j = 0; j < m; ++j) g.push_back(random_vec(rng, n, -3, 3));
    auto c = ConvexPolyCone::from_generators(n, g);
    involution += cone_equal(polar(polar(c)), c);
  }
  o.check(involution == kRandomPolarCones, "polar involution");
  int sets = 0, frechet_ok = 0;
  std::size_t total = 0, agree = 0, outside = 0;
  OracleOptions opt;
  opt.seed = kSeed;
  opt.angular_tolerance_deg = kAngularBandDeg;
  for (const RegistryEntry& e : registry()) {
    Instance inst = load_entry(e);
    for (const auto& [name, s] : inst.sets) {
      const Vec x = inst.points.count("x") && inst.points.at("x").size() == s->dim ? inst.points.at("x") : zeros(s->dim);
      if (!member(*s, x)) continue;
      ConeResult t = tangent_cone(*s, x);
      ConeResult f = frechet_normal_cone(*s, x);
      if (!t.exact || !f.exact) continue;
      ++sets;
      frechet_ok += cone_equal(f.cone, ConeRep(polar(t.cone)));
      Agreement a = compare_tangent(t.cone, oracle_tangent(*s, x, opt));
      ConeResult lim = limiting_normal_cone(*s, x);
      Agreement b = compare_normal(lim.cone, oracle_normal(*s, x, opt));
      total += a.total + b.total;
      agree += a.agree + b.agree;
      outside += a.disagree_outside_band + b.disagree_outside_band;
    }
  }
  o.check(frechet_ok == sets, "frechet = polar(tangent)");
  const double rate = total ? static_cast<double>(agree) / static_cast<double>(total) : 0.0;
  o.check(rate >= kOracleAgreement, "oracle agreement rate");
  o.check(outside == 0, "disagreements outside the band");
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "%d/%d involutions, %d/%d sets frechet=polar, oracle %zu/%zu agree (%.4f%%), %zu outside %.1f deg",
                involution, kRandomPolarCones, frechet_ok, sets, agree, total, 100.0 * rate, outside,
                kAngularBandDeg);
  o.detail << buf;
}

void pareto_demo(Outcome& o) {
  Instance inst = entry("absx-pareto");
  const auto& [p, xy] = inst.paretos.at("P");
  ParetoDecision tg = pareto_check(p, xy, ParetoNotion::TangentialGraphical);
  ParetoDecision fl = pareto_check(p, xy, ParetoNotion::FullyLocalized);
  o.check(tg.holds == Holds::Yes, "tangential-graphical");
  o.check(fl.holds == Holds::Yes, "fully-localized");
  auto c = pareto_necessary_cond(p, xy);
  o.check(c.has_value(), "certificate");
  if (c) {
    o.check(c->ystar == Vec{1}, "y*=1");
    o.check(c->residual == 0, "zero residual");
    o.check(verify(*c, p, xy), "verify");
    o.detail << "y*=" << to_string(c->ystar) << " x*=" << to_string(c->x0) << " residual " << to_string(c->residual);
  }
  o.check(coderivative(*p.graph, 1, xy, Vec{0}).is_origin(), "D*F(0)(0)={0}");
}

void normal_inclusion(Outcome& o) {
  int instances = 0, generators = 0, members = 0;
  for (const RegistryEntry& e : registry()) {
    Instance inst = load_entry(e);
    for (const auto& [name, s] : inst.sets) {
      const Vec x = inst.points.count("x") && inst.points.at("x").size() == s->dim ? inst.points.at("x") : zeros(s->dim);
      if (!member(*s, x)) continue;
      ConeResult lim = limiting_normal_cone(*s, x);
      ConeResult t = tangent_cone(*s, x);
      if (!lim.exact || !t.exact) continue;
      ++instances;
      for (const ConvexPolyCone& piece : normal_cone_of_cone(t.cone).pieces)
        for (const Vec& g : dd_convert(piece).generators) {
          ++generators;
          members += cone_member(lim.cone, g);
        }
    }
  }
  o.check(members == generators, "generator membership");
  o.detail << instances << " sets, " << members << "/" << generators << " generators inside";
}

}  // namespace

int main() {
  struct Criterion {
    const char* tag;
    double limit;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {"1 two-parabola tangent cones and CHIP", kLimit1, two_parabolas},
      {"2 steepening epigraphs", kLimit2, steepening},
      {"3 closed hull of normals (1,i) at K=64", kLimit3, closed_hull_of_normals},
      {"4 qualification table", kLimit4, qualification_table},
      {"5 CHIP vs asymptotic strong CHIP", kLimit5, chip_equivalence},
      {"6 extremal certificate identities", kLimit6, extremal_identities},
      {"7 duality and sampled oracles", kLimit7, duality_and_oracles},
      {"8 Pareto demo on |x|", kLimit8, pareto_demo},
      {"9 N(0;T) inside N(x;Omega)", kLimit9, normal_inclusion},
  };
  int failed = 0;
  double total = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    total += dt;
    const bool in_time = dt < c.limit;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::printf("%s [%s] %.3fs (limit %.0fs) %s%s%s\n", pass ? "PASS" : "FAIL", c.tag, dt, c.limit,
                o.detail.str().c_str(), o.failures.c_str(), in_time ? "" : " [over time]");
    std::fflush(stdout);
  }
  std::printf("%s [total] %.3fs (limit %.0fs), %d failed\n", total < kLimitTotal ? "PASS" : "FAIL", total,
              kLimitTotal, failed);
  return failed + (total < kLimitTotal ? 0 : 1);
}
