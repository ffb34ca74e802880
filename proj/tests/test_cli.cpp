#include <gtest/gtest.h>

#include <cstdlib>
#include <regex>

#include "conekit_cli/commands.hpp"
#include "conekit_cli/registry.hpp"
#include "conekit_cli/report.hpp"

using namespace conekit;
using namespace conekit::cli;

namespace {

const char* kSmall = R"({
  "schema": "conekit-instance/1",
  "dimension": 2,
  "atoms": {"lin": {"affine": {"a": ["1", "i"]}}},
  "sets": {"h": {"poly": {"A": [[0, -1]], "b": [0]}}, "w": {"whole": true}},
  "families": {"L": {"template": {"level": "lin"}, "first": 0, "base_point": [0, 0]}},
  "points": {"x": [0, 0]},
  "requests": [
    {"cmd": "cone", "set": "h", "which": ["tangent", "frechet"]},
    {"cmd": "cone", "set": "w", "which": ["tangent"]},
    {"cmd": "qualify", "family": "L", "conditions": ["chip", "scc"]}
  ],
  "expected": {"qualify.L.scc": "no", "cone.h.frechet": {"generators": [[0, -1]]}}
})";

std::string message_of(const std::string& text) {
  try {
    parse_instance(text, "doc");
  } catch (const InstanceError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Instance, ParsesAndResolves) {
  Instance inst = parse_instance(kSmall, "small");
  EXPECT_EQ(inst.dim, 2u);
  EXPECT_EQ(inst.families.at("L")->first, 0);
  EXPECT_TRUE(inst.family("L")->infinite());
  EXPECT_EQ(inst.point(Json("x")), (Vec{0, 0}));
  EXPECT_THROW(inst.set("missing"), InstanceError);
}

TEST(Instance, ErrorsCarryPositions) {
  EXPECT_NE(message_of("{\n  \"dimension\": 2,\n  \"sets\": [\n").find("line 4"), std::string::npos);
  std::string m = message_of(R"({"dimension": 2, "sets": {"a": {"poly": {"A": [[1, 2, 3]]}}}})");
  EXPECT_NE(m.find("$.sets.a.poly.A"), std::string::npos) << m;
  m = message_of(R"({"dimension": 2, "sets": {"a": "b", "b": "a"}})");
  EXPECT_NE(m.find("cyclic"), std::string::npos) << m;
  m = message_of(R"({"dimension": 2, "sets": {"a": {"poly": {"A": [["1/0", 1]]}}}})");
  EXPECT_FALSE(m.empty());
  m = message_of(R"({"schema": "other/9", "dimension": 2})");
  EXPECT_NE(m.find("unsupported schema"), std::string::npos);
}

TEST(Instance, PolicyPrecedence) {
  ::unsetenv("CONEKIT_KMAX");
  Json doc = {{"K_max", 100}};
  EXPECT_EQ(effective_policy(doc, {}).K_max, 100);
  ::setenv("CONEKIT_KMAX", "40", 1);
  EXPECT_EQ(effective_policy(doc, {}).K_max, 40);
  Overrides o;
  o.K_max = 20;
  EXPECT_EQ(effective_policy(doc, o).K_max, 20);
  EXPECT_EQ(effective_policy(doc, o).K_init, 8);
  o.K_max = 4;
  EXPECT_EQ(effective_policy(doc, o).K_init, 4);
  ::unsetenv("CONEKIT_KMAX");
}

TEST(Commands, ConeAndQualify) {
  Instance inst = parse_instance(kSmall, "small");
  CommandReport cone = run_command("cone", inst, {});
  EXPECT_EQ(cone.exit_code, 0);
  EXPECT_TRUE(cone.doc.at("expectation_mismatches").empty());
  // The whole plane has an empty inequality list.
  EXPECT_TRUE(cone.doc.at("results")[1].at("tangent").at("cone").at("pieces")[0].at("inequalities").empty());
  CommandReport q = run_command("qualify", inst, {});
  EXPECT_EQ(q.exit_code, 0);
  EXPECT_EQ(q.doc.at("verdicts").at("qualify.L.chip"), "yes");
  EXPECT_EQ(q.doc.at("verdicts").at("qualify.L.scc"), "no");
}

TEST(Commands, AdHocRequest) {
  Instance inst = parse_instance(kSmall, "small");
  RunOptions o;
  o.conditions = {"scc"};
  CommandReport q = run_command("qualify", inst, o);
  EXPECT_EQ(q.doc.at("verdicts").size(), 1u);
  EXPECT_EQ(q.doc.at("verdicts").at("qualify.L.scc"), "no");
}

TEST(Commands, ErrorsExitWithOne) {
  Instance inst = parse_instance(kSmall, "small");
  RunOptions o;
  o.set = "nope";
  EXPECT_EQ(run_command("cone", inst, o).exit_code, 1);
  EXPECT_EQ(run_command("pareto", inst, {}).exit_code, 1);  // nothing to run
}

TEST(Commands, InconclusiveExitsWithTwo) {
  // A nonpolyhedral family with no closed-form structure at the origin.
  const char* doc = R"({
    "dimension": 2,
    "atoms": {"c": {"convex": true, "quadratic": {"H": [["i", 0], [0, "i"]], "c": "-1/i"}}},
    "families": {"D": {"template": {"level": "c"}, "first": 1, "base_point": [0, 0]}}
  })";
  Instance inst = parse_instance(doc, "disks");
  RunOptions o;
  o.conditions = {"scc"};
  CommandReport r = run_command("qualify", inst, o);
  EXPECT_NE(r.exit_code, 1) << r.doc.dump();
  const std::string v = r.doc.at("verdicts").at("qualify.D.scc");
  EXPECT_EQ(r.exit_code == 2, v == "inconclusive-at-K");
}

TEST(Report, NoBareFloats) {
  for (const RegistryEntry& e : registry()) {
    Instance inst = load_entry(e);
    RunOptions o;
    o.tol = 1.0;
    EntryRun run = run_entry(inst, o);
    const std::string dump = run.doc.dump();
    // A JSON number with a fraction or exponent outside a string.
    static const std::regex bare(R"([:\[,]\s*-?[0-9]+(\.[0-9]+|[eE][-+]?[0-9]+))");
    EXPECT_FALSE(std::regex_search(dump, bare)) << e.name;
  }
}

TEST(Registry, ListsEnoughEntries) {
  CommandReport r = registry_list();
  EXPECT_GE(r.doc.at("entries").size(), 8u);
  for (const char* name : {"ex3.4i", "ex3.4ii", "cor3.3", "ex4.8i-lin", "ex4.8i-quad", "ex4.8ii", "four-quadrant",
                           "absx-pareto"})
    EXPECT_TRUE(find_entry(name).has_value()) << name;
}

TEST(Registry, ShowPrintsTemplate) {
  CommandReport r = registry_show("ex3.4ii");
  EXPECT_NE(r.doc.dump().find("φ_i(x):=i x² if x<0"), std::string::npos);
  EXPECT_EQ(registry_show("none").exit_code, 1);
}

TEST(Registry, RunAllMatchesExpectations) {
  CommandReport r = registry_run_all({}, {});
  EXPECT_EQ(r.exit_code, 0) << r.doc.dump(1);
  EXPECT_EQ(r.doc.at("total_mismatches"), 0);
}

TEST(Registry, ReportsAreDeterministic) {
  CommandReport a = registry_run_all({}, {});
  CommandReport b = registry_run_all({}, {});
  EXPECT_EQ(a.doc.dump(), b.doc.dump());
  Instance inst = load_entry(*find_entry("ex4.8i-lin"));
  EXPECT_EQ(run_command("qualify", inst, {}).doc.dump(), run_command("qualify", inst, {}).doc.dump());
}

TEST(Registry, TruncateOverrideReachesFamilies) {
  Overrides o;
  o.K_max = 16;
  Instance inst = load_entry(*find_entry("ex3.4ii"), o);
  EXPECT_EQ(inst.family("G")->policy.K_max, 16);
  CommandReport r = run_command("chip", inst, {});
  EXPECT_EQ(r.doc.at("verdicts").at("chip.G"), "no");
}

// Fully-localized minimality implies graphical minimality on every registry
// instance that has a Pareto problem.
TEST(Registry, FullyLocalizedImpliesGraphicalOnRegistry) {
  for (const RegistryEntry& e : registry()) {
    Instance inst = load_entry(e);
    for (const auto& [name, pr] : inst.paretos) {
      const auto& [p, xy] = pr;
      if (pareto_check(p, xy, ParetoNotion::FullyLocalized).holds == Holds::Yes)
        EXPECT_EQ(pareto_check(p, xy, ParetoNotion::Graphical).holds, Holds::Yes) << e.name;
    }
  }
}
