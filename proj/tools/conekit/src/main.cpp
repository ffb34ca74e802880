#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "conekit_cli/commands.hpp"
#include "conekit_cli/registry.hpp"
#include "conekit_cli/report.hpp"

using namespace conekit::cli;

namespace {

struct Common {
  std::string instance;
  std::optional<long> truncate;
  std::optional<double> tol;
  unsigned seed = 1;
  bool json = false;
  bool text = false;
  bool timing = false;
};

void add_common(CLI::App* sub, Common& c, bool needs_instance) {
  auto* inst = sub->add_option("--instance", c.instance, "instance JSON file or registry entry name");
  if (needs_instance) inst->required();
  sub->add_option("--truncate", c.truncate, "truncation level K_max")->check(CLI::PositiveNumber);
  sub->add_option("--tol", c.tol, "angular band in degrees for sampled cross-checks")
      ->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "seed for sampled procedures");
  auto* j = sub->add_flag("--json", c.json, "JSON report (default)");
  auto* t = sub->add_flag("--text", c.text, "text report");
  j->excludes(t);
  sub->add_flag("--timing", c.timing, "include wall-clock timings (reports stop being reproducible)");
}

Instance resolve_instance(const std::string& arg, const Overrides& o) {
  if (std::filesystem::exists(arg)) return load_instance(arg, o);
  if (auto e = find_entry(arg)) return load_entry(*e, o);
  throw InstanceError("no instance file or registry entry named " + arg);
}

int emit(const CommandReport& r, const Common& c) {
  if (c.text) {
    std::cout << render_text(r.doc);
  } else {
    std::cout << r.doc.dump(2) << "\n";
  }
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conekit: tangent and normal cones, qualification conditions and certificates"};
  app.require_subcommand(1);
  Common c;
  RunOptions ro;
  std::string which, conditions, modes, notions;

  std::map<std::string, CLI::App*> subs;
  const std::pair<const char*, const char*> commands[] = {
      {"cone", "tangent, Frechet and limiting normal cones of a set"},
      {"chip", "conical hull intersection property of a family"},
      {"qualify", "qualification conditions of a family"},
      {"certify", "necessary optimality certificates"},
      {"extremal", "extremal principle certificates"},
      {"pareto", "Pareto minimality checks and multiplier certificates"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* s = app.add_subcommand(name, help);
    add_common(s, c, true);
    subs[name] = s;
  }
  subs["cone"]->add_option("--set", ro.set, "set name");
  subs["cone"]->add_option("--which", ro.which, "comma list: tangent,frechet,limiting");
  for (const char* s : {"cone", "chip", "qualify"}) subs[s]->add_option("--point", ro.point, "point name");
  for (const char* s : {"chip", "qualify"}) subs[s]->add_option("--family", ro.family, "family name");
  subs["qualify"]->add_option("--conditions", conditions,
                              "comma list: chip,nqc,ncc,scc,sqc,fmcq,cqc,strong-chip,interior-nqc,"
                              "chip-regularity,chip-rank,chip-invex");
  subs["qualify"]->add_option("--objective", ro.objective, "objective atom for cqc");
  for (const char* s : {"certify", "pareto"}) subs[s]->add_option("--problem", ro.problem, "problem name");
  subs["certify"]->add_option("--modes", modes, "comma list: upper,lower");
  subs["pareto"]->add_option("--notions", notions,
                             "comma list: tangential-graphical,graphical,fully-localized");

  CLI::App* reg = app.add_subcommand("registry", "built-in instances");
  std::string action, entry;
  reg->add_option("action", action, "list, show or run-all")
      ->required()
      ->check(CLI::IsMember({"list", "show", "run-all"}));
  reg->add_option("name", entry, "entry name for show");
  add_common(reg, c, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      if (ch == ',') {
        if (!cur.empty()) out.push_back(cur);
        cur.clear();
      } else if (ch != ' ') {
        cur += ch;
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  };
  ro.conditions = split(conditions);
  ro.modes = split(modes);
  ro.notions = split(notions);
  if (!ro.which && subs["cone"]->parsed() && ro.set) ro.which = "tangent";
  ro.seed = c.seed;
  ro.tol = c.tol;
  ro.timing = c.timing;
  Overrides ov;
  ov.K_max = c.truncate;

  try {
    if (reg->parsed()) {
      if (action == "list") return emit(registry_list(), c);
      if (action == "show") {
        if (entry.empty() && !c.instance.empty()) entry = c.instance;
        return emit(registry_show(entry), c);
      }
      return emit(registry_run_all(ro, ov), c);
    }
    for (const auto& [name, s] : subs)
      if (s->parsed()) return emit(run_command(name, resolve_instance(c.instance, ov), ro), c);
  } catch (const std::exception& e) {
    std::cerr << "conekit: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
