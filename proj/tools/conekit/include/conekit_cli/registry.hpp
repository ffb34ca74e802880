#pragma once

// Built-in instance registry with stored expected verdicts.

#include <optional>
#include <string>
#include <vector>

#include "conekit_cli/commands.hpp"

namespace conekit::cli {

struct RegistryEntry {
  std::string name;
  std::string document;  // instance JSON
};

const std::vector<RegistryEntry>& registry();
std::optional<RegistryEntry> find_entry(const std::string& name);
Instance load_entry(const RegistryEntry& e, const Overrides& o = {});

// Runs every request of one instance and compares against its expectations.
struct EntryRun {
  Json doc;
  std::size_t mismatches = 0;
  bool inconclusive = false;
  bool error = false;
};
EntryRun run_entry(const Instance& inst, const RunOptions& opt);

CommandReport registry_list();
CommandReport registry_show(const std::string& name);
// Entries run concurrently; the report is ordered by entry name.
CommandReport registry_run_all(const RunOptions& opt, const Overrides& o);

}  // namespace conekit::cli
