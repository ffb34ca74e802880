#pragma once

// The subcommands. Each runs the matching requests of an instance (or one
// ad hoc request built from command-line options) and assembles a report.

#include <optional>
#include <string>
#include <vector>

#include "conekit_cli/instance.hpp"

namespace conekit::cli {

struct RunOptions {
  unsigned seed = 1;
  std::optional<double> tol;  // angular band in degrees for oracle cross-checks
  bool timing = false;
  // Ad hoc request fields; when any is set the instance's requests are ignored.
  std::optional<std::string> set, point, which, family, problem, objective;
  std::vector<std::string> conditions, modes, notions;
};

struct RequestOutcome {
  Json result;   // full encoded result
  Json verdicts; // flat key -> value summary, compared against expectations
  bool inconclusive = false;
  bool error = false;
};

// Runs one request object of the given command kind.
RequestOutcome run_request(const Instance& inst, const Json& req, const RunOptions& opt);

// Exit codes: 0 resolved, 2 inconclusive present, 1 error.
struct CommandReport {
  Json doc;
  int exit_code = 0;
};

CommandReport run_command(const std::string& cmd, const Instance& inst, const RunOptions& opt);

// Compares verdicts with the instance's expectations; returns mismatch records.
Json compare_expected(const Instance& inst, const Json& verdicts);

}  // namespace conekit::cli
