#pragma once

// Scenario runner: one JSON request per subcommand, one versioned JSON
// report back.  Requests are plain parameter objects (the CLI builds them
// from YAML configs and flags); unknown or ill-typed fields are
// configuration errors whose witness names the field.

#include <string>
#include <vector>

#include <json.hpp>

namespace maxlab {

const std::vector<std::string>& subcommands();

struct RunResult {
  nlohmann::json report;  // {schema, subcommand, seed, params, ledger, verdict, message, checks}
  std::string table_csv;  // per-point table for busemann, spheres and graph-geometry; empty otherwise
  int exit_code = 0;      // 1 when any check is a conclusion failure
};

// `request` may hold "seed" (default 0); every other key is a parameter of
// the subcommand.  Output is a pure function of (subcommand, request).
RunResult run_scenario(const std::string& subcommand, const nlohmann::json& request);

}  // namespace maxlab
