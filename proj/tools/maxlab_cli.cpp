// maxlab command-line front end over the C API.
//
//   maxlab <subcommand> [--config scenario.yaml] [--out report.json]
//          [--table table.csv|-] [--seed N] [--<param> <value> ...]
//
// Parameters come from the config's `params` section and are overridden by
// flags; --r0 0.333 sets params.r0.  MAXLAB_SEED overrides the config seed,
// --seed overrides both.  Exit codes: 0 ok, 1 conclusion failure, 2 config
// error, 3 runtime error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "maxlab/maxlab.h"

namespace {

using json = nlohmann::json;

struct Location {
  std::string source;  // file path or "flag"
  int line = 0;
  int column = 0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json scalar_to_json(const YAML::Node& n) {
  if (n.Tag() == "!") return n.Scalar();  // quoted
  const std::string& s = n.Scalar();
  if (s == "~" || s == "null" || s.empty()) return nullptr;
  if (s == "true" || s == "false") return s == "true";
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  return s;
}

// YAML to JSON, remembering where every mapping key was written.
json to_json(const YAML::Node& n, const std::string& path, const std::string& file,
             std::map<std::string, Location>& marks) {
  switch (n.Type()) {
    case YAML::NodeType::Null:
    case YAML::NodeType::Undefined: return nullptr;
    case YAML::NodeType::Scalar: return scalar_to_json(n);
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (std::size_t i = 0; i < n.size(); ++i) a.push_back(to_json(n[i], path + "." + std::to_string(i), file, marks));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) {
        const std::string key = kv.first.as<std::string>();
        const std::string sub = path.empty() ? key : path + "." + key;
        marks[sub] = {file, kv.first.Mark().line + 1, kv.first.Mark().column + 1};
        o[key] = to_json(kv.second, sub, file, marks);
      }
      return o;
    }
  }
  return nullptr;
}

std::string describe(const std::optional<Location>& loc) {
  if (!loc) return "";
  if (loc->source == "flag") return "command line: ";
  return loc->source + ":" + std::to_string(loc->line) + ":" + std::to_string(loc->column) + ": ";
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
}

// Extra "--key value" / "--key=value" pairs become parameters.
void apply_flags(const std::vector<std::string>& extras, json& params, std::map<std::string, Location>& marks) {
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string tok = extras[i];
    if (tok.rfind("--", 0) != 0 || tok.size() < 3) throw ConfigError("unexpected argument '" + tok + "'");
    tok = tok.substr(2);
    std::string value;
    const auto eq = tok.find('=');
    if (eq != std::string::npos) {
      value = tok.substr(eq + 1);
      tok = tok.substr(0, eq);
    } else {
      if (i + 1 >= extras.size()) throw ConfigError("flag --" + tok + " needs a value");
      value = extras[++i];
    }
    for (char& c : tok)
      if (c == '-') c = '_';
    YAML::Node node;
    try {
      node = YAML::Load(value);
    } catch (const YAML::Exception&) {
      node = YAML::Node(value);
    }
    std::map<std::string, Location> ignored;
    json v = to_json(node, tok, "flag", ignored);
    if (v.is_object()) v = value;  // "a: b" is a string here, not a mapping
    params[tok] = v;
    marks["params." + tok] = {"flag", 0, 0};
  }
}

// Resolves path-valued parameters against the config file's directory.
void resolve_paths(json& params, const std::filesystem::path& base) {
  for (const char* key : {"points", "u0", "u1", "surface_csv"}) {
    if (params.contains(key) && params[key].is_string()) {
      const std::filesystem::path p(params[key].get<std::string>());
      if (p.is_relative()) params[key] = (base / p).lexically_normal().string();
    }
  }
}

int run(const std::string& sub, const std::string& config_path, std::string out_path, std::string table_path,
        std::optional<std::uint64_t> seed_flag, const std::vector<std::string>& extras) {
  std::map<std::string, Location> marks;
  json cfg = json::object();
  if (!config_path.empty()) {
    YAML::Node root;
    try {
      root = YAML::LoadFile(config_path);
    } catch (const YAML::BadFile&) {
      std::cerr << config_path << ": cannot read config file\n";
      return 2;
    } catch (const YAML::Exception& e) {
      std::cerr << config_path << ":" << e.mark.line + 1 << ":" << e.mark.column + 1 << ": " << e.msg << "\n";
      return 2;
    }
    cfg = to_json(root, "", config_path, marks);
    if (!cfg.is_object()) {
      std::cerr << config_path << ": config must be a mapping\n";
      return 2;
    }
  }
  auto where = [&](const std::string& path) -> std::optional<Location> {
    const auto it = marks.find(path);
    return it == marks.end() ? std::nullopt : std::optional<Location>(it->second);
  };
  for (auto it = cfg.begin(); it != cfg.end(); ++it) {
    static const std::vector<std::string> known = {"scenario", "subcommand", "seed", "params", "output"};
    if (std::find(known.begin(), known.end(), it.key()) == known.end()) {
      std::cerr << describe(where(it.key())) << "unknown top-level field '" << it.key() << "'\n";
      return 2;
    }
  }
  if (cfg.contains("subcommand") && cfg["subcommand"] != sub) {
    std::cerr << describe(where("subcommand")) << "config is for '" << cfg["subcommand"].get<std::string>()
              << "', not '" << sub << "'\n";
    return 2;
  }

  json params = cfg.value("params", json::object());
  if (!params.is_object()) {
    std::cerr << describe(where("params")) << "params must be a mapping\n";
    return 2;
  }
  if (!config_path.empty()) resolve_paths(params, std::filesystem::path(config_path).parent_path());
  try {
    apply_flags(extras, params, marks);
  } catch (const ConfigError& e) {
    std::cerr << "command line: " << e.what() << "\n";
    return 2;
  }
  if (cfg.contains("scenario")) params["scenario"] = cfg["scenario"];
  if (cfg.contains("output")) {
    const json& o = cfg["output"];
    if (out_path.empty() && o.contains("report")) out_path = o["report"].get<std::string>();
    if (table_path.empty() && o.contains("table")) table_path = o["table"].get<std::string>();
  }

  std::optional<std::uint64_t> seed;
  if (cfg.contains("seed")) {
    if (!cfg["seed"].is_number_integer() || cfg["seed"].get<long long>() < 0) {
      std::cerr << describe(where("seed")) << "seed must be a nonnegative integer\n";
      return 2;
    }
    seed = cfg["seed"].get<std::uint64_t>();
  }
  if (const char* env = std::getenv("MAXLAB_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      std::cerr << "MAXLAB_SEED: not a nonnegative integer: '" << env << "'\n";
      return 2;
    }
  }
  if (seed_flag) seed = seed_flag;

  maxlab_context* ctx = nullptr;
  if (maxlab_context_create(&ctx) != MAXLAB_OK) return 3;
  if (seed) maxlab_context_set_seed(ctx, *seed);
  maxlab_report* rep = nullptr;
  const std::string request = params.dump();
  const maxlab_status st = maxlab_run(ctx, sub.c_str(), request.c_str(), &rep);
  if (st != MAXLAB_OK) {
    const json detail = json::parse(maxlab_context_last_error_detail(ctx), nullptr, false);
    std::optional<Location> loc;
    if (detail.is_object() && detail.contains("field") && detail["field"].is_string()) {
      loc = where("params." + detail["field"].get<std::string>());
      if (!loc) loc = where(detail["field"].get<std::string>());
    }
    std::cerr << describe(loc) << "error (" << maxlab_status_name(st) << "): " << maxlab_context_last_error(ctx) << "\n";
    maxlab_context_destroy(ctx);
    return st == MAXLAB_CONFIG ? 2 : 3;
  }
  int code = maxlab_report_exit_code(rep);
  try {
    const std::string table = maxlab_report_table_csv(rep);
    if (!table_path.empty() && !table.empty()) write_text(table_path, table);
    if (!out_path.empty()) write_text(out_path, maxlab_report_json(rep));
    else if (table_path != "-") std::cout << maxlab_report_json(rep);
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    code = 3;
  }
  std::cerr << sub << ": " << maxlab_report_verdict(rep) << "\n";
  maxlab_report_destroy(rep);
  maxlab_context_destroy(ctx);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string("maxlab ") + maxlab_version() + ": maximum-principle and Lorentzian geometry checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", maxlab_version());

  struct Common {
    std::string config, out, table;
    std::optional<std::uint64_t> seed;
  };
  Common c;
  const std::map<std::string, std::string> help = {
      {"constants", "constant ledger (--m --ce --cs --r0 [--alpha])"},
      {"verify-operator", "ellipticity certificate, fiber convexity, linearization identity"},
      {"max-principle", "contradiction pipeline on a built-in or grid instance (--instance)"},
      {"graph-geometry", "graph mean curvature in a chart (--chart --surface)"},
      {"busemann", "Busemann functions of a timelike line (--model --line --points)"},
      {"spheres", "mean curvature of past geodesic spheres (--model --radii)"},
      {"splitting", "normal exponential map pullback and cosmological time (--model)"},
      {"curvature", "Riemann, Ricci, Bianchi and Schur checks (--metric)"},
      {"weyl", "Weyl norm, conformal rule and product decomposition (--metric)"}};
  for (const auto& [name, text] : help) {
    CLI::App* s = app.add_subcommand(name, text);
    s->allow_extras();
    s->add_option("--config", c.config, "YAML scenario file");
    s->add_option("--out", c.out, "report path (default stdout)");
    s->add_option("--table", c.table, "CSV table path, '-' for stdout");
    s->add_option("--seed", c.seed, "seed, overrides MAXLAB_SEED and the config");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  for (CLI::App* s : app.get_subcommands()) {
    try {
      return run(s->get_name(), c.config, c.out, c.table, c.seed, s->remaining());
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 3;
    }
  }
  return 2;
}
