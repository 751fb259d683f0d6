#include "nuelab/cli/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace nuelab::cli {
namespace {

// Block defaults. A null default marks a required number.
const Json& experiment_defaults(const std::string& kind) {
  static const Json table = {
      {"simulate",
       {{"n", 1000},
        {"x0", Json::array()},
        {"observables", {"x"}},
        {"sigma", 0.5},
        {"delta", 0.1},
        {"b", 0.5},
        {"recurrence_indexing", "paper_literal"}}},
      {"hyptimes",
       {{"n_max", 1000},
        {"sigma", 0.5},
        {"delta", 0.1},
        {"b", 0.5},
        {"recurrence_indexing", "paper_literal"},
        {"along_f", false},
        {"warmup", 50}}},
      {"measure",
       {{"bins", 100}, {"burn_in", 1000}, {"length", 10000}, {"basins", false}, {"basin_tol", 0.2}}},
      {"deviate",
       {{"observable", "x"},
        {"quantity", "observable"},
        {"mode", "threshold"},
        {"c", nullptr},
        {"targets", Json::array()},
        {"omega", 0.0},
        {"gate", false},
        {"gate_delta", 0.1},
        {"gate_eps", 0.1},
        {"method", "monte_carlo"},
        {"f_warmup", 50}}},
      {"escape", {{"lo", nullptr}, {"hi", nullptr}, {"lo_y", 0.0}, {"hi_y", 1.0}, {"method", "monte_carlo"}}},
      {"tail", {{"delta", 0.1}, {"eps", nullptr}}},
      {"bound",
       {{"model", "doubling"},
        {"k", 2},
        {"matrix", Json::array()},
        {"phi", Json::array()},
        {"J", Json::array()},
        {"c", nullptr},
        {"bruteforce_grid", 0}}},
      {"ruelle_check",
       {{"starts", 200},
        {"burn_in", 1000},
        {"length", 5000},
        {"references", 20},
        {"n", 15},
        {"eps", 0.05},
        {"lyapunov_length", 100000},
        {"slack", 0.1}}},
  };
  return table.at(kind);
}

bool grid_experiment(const std::string& kind) { return kind == "deviate" || kind == "escape" || kind == "tail"; }

void check_type(const std::string& where, const std::string& key, const Json& def, const Json& value) {
  auto bad = [&](const char* want) {
    throw ConfigError(fmt::format("[{}] {}: expected {}", where, key, want));
  };
  if (def.is_null()) {
    // Required numbers; `c` in [bound] may also be a list.
    if (value.is_number()) return;
    if (where == "bound" && value.is_array() &&
        std::all_of(value.begin(), value.end(), [](const Json& v) { return v.is_number(); }))
      return;
    bad("a number");
  }
  if (def.is_boolean() && !value.is_boolean()) bad("true or false");
  if (def.is_string() && !value.is_string()) bad("a string");
  if (def.is_number_integer() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
    bad("a non-negative integer");
  if (def.is_number_float() && !value.is_number()) bad("a number");
  if (def.is_array() && !value.is_array()) bad("a list");
}

std::uint64_t as_count(const Json& v, const char* what) {
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
    throw ConfigError(fmt::format("{}: expected a non-negative integer", what));
  return v.get<std::uint64_t>();
}

}  // namespace

bool OutputConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

ExperimentConfig parse_config(std::string_view text) {
  const Json doc = parse_toml(text);
  ExperimentConfig cfg;

  std::vector<std::string> blocks;
  for (const auto& [name, value] : doc.items()) {
    if (!value.is_object()) throw ConfigError(fmt::format("top-level key '{}' must sit inside a table", name));
    const auto& kinds = experiment_kinds();
    if (std::find(kinds.begin(), kinds.end(), name) != kinds.end()) {
      blocks.push_back(name);
    } else if (name != "system" && name != "numeric" && name != "output") {
      throw ConfigError(fmt::format("unknown table [{}]", name));
    }
  }
  if (blocks.size() != 1)
    throw ConfigError(fmt::format("exactly one experiment block is required, found {}", blocks.size()));
  cfg.kind = blocks.front();

  if (!doc.contains("system")) throw ConfigError("missing [system] table");
  for (const auto& [key, value] : doc["system"].items()) {
    if (key == "family") {
      if (!value.is_string()) throw ConfigError("[system] family: expected a string");
      cfg.family = value.get<std::string>();
    } else if (value.is_number()) {
      cfg.params[key] = value.get<double>();
    } else {
      throw ConfigError(fmt::format("[system] {}: parameters must be numbers", key));
    }
  }
  if (cfg.family.empty()) throw ConfigError("[system] family is required");
  // Validates the family and parameters, and records every default.
  cfg.params = build_system(cfg.family, cfg.params).params();

  const Json& defaults = experiment_defaults(cfg.kind);
  const Json& given = doc[cfg.kind];
  for (const auto& [key, value] : given.items()) {
    if (!defaults.contains(key)) throw ConfigError(fmt::format("unknown key '{}' in [{}]", key, cfg.kind));
    check_type(cfg.kind, key, defaults[key], value);
  }
  cfg.experiment = Json::object();
  for (const auto& [key, def] : defaults.items()) {
    if (given.contains(key)) {
      cfg.experiment[key] = given[key];
    } else if (def.is_null()) {
      throw ConfigError(fmt::format("[{}] {} is required", cfg.kind, key));
    } else {
      cfg.experiment[key] = def;
    }
  }

  if (!doc.contains("numeric")) throw ConfigError("missing [numeric] table");
  bool seed_given = false;
  for (const auto& [key, value] : doc["numeric"].items()) {
    if (key == "n_grid") {
      if (!value.is_array()) throw ConfigError("[numeric] n_grid: expected a list");
      cfg.numeric.n_grid.clear();
      for (const auto& v : value) {
        const auto n = as_count(v, "[numeric] n_grid");
        if (n == 0) throw ConfigError("[numeric] n_grid: entries must be positive");
        cfg.numeric.n_grid.push_back(n);
      }
    } else if (key == "m") {
      cfg.numeric.m = as_count(value, "[numeric] m");
    } else if (key == "seed") {
      cfg.numeric.seed = as_count(value, "[numeric] seed");
      seed_given = true;
    } else if (key == "workers") {
      cfg.numeric.workers = static_cast<unsigned>(as_count(value, "[numeric] workers"));
    } else {
      throw ConfigError(fmt::format("unknown key '{}' in [numeric]", key));
    }
  }
  if (!seed_given) throw ConfigError("[numeric] seed is required");
  if (cfg.numeric.workers == 0) throw ConfigError("[numeric] workers must be at least 1");
  if (grid_experiment(cfg.kind)) {
    if (cfg.numeric.n_grid.empty()) throw ConfigError("[numeric] n_grid must not be empty");
    if (!std::is_sorted(cfg.numeric.n_grid.begin(), cfg.numeric.n_grid.end()) ||
        std::adjacent_find(cfg.numeric.n_grid.begin(), cfg.numeric.n_grid.end()) != cfg.numeric.n_grid.end())
      throw ConfigError("[numeric] n_grid must be strictly increasing");
  }

  if (doc.contains("output")) {
    for (const auto& [key, value] : doc["output"].items()) {
      if (key == "directory") {
        if (!value.is_string()) throw ConfigError("[output] directory: expected a string");
        cfg.output.directory = value.get<std::string>();
      } else if (key == "formats") {
        if (!value.is_array()) throw ConfigError("[output] formats: expected a list");
        cfg.output.formats.clear();
        for (const auto& f : value) {
          if (!f.is_string() || (f != "csv" && f != "json" && f != "svg"))
            throw ConfigError("[output] formats: entries must be \"csv\", \"json\" or \"svg\"");
          cfg.output.formats.push_back(f.get<std::string>());
        }
      } else {
        throw ConfigError(fmt::format("unknown key '{}' in [output]", key));
      }
    }
  }
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

Json ExperimentConfig::to_json() const {
  Json params_json = Json::object();
  for (const auto& [k, v] : params) params_json[k] = v;
  Json numeric_json = {{"n_grid", numeric.n_grid}, {"m", numeric.m}, {"seed", numeric.seed}, {"workers", numeric.workers}};
  return Json{{"system", {{"family", family}, {"params", params_json}}},
              {"experiment", kind},
              {kind, experiment},
              {"numeric", numeric_json},
              {"output", {{"directory", output.directory}, {"formats", output.formats}}}};
}

}  // namespace nuelab::cli
