#pragma once

#include "nuelab/errors.hpp"
#include "nuelab/systems.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nuelab::cli {

using Json = nlohmann::ordered_json;

/// Parses the TOML subset used by experiment files: [table] and
/// [table.sub] headers, bare keys, strings, integers, floats, booleans and
/// (possibly multi-line) arrays. Errors carry "line L, column C".
Json parse_toml(std::string_view text);

/// Experiment kinds, one per config block.
inline const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds{"simulate", "hyptimes", "measure", "deviate",
                                              "escape",   "tail",     "bound",   "ruelle_check"};
  return kinds;
}

struct NumericConfig {
  std::vector<std::size_t> n_grid;
  std::size_t m = 10000;
  std::uint64_t seed = 0;
  unsigned workers = 1;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};
  bool wants(std::string_view format) const;
};

struct ExperimentConfig {
  std::string family;
  ParamRecord params;
  std::string kind;
  Json experiment;  ///< block contents with defaults filled in
  NumericConfig numeric;
  OutputConfig output;

  /// Full configuration, defaults included, as written into summary.json.
  Json to_json() const;
};

/// Validates the block structure and fills defaults. ConfigError on
/// unknown keys, missing seed, an empty n_grid where one is needed, or
/// anything other than exactly one experiment block.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace nuelab::cli
