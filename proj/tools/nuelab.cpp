#include "nuelab/cli/runner.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <iostream>

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte-Carlo experiments for non-uniformly expanding maps"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  for (const auto& k : nuelab::cli::experiment_kinds()) {
    std::string cmd = k;
    std::replace(cmd.begin(), cmd.end(), '_', '-');
    auto* sub = app.add_subcommand(cmd, "run the [" + k + "] experiment of a config file");
    sub->add_option("--config", config_path, "experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "random seed (overrides [numeric] seed)");
    sub->add_option("--workers", workers, "worker threads (overrides [numeric] workers)")->check(CLI::PositiveNumber);
  }
  std::vector<std::string> bundles;
  auto* report = app.add_subcommand("report", "merge bundle summaries into one comparison table");
  report->add_option("bundles", bundles, "bundle directories or summary.json files")->required();
  report->add_option("--out", out_dir, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (report->parsed()) {
      std::vector<std::filesystem::path> paths(bundles.begin(), bundles.end());
      const std::string table = nuelab::cli::report_csv(paths);
      if (out_dir.empty()) {
        std::cout << table;
      } else {
        std::filesystem::create_directories(out_dir);
        std::ofstream(std::filesystem::path(out_dir) / "report.csv", std::ios::binary) << table;
      }
      return kOk;
    }
    const auto* sub = app.get_subcommands().front();
    std::string wanted = sub->get_name();
    std::replace(wanted.begin(), wanted.end(), '-', '_');

    nuelab::cli::ExperimentConfig cfg = nuelab::cli::load_config(config_path);
    if (cfg.kind != wanted)
      throw nuelab::ConfigError(fmt::format("config holds a [{}] experiment, not [{}]", cfg.kind, wanted));
    if (sub->count("--seed")) cfg.numeric.seed = seed;
    if (sub->count("--workers")) cfg.numeric.workers = workers;
    if (!out_dir.empty()) cfg.output.directory = out_dir;

    const auto bundle = nuelab::cli::run_experiment(cfg);
    nuelab::cli::write_bundle(bundle, cfg.output);
    fmt::print("{}: wrote {} (results.csv {})\n", wanted, cfg.output.directory,
               bundle.summary["results"]["sha1"].get<std::string>());
    return kOk;
  } catch (const nuelab::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kConfigError;
  } catch (const nuelab::Error& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kNumericError;
  } catch (const std::exception& e) {
    fmt::print(stderr, "numeric failure: {}\n", e.what());
    return kNumericError;
  }
}
