#pragma once

#include "nuelab/cli/config.hpp"
#include "nuelab/deviations.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace nuelab::cli {

inline constexpr const char* kSummarySchema = "nuelab.summary.v1";

/// In-memory artifact bundle of one run.
struct Bundle {
  std::string results_csv;
  Json summary;
  std::optional<std::string> chart_svg;
};

/// Runs the configured experiment. Failed starts are counted in the
/// summary rather than aborting the run.
Bundle run_experiment(const ExperimentConfig& config);

/// Writes results.csv, summary.json and rate.svg as selected by `formats`.
/// The summary always carries the hash of results.csv.
void write_bundle(const Bundle& bundle, const OutputConfig& output);

/// SHA-1 of "blob <size>\0<content>", as printed by `git hash-object`.
std::string git_blob_sha1(std::string_view content);

/// Line chart of -(1/n) log p_n against n, with an optional horizontal
/// reference line at `reference`.
std::string rate_chart_svg(const std::vector<FractionEstimate>& series, std::optional<double> reference,
                           const std::string& title);

/// Merges bundle summaries into one CSV table with the empirical rate,
/// the variational bound and gap = xi_empirical + rate_bound.
std::string report_csv(const std::vector<std::filesystem::path>& bundles);

}  // namespace nuelab::cli
