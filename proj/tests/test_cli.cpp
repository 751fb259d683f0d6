#include "nuelab/cli/config.hpp"
#include "nuelab/cli/runner.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace nuelab;
using namespace nuelab::cli;

namespace {

const char* kDeviateExact = R"(
[system]
family = "doubling"

[deviate]
observable = "digit"
c = 0.8
method = "exact"

[numeric]
n_grid = [100, 150, 200, 250, 300, 350, 400]
seed = 1
)";

std::string with_workers(const std::string& base, unsigned w) {
  return base + "workers = " + std::to_string(w) + "\n";
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("nuelab_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("toml subset") {
    const Json j = parse_toml(R"(# comment
top = 1
[a]
s = "x \"y\"" # trailing
f = 2.5e-3
i = -7
b = true
list = [1, 2,
        3,]
nested = [[1, 2], ["u"]]
[a.sub]
k = 1_000
)");
    CHECK(j["top"] == 1);
    CHECK(j["a"]["s"] == "x \"y\"");
    CHECK(j["a"]["f"].get<double>() == 2.5e-3);
    CHECK(j["a"]["i"] == -7);
    CHECK(j["a"]["b"] == true);
    CHECK(j["a"]["list"].size() == 3);
    CHECK(j["a"]["nested"][1][0] == "u");
    CHECK(j["a"]["sub"]["k"] == 1000);

    auto where = [](const char* text) {
      try {
        parse_toml(text);
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(where("[a]\nx = \n") == "line 2, column 5: missing value");
    CHECK(where("[a]\nx = 1\nx = 2\n").find("line 3, column 1: duplicate key 'x'") != std::string::npos);
    CHECK(where("[a]\n[a]\n").find("line 2, column 1") != std::string::npos);
    CHECK(where("x = \"open\n").find("line 1, column 5: unterminated string") != std::string::npos);
    CHECK(where("x = [1, 2\n").find("line 2") != std::string::npos);
    CHECK(where("x = 1 2\n").find("line 1, column 7") != std::string::npos);
    CHECK(where("x = 1.2.3\n").find("invalid value") != std::string::npos);
  }

  TEST_CASE("config validation") {
    const std::string base = "[system]\nfamily = \"doubling\"\n[deviate]\nc = 0.8\nobservable = \"digit\"\n";
    CHECK(error_of(base + "[numeric]\nn_grid = []\nseed = 1\n") == "[numeric] n_grid must not be empty");
    CHECK(error_of(base + "[numeric]\nn_grid = [5]\n") == "[numeric] seed is required");
    CHECK(error_of(base + "[tail]\neps = 1\n[numeric]\nn_grid = [5]\nseed = 1\n").find("exactly one experiment") !=
          std::string::npos);
    CHECK(error_of(base + "colour = 1\n[numeric]\nn_grid = [5]\nseed = 1\n") == "unknown key 'colour' in [deviate]");
    CHECK(error_of(base + "[numeric]\nn_grid = [5, 5]\nseed = 1\n").find("strictly increasing") != std::string::npos);
    CHECK(error_of("[system]\nfamily = \"nope\"\n[bound]\nc = 1\n[numeric]\nseed = 1\n").find("nope") !=
          std::string::npos);
    CHECK(error_of("[system]\nfamily = \"doubling\"\n[deviate]\n[numeric]\nn_grid = [5]\nseed = 1\n") ==
          "[deviate] c is required");

    const auto cfg = parse_config("[system]\nfamily = \"quadratic\"\n[tail]\neps = 0.5\n[numeric]\nn_grid = [5]\nseed = 3\n");
    const Json j = cfg.to_json();
    CHECK(j["system"]["params"]["a"] == 2.0);
    CHECK(j["tail"]["delta"] == 0.1);
    CHECK(j["numeric"]["workers"] == 1);
    CHECK(j["output"]["formats"].size() == 2);
  }

  TEST_CASE("content hash") {
    CHECK(git_blob_sha1("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
    CHECK(git_blob_sha1("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  }

  TEST_CASE("deviate and bound bundles") {
    const auto exact = run_experiment(parse_config(kDeviateExact));
    CHECK(std::abs(exact.summary["fit"]["xi"].get<double>() - 0.193) < 0.01);
    CHECK(exact.summary["results"]["sha1"] == git_blob_sha1(exact.results_csv));
    CHECK(exact.results_csv.rfind("n [iterates],", 0) == 0);
    CHECK(count_lines(exact.results_csv) == 8);

    const auto bound = run_experiment(parse_config(
        "[system]\nfamily = \"doubling\"\n[bound]\nc = [0.8]\nbruteforce_grid = 200\n[numeric]\nseed = 1\n"));
    const double rb = bound.summary["statistics"]["values"][0]["rate_bound"].get<double>();
    CHECK(rb == doctest::Approx(oracle::binary_entropy(0.8) - std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(bound.summary["statistics"]["values"][0]["bruteforce"].get<double>() - rb) < 1e-3);

    const auto dir = scratch("report");
    OutputConfig out;
    out.directory = (dir / "dev").string();
    write_bundle(exact, out);
    out.directory = (dir / "bound").string();
    write_bundle(bound, out);
    const std::string table = report_csv({dir / "dev", dir / "bound"});
    CHECK(count_lines(table) == 3);
    std::istringstream rows(table);
    std::string header, dev_row;
    std::getline(rows, header);
    std::getline(rows, dev_row);
    CHECK(header.find("gap [1/iterate]") != std::string::npos);
    const double gap = std::stod(dev_row.substr(dev_row.rfind(',') + 1));
    CHECK(std::abs(gap) < 0.02);

    std::ofstream(dir / "bad.json") << R"({"schema": "other"})";
    CHECK_THROWS_AS(report_csv({dir / "bad.json"}), ConfigError);
    CHECK_THROWS_AS(report_csv({}), ConfigError);
    std::filesystem::remove_all(dir);
  }

  TEST_CASE("escape bundle") {
    const char* text = R"(
[system]
family = "doubling"
[escape]
lo = 0.0
hi = 0.5
[numeric]
n_grid = [3, 5, 7, 9, 11]
m = 200000
seed = 4
[output]
formats = ["csv", "json", "svg"]
)";
    const auto b = run_experiment(parse_config(text));
    CHECK(std::abs(b.summary["fit"]["xi"].get<double>() - std::log(2.0)) < 0.05);
    CHECK(b.summary["oracle"]["exact_xi"].get<double>() == doctest::Approx(std::log(2.0)).epsilon(1e-9));
    for (const auto& p : b.summary["oracle"]["exact_points"]) CHECK(p["inside_999_ci"] == true);
    REQUIRE(b.chart_svg);
    CHECK(b.chart_svg->rfind("<svg", 0) == 0);
  }

  TEST_CASE("results do not depend on the worker count") {
    const std::string base = R"(
[system]
family = "quadratic"
[hyptimes]
n_max = 300
sigma = 0.9
[numeric]
m = 50
seed = 9
)";
    const auto one = run_experiment(parse_config(with_workers(base, 1)));
    const auto three = run_experiment(parse_config(with_workers(base, 3)));
    CHECK(one.results_csv == three.results_csv);
    CHECK(one.summary["results"]["sha1"] == three.summary["results"]["sha1"]);
  }
}
