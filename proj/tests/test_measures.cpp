#include "nuelab/measures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace nuelab;

TEST_SUITE("measures") {
  TEST_CASE("integration against a histogram") {
    const auto uni = EmpiricalMeasure::uniform(DomainSpec::circle(), 10);
    const auto dbl = build_system("doubling");
    CHECK(integrate(uni, Observable::coordinate(dbl)) == doctest::Approx(0.5));
    CHECK(integrate(uni, Observable::constant(2.5)) == doctest::Approx(2.5));
    CHECK_THROWS_AS(EmpiricalMeasure::uniform(DomainSpec::circle(), 1), ConfigError);
  }

  TEST_CASE("doubling histogram is uniform") {
    const auto dbl = build_system("doubling");
    SamplingOptions o{1000, 100, 10000, 7, 1, 8};
    const auto m = empirical_measure(dbl, 10, o);
    CHECK(std::accumulate(m.weights.begin(), m.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double sigma = std::sqrt(0.1 * 0.9 / static_cast<double>(m.samples));
    for (double w : m.weights) CHECK(std::abs(w - 0.1) < 3 * sigma);
  }

  TEST_CASE("quadratic histogram approaches the arcsine law") {
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    SamplingOptions o{200, 1000, 20000, 3, 1, 8};
    const auto m = empirical_measure(quad, 100, o);
    CHECK(l1_distance(m, oracle::arcsine_bin_masses(100)) < 0.05);
    CHECK(integrate(m, observable_by_name(quad, "x2")) == doctest::Approx(2.0).epsilon(0.025));
    const auto summary = measure_summary(m);
    CHECK(summary["moments"][0]["mean"].get<double>() == doctest::Approx(0.0).scale(1.0).epsilon(0.02));
  }

  TEST_CASE("gauss first decile") {
    const auto gauss = build_system("gauss");
    SamplingOptions o{200, 100, 20000, 5, 1, 8};
    const auto m = empirical_measure(gauss, 10, o);
    const double p = oracle::integrate(oracle::gauss_density, 0.0, 0.1);
    CHECK(p == doctest::Approx(std::log(1.1) / std::log(2.0)));
    const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(m.samples));
    CHECK(std::abs(m.weights[0] - p) < 3 * sigma);
  }

  TEST_CASE("worker count does not change histograms") {
    const auto sys = build_system("lorenz1d");
    SamplingOptions o{37, 50, 2000, 13, 1, 8};
    const auto a = empirical_measure(sys, 25, o);
    o.workers = 4;
    const auto b = empirical_measure(sys, 25, o);
    CHECK(a.weights == b.weights);
    CHECK(measure_csv(a) == measure_csv(b));
  }

  TEST_CASE("two-dimensional histograms") {
    const auto cat = build_system("cat_map");
    SamplingOptions o{50, 10, 2000, 2, 2, 8};
    const auto m = empirical_measure(cat, 8, o);
    CHECK(m.size() == 64);
    CHECK(std::accumulate(m.weights.begin(), m.weights.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(measure_csv(m).find("y_lo [coord]") != std::string::npos);
  }

  TEST_CASE("basin counts") {
    SamplingOptions o{40, 1000, 50000, 17, 1, 8};
    CHECK(basin_count(build_system("doubling"), 20, 0.2, o).count() == 1);
    CHECK(basin_count(build_system("quadratic", {{"a", 2.0}}), 20, 0.2, o).count() == 1);
    const auto two = basin_count(build_system("bistable_circle"), 20, 0.2, o);
    CHECK(two.count() == 2);
    CHECK(two.clusters[0].members + two.clusters[1].members == 40);
  }

  TEST_CASE("local entropy") {
    SamplingOptions o{200, 500, 5000, 3, 1, 8};
    const auto rot = build_system("rotation");
    const auto er = srb_ensemble(rot, o);
    CHECK(std::abs(local_entropy(rot, er, Point(0.3, 0), 15, 0.05).estimate) < 0.05);

    const auto dbl = build_system("doubling");
    const auto ed = srb_ensemble(dbl, o);
    CHECK(local_entropy(dbl, ed, Point(0.3183, 0), 15, 0.05).estimate == doctest::Approx(std::log(2.0)).epsilon(0.1 / std::log(2.0)));

    const auto cat = build_system("cat_map");
    const auto ec = srb_ensemble(cat, o);
    const double cat_h = local_entropy(cat, ec, Point(0.31, 0.72), 12, 0.05).estimate;
    CHECK(std::abs(cat_h - std::log((3 + std::sqrt(5.0)) / 2)) < 0.1);

    // Empty balls fall back to the surrogate count 3.
    const EmpiricalOrbitSet tiny{{Point(0.9, 0)}, 0};
    const auto le = local_entropy(dbl, tiny, Point(0.1, 0), 5, 0.01);
    CHECK(le.censored);
    CHECK(le.estimate == doctest::Approx(-std::log(3.0) / 5));
  }

  TEST_CASE("Ruelle inequality on controls") {
    RuelleOptions o;
    o.sampling = {100, 500, 4000, 2, 1, 8};
    o.lyapunov_length = 20000;
    for (const char* f : {"doubling", "rotation", "cat_map"}) {
      CAPTURE(f);
      const auto r = ruelle_check(build_system(f), o);
      CHECK(r.holds());
      CHECK(r.references.size() == 20);
    }
  }
}
