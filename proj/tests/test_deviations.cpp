#include "nuelab/deviations.hpp"
#include "nuelab/diagnostics.hpp"
#include "nuelab/random.hpp"
#include "nuelab/stats.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace nuelab;

namespace {

DeviationExperiment doubling_digit(double c, std::vector<std::size_t> grid, std::size_t m) {
  const auto sys = build_system("doubling");
  DeviationExperiment e{sys, Observable::digit()};
  e.c = c;
  e.n_grid = std::move(grid);
  e.m = m;
  e.seed = 99;
  return e;
}

}  // namespace

TEST_SUITE("deviations") {
  TEST_CASE("exact doubling oracle") {
    const auto f = exact_doubling_oracle(20, 0.8);
    CHECK(f.numerator == 6196);
    CHECK(f.denominator == 1048576);
    CHECK(f.value() == doctest::Approx(6196.0 / 1048576.0).epsilon(1e-13));
    CHECK(exact_doubling_oracle(37, 0.0).value() == 1.0);
    CHECK(exact_doubling_oracle(37, 1.0 + 1e-9).numerator == 0);
    for (unsigned n : {10u, 50u, 200u, 600u}) {
      const auto e = exact_doubling_oracle(n, 0.7);
      const unsigned kmin = static_cast<unsigned>(std::ceil(0.7 * n - 1e-10));
      CHECK(e.log_value() == doctest::Approx(std::log(oracle::binomial_tail(n, kmin))).epsilon(1e-10));
    }
  }

  TEST_CASE("threshold shortcuts") {
    auto e = doubling_digit(0.0, {5, 10}, 1000);
    for (const auto& f : deviation_series(e)) {
      CHECK(f.p_hat == 1.0);
      CHECK(f.exact);
    }
    e.c = 1.2;
    for (const auto& f : deviation_series(e)) CHECK(f.p_hat == 0.0);
    e.n_grid = {};
    CHECK_THROWS_AS(deviation_series(e), ConfigError);
  }

  TEST_CASE("Monte Carlo lies in the exact binomial band") {
    const auto e = doubling_digit(0.8, {5, 10, 15, 20, 25, 30}, 200000);
    for (const auto& f : deviation_series(e)) {
      CAPTURE(f.n);
      const double exact = exact_doubling_oracle(f.n, 0.8).value();
      CHECK(binomial_band(exact, f.trials, 0.999).contains(f.p_hat));
    }
    CHECK(deviation_fraction(e, 20).n == 20);
    CHECK_THROWS_AS(deviation_fraction(e, 21), ConfigError);
  }

  TEST_CASE("nesting and gate") {
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    DeviationExperiment e{quad, Observable::coordinate(quad)};
    e.n_grid = {10, 20, 40};
    e.m = 20000;
    e.seed = 5;
    e.gate = RecurrenceGate{0.05, 0.3};
    std::vector<std::uint64_t> prev;
    for (double c : {-0.5, 0.0, 0.2, 0.5}) {
      e.c = c;
      const auto counts = deviation_counts(e);
      for (std::size_t i = 0; i < counts.size(); ++i) {
        CHECK(counts[i].joint <= std::min(counts[i].deviation, counts[i].recurrence_ok));
        if (!prev.empty()) CHECK(counts[i].deviation <= prev[i]);
      }
      prev.clear();
      for (const auto& r : counts) prev.push_back(r.deviation);
    }
    e.workers = 3;
    const auto a = deviation_counts(e);
    e.workers = 1;
    const auto b = deviation_counts(e);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].joint == b[i].joint);
      CHECK(a[i].deviation == b[i].deviation);
    }
  }

  TEST_CASE("equilibrium-distance mode") {
    auto e = doubling_digit(0.0, {10, 40, 160}, 20000);
    e.mode = DeviationMode::EquilibriumDistance;
    e.targets = {0.5};
    e.omega = 0.1;
    const auto s = deviation_series(e);
    CHECK(s[0].p_hat > s[1].p_hat);
    CHECK(s[1].p_hat > s[2].p_hat);
    e.omega = 0.0;
    CHECK_THROWS_AS(deviation_series(e), ConfigError);
  }

  TEST_CASE("tail fractions") {
    const auto dbl = build_system("doubling");
    for (const auto& f : tail_series(dbl, 0.1, 0.0, {1, 10, 100}, 1000, 1)) CHECK(f.hits == 0);
    const auto gauss = build_system("gauss");
    const double eps = 2 * oracle::gauss_delta_integral(0.05);
    CHECK(tail_fraction(gauss, 0.05, eps, 1000, 2000, 3).p_hat < 0.05);
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    // Below n ~ 2 log(1/delta) a single close visit already suffices, so the
    // grid starts past that point.
    const auto s = tail_series(quad, 1e-3, 0.5, {16, 20, 24, 28, 32}, 1000000, 4);
    for (std::size_t i = 1; i < s.size(); ++i) CHECK(s[i].p_hat < s[i - 1].p_hat);
    const auto r = fit_exponential_rate(s);
    CHECK(r.ci.lo > 0.0);
    CHECK(r.decay_detected());
  }

  TEST_CASE("escape from half the circle") {
    const auto dbl = build_system("doubling");
    const Region K = Region::interval(0.0, 0.5);
    const auto e3 = escape_survivor_exact(dbl, K, 3);
    CHECK(e3.absolute == doctest::Approx(0.125).epsilon(1e-12));
    CHECK(e3.region_volume == 0.5);
    for (std::size_t n = 1; n <= 20; ++n)
      CHECK(escape_survivor_exact(dbl, K, n).absolute == doctest::Approx(std::pow(2.0, -double(n))).epsilon(1e-9));
    const auto mc = escape_series(dbl, K, {3, 6, 9}, 100000, 8);
    for (const auto& e : mc) CHECK(clopper_pearson(e.relative.hits, e.relative.trials, 0.999).contains(std::pow(2.0, 1.0 - double(e.relative.n))));
    const auto whole = escape_survivor_fraction(dbl, Region::whole(dbl.domain()), 50, 1000, 1);
    CHECK(whole.relative.p_hat == 1.0);
    std::vector<FractionEstimate> exact;
    for (std::size_t n = 5; n <= 15; ++n) exact.push_back(escape_survivor_exact(dbl, K, n).relative);
    CHECK(fit_exponential_rate(exact).xi == doctest::Approx(std::log(2.0)).epsilon(1e-9));
  }

  TEST_CASE("survivors satisfy the plateau inclusion") {
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    const Region K = Region::interval(-1.5, 1.5);
    const Observable plateau = Observable::plateau(-1.5, 1.5, 0.1);
    std::size_t survivors = 0;
    for (std::size_t i = 0; i < 2000; ++i) {
      StartStream rng(6, i);
      const Point x(-1.5 + 3.0 * rng.uniform_open(), 0.0);
      Point p = x;
      bool alive = true;
      for (int j = 0; j < 8 && alive; ++j) {
        alive = K.contains(p);
        p = quad.step(p);
      }
      if (!alive) continue;
      ++survivors;
      CHECK(birkhoff_average(quad, plateau, x, 8) >= 1.0);
    }
    CHECK(survivors > 0);
  }

  TEST_CASE("rate fitting") {
    std::vector<SeriesPoint> s;
    for (std::size_t n = 10; n <= 50; n += 5) s.push_back({n, std::exp(-0.3 * n), 0});
    CHECK(fit_exponential_rate(s).xi == doctest::Approx(0.3).epsilon(1e-12));
    std::vector<SeriesPoint> flat;
    for (std::size_t n = 1; n <= 5; ++n) flat.push_back({n, 1.0, 0});
    CHECK(fit_exponential_rate(flat).xi == doctest::Approx(0.0).scale(1.0));
    std::vector<SeriesPoint> exact;
    for (std::size_t n = 100; n <= 400; n += 10) exact.push_back({n, exact_doubling_oracle(n, 0.8).value(), 0});
    const auto r = fit_exponential_rate(exact);
    CHECK(std::abs(r.xi - (std::log(2.0) - oracle::binary_entropy(0.8))) < 0.01);
    CHECK(r.decay_detected());
    std::vector<SeriesPoint> censored{{1, 0.5, 1000}, {2, 0.25, 1000}, {3, 0.0, 1000}};
    CHECK_THROWS_AS(fit_exponential_rate(censored), NumericError);
    censored.push_back({4, 0.0625, 1000});
    const auto rc = fit_exponential_rate(censored);
    CHECK(rc.censored[2]);
    CHECK(rc.used == 3);
  }
}
