#include "nuelab/diagnostics.hpp"
#include "nuelab/random.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>

using namespace nuelab;

namespace {

Point random_point(const DynamicalSystem& sys, std::uint64_t seed, std::size_t i) {
  StartStream rng(seed, i);
  return sys.domain().from_unit(rng.uniform_open(), rng.uniform_open());
}

const double kLog2 = std::log(2.0);
const double kCat = std::log((3.0 + std::sqrt(5.0)) / 2.0);

}  // namespace

TEST_SUITE("diagnostics") {
  TEST_CASE("birkhoff averages") {
    const auto dbl = build_system("doubling");
    CHECK(birkhoff_average(dbl, Observable::digit(), Point(1.0 / 3.0, 0), 2) == 0.5);
    CHECK(birkhoff_average(dbl, Observable::constant(1.25), Point(0.1, 0), 77) == doctest::Approx(1.25));
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    const double avg = birkhoff_average(quad, Observable::coordinate(quad), Point(0.3141, 0), 1000000);
    CHECK(std::abs(avg) < 5e-3);
    CHECK_THROWS_AS(birkhoff_average(dbl, Observable::digit(), Point(0.1, 0), 0), ConfigError);
    CHECK_THROWS_AS(birkhoff_average(quad, Observable::digit(), Point(0.0, 0), 5), HitSingularSet);
  }

  TEST_CASE("NUE statistic") {
    const auto dbl = build_system("doubling");
    CHECK(nue_statistic(dbl, Point(0.2, 0), 50) == doctest::Approx(-kLog2).epsilon(1e-15));
    const auto gauss = build_system("gauss");
    CHECK(std::abs(nue_statistic(gauss, Point(0.2718281828, 0), 10000000) + oracle::gauss_lyapunov()) < 1e-2);
    CHECK(oracle::gauss_lyapunov() == doctest::Approx(std::numbers::pi * std::numbers::pi / (6 * kLog2)));
    const auto mp = build_system("manneville_pomeau", {{"gamma", 0.5}});
    const double v = nue_statistic(mp, Point(1e-6, 0), 100);
    CHECK(v < 0.0);
    CHECK(v > -0.05);
  }

  TEST_CASE("truncated distance") {
    CHECK(truncated_distance(0.05, 0.1) == 0.05);
    CHECK(delta_log(0.05, 0.1) == doctest::Approx(std::abs(std::log(0.05))));
    CHECK(truncated_distance(0.5, 0.1) == 1.0);
    CHECK(delta_log(0.5, 0.1) == 0.0);
    CHECK(truncated_distance(0.15, 0.1) == doctest::Approx(0.575).epsilon(1e-14));
    CHECK(truncation_weight(0.15, 0.1) == doctest::Approx(0.5));
    CHECK_THROWS_AS(truncated_distance(0.0, 0.1), HitSingularSet);
    // Monotone in delta; zero beyond 2 delta.
    for (int i = 1; i < 400; ++i) {
      const double d = i / 400.0;
      double prev = 0.0;
      for (double delta = 0.01; delta < 0.6; delta += 0.01) {
        const double v = delta_log(d, delta);
        CHECK(v >= prev - 1e-15);
        prev = v;
        CHECK((v == 0.0) == (d >= 2 * delta || truncated_distance(d, delta) == 1.0));
      }
    }
    for (int i = 0; i <= 100; ++i) {
      const double d = 0.1 + 0.1 * i / 100.0;
      CHECK(truncated_distance(d, 0.1) == doctest::Approx(oracle::d_delta(d, 0.1)).epsilon(1e-14));
    }
  }

  TEST_CASE("slow recurrence statistic") {
    const auto dbl = build_system("doubling");
    CHECK(slow_recurrence_statistic(dbl, Point(0.4, 0), 1000, 0.1) == 0.0);
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    // Orbit of the fixed point 1 stays at distance 1 >= 2 delta.
    CHECK(slow_recurrence_statistic(quad, Point(1.0, 0), 100, 0.1) == 0.0);
    const auto gauss = build_system("gauss");
    const double est = slow_recurrence_statistic(gauss, Point(0.5772156649, 0), 1000000, 0.05);
    CHECK(std::abs(est - oracle::gauss_delta_integral(0.05)) < 1e-2);
  }

  TEST_CASE("hyperbolic time examples") {
    const auto dbl = build_system("doubling");
    HyperbolicTimeParams p{0.75, 0.1, 0.5, RecurrenceIndexing::PaperLiteral};
    std::vector<std::size_t> all(100);
    std::iota(all.begin(), all.end(), 1);
    CHECK(hyperbolic_times(dbl, Point(0.123, 0), 100, p) == all);
    const auto rot = build_system("rotation");
    p.sigma = 0.9;
    CHECK(hyperbolic_times(rot, Point(0.123, 0), 100, p).empty());
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    const HyperbolicTimeParams q{0.9, 0.1, 0.5, RecurrenceIndexing::PaperLiteral};
    CHECK(hyperbolic_times(quad, Point(0.3, 0), 50, q) == oracle::hyperbolic_times_reference(quad, Point(0.3, 0), 50, q));
    HyperbolicTimeParams bad = q;
    bad.sigma = 1.5;
    CHECK_THROWS_AS(hyperbolic_times(quad, Point(0.3, 0), 50, bad), ConfigError);
  }

  TEST_CASE("hyperbolic time detector equals the direct reference") {
    for (const auto& f : family_names()) {
      CAPTURE(f);
      const auto sys = build_system(f);
      for (auto indexing : {RecurrenceIndexing::PaperLiteral, RecurrenceIndexing::Reversed}) {
        const HyperbolicTimeParams p{0.9, 0.1, 0.5, indexing};
        for (std::size_t i = 0; i < 200; ++i) {
          const Point x = random_point(sys, 21, i);
          try {
            const auto fast = hyperbolic_times(sys, x, 200, p);
            CHECK(fast == oracle::hyperbolic_times_reference(sys, x, 200, p));
          } catch (const HitSingularSet&) {
          } catch (const LeftDomain&) {
          }
        }
      }
    }
  }

  TEST_CASE("uniform expansion makes every time hyperbolic") {
    const auto sys = build_system("expanding_circle_k", {{"k", 3.0}});
    const HyperbolicTimeParams p{1.0 / 3.0 + 1e-9, 0.1, 0.5, RecurrenceIndexing::PaperLiteral};
    CHECK(hyperbolic_times(sys, Point(0.77, 0), 300, p).size() == 300);
  }

  TEST_CASE("hyperbolic time density") {
    std::vector<std::size_t> all(40), even;
    std::iota(all.begin(), all.end(), 1);
    for (std::size_t n = 2; n <= 40; n += 2) even.push_back(n);
    CHECK(hyperbolic_time_density(all, 40) == 1.0);
    CHECK(hyperbolic_time_density({}, 40) == 0.0);
    CHECK(hyperbolic_time_density(even, 40) == 0.5);
  }

  TEST_CASE("contraction times match a brute-force window check") {
    StartStream rng(4, 0);
    std::vector<double> psi(300);
    for (auto& v : psi) v = rng.uniform() * 2.0 - 1.3;
    const auto fast = contraction_times(psi, std::log(0.8));
    std::vector<std::size_t> slow;
    for (std::size_t n = 1; n <= psi.size(); ++n) {
      bool ok = true;
      double s = 0;
      for (std::size_t k = 1; k <= n && ok; ++k) ok = (s += psi[n - k]) <= k * std::log(0.8);
      if (ok) slow.push_back(n);
    }
    CHECK(fast == slow);
  }

  TEST_CASE("Lyapunov spectrum") {
    const auto dbl = build_system("doubling");
    CHECK(lyapunov_spectrum(dbl, Point(0.3, 0), 1000) == std::vector<double>{kLog2});
    const auto cat = build_system("cat_map");
    const auto l = lyapunov_spectrum(cat, Point(0.123, 0.456), 1000);
    REQUIRE(l.size() == 2);
    CHECK(std::abs(l[0] - kCat) < 1e-6);
    CHECK(std::abs(l[1] + kCat) < 1e-6);
    CHECK(positive_sum(l) == doctest::Approx(kCat));
    const auto tr = build_system("torus_translation");
    const auto z = lyapunov_spectrum(tr, Point(0.1, 0.2), 1000);
    CHECK(std::abs(z[0]) < 1e-12);
    CHECK(std::abs(z[1]) < 1e-12);
  }

  TEST_CASE("Jacobian sums") {
    const auto dbl = build_system("doubling");
    CHECK(sum_log_jacobian(dbl, Point(0.3, 0), 10) == doctest::Approx(10 * kLog2));
    const auto cat = build_system("cat_map");
    CHECK(std::abs(sum_log_jacobian(cat, Point(0.3, 0.1), 57)) < 1e-12);
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    double x = 0.3, expect = 0.0;
    for (int j = 0; j < 5; ++j) {
      expect += std::log(std::abs(-2.0 * x));
      x = 2.0 - x * x;
    }
    CHECK(sum_log_jacobian(quad, Point(0.3, 0), 5) == doctest::Approx(expect).epsilon(1e-12));
    // Cocycle additivity.
    for (const auto& f : family_names()) {
      CAPTURE(f);
      const auto sys = build_system(f);
      for (std::size_t i = 0; i < 20; ++i) {
        const Point p = random_point(sys, 8, i);
        try {
          Point q = p;
          for (int j = 0; j < 30; ++j) q = sys.step(q);
          const double whole = sum_log_jacobian(sys, p, 70);
          const double split = sum_log_jacobian(sys, p, 30) + sum_log_jacobian(sys, q, 40);
          CHECK(std::abs(whole - split) <= 1e-9 * std::max(1.0, std::abs(whole)));
        } catch (const Error&) {
        }
      }
    }
  }

  TEST_CASE("dynamical ball volumes") {
    const auto dbl = build_system("doubling");
    CHECK(dynamical_ball_volume_exact(dbl, Point(0.3, 0), 1, 0.05).estimate == doctest::Approx(0.1));
    CHECK(dynamical_ball_volume_exact(dbl, Point(0.3, 0), 10, 0.05).estimate ==
          doctest::Approx(0.1 * std::pow(2.0, -9)).epsilon(1e-9));
    for (std::size_t n = 5; n <= 15; ++n) {
      const double v = dynamical_ball_volume_exact(dbl, Point(0.3, 0), n, 0.05).estimate;
      CHECK(v * std::exp(sum_log_jacobian(dbl, Point(0.3, 0), n)) == doctest::Approx(0.2).epsilon(1e-6));
    }
    const auto mc = dynamical_ball_volume(dbl, Point(0.3, 0), 1, 0.05, 100000, 3);
    CHECK(mc.ci.contains(0.1));
    const auto mc10 = dynamical_ball_volume(dbl, Point(0.3, 0), 6, 0.05, 200000, 3, 2);
    CHECK(mc10.ci.contains(0.1 * std::pow(2.0, -5)));
    CHECK(mc10.hits == dynamical_ball_volume(dbl, Point(0.3, 0), 6, 0.05, 200000, 3, 1).hits);
    CHECK_THROWS_AS(dynamical_ball_volume(dbl, Point(0.3, 0), 6, 0.05, 10, 3), ConfigError);
    CHECK_THROWS_AS(dynamical_ball_volume_exact(build_system("cat_map"), Point(0.3, 0.2), 3, 0.05), ConfigError);
  }

  TEST_CASE("orbit summary row") {
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    const std::vector<Observable> obs{Observable::coordinate(quad), Observable::digit()};
    const HyperbolicTimeParams p{0.9, 0.1, 0.5, RecurrenceIndexing::Reversed};
    const auto s = summarize_orbit(quad, Point(0.3, 0), 200, obs, p);
    CHECK(s.hyperbolic_times == hyperbolic_times(quad, Point(0.3, 0), 200, p));
    CHECK(std::is_sorted(s.hyperbolic_times.begin(), s.hyperbolic_times.end()));
    CHECK(s.sum_jacobian == doctest::Approx(sum_log_jacobian(quad, Point(0.3, 0), 200)));
    CHECK(s.sum_psi == doctest::Approx(-s.sum_jacobian));
    const std::vector<std::string> names{"x", "digit"};
    const std::string header = orbit_csv_header(names);
    const std::string row = orbit_csv_row(s);
    CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
    CHECK(header.rfind("x0 [coord],y0 [coord],n [iterates],S_x [sum],S_digit [sum],S_psi", 0) == 0);
  }
}
