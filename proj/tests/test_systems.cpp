#include "nuelab/random.hpp"
#include "nuelab/systems.hpp"

#include <doctest.h>

#include <cmath>

using namespace nuelab;

namespace {

Point random_point(const DynamicalSystem& sys, std::uint64_t seed, std::size_t i) {
  StartStream rng(seed, i);
  return sys.domain().from_unit(rng.uniform_open(), rng.uniform_open());
}

}  // namespace

TEST_SUITE("systems") {
  TEST_CASE("doubling has constant derivative and no singular set") {
    const auto sys = build_system("doubling");
    CHECK(sys.derivative(Point(0.3, 0))(0, 0) == 2.0);
    CHECK(std::isinf(sys.singular_distance(Point(0.3, 0))));
    CHECK_FALSE(sys.has_singular_set());
    CHECK(sys.map(Point(0.3, 0)).x() == doctest::Approx(0.6).epsilon(1e-12));
  }

  TEST_CASE("quadratic at a = 2") {
    const auto sys = build_system("quadratic", {{"a", 2.0}});
    CHECK(sys.map(Point(0.5, 0)).x() == 1.75);
    CHECK(sys.derivative(Point(0.5, 0))(0, 0) == -1.0);
    CHECK(sys.singular_distance(Point(0.5, 0)) == 0.5);
    CHECK(sys.domain().lo0 == -2.0);
    CHECK(sys.domain().hi0 == 2.0);
  }

  TEST_CASE("gauss map values") {
    const auto sys = build_system("gauss");
    CHECK(sys.map(Point(0.4, 0)).x() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(sys.derivative(Point(0.4, 0))(0, 0) == doctest::Approx(-6.25).epsilon(1e-14));
  }

  TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(build_system("no_such_family"), ConfigError);
    CHECK_THROWS_AS(build_system("quadratic", {{"a", 2.5}}), ConfigError);
    CHECK_THROWS_AS(build_system("quadratic", {{"a", 1.0}}), ConfigError);
    CHECK_THROWS_AS(build_system("quadratic", {{"b", 1.0}}), ConfigError);
    CHECK_THROWS_AS(build_system("viana", {{"d", 8.0}}), ConfigError);
    CHECK_THROWS_AS(build_system("infinite_modal", {{"alpha", 1.5}}), ConfigError);
    CHECK_THROWS_AS(build_system("infinite_modal", {{"beta", -1.0}}), ConfigError);
    CHECK_THROWS_AS(build_system("da_map", {{"kappa", 2.2}}), ConfigError);
    CHECK_NOTHROW(build_system("da_map", {{"kappa", 0.0}}));
  }

  TEST_CASE("every family builds and evaluates deterministically") {
    for (const auto& f : family_names()) {
      CAPTURE(f);
      const auto a = build_system(f);
      const auto b = build_system(f);
      for (std::size_t i = 0; i < 100; ++i) {
        const Point p = random_point(a, 11, i);
        if (!(a.singular_distance(p) > 0.0)) continue;
        CHECK(a.map(p) == b.map(p));
        CHECK(a.derivative(p) == b.derivative(p));
        CHECK(a.singular_distance(p) == b.singular_distance(p));
      }
    }
  }

  TEST_CASE("domain closure") {
    // Every visited point stays in the domain or a domain error is raised.
    for (const auto& f : family_names()) {
      CAPTURE(f);
      const auto sys = build_system(f);
      std::size_t errors = 0;
      for (std::size_t i = 0; i < 2000; ++i) {
        Point p = random_point(sys, 5, i);
        try {
          for (int j = 0; j < 1000; ++j) {
            p = sys.step(p);
            REQUIRE(sys.domain().contains(p));
          }
        } catch (const HitSingularSet&) {
          ++errors;
        } catch (const LeftDomain&) {
          ++errors;
        }
      }
      if (f == "quadratic") CHECK(errors == 0);
    }
    const auto beyond = build_system("quadratic", {{"a", 2.1}}, BuildOptions{false});
    Point p(0.3, 0.0);
    CHECK_THROWS_AS(
        [&] {
          for (int j = 0; j < 1000; ++j) p = beyond.step(p);
        }(),
        LeftDomain);
  }

  TEST_CASE("derivative agrees with central differences") {
    const double h = 1e-6;
    for (const auto& f : family_names()) {
      CAPTURE(f);
      const auto sys = build_system(f);
      const auto& dom = sys.domain();
      std::size_t checked = 0;
      for (std::size_t i = 0; checked < 1000 && i < 100000; ++i) {
        const Point p = random_point(sys, 3, i);
        if (!(sys.singular_distance(p) > 1e-2)) continue;
        Jacobian fd = Jacobian::Zero();
        bool jump = false;
        for (int axis = 0; axis < sys.dimension(); ++axis) {
          Point lo = p, hi = p;
          lo[axis] -= h;
          hi[axis] += h;
          if (!dom.contains(dom.wrap(lo)) || !dom.contains(dom.wrap(hi))) {
            jump = true;
            break;
          }
          const Vector diff = displacement(dom, sys.map(dom.wrap(lo)), sys.map(dom.wrap(hi)));
          if (diff.norm() > 0.25) jump = true;
          fd.col(axis) = diff / (2 * h);
        }
        if (jump) continue;
        const Jacobian df = sys.derivative(p);
        const double err = sys.dimension() == 1 ? std::abs(fd(0, 0) - df(0, 0)) / std::abs(df(0, 0))
                                                : (fd - df).norm() / df.norm();
        CHECK(err < 1e-6);
        ++checked;
      }
      CHECK(checked == 1000);
    }
  }

  TEST_CASE("non-flatness sampling") {
    const auto quad = build_system("quadratic", {{"a", 2.0}});
    const auto rq = check_nonflat(quad, 3.0, 1.0, 10000, 1);
    CHECK(rq.passed());
    CHECK(rq.samples_checked > 1000);
    CHECK_THROWS_AS(check_nonflat(build_system("doubling"), 2.0, 1.0, 100, 1), ConfigError);
    const auto rg = check_nonflat(build_system("gauss"), 2.0, 2.0, 10000, 1);
    CHECK(rg.passed());
    CHECK(rg.samples_checked > 1000);
    const auto rl = check_nonflat(build_system("lorenz1d"), 2.0, 0.25, 10000, 1);
    CHECK(rl.passed());
    // Too small an exponent cannot bound |Q'| = 2|x| from below near 0.
    CHECK_FALSE(check_nonflat(quad, 3.0, 0.5, 10000, 1).passed());
  }

  TEST_CASE("infinite-modal critical points are singular") {
    const auto sys = build_system("infinite_modal");
    const double theta = std::atan(5.0 / 0.5);
    for (int m = 3; m < 8; ++m) {
      const double z = std::exp(-(theta + m * std::numbers::pi) / 5.0);
      if (z > 0.1) continue;
      CHECK(sys.singular_distance(Point(z, 0)) < 1e-12);
      CHECK(std::abs(sys.derivative(Point(z, 0))(0, 0)) < 1e-9);
      CHECK(sys.singular_distance(Point(-z, 0)) < 1e-12);
    }
  }

  TEST_CASE("viana interval is forward invariant") {
    const auto sys = build_system("viana");
    const double lo = sys.metadata().at("I_lo"), hi = sys.metadata().at("I_hi");
    CHECK(lo < 0.0);
    CHECK(hi > 0.0);
    for (std::size_t i = 0; i < 10000; ++i) {
      const Point q = sys.map(random_point(sys, 9, i));
      CHECK(q.y() > lo);
      CHECK(q.y() < hi);
    }
  }

  TEST_CASE("bistable control has two attracting fixed points") {
    const auto sys = build_system("bistable_circle");
    CHECK(sys.map(Point(0.0, 0)).x() == 0.0);
    CHECK(sys.map(Point(0.5, 0)).x() == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(std::abs(sys.derivative(Point(0.5, 0))(0, 0)) < 1.0);
    CHECK(std::abs(sys.derivative(Point(0.25, 0))(0, 0)) > 1.0);
  }
}
