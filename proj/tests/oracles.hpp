#pragma once

// Independent reference computations used by the tests. None of these call
// the optimized code paths they are compared against.

#include "nuelab/diagnostics.hpp"
#include "nuelab/systems.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

inline double integrate(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b);
}

inline double gauss_density(double x) { return 1.0 / ((1.0 + x) * std::log(2.0)); }

inline double arcsine_density(double x) { return 1.0 / (std::numbers::pi * std::sqrt(4.0 - x * x)); }

/// Bin masses of the arcsine law on [-2, 2] by quadrature.
inline std::vector<double> arcsine_bin_masses(std::size_t bins) {
  std::vector<double> out;
  for (std::size_t i = 0; i < bins; ++i) {
    const double a = -2.0 + 4.0 * i / bins, b = -2.0 + 4.0 * (i + 1) / bins;
    out.push_back(integrate(arcsine_density, a, b));
  }
  return out;
}

/// Smoothstep written out independently: xi(u) = 1 - (6u^5 - 15u^4 + 10u^3).
inline double d_delta(double d, double delta) {
  if (d <= delta) return d;
  if (d >= 2 * delta) return 1.0;
  const double u = (d - delta) / delta;
  const double s = 6 * std::pow(u, 5) - 15 * std::pow(u, 4) + 10 * std::pow(u, 3);
  const double xi = 1.0 - s;
  return xi * d + 1.0 - xi;
}

/// Integral of |log d_delta(x)| against the Gauss density.
inline double gauss_delta_integral(double delta) {
  boost::math::quadrature::gauss_kronrod<double, 61> q;
  auto f = [delta](double x) { return std::abs(std::log(d_delta(x, delta))) * gauss_density(x); };
  return integrate([&](double x) { return f(x); }, 0.0, delta) + q.integrate(f, delta, 2 * delta);
}

/// Lyapunov exponent of the Gauss map, int -2 log x d mu_G.
inline double gauss_lyapunov() {
  return integrate([](double x) { return -2.0 * std::log(x) * gauss_density(x); }, 0.0, 1.0);
}

inline double binary_entropy(double c) {
  if (c <= 0.0 || c >= 1.0) return 0.0;
  return -c * std::log(c) - (1 - c) * std::log(1 - c);
}

/// Binomial tail 2^-n sum_{k >= kmin} C(n, k) in floating point.
inline double binomial_tail(unsigned n, unsigned kmin) {
  double s = 0.0;
  for (unsigned k = kmin; k <= n; ++k)
    s += std::exp(std::log(boost::math::binomial_coefficient<double>(n, k)) - n * std::log(2.0));
  return s;
}

/// Hyperbolic times by a direct double loop over (n, k).
inline std::vector<std::size_t> hyperbolic_times_reference(const nuelab::DynamicalSystem& sys,
                                                           const nuelab::Point& x, std::size_t n_max,
                                                           const nuelab::HyperbolicTimeParams& p) {
  std::vector<double> psi, dd;
  nuelab::Point y = x;
  for (std::size_t j = 0; j < n_max; ++j) {
    psi.push_back(sys.log_inverse_norm(y));
    const double d = sys.singular_distance(y);
    dd.push_back(std::isfinite(d) ? d_delta(d, p.delta) : 1.0);
    y = sys.step(y);
  }
  std::vector<std::size_t> out;
  for (std::size_t n = 1; n <= n_max; ++n) {
    bool ok = true;
    double window = 0.0;
    for (std::size_t k = 1; k <= n && ok; ++k) {
      window += psi[n - k];
      ok = window <= k * std::log(p.sigma);
    }
    for (std::size_t k = 0; k < n && ok; ++k) {
      const double d = p.indexing == nuelab::RecurrenceIndexing::PaperLiteral ? dd[k] : dd[n - 1 - k];
      const double kk = p.indexing == nuelab::RecurrenceIndexing::PaperLiteral ? k : k + 1;
      ok = d >= std::exp(-p.b * kk);
    }
    if (ok) out.push_back(n);
  }
  return out;
}

}  // namespace oracle
