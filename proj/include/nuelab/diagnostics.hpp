#pragma once

#include "nuelab/observable.hpp"
#include "nuelab/stats.hpp"
#include "nuelab/systems.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace nuelab {

/// (1/n) sum_{j<n} phi(f^j x), compensated.
double birkhoff_average(const DynamicalSystem& sys, const Observable& phi, const Point& x, std::size_t n);

/// (1/n) S_n psi with psi = log ||Df^{-1}||.
double nue_statistic(const DynamicalSystem& sys, const Point& x, std::size_t n);

/// Quintic smoothstep cutoff: 1 on [0, delta], 0 on [2 delta, inf).
double truncation_weight(double distance, double delta);
/// d_delta = xi d + 1 - xi for a given distance d to the singular set.
double truncated_distance(double distance, double delta);
double truncated_distance(const DynamicalSystem& sys, const Point& x, double delta);
/// Delta_delta = |log d_delta|; zero whenever d >= 2 delta.
double delta_log(double distance, double delta);
double delta_log(const DynamicalSystem& sys, const Point& x, double delta);

/// (1/n) S_n Delta_delta.
double slow_recurrence_statistic(const DynamicalSystem& sys, const Point& x, std::size_t n, double delta);

enum class RecurrenceIndexing {
  /// d_delta(f^k x) >= e^{-bk} for k = 0..n-1, as printed.
  PaperLiteral,
  /// d_delta(f^{n-k} x) >= e^{-bk} for k = 1..n, the backward form.
  Reversed,
};

std::string_view to_string(RecurrenceIndexing indexing);
RecurrenceIndexing recurrence_indexing_from(std::string_view name);

struct HyperbolicTimeParams {
  double sigma = 0.5;
  double delta = 0.1;
  double b = 0.5;
  RecurrenceIndexing indexing = RecurrenceIndexing::PaperLiteral;

  void validate() const;
};

/// Times n in [1, psi.size()] such that every trailing window of psi[0..n)
/// sums to at most k log_sigma (k the window length). Linear time.
std::vector<std::size_t> contraction_times(std::span<const double> psi, double log_sigma);

/// All (sigma, delta, b)-hyperbolic times n <= n_max of x. The contraction
/// condition is required for window lengths k = 1..n; the recurrence
/// condition follows `params.indexing`. Work is O(n_max), in log space.
std::vector<std::size_t> hyperbolic_times(const DynamicalSystem& sys, const Point& x, std::size_t n_max,
                                          const HyperbolicTimeParams& params);

/// #{k : n_k <= N} / N.
double hyperbolic_time_density(std::span<const std::size_t> times, std::size_t N);

struct LyapunovOptions {
  /// Re-orthonormalize the 2-D cocycle every `period` steps.
  std::size_t period = 10;
  /// Iterates spent aligning the frame before accumulating (2-D only).
  std::size_t warmup = 100;
};

/// Lyapunov exponents in descending order (one in 1-D, two in 2-D).
std::vector<double> lyapunov_spectrum(const DynamicalSystem& sys, const Point& x, std::size_t n,
                                      LyapunovOptions options = {});

/// Sum of the positive entries of a spectrum.
double positive_sum(std::span<const double> spectrum);

/// S_n J with J = log |det Df|.
double sum_log_jacobian(const DynamicalSystem& sys, const Point& x, std::size_t n);

struct BallVolume {
  double estimate = 0.0;
  Interval ci{0.0, 0.0};
  std::uint64_t hits = 0;
  std::uint64_t samples = 0;
  bool exact = false;
};

/// Monte-Carlo volume of B(x, n, r) = {y : d(f^i x, f^i y) < r, i < n}
/// from m uniform samples of the domain (sup-norm distance on 2-D domains).
BallVolume dynamical_ball_volume(const DynamicalSystem& sys, const Point& x, std::size_t n, double r,
                                 std::size_t m, std::uint64_t seed, unsigned workers = 1);

/// Exact B(x, n, r) volume for 1-D systems with declared monotone branches,
/// by backward interval enumeration. ConfigError if branches are missing.
BallVolume dynamical_ball_volume_exact(const DynamicalSystem& sys, const Point& x, std::size_t n, double r);

struct OrbitSummary {
  Point start;
  std::size_t length = 0;
  std::vector<std::string> observable_names;
  std::vector<double> observable_sums;  ///< S_n phi per observable
  double sum_psi = 0.0;                 ///< S_n log ||Df^{-1}||
  double sum_delta = 0.0;               ///< S_n Delta_delta
  double sum_jacobian = 0.0;            ///< S_n log |det Df|
  double min_singular_distance = kNoSingularSet;
  std::vector<std::size_t> hyperbolic_times;
};

OrbitSummary summarize_orbit(const DynamicalSystem& sys, const Point& x, std::size_t n,
                             std::span<const Observable> observables, const HyperbolicTimeParams& params);

/// Column order: x0,y0,n,S_<obs>...,S_psi,S_delta,S_J,min_sd,n_hyptimes,hyp_density,first_hyptime.
std::string orbit_csv_header(std::span<const std::string> observable_names);
std::string orbit_csv_row(const OrbitSummary& summary);

}  // namespace nuelab
