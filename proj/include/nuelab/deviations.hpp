#pragma once

#include "nuelab/observable.hpp"
#include "nuelab/stats.hpp"
#include "nuelab/systems.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace nuelab {

enum class DeviationMode {
  /// (1/n) S_n phi >= c.
  Threshold,
  /// |(1/n) S_n phi - eta| > omega for every target eta.
  EquilibriumDistance,
};

/// What is summed along the orbit.
enum class DeviationQuantity {
  Observable,
  /// log ||Df v_F||, the Jacobian along the tracked centre-unstable direction.
  FJacobian,
};

/// Optional slow-recurrence gate (1/n) S_n Delta_delta <= eps.
struct RecurrenceGate {
  double delta = 0.1;
  double eps = 0.1;
};

struct DeviationExperiment {
  DynamicalSystem system;
  Observable phi;
  DeviationQuantity quantity = DeviationQuantity::Observable;
  DeviationMode mode = DeviationMode::Threshold;
  double c = 0.0;
  std::vector<double> targets{};
  double omega = 0.0;
  std::optional<RecurrenceGate> gate{};
  std::vector<std::size_t> n_grid{};
  std::size_t m = 1000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  std::size_t f_warmup = 50;

  void validate() const;
};

/// Estimated probability at one n.
struct FractionEstimate {
  std::size_t n = 0;
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;  ///< 0 marks an exact value
  double p_hat = 0.0;
  Interval ci{0.0, 0.0};
  bool censored = false;
  bool exact = false;
  std::uint64_t failed = 0;  ///< starts discarded after a singular hit or domain exit
};

FractionEstimate make_estimate(std::size_t n, std::uint64_t hits, std::uint64_t trials, std::uint64_t failed = 0);
FractionEstimate exact_estimate(std::size_t n, double p);

/// Per-n counts of the deviation set B_n, the tail-controlled set A_n and
/// their intersection, on the same samples.
struct DeviationCounts {
  std::size_t n = 0;
  std::uint64_t trials = 0;
  std::uint64_t failed = 0;
  std::uint64_t deviation = 0;
  std::uint64_t recurrence_ok = 0;
  std::uint64_t joint = 0;
};

/// Counts over the experiment's n_grid, one orbit per start run to max(n_grid).
std::vector<DeviationCounts> deviation_counts(const DeviationExperiment& exp);

/// Fraction of starts in B_n (in A_n and B_n when gated) for every n of the grid.
/// Thresholds outside the observable's declared range return exact 0 or 1.
std::vector<FractionEstimate> deviation_series(const DeviationExperiment& exp);
FractionEstimate deviation_fraction(const DeviationExperiment& exp, std::size_t n);

/// Fraction of uniform starts with (1/n) S_n Delta_delta > eps.
std::vector<FractionEstimate> tail_series(const DynamicalSystem& sys, double delta, double eps,
                                          const std::vector<std::size_t>& n_grid, std::size_t m,
                                          std::uint64_t seed, unsigned workers = 1);
FractionEstimate tail_fraction(const DynamicalSystem& sys, double delta, double eps, std::size_t n, std::size_t m,
                               std::uint64_t seed, unsigned workers = 1);

/// A compact set K: an axis-aligned box intersected with an optional
/// membership predicate. Starts are drawn uniformly in the box and kept if
/// they belong to K.
struct Region {
  double lo0 = 0.0, hi0 = 1.0;
  double lo1 = 0.0, hi1 = 0.0;
  std::function<bool(const Point&)> predicate;

  bool contains(const Point& p) const;
  double box_volume(int dimension) const;
  static Region interval(double lo, double hi);
  static Region box(double lo0, double hi0, double lo1, double hi1);
  /// The whole domain of a system.
  static Region whole(const DomainSpec& domain);
};

struct EscapeEstimate {
  FractionEstimate relative;  ///< Leb(survivors) / Leb(K)
  double absolute = 0.0;      ///< Leb(survivors) / Leb(M)
  double region_volume = 0.0; ///< Leb(K) / Leb(M)
};

/// Survivor fractions {x in K : f^j x in K, j < n} for every n of the grid.
std::vector<EscapeEstimate> escape_series(const DynamicalSystem& sys, const Region& K,
                                          const std::vector<std::size_t>& n_grid, std::size_t m,
                                          std::uint64_t seed, unsigned workers = 1);
EscapeEstimate escape_survivor_fraction(const DynamicalSystem& sys, const Region& K, std::size_t n, std::size_t m,
                                        std::uint64_t seed, unsigned workers = 1);
/// Exact survivor measure for 1-D systems with declared branches and an
/// interval K = [lo0, hi0].
EscapeEstimate escape_survivor_exact(const DynamicalSystem& sys, const Region& K, std::size_t n);

struct RateEstimate {
  double xi = 0.0;
  double std_error = 0.0;
  double intercept = 0.0;
  Interval ci{0.0, 0.0};  ///< 95% interval on xi
  std::size_t window_lo = 0;
  std::size_t window_hi = 0;
  std::size_t used = 0;
  std::vector<bool> censored;
  bool decay_detected() const { return ci.lo > 0.0; }
};

struct SeriesPoint {
  std::size_t n;
  double p;
  std::uint64_t m;  ///< sample count; 0 for exact values
};

/// Weighted least squares of -log p on n. Monte-Carlo points are weighted
/// by m p/(1-p); exact points uniformly. Zero counts are replaced by 3/m,
/// flagged censored and left out of the fit.
RateEstimate fit_exponential_rate(const std::vector<SeriesPoint>& series);
RateEstimate fit_exponential_rate(const std::vector<FractionEstimate>& series);

/// 2^-n sum_{k >= ceil(cn)} C(n, k), exactly.
struct ExactFraction {
  boost::multiprecision::cpp_int numerator;
  boost::multiprecision::cpp_int denominator;
  double value() const;
  double log_value() const;
};

ExactFraction exact_doubling_oracle(std::size_t n, double c);

}  // namespace nuelab
