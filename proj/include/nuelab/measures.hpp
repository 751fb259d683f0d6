#pragma once

#include "nuelab/observable.hpp"
#include "nuelab/stats.hpp"
#include "nuelab/systems.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nuelab {

/// Histogram approximation of an invariant probability on a uniform grid.
/// 1-D domains use bins1 == 1. Weights are stored row-major (axis 0 fastest).
struct EmpiricalMeasure {
  DomainSpec domain;
  std::size_t bins0 = 0;
  std::size_t bins1 = 1;
  std::vector<double> weights;
  std::uint64_t samples = 0;
  std::uint64_t failed_starts = 0;

  std::size_t size() const { return bins0 * bins1; }
  std::size_t bin_of(const Point& p) const;
  Point bin_centre(std::size_t index) const;
  /// Lower edge of bin i along an axis.
  double edge(int axis, std::size_t i) const;

  static EmpiricalMeasure uniform(const DomainSpec& domain, std::size_t bins0, std::size_t bins1 = 1);
};

struct SamplingOptions {
  std::size_t starts = 1000;
  std::size_t burn_in = 1000;
  std::size_t length = 10000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  /// Redraws allowed for a start whose orbit fails before being counted.
  std::size_t retries = 8;
};

/// Pooled post-burn-in histogram of `options.starts` uniform starts. Starts
/// that raise HitSingularSet/LeftDomain are redrawn and counted.
EmpiricalMeasure empirical_measure(const DynamicalSystem& sys, std::size_t bins, const SamplingOptions& options);

/// Bin-midpoint quadrature of phi.
double integrate(const EmpiricalMeasure& measure, const Observable& phi);

double l1_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b);
/// L1 distance between a 1-D histogram and a reference bin-mass vector.
double l1_distance(const EmpiricalMeasure& a, const std::vector<double>& masses);

struct BasinCluster {
  Point representative;
  std::size_t members = 0;
  EmpiricalMeasure histogram;
};

struct BasinReport {
  std::vector<BasinCluster> clusters;
  std::size_t failed_starts = 0;
  std::size_t count() const { return clusters.size(); }
};

/// Greedy L1 clustering of per-start histograms (each start joins the first
/// cluster whose representative is within `tol`).
BasinReport basin_count(const DynamicalSystem& sys, std::size_t bins, double tol, const SamplingOptions& options);

/// Orbit points sampled from the empirical physical measure.
struct EmpiricalOrbitSet {
  std::vector<Point> points;
  std::size_t failed_starts = 0;
};

EmpiricalOrbitSet srb_ensemble(const DynamicalSystem& sys, const SamplingOptions& options);

struct LocalEntropy {
  /// Count-weighted decay rate of the shadowing count over ball lengths
  /// 2, 3, ... whose count is at least `min_count`.
  double estimate = 0.0;
  /// -(1/n) log of the ball fraction at length n, with a surrogate count of
  /// 3 when the ball is empty.
  double single_length = 0.0;
  std::vector<std::uint64_t> counts;  ///< counts[k-1] = #{ensemble points in B(x, k, eps)}
  std::size_t fit_points = 0;
  bool censored = false;
};

LocalEntropy local_entropy(const DynamicalSystem& sys, const EmpiricalOrbitSet& ensemble, const Point& x,
                           std::size_t n, double eps, unsigned workers = 1, std::uint64_t min_count = 10);

struct RuelleOptions {
  SamplingOptions sampling{200, 1000, 5000, 1, 1, 8};
  std::size_t references = 20;
  std::size_t n = 15;
  double eps = 0.05;
  std::size_t lyapunov_length = 100000;
  double slack = 0.1;
};

struct RuelleReport {
  std::string system;
  std::vector<Point> references;
  std::vector<double> local_entropies;
  std::vector<double> positive_exponent_sums;
  double mean_entropy = 0.0;
  double mean_positive_sum = 0.0;
  double slack = 0.1;
  bool holds() const { return mean_entropy <= mean_positive_sum + slack; }
};

/// Averages the local entropy and the sum of positive Lyapunov exponents
/// over reference points drawn from the empirical physical measure.
RuelleReport ruelle_check(const DynamicalSystem& sys, const RuelleOptions& options);

/// One row per bin: lower/upper edges per axis and the weight.
std::string measure_csv(const EmpiricalMeasure& measure);
/// Moments of each coordinate and the support (bins with positive weight).
nlohmann::json measure_summary(const EmpiricalMeasure& measure);

}  // namespace nuelab
