#pragma once

#include <cstdint>

namespace nuelab {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double value);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

struct Interval {
  double lo;
  double hi;
  bool contains(double v) const { return lo <= v && v <= hi; }
};

/// Clopper-Pearson interval for a binomial proportion at two-sided `level`.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double level = 0.95);

/// Normal-approximation acceptance band p +- z sqrt(p(1-p)/m) around a known
/// probability, clipped to [0, 1].
Interval binomial_band(double p, std::uint64_t trials, double level);

/// Two-sided standard-normal quantile for `level` (e.g. 1.96 for 0.95).
double normal_quantile_two_sided(double level);

}  // namespace nuelab
