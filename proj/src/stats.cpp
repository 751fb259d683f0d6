#include "nuelab/stats.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <cmath>

namespace nuelab {

void CompensatedSum::add(double value) {
  const double t = sum_ + value;
  if (std::abs(sum_) >= std::abs(value)) {
    compensation_ += (sum_ - t) + value;
  } else {
    compensation_ += (value - t) + sum_;
  }
  sum_ = t;
}

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double level) {
  using boost::math::binomial_distribution;
  if (trials == 0) return {0.0, 1.0};
  const double alpha = 0.5 * (1.0 - level);
  const auto n = static_cast<double>(trials);
  const auto k = static_cast<double>(successes);
  const double lo = binomial_distribution<>::find_lower_bound_on_p(n, k, alpha);
  const double hi = binomial_distribution<>::find_upper_bound_on_p(n, k, alpha);
  return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

double normal_quantile_two_sided(double level) {
  return boost::math::quantile(boost::math::normal_distribution<>(), 0.5 + 0.5 * level);
}

Interval binomial_band(double p, std::uint64_t trials, double level) {
  const double z = normal_quantile_two_sided(level);
  const double half = z * std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

}  // namespace nuelab
