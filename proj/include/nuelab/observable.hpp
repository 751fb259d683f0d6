#pragma once

#include "nuelab/geometry.hpp"

#include <functional>
#include <string>
#include <vector>

namespace nuelab {

class DynamicalSystem;

/// A bounded real function on the phase space together with declared
/// bounds lower <= phi <= upper.
class Observable {
 public:
  Observable(std::string name, std::function<double(const Point&)> eval, double lower, double upper);

  const std::string& name() const { return name_; }
  double operator()(const Point& p) const { return eval_(p); }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  bool is_constant() const { return lower_ == upper_; }

  /// Coordinate `axis` of the point, bounded by the domain.
  static Observable coordinate(const DynamicalSystem& sys, int axis = 0);
  /// First binary digit 1_{[1/2, 1)}(x).
  static Observable digit();
  static Observable constant(double value);
  /// Piecewise-linear interpolation of (knots, values) in the first
  /// coordinate, clamped outside the knot range.
  static Observable table(std::vector<double> knots, std::vector<double> values);
  /// Continuous plateau: 1 on [lo, hi], 0 outside [lo - margin, hi + margin],
  /// linear in between.
  static Observable plateau(double lo, double hi, double margin);

 private:
  std::string name_;
  std::function<double(const Point&)> eval_;
  double lower_;
  double upper_;
};

/// Resolves "x", "y", "digit", "x2" (the square of x), "constant:<v>" for a system.
Observable observable_by_name(const DynamicalSystem& sys, const std::string& name);

/// Samples `samples` points and returns the observed [min, max]; throws
/// ConfigError when a value is non-finite or outside the declared bounds.
std::pair<double, double> check_bounded(const Observable& phi, const DynamicalSystem& sys,
                                        std::size_t samples, std::uint64_t seed);

}  // namespace nuelab
