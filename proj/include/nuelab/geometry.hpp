#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

namespace nuelab {

/// A point of the phase space. One-dimensional systems use only x().
using Point = Eigen::Vector2d;
/// A tangent vector.
using Vector = Eigen::Vector2d;
/// Derivative of the map. One-dimensional systems use only (0, 0).
using Jacobian = Eigen::Matrix2d;

enum class DomainKind { Interval, Circle, Cylinder, Torus };

std::string_view to_string(DomainKind kind);

/// Geometric description of the phase space.
///
/// Interval: [lo0, hi0]. Circle: [0, 1) with mod-1 identification.
/// Cylinder: S^1 x [lo1, hi1] with the first coordinate wrapped.
/// Torus: [0, 1)^2, both coordinates wrapped.
struct DomainSpec {
  DomainKind kind = DomainKind::Interval;
  double lo0 = 0.0;
  double hi0 = 1.0;
  double lo1 = 0.0;
  double hi1 = 0.0;

  static DomainSpec interval(double lo, double hi);
  static DomainSpec circle();
  static DomainSpec cylinder(double lo, double hi);
  static DomainSpec torus();

  int dimension() const { return kind == DomainKind::Interval || kind == DomainKind::Circle ? 1 : 2; }

  /// Applies the mod-1 identification on the periodic coordinates. Idempotent.
  Point wrap(const Point& p) const;
  /// True if p (after wrapping) lies in the domain.
  bool contains(const Point& p) const;
  /// Normalized volume of the domain (length or area in coordinates).
  double volume() const;
  /// Maps a point of the unit square to a point of the domain, uniformly.
  Point from_unit(double u0, double u1) const;
  /// Distance respecting the periodic identifications (max-norm over axes).
  double distance(const Point& a, const Point& b) const;
};

/// Signed displacement b - a reduced to (-1/2, 1/2] on periodic axes.
Vector displacement(const DomainSpec& domain, const Point& a, const Point& b);

/// Smallest singular value of a 2x2 matrix.
double min_singular_value(const Jacobian& m);

}  // namespace nuelab
