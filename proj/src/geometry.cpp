#include "nuelab/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace nuelab {

namespace {

double wrap_unit(double v) {
  double w = v - std::floor(v);
  return w >= 1.0 ? 0.0 : w;
}

double periodic_delta(double d) {
  d -= std::round(d);
  return d == -0.5 ? 0.5 : d;
}

}  // namespace

std::string_view to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Interval: return "interval";
    case DomainKind::Circle: return "circle";
    case DomainKind::Cylinder: return "cylinder";
    case DomainKind::Torus: return "torus";
  }
  return "unknown";
}

DomainSpec DomainSpec::interval(double lo, double hi) { return {DomainKind::Interval, lo, hi, 0.0, 0.0}; }
DomainSpec DomainSpec::circle() { return {DomainKind::Circle, 0.0, 1.0, 0.0, 0.0}; }
DomainSpec DomainSpec::cylinder(double lo, double hi) { return {DomainKind::Cylinder, 0.0, 1.0, lo, hi}; }
DomainSpec DomainSpec::torus() { return {DomainKind::Torus, 0.0, 1.0, 0.0, 1.0}; }

Point DomainSpec::wrap(const Point& p) const {
  switch (kind) {
    case DomainKind::Interval: return p;
    case DomainKind::Circle: return {wrap_unit(p.x()), 0.0};
    case DomainKind::Cylinder: return {wrap_unit(p.x()), p.y()};
    case DomainKind::Torus: return {wrap_unit(p.x()), wrap_unit(p.y())};
  }
  return p;
}

bool DomainSpec::contains(const Point& p) const {
  if (!std::isfinite(p.x()) || !std::isfinite(p.y())) return false;
  switch (kind) {
    case DomainKind::Interval: return p.x() >= lo0 && p.x() <= hi0;
    case DomainKind::Circle: return p.x() >= 0.0 && p.x() < 1.0;
    case DomainKind::Cylinder: return p.x() >= 0.0 && p.x() < 1.0 && p.y() >= lo1 && p.y() <= hi1;
    case DomainKind::Torus: return p.x() >= 0.0 && p.x() < 1.0 && p.y() >= 0.0 && p.y() < 1.0;
  }
  return false;
}

double DomainSpec::volume() const {
  switch (kind) {
    case DomainKind::Interval: return hi0 - lo0;
    case DomainKind::Circle: return 1.0;
    case DomainKind::Cylinder: return hi1 - lo1;
    case DomainKind::Torus: return 1.0;
  }
  return 0.0;
}

Point DomainSpec::from_unit(double u0, double u1) const {
  switch (kind) {
    case DomainKind::Interval: return {lo0 + (hi0 - lo0) * u0, 0.0};
    case DomainKind::Circle: return {u0, 0.0};
    case DomainKind::Cylinder: return {u0, lo1 + (hi1 - lo1) * u1};
    case DomainKind::Torus: return {u0, u1};
  }
  return {u0, u1};
}

Vector displacement(const DomainSpec& domain, const Point& a, const Point& b) {
  Vector d = b - a;
  switch (domain.kind) {
    case DomainKind::Interval: d.y() = 0.0; break;
    case DomainKind::Circle: d = {periodic_delta(d.x()), 0.0}; break;
    case DomainKind::Cylinder: d.x() = periodic_delta(d.x()); break;
    case DomainKind::Torus: d = {periodic_delta(d.x()), periodic_delta(d.y())}; break;
  }
  return d;
}

double DomainSpec::distance(const Point& a, const Point& b) const {
  return displacement(*this, a, b).cwiseAbs().maxCoeff();
}

double min_singular_value(const Jacobian& m) {
  const double det = std::abs(m.determinant());
  const double fro2 = m.squaredNorm();
  const double disc = std::sqrt(std::max(0.0, fro2 * fro2 - 4.0 * det * det));
  const double smax = std::sqrt(0.5 * (fro2 + disc));
  return smax > 0.0 ? det / smax : 0.0;
}

}  // namespace nuelab
