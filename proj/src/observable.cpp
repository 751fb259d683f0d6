#include "nuelab/observable.hpp"

#include "nuelab/errors.hpp"
#include "nuelab/random.hpp"
#include "nuelab/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nuelab {

Observable::Observable(std::string name, std::function<double(const Point&)> eval, double lower, double upper)
    : name_(std::move(name)), eval_(std::move(eval)), lower_(lower), upper_(upper) {
  if (!(lower <= upper)) throw ConfigError("observable '" + name_ + "': lower bound exceeds upper bound");
}

Observable Observable::coordinate(const DynamicalSystem& sys, int axis) {
  const DomainSpec& d = sys.domain();
  if (axis < 0 || axis >= sys.dimension()) throw ConfigError("coordinate axis out of range");
  double lo = 0.0, hi = 1.0;
  if (axis == 0 && d.kind == DomainKind::Interval) {
    lo = d.lo0;
    hi = d.hi0;
  } else if (axis == 1 && d.kind == DomainKind::Cylinder) {
    lo = d.lo1;
    hi = d.hi1;
  }
  return {axis == 0 ? "x" : "y", [axis](const Point& p) { return p[axis]; }, lo, hi};
}

Observable Observable::digit() {
  return {"digit", [](const Point& p) { return p.x() >= 0.5 ? 1.0 : 0.0; }, 0.0, 1.0};
}

Observable Observable::constant(double value) {
  return {"constant", [value](const Point&) { return value; }, value, value};
}

Observable Observable::table(std::vector<double> knots, std::vector<double> values) {
  if (knots.size() < 2 || knots.size() != values.size()) {
    throw ConfigError("table observable needs >= 2 knots and one value per knot");
  }
  if (!std::is_sorted(knots.begin(), knots.end()) ||
      std::adjacent_find(knots.begin(), knots.end()) != knots.end()) {
    throw ConfigError("table observable knots must be strictly increasing");
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double lower = *lo, upper = *hi;
  return {"table",
          [k = std::move(knots), v = std::move(values)](const Point& p) {
            const double x = p.x();
            if (x <= k.front()) return v.front();
            if (x >= k.back()) return v.back();
            const auto it = std::upper_bound(k.begin(), k.end(), x);
            const std::size_t i = static_cast<std::size_t>(it - k.begin()) - 1;
            const double t = (x - k[i]) / (k[i + 1] - k[i]);
            return v[i] + t * (v[i + 1] - v[i]);
          },
          lower, upper};
}

Observable Observable::plateau(double lo, double hi, double margin) {
  if (!(hi >= lo) || !(margin > 0.0)) throw ConfigError("plateau observable needs hi >= lo and margin > 0");
  return {"plateau",
          [lo, hi, margin](const Point& p) {
            const double x = p.x();
            if (x >= lo && x <= hi) return 1.0;
            const double gap = x < lo ? lo - x : x - hi;
            return std::max(0.0, 1.0 - gap / margin);
          },
          0.0, 1.0};
}

Observable observable_by_name(const DynamicalSystem& sys, const std::string& name) {
  if (name == "x") return Observable::coordinate(sys, 0);
  if (name == "y") return Observable::coordinate(sys, 1);
  if (name == "digit") return Observable::digit();
  if (name == "x2") {
    const Observable x = Observable::coordinate(sys, 0);
    const double m = std::max(std::abs(x.lower()), std::abs(x.upper()));
    const double lo = x.lower() <= 0.0 && x.upper() >= 0.0 ? 0.0 : std::min(x.lower() * x.lower(), x.upper() * x.upper());
    return {"x2", [](const Point& p) { return p.x() * p.x(); }, lo, m * m};
  }
  if (name.starts_with("constant:")) {
    try {
      return Observable::constant(std::stod(name.substr(9)));
    } catch (const std::exception&) {
      throw ConfigError("bad constant observable '" + name + "'");
    }
  }
  throw ConfigError("unknown observable '" + name + "'");
}

std::pair<double, double> check_bounded(const Observable& phi, const DynamicalSystem& sys, std::size_t samples,
                                        std::uint64_t seed) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < samples; ++i) {
    StartStream rng(seed, i);
    const Point p = sys.domain().from_unit(rng.uniform_open(), rng.uniform_open());
    const double v = phi(p);
    if (!std::isfinite(v) || v < phi.lower() || v > phi.upper()) {
      throw ConfigError("observable '" + phi.name() + "' is unbounded or outside its declared range");
    }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return {lo, hi};
}

}  // namespace nuelab
