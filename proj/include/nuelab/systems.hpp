#pragma once

#include "nuelab/errors.hpp"
#include "nuelab/geometry.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace nuelab {

using ParamRecord = std::map<std::string, double, std::less<>>;

inline constexpr double kNoSingularSet = std::numeric_limits<double>::infinity();

/// A monotone continuous branch of a one-dimensional map, used by the exact
/// interval-enumeration routines. `forward` maps [lo, hi) onto the image
/// interval; `inverse` is its inverse on that image.
struct Branch {
  double lo;
  double hi;
  std::function<double(double)> forward;
  std::function<double(double)> inverse;

  double image_lo() const;
  double image_hi() const;
};

/// A map of an interval, circle, cylinder or torus, with its derivative and
/// the distance to its singular set. Immutable and cheap to copy; all member
/// functions are safe to call concurrently.
class DynamicalSystem {
 public:
  struct Definition {
    std::string name;
    ParamRecord params;
    ParamRecord metadata;
    DomainSpec domain;
    std::function<Point(const Point&)> map;
    std::function<Jacobian(const Point&)> derivative;
    /// Returns kNoSingularSet when the singular set is empty.
    std::function<double(const Point&)> singular_distance;
    /// Representative points of the singular set; offsets along
    /// `singular_axis` probe the non-flatness conditions.
    std::vector<Point> singular_anchors;
    int singular_axis = 0;
    std::vector<Branch> branches;
  };

  explicit DynamicalSystem(Definition def);

  const std::string& name() const { return def_->name; }
  const ParamRecord& params() const { return def_->params; }
  const ParamRecord& metadata() const { return def_->metadata; }
  const DomainSpec& domain() const { return def_->domain; }
  int dimension() const { return def_->domain.dimension(); }

  Point map(const Point& p) const { return def_->map(p); }
  Jacobian derivative(const Point& p) const { return def_->derivative(p); }
  double singular_distance(const Point& p) const { return def_->singular_distance(p); }
  bool has_singular_set() const { return !def_->singular_anchors.empty(); }

  const std::vector<Point>& singular_anchors() const { return def_->singular_anchors; }
  int singular_axis() const { return def_->singular_axis; }
  /// Monotone branches for exact 1-D enumeration; empty if not available.
  const std::vector<Branch>& branches() const { return def_->branches; }

  /// One checked iteration: throws HitSingularSet if p lies on the singular
  /// set and LeftDomain if the image is outside the domain or non-finite.
  Point step(const Point& p) const;

  /// ||Df(p)^{-1}|| in log form: -log|f'| in 1-D, -log of the smallest
  /// singular value in 2-D.
  double log_inverse_norm(const Point& p) const;
  /// log|det Df(p)|.
  double log_jacobian(const Point& p) const;

 private:
  std::shared_ptr<const Definition> def_;
};

struct BuildOptions {
  /// Reject parameters outside the documented ranges (and, for da_map,
  /// perturbations that fail the cone conditions).
  bool validate = true;
};

/// Known family identifiers, in documentation order.
const std::vector<std::string>& family_names();

/// Builds one of the built-in families. Unknown parameter keys, unknown
/// families and out-of-range parameters raise ConfigError.
DynamicalSystem build_system(std::string_view family, const ParamRecord& params = {},
                             BuildOptions options = {});

struct NonflatViolation {
  Point point;
  double distance;
  double lower_bound;
  double upper_bound;
  double min_stretch;
  double max_stretch;
};

struct NonflatReport {
  std::size_t samples_checked = 0;
  std::vector<NonflatViolation> violations;
  bool passed() const { return violations.empty(); }
};

/// Samples points at geometrically shrinking distances (1 down to 1e-10) to
/// the singular set and checks (1/B) d^beta <= |Df v|/|v| <= B d^-beta.
/// Raises ConfigError when the singular set is empty.
NonflatReport check_nonflat(const DynamicalSystem& sys, double B, double beta, std::size_t samples,
                            std::uint64_t seed);

/// Deterministic sub-resolution perturbation (below 2^-40) used by maps of the
/// form x -> kx mod 1, which would otherwise collapse onto 0 in binary
/// floating point after about 53 iterates.
double dither(double x);

}  // namespace nuelab
