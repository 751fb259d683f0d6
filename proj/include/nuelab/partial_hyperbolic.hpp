#pragma once

#include "nuelab/errors.hpp"
#include "nuelab/systems.hpp"

#include <cstdint>
#include <vector>

namespace nuelab {

/// Cones of half-width `width_e` around E and `width_f` around F, measured
/// as |component off the axis| / |component along the axis| in the (F, E)
/// frame.
struct ConeField {
  Vector e_dir;
  Vector f_dir;
  double width_e;
  double width_f;

  /// Coefficients (along F, along E) of v in the (f_dir, e_dir) frame.
  Eigen::Vector2d frame_coefficients(const Vector& v) const;
  /// |E component| / |F component|; +inf when v is parallel to E.
  double f_aperture(const Vector& v) const;
  /// |F component| / |E component|; +inf when v is parallel to F.
  double e_aperture(const Vector& v) const;
  bool in_f_cone(const Vector& v) const { return f_aperture(v) <= width_f; }
  bool in_e_cone(const Vector& v) const { return e_aperture(v) <= width_e; }
};

/// The reference cone field of a partially hyperbolic torus system
/// (cat_map, da_map, torus_translation). ConfigError for other systems.
ConeField cone_field_for(const DynamicalSystem& sys);

/// A tracked vector left the F cone.
class ConeExit : public NumericError {
 public:
  ConeExit(const std::string& what, std::size_t step) : NumericError(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Default number of forward iterates used to align a cone vector with F.
inline constexpr std::size_t kDefaultWarmup = 50;

/// Pushes v0 forward n times, renormalizing each step; throws ConeExit if
/// an iterate leaves the F cone. Returns the unit vector at f^n(x).
Vector track_f_direction(const DynamicalSystem& sys, const Point& x, const Vector& v0, std::size_t n);

/// Per-step F-Jacobians log|Df v_j| along an orbit, after aligning the cone
/// axis with F over `warmup` iterates. Accumulation therefore starts at
/// f^warmup(x); warmup = 0 uses the cone axis at x directly.
struct FOrbit {
  Point start;                       ///< f^warmup(x)
  std::vector<double> log_expansion; ///< J_F(f^j start), j < n
};
FOrbit f_orbit(const DynamicalSystem& sys, const Point& x, std::size_t n,
               std::size_t warmup = kDefaultWarmup);

/// S_n J along F (see f_orbit for the warm-up convention).
double f_jacobian_sum(const DynamicalSystem& sys, const Point& x, std::size_t n,
                      std::size_t warmup = kDefaultWarmup);

/// (1/n) sum log ||(Df|F)^{-1}|| = -(1/n) S_n J_F.
double phnue_statistic(const DynamicalSystem& sys, const Point& x, std::size_t n,
                       std::size_t warmup = kDefaultWarmup);

/// n is a sigma-hyperbolic time when the F-restricted inverse norms at
/// f^{n-k+1},...,f^n multiply to at most sigma^k for every 1 <= k <= n.
std::vector<std::size_t> ph_hyperbolic_times(const DynamicalSystem& sys, const Point& x,
                                             std::size_t n_max, double sigma,
                                             std::size_t warmup = kDefaultWarmup);

struct ConditionReport {
  std::size_t samples = 0;
  double delta0 = 0.0;
  // (A) cone invariance: largest observed width ratio image/source.
  double fitted_lambda = 0.0;
  // (B) smallest of the F-expansion and the inverse E-norm over all samples.
  double sigma1 = 0.0;
  // (C) largest F-inverse norm / E-norm outside V, and the f(V) diameter.
  double sigma2 = 0.0;
  double image_of_v_diameter = 0.0;
  // (D) largest F-inverse norm over cone vectors at points of V.
  double max_f_inverse_norm_in_v = 0.0;
  double d_margin = 0.0;            ///< 1 + delta0 - max_f_inverse_norm_in_v
  double f_direction_d_margin = 0.0; ///< same, along the cone axis only

  bool cone_invariance() const { return fitted_lambda < 1.0; }
  bool partially_hyperbolic() const { return sigma1 > 1.0; }
  bool close_outside_v() const { return sigma2 < 1.0 && image_of_v_diameter < 1.0; }
  bool weak_contraction_in_v() const { return d_margin > 0.0; }
  bool passed() const {
    return cone_invariance() && partially_hyperbolic() && close_outside_v() && weak_contraction_in_v();
  }
};

/// Numerically verifies the four DA conditions on sampled points and cone
/// vectors. V (centre, radius) and delta0 come from the system metadata,
/// defaulting to the da_map defaults for plain linear systems.
ConditionReport check_conditions_ABCD(const DynamicalSystem& sys, std::size_t samples, std::uint64_t seed);

}  // namespace nuelab
