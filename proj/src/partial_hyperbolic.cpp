#include "nuelab/partial_hyperbolic.hpp"

#include "nuelab/diagnostics.hpp"
#include "nuelab/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nuelab {

namespace {

double meta_or(const ParamRecord& meta, std::string_view key, double fallback) {
  auto it = meta.find(key);
  return it == meta.end() ? fallback : it->second;
}

}  // namespace

Eigen::Vector2d ConeField::frame_coefficients(const Vector& v) const {
  Eigen::Matrix2d frame;
  frame.col(0) = f_dir;
  frame.col(1) = e_dir;
  return frame.partialPivLu().solve(v);
}

double ConeField::f_aperture(const Vector& v) const {
  const Eigen::Vector2d c = frame_coefficients(v);
  if (c(0) == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(c(1)) / std::abs(c(0));
}

double ConeField::e_aperture(const Vector& v) const {
  const Eigen::Vector2d c = frame_coefficients(v);
  if (c(1) == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(c(0)) / std::abs(c(1));
}

ConeField cone_field_for(const DynamicalSystem& sys) {
  const auto& m = sys.metadata();
  if (sys.dimension() != 2 || !m.contains("f_dir_x")) {
    throw ConfigError(sys.name() + ": no reference cone field (not a partially hyperbolic system)");
  }
  return {Vector(m.find("e_dir_x")->second, m.find("e_dir_y")->second),
          Vector(m.find("f_dir_x")->second, m.find("f_dir_y")->second), m.find("cone_width_e")->second,
          m.find("cone_width_f")->second};
}

Vector track_f_direction(const DynamicalSystem& sys, const Point& x, const Vector& v0, std::size_t n) {
  const ConeField cone = cone_field_for(sys);
  if (!cone.in_f_cone(v0)) throw ConfigError("track_f_direction: initial vector is outside the F cone");
  Vector v = v0.normalized();
  Point p = x;
  for (std::size_t i = 0; i < n; ++i) {
    v = (sys.derivative(p) * v).normalized();
    p = sys.step(p);
    if (!cone.in_f_cone(v)) throw ConeExit("tracked vector left the F cone (condition (A) violated)", i + 1);
  }
  return v;
}

FOrbit f_orbit(const DynamicalSystem& sys, const Point& x, std::size_t n, std::size_t warmup) {
  const ConeField cone = cone_field_for(sys);
  Vector v = cone.f_dir.normalized();
  Point p = x;
  for (std::size_t i = 0; i < warmup; ++i) {
    v = (sys.derivative(p) * v).normalized();
    p = sys.step(p);
    if (!cone.in_f_cone(v)) throw ConeExit("F direction left the cone during warm-up", i + 1);
  }
  FOrbit out{p, {}};
  out.log_expansion.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Vector w = sys.derivative(p) * v;
    const double norm = w.norm();
    out.log_expansion.push_back(std::log(norm));
    v = w / norm;
    p = sys.step(p);
    if (!cone.in_f_cone(v)) throw ConeExit("F direction left the cone", warmup + j + 1);
  }
  return out;
}

double f_jacobian_sum(const DynamicalSystem& sys, const Point& x, std::size_t n, std::size_t warmup) {
  const FOrbit orbit = f_orbit(sys, x, n, warmup);
  CompensatedSum sum;
  for (double v : orbit.log_expansion) sum.add(v);
  return sum.value();
}

double phnue_statistic(const DynamicalSystem& sys, const Point& x, std::size_t n, std::size_t warmup) {
  if (n == 0) throw ConfigError("phnue_statistic requires n >= 1");
  return -f_jacobian_sum(sys, x, n, warmup) / static_cast<double>(n);
}

std::vector<std::size_t> ph_hyperbolic_times(const DynamicalSystem& sys, const Point& x, std::size_t n_max,
                                             double sigma, std::size_t warmup) {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
  const FOrbit orbit = f_orbit(sys, x, n_max + 1, warmup);
  // Inverse norms at f^1 ... f^{n_max} of the accumulation start.
  std::vector<double> psi(n_max);
  for (std::size_t j = 0; j < n_max; ++j) psi[j] = -orbit.log_expansion[j + 1];
  return contraction_times(psi, std::log(sigma));
}

ConditionReport check_conditions_ABCD(const DynamicalSystem& sys, std::size_t samples, std::uint64_t seed) {
  const ConeField cone = cone_field_for(sys);
  const auto& meta = sys.metadata();
  const Point centre{meta_or(meta, "v_cx", 0.0), meta_or(meta, "v_cy", 0.0)};
  const double radius = meta_or(meta, "v_radius", 0.1);
  const double delta0 = meta_or(meta, "delta0", 0.1);
  const DomainSpec& dom = sys.domain();

  const Vector f = cone.f_dir.normalized();
  const Vector e = cone.e_dir.normalized();
  std::vector<Vector> f_vectors = {f, f + cone.width_f * e, f - cone.width_f * e};
  std::vector<Vector> e_vectors = {e, e + cone.width_e * f, e - cone.width_e * f};

  ConditionReport rep;
  rep.samples = samples;
  rep.delta0 = delta0;
  rep.sigma1 = std::numeric_limits<double>::infinity();
  double max_f_dir_inverse_in_v = 0.0;

  for (std::size_t i = 0; i < samples; ++i) {
    StartStream rng(seed, i);
    Point x;
    if (i % 2 == 0) {
      x = dom.from_unit(rng.uniform(), rng.uniform());
    } else {
      const double r = radius * std::sqrt(rng.uniform());
      const double th = 2.0 * std::numbers::pi * rng.uniform();
      x = dom.wrap(centre + r * Vector(std::cos(th), std::sin(th)));
    }
    const bool in_v = dom.distance(centre, x) <= radius && displacement(dom, centre, x).norm() <= radius;
    const Jacobian df = sys.derivative(x);
    const Jacobian df_inv = df.inverse();

    std::vector<Vector> fv = f_vectors;
    std::vector<Vector> ev = e_vectors;
    const double t = 2.0 * rng.uniform() - 1.0;
    fv.push_back(f + t * cone.width_f * e);
    ev.push_back(e + t * cone.width_e * f);

    for (const Vector& v : fv) {
      const Vector w = df * v;
      rep.fitted_lambda = std::max(rep.fitted_lambda, cone.f_aperture(w) / cone.width_f);
      const double expansion = w.norm() / v.norm();
      rep.sigma1 = std::min(rep.sigma1, expansion);
      if (in_v) {
        rep.max_f_inverse_norm_in_v = std::max(rep.max_f_inverse_norm_in_v, 1.0 / expansion);
      } else {
        rep.sigma2 = std::max(rep.sigma2, 1.0 / expansion);
      }
    }
    for (const Vector& v : ev) {
      const Vector back = df_inv * v;
      rep.fitted_lambda = std::max(rep.fitted_lambda, cone.e_aperture(back) / cone.width_e);
      const double contraction = (df * v).norm() / v.norm();
      rep.sigma1 = std::min(rep.sigma1, 1.0 / contraction);
      if (!in_v) rep.sigma2 = std::max(rep.sigma2, contraction);
    }
    if (in_v) max_f_dir_inverse_in_v = std::max(max_f_dir_inverse_in_v, f.norm() / (df * f).norm());
  }

  // Extent of f(V), unwrapped around the image of the centre.
  const Point image_centre = sys.map(centre);
  Eigen::Vector2d lo = Eigen::Vector2d::Zero(), hi = Eigen::Vector2d::Zero();
  for (int k = 0; k < 256; ++k) {
    const double th = 2.0 * std::numbers::pi * k / 256.0;
    const Point b = dom.wrap(centre + radius * Vector(std::cos(th), std::sin(th)));
    const Vector d = displacement(dom, image_centre, sys.map(b));
    lo = lo.cwiseMin(d);
    hi = hi.cwiseMax(d);
  }
  rep.image_of_v_diameter = (hi - lo).maxCoeff();
  rep.d_margin = 1.0 + delta0 - rep.max_f_inverse_norm_in_v;
  rep.f_direction_d_margin = 1.0 + delta0 - max_f_dir_inverse_in_v;
  return rep;
}

}  // namespace nuelab
