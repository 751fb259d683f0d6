#include "nuelab/systems.hpp"

#include "nuelab/partial_hyperbolic.hpp"
#include "nuelab/random.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nuelab {

namespace {

using std::numbers::pi;

double frac(double v) {
  const double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

Jacobian scalar_jacobian(double d) {
  Jacobian j = Jacobian::Zero();
  j(0, 0) = d;
  return j;
}

double no_singular_set(const Point&) { return kNoSingularSet; }

/// Reads family parameters against a table of defaults and rejects unknown keys.
class ParamReader {
 public:
  ParamReader(std::string_view family, const ParamRecord& given, ParamRecord defaults)
      : family_(family), values_(std::move(defaults)) {
    for (const auto& [key, value] : given) {
      auto it = values_.find(key);
      if (it == values_.end()) {
        throw ConfigError("family '" + family_ + "' has no parameter '" + key + "'");
      }
      if (!std::isfinite(value)) throw ConfigError("parameter '" + key + "' must be finite");
      it->second = value;
    }
  }

  double operator[](std::string_view key) const { return values_.find(key)->second; }
  const ParamRecord& all() const { return values_; }

  void require(bool ok, std::string_view what) const {
    if (!ok) throw ConfigError("family '" + family_ + "': " + std::string(what));
  }

  int integer(std::string_view key) const {
    const double v = (*this)[key];
    require(v == std::floor(v), std::string(key) + " must be an integer");
    return static_cast<int>(v);
  }

 private:
  std::string family_;
  ParamRecord values_;
};

std::vector<Branch> linear_circle_branches(int k) {
  std::vector<Branch> out;
  for (int j = 0; j < k; ++j) {
    const double dk = k;
    const double dj = j;
    out.push_back({dj / dk, (dj + 1.0) / dk, [dk, dj](double x) { return dk * x - dj; },
                   [dk, dj](double y) { return (y + dj) / dk; }});
  }
  return out;
}

DynamicalSystem::Definition expanding_circle(std::string name, ParamRecord params, int k) {
  DynamicalSystem::Definition def;
  def.name = std::move(name);
  def.params = std::move(params);
  def.domain = DomainSpec::circle();
  const double dk = k;
  def.map = [dk](const Point& p) { return Point{frac(dk * p.x() + dither(p.x())), 0.0}; };
  def.derivative = [dk](const Point&) { return scalar_jacobian(dk); };
  def.singular_distance = no_singular_set;
  def.branches = linear_circle_branches(k);
  return def;
}

DynamicalSystem::Definition make_doubling(const ParamRecord& given, const BuildOptions&) {
  ParamReader r("doubling", given, {});
  return expanding_circle("doubling", r.all(), 2);
}

DynamicalSystem::Definition make_expanding_k(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("expanding_circle_k", given, {{"k", 3.0}});
  const int k = r.integer("k");
  if (opt.validate) r.require(k >= 2, "k must be >= 2");
  return expanding_circle("expanding_circle_k", r.all(), k);
}

DynamicalSystem::Definition make_rotation(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("rotation", given, {{"alpha", (std::sqrt(5.0) - 1.0) / 2.0}});
  const double alpha = r["alpha"];
  if (opt.validate) r.require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
  DynamicalSystem::Definition def;
  def.name = "rotation";
  def.params = r.all();
  def.domain = DomainSpec::circle();
  def.map = [alpha](const Point& p) { return Point{frac(p.x() + alpha), 0.0}; };
  def.derivative = [](const Point&) { return scalar_jacobian(1.0); };
  def.singular_distance = no_singular_set;
  def.branches = {{0.0, 1.0 - alpha, [alpha](double x) { return x + alpha; },
                   [alpha](double y) { return y - alpha; }},
                  {1.0 - alpha, 1.0, [alpha](double x) { return x + alpha - 1.0; },
                   [alpha](double y) { return y - alpha + 1.0; }}};
  return def;
}

DynamicalSystem::Definition make_manneville_pomeau(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("manneville_pomeau", given, {{"gamma", 0.5}});
  const double g = r["gamma"];
  if (opt.validate) r.require(g > 0.0 && g < 1.0, "gamma must lie in (0, 1)");
  DynamicalSystem::Definition def;
  def.name = "manneville_pomeau";
  def.params = r.all();
  def.domain = DomainSpec::circle();
  def.map = [g](const Point& p) { return Point{frac(p.x() + std::pow(p.x(), 1.0 + g)), 0.0}; };
  def.derivative = [g](const Point& p) { return scalar_jacobian(1.0 + (1.0 + g) * std::pow(p.x(), g)); };
  def.singular_distance = no_singular_set;
  def.metadata = {{"neutral_point", 0.0}};
  return def;
}

DynamicalSystem::Definition make_quadratic(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("quadratic", given, {{"a", 2.0}});
  const double a = r["a"];
  if (opt.validate) r.require(a > 1.0 && a <= 2.0, "a must lie in (1, 2]");
  // [-b, b] with b the repelling fixed point is invariant for a <= 2; for a = 2 it is [-2, 2].
  const double bound = std::min(2.0, 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * a)));
  DynamicalSystem::Definition def;
  def.name = "quadratic";
  def.params = r.all();
  def.metadata = {{"domain_bound", bound}};
  def.domain = DomainSpec::interval(-bound, bound);
  def.map = [a](const Point& p) { return Point{a - p.x() * p.x(), 0.0}; };
  def.derivative = [](const Point& p) { return scalar_jacobian(-2.0 * p.x()); };
  def.singular_distance = [](const Point& p) { return std::abs(p.x()); };
  def.singular_anchors = {Point{0.0, 0.0}};
  def.branches = {{-bound, 0.0, [a](double x) { return a - x * x; },
                   [a](double y) { return -std::sqrt(std::max(0.0, a - y)); }},
                  {0.0, bound, [a](double x) { return a - x * x; },
                   [a](double y) { return std::sqrt(std::max(0.0, a - y)); }}};
  return def;
}

// Infinite-modal family on [-1, 1]: z -> +-(a|z|^alpha sin(beta log 1/|z|)) +- mu on
// [-eps, eps], extended outside by an odd expanding map with `folds` full
// branches of slope 2 folds / (1 - eps), phase-matched to be continuous at eps.
DynamicalSystem::Definition make_infinite_modal(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("infinite_modal", given,
                {{"a", 2.0}, {"alpha", 0.5}, {"beta", 5.0}, {"eps", 0.1}, {"mu", 0.05}, {"folds", 8.0}});
  const double a = r["a"], alpha = r["alpha"], beta = r["beta"], eps = r["eps"], mu = r["mu"];
  const int folds = r.integer("folds");
  if (opt.validate) {
    r.require(a > 0.0, "a must be positive");
    r.require(alpha > 0.0 && alpha < 1.0, "alpha must lie in (0, 1)");
    r.require(beta > 0.0, "beta must be positive");
    r.require(eps > 0.0 && eps < 0.5, "eps must lie in (0, 1/2)");
    r.require(std::abs(mu) < eps, "|mu| must be smaller than eps");
    r.require(a * std::pow(eps, alpha) + std::abs(mu) < 1.0, "a eps^alpha + |mu| must be < 1");
    r.require(folds >= 2, "folds must be >= 2");
  }
  auto inner = [a, alpha, beta](double t) { return a * std::pow(t, alpha) * std::sin(beta * std::log(1.0 / t)); };
  auto inner_prime = [a, alpha, beta](double t) {
    const double L = beta * std::log(1.0 / t);
    return a * std::pow(t, alpha - 1.0) * (alpha * std::sin(L) - beta * std::cos(L));
  };
  const double slope = 2.0 * folds / (1.0 - eps);
  const double phase = frac(0.5 * (inner(eps) + mu + 1.0));
  auto outer = [eps, folds, phase](double t) {
    return -1.0 + 2.0 * frac(folds * (t - eps) / (1.0 - eps) + phase);
  };

  // Critical points of the inner map: beta log(1/z) = atan(beta/alpha) + m pi.
  const double theta = std::atan(beta / alpha);
  const double m0 = std::max(0.0, std::ceil((beta * std::log(1.0 / eps) - theta) / pi));
  auto critical = [beta, theta](double m) { return std::exp(-(theta + m * pi) / beta); };

  DynamicalSystem::Definition def;
  def.name = "infinite_modal";
  def.params = r.all();
  def.metadata = {{"first_critical_index", m0}, {"extension_slope", slope}};
  def.domain = DomainSpec::interval(-1.0, 1.0);
  def.map = [=](const Point& p) {
    const double z = p.x();
    const double t = std::abs(z);
    const double s = z < 0.0 ? -1.0 : 1.0;
    if (t <= eps) return Point{s * (inner(t) + mu), 0.0};
    return Point{s * outer(t), 0.0};
  };
  def.derivative = [=](const Point& p) {
    const double t = std::abs(p.x());
    return scalar_jacobian(t <= eps ? inner_prime(t) : slope);
  };
  def.singular_distance = [=](const Point& p) {
    const double t = std::abs(p.x());
    if (t == 0.0) return 0.0;
    double best = t;
    const double mreal = (beta * std::log(1.0 / t) - theta) / pi;
    const double mc = std::max(m0, std::floor(mreal));
    for (double m = std::max(m0, mc - 1.0); m <= mc + 2.0; m += 1.0) best = std::min(best, std::abs(t - critical(m)));
    return best;
  };
  def.singular_anchors.push_back(Point{0.0, 0.0});
  for (int i = 0; i < 12; ++i) {
    const double c = critical(m0 + i);
    def.singular_anchors.push_back(Point{c, 0.0});
    def.singular_anchors.push_back(Point{-c, 0.0});
  }
  return def;
}

DynamicalSystem::Definition make_gauss(const ParamRecord& given, const BuildOptions&) {
  ParamReader r("gauss", given, {});
  DynamicalSystem::Definition def;
  def.name = "gauss";
  def.params = r.all();
  def.domain = DomainSpec::interval(0.0, 1.0);
  def.map = [](const Point& p) { return Point{frac(1.0 / p.x()), 0.0}; };
  def.derivative = [](const Point& p) { return scalar_jacobian(-1.0 / (p.x() * p.x())); };
  def.singular_distance = [](const Point& p) { return std::abs(p.x()); };
  def.singular_anchors = {Point{0.0, 0.0}};
  return def;
}

// Two increasing branches x -> sign(x)(2|x|^beta0 - 1) with |f'| ~ |x|^(beta0-1).
DynamicalSystem::Definition make_lorenz1d(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("lorenz1d", given, {{"beta0", 0.75}});
  const double b0 = r["beta0"];
  if (opt.validate) r.require(b0 > 0.5 && b0 < 1.0, "beta0 must lie in (1/2, 1)");
  DynamicalSystem::Definition def;
  def.name = "lorenz1d";
  def.params = r.all();
  def.domain = DomainSpec::interval(-1.0, 1.0);
  def.map = [b0](const Point& p) {
    const double x = p.x();
    const double v = 2.0 * std::pow(std::abs(x), b0) - 1.0;
    return Point{x < 0.0 ? -v : v, 0.0};
  };
  def.derivative = [b0](const Point& p) { return scalar_jacobian(2.0 * b0 * std::pow(std::abs(p.x()), b0 - 1.0)); };
  def.singular_distance = [](const Point& p) { return std::abs(p.x()); };
  def.singular_anchors = {Point{0.0, 0.0}};
  def.branches = {{-1.0, 0.0, [b0](double x) { return 1.0 - 2.0 * std::pow(-x, b0); },
                   [b0](double y) { return -std::pow(std::max(0.0, (1.0 - y) / 2.0), 1.0 / b0); }},
                  {0.0, 1.0, [b0](double x) { return 2.0 * std::pow(x, b0) - 1.0; },
                   [b0](double y) { return std::pow(std::max(0.0, (y + 1.0) / 2.0), 1.0 / b0); }}};
  return def;
}

DynamicalSystem::Definition make_viana(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("viana", given, {{"a0", 1.5436890126920764}, {"alpha", 0.01}, {"d", 16.0}});
  const double a0 = r["a0"], alpha = r["alpha"];
  const int d = r.integer("d");
  if (opt.validate) {
    r.require(a0 > 1.0 && a0 < 2.0, "a0 must lie in (1, 2)");
    r.require(alpha > 0.0 && alpha <= 0.1, "alpha must lie in (0, 0.1]");
    r.require(d >= 16, "d must be >= 16");
  } else {
    r.require(d >= 2, "d must be >= 2");
  }

  // Invariant fibre interval: iterate I -> hull(q(S^1 x I)) padded by `pad`
  // until it stabilizes, then confirm the image is strictly interior.
  const double a_min = a0 - alpha, a_max = a0 + alpha, pad = 1e-3;
  double lo = 0.0, hi = 0.0;
  for (int it = 0; it < 200; ++it) {
    const double m = std::max(std::abs(lo), std::abs(hi));
    const double new_hi = a_max + pad;
    const double new_lo = a_min - m * m - pad;
    const bool done = std::abs(new_hi - hi) < 1e-15 && std::abs(new_lo - lo) < 1e-15;
    lo = new_lo;
    hi = new_hi;
    if (done) break;
  }
  bool interior = std::isfinite(lo) && lo > -2.0 && hi < 2.0 && std::abs(lo) <= hi;
  if (interior) {
    const int grid = 400;
    for (int i = 0; i <= grid && interior; ++i) {
      const double s = static_cast<double>(i) / grid;
      const double as = a0 + alpha * std::sin(2.0 * pi * s);
      for (int j = 0; j <= grid; ++j) {
        const double x = lo + (hi - lo) * j / grid;
        const double q = as - x * x;
        if (!(q > lo && q < hi)) {
          interior = false;
          break;
        }
      }
    }
  }
  if (!interior) throw ConfigError("viana: invariant interval I not found");

  DynamicalSystem::Definition def;
  def.name = "viana";
  def.params = r.all();
  def.metadata = {{"I_lo", lo}, {"I_hi", hi}};
  def.domain = DomainSpec::cylinder(lo, hi);
  const double dd = d;
  def.map = [=](const Point& p) {
    const double s = p.x(), x = p.y();
    return Point{frac(dd * s + dither(s)), a0 + alpha * std::sin(2.0 * pi * s) - x * x};
  };
  def.derivative = [=](const Point& p) {
    Jacobian j;
    j << dd, 0.0, 2.0 * pi * alpha * std::cos(2.0 * pi * p.x()), -2.0 * p.y();
    return j;
  };
  def.singular_distance = [](const Point& p) { return std::abs(p.y()); };
  for (int i = 0; i < 16; ++i) def.singular_anchors.push_back(Point{(i + 0.5) / 16.0, 0.0});
  def.singular_axis = 1;
  return def;
}

const double kGolden = (1.0 + std::sqrt(5.0)) / 2.0;

Jacobian cat_matrix() {
  Jacobian m;
  m << 2.0, 1.0, 1.0, 1.0;
  return m;
}

void add_cone_metadata(ParamRecord& meta, const Vector& u, const Vector& s, double width_e, double width_f) {
  meta["f_dir_x"] = u.x();
  meta["f_dir_y"] = u.y();
  meta["e_dir_x"] = s.x();
  meta["e_dir_y"] = s.y();
  meta["cone_width_e"] = width_e;
  meta["cone_width_f"] = width_f;
}

Vector cat_unstable() { return Vector(kGolden, 1.0).normalized(); }
Vector cat_stable() { return Vector(-1.0, kGolden).normalized(); }

DynamicalSystem::Definition make_cat(const ParamRecord& given, const BuildOptions&) {
  ParamReader r("cat_map", given, {});
  DynamicalSystem::Definition def;
  def.name = "cat_map";
  def.params = r.all();
  def.domain = DomainSpec::torus();
  const Jacobian A = cat_matrix();
  def.map = [A, dom = def.domain](const Point& p) { return dom.wrap(A * p); };
  def.derivative = [A](const Point&) { return A; };
  def.singular_distance = no_singular_set;
  add_cone_metadata(def.metadata, cat_unstable(), cat_stable(), 0.15, 0.15);
  return def;
}

// Cat map minus a radial C^2 bump kappa (1 - r^2/R^2)^3 (u.q) u around the
// centre c, q = p - c. Inside V = B(c, R) the expansion along u drops from
// lambda to lambda - kappa at the centre; outside V the map is the cat map.
DynamicalSystem::Definition make_da(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("da_map", given,
                {{"kappa", 0.4}, {"radius", 0.1}, {"cx", 0.0}, {"cy", 0.0}, {"delta0", 0.1}});
  const double kappa = r["kappa"], R = r["radius"], delta0 = r["delta0"];
  const Point centre{r["cx"], r["cy"]};
  if (opt.validate) {
    r.require(kappa >= 0.0 && kappa < kGolden * kGolden, "kappa must lie in [0, lambda)");
    r.require(R > 0.0 && R < 0.25, "radius must lie in (0, 1/4)");
    r.require(delta0 > 0.0, "delta0 must be positive");
  }
  DynamicalSystem::Definition def;
  def.name = "da_map";
  def.params = r.all();
  def.domain = DomainSpec::torus();
  def.metadata = {{"v_cx", centre.x()}, {"v_cy", centre.y()}, {"v_radius", R}, {"delta0", delta0}};
  const Vector u = cat_unstable();
  add_cone_metadata(def.metadata, u, cat_stable(), 0.15, 0.15);
  const Jacobian A = cat_matrix();
  const DomainSpec dom = def.domain;
  def.map = [=](const Point& p) {
    const Vector q = displacement(dom, centre, p);
    const double s2 = q.squaredNorm() / (R * R);
    Point out = A * p;
    if (s2 < 1.0) {
      const double b = (1.0 - s2) * (1.0 - s2) * (1.0 - s2);
      out -= kappa * b * u.dot(q) * u;
    }
    return dom.wrap(out);
  };
  def.derivative = [=](const Point& p) {
    const Vector q = displacement(dom, centre, p);
    const double s2 = q.squaredNorm() / (R * R);
    Jacobian j = A;
    if (s2 < 1.0) {
      const double w = 1.0 - s2;
      const double b = w * w * w;
      const Vector grad_b = (-6.0 / (R * R)) * w * w * q;
      j -= kappa * u * (b * u + u.dot(q) * grad_b).transpose();
    }
    return j;
  };
  def.singular_distance = no_singular_set;
  return def;
}

DynamicalSystem::Definition make_bistable(const ParamRecord& given, const BuildOptions& opt) {
  ParamReader r("bistable_circle", given, {{"eps", 0.6}});
  const double eps = r["eps"];
  if (opt.validate) r.require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  DynamicalSystem::Definition def;
  def.name = "bistable_circle";
  def.params = r.all();
  def.metadata = {{"attractor_0", 0.0}, {"attractor_1", 0.5}};
  def.domain = DomainSpec::circle();
  def.map = [eps](const Point& p) {
    return Point{frac(p.x() - eps / (4.0 * pi) * std::sin(4.0 * pi * p.x())), 0.0};
  };
  def.derivative = [eps](const Point& p) { return scalar_jacobian(1.0 - eps * std::cos(4.0 * pi * p.x())); };
  def.singular_distance = no_singular_set;
  return def;
}

DynamicalSystem::Definition make_translation(const ParamRecord& given, const BuildOptions&) {
  ParamReader r("torus_translation", given,
                {{"omega1", std::sqrt(2.0) - 1.0}, {"omega2", (std::sqrt(5.0) - 1.0) / 2.0}});
  const Vector omega{r["omega1"], r["omega2"]};
  DynamicalSystem::Definition def;
  def.name = "torus_translation";
  def.params = r.all();
  def.domain = DomainSpec::torus();
  def.map = [omega, dom = def.domain](const Point& p) { return dom.wrap(p + omega); };
  def.derivative = [](const Point&) { return Jacobian::Identity(); };
  def.singular_distance = no_singular_set;
  add_cone_metadata(def.metadata, cat_unstable(), cat_stable(), 0.15, 0.15);
  return def;
}

using Builder = DynamicalSystem::Definition (*)(const ParamRecord&, const BuildOptions&);

const std::vector<std::pair<std::string, Builder>>& registry() {
  static const std::vector<std::pair<std::string, Builder>> table = {
      {"doubling", make_doubling},
      {"expanding_circle_k", make_expanding_k},
      {"rotation", make_rotation},
      {"manneville_pomeau", make_manneville_pomeau},
      {"quadratic", make_quadratic},
      {"infinite_modal", make_infinite_modal},
      {"gauss", make_gauss},
      {"lorenz1d", make_lorenz1d},
      {"viana", make_viana},
      {"cat_map", make_cat},
      {"da_map", make_da},
      {"bistable_circle", make_bistable},
      {"torus_translation", make_translation},
  };
  return table;
}

}  // namespace

double dither(double x) {
  return static_cast<double>(mix64(std::bit_cast<std::uint64_t>(x)) >> 11) * 0x1.0p-93;
}

double Branch::image_lo() const { return std::min(forward(lo), forward(hi)); }
double Branch::image_hi() const { return std::max(forward(lo), forward(hi)); }

DynamicalSystem::DynamicalSystem(Definition def) : def_(std::make_shared<const Definition>(std::move(def))) {}

Point DynamicalSystem::step(const Point& p) const {
  if (has_singular_set() && def_->singular_distance(p) == 0.0) {
    std::ostringstream os;
    os << name() << ": iterate (" << p.x() << ", " << p.y() << ") lies on the singular set";
    throw HitSingularSet(os.str());
  }
  const Point q = def_->map(p);
  if (!def_->domain.contains(q)) {
    std::ostringstream os;
    os << name() << ": image (" << q.x() << ", " << q.y() << ") of (" << p.x() << ", " << p.y()
       << ") left the domain";
    throw LeftDomain(os.str());
  }
  return q;
}

double DynamicalSystem::log_inverse_norm(const Point& p) const {
  const Jacobian j = def_->derivative(p);
  if (dimension() == 1) return -std::log(std::abs(j(0, 0)));
  return -std::log(min_singular_value(j));
}

double DynamicalSystem::log_jacobian(const Point& p) const {
  const Jacobian j = def_->derivative(p);
  if (dimension() == 1) return std::log(std::abs(j(0, 0)));
  return std::log(std::abs(j.determinant()));
}

const std::vector<std::string>& family_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, builder] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

DynamicalSystem build_system(std::string_view family, const ParamRecord& params, BuildOptions options) {
  for (const auto& [name, builder] : registry()) {
    if (name != family) continue;
    DynamicalSystem sys(builder(params, options));
    if (options.validate && family == "da_map") {
      const ConditionReport report = check_conditions_ABCD(sys, 2000, 0x5EED);
      if (!report.passed()) throw ConfigError("da_map: perturbation violates the cone conditions (A)-(D)");
    }
    return sys;
  }
  throw ConfigError("unknown family '" + std::string(family) + "'");
}

NonflatReport check_nonflat(const DynamicalSystem& sys, double B, double beta, std::size_t samples,
                            std::uint64_t seed) {
  if (!sys.has_singular_set()) throw ConfigError(sys.name() + ": singular set is empty");
  if (!(B > 1.0) || !(beta > 0.0)) throw ConfigError("check_nonflat requires B > 1 and beta > 0");
  NonflatReport report;
  const auto& anchors = sys.singular_anchors();
  const int axis = sys.singular_axis();
  for (std::size_t i = 0; i < samples; ++i) {
    StartStream rng(seed, i);
    const Point& anchor = anchors[static_cast<std::size_t>(rng.uniform() * anchors.size())];
    const double offset = std::pow(10.0, -10.0 * rng.uniform());
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    Point p = anchor;
    p[axis] += sign * offset;
    if (sys.dimension() == 2) p[1 - axis] = rng.uniform();
    p = sys.domain().wrap(p);
    if (!sys.domain().contains(p)) continue;
    const double d = sys.singular_distance(p);
    if (!(d > 0.0) || !std::isfinite(d)) continue;
    const Jacobian j = sys.derivative(p);
    double lo_stretch, hi_stretch;
    if (sys.dimension() == 1) {
      lo_stretch = hi_stretch = std::abs(j(0, 0));
    } else {
      lo_stretch = min_singular_value(j);
      hi_stretch = j.norm() > 0.0 ? Eigen::JacobiSVD<Jacobian>(j).singularValues()(0) : 0.0;
    }
    ++report.samples_checked;
    const double lower = std::pow(d, beta) / B;
    const double upper = B * std::pow(d, -beta);
    if (lo_stretch < lower || hi_stretch > upper) {
      report.violations.push_back({p, d, lower, upper, lo_stretch, hi_stretch});
    }
  }
  return report;
}

}  // namespace nuelab
