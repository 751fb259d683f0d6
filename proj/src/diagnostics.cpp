#include "nuelab/diagnostics.hpp"

#include "nuelab/intervals.hpp"
#include "nuelab/parallel.hpp"
#include "nuelab/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nuelab {

namespace {

void require_length(std::size_t n, const char* what) {
  if (n == 0) throw ConfigError(std::string(what) + " requires n >= 1");
}

}  // namespace

double birkhoff_average(const DynamicalSystem& sys, const Observable& phi, const Point& x, std::size_t n) {
  require_length(n, "birkhoff_average");
  CompensatedSum sum;
  Point p = x;
  for (std::size_t j = 0; j < n; ++j) {
    sum.add(phi(p));
    p = sys.step(p);
  }
  return sum.value() / static_cast<double>(n);
}

double nue_statistic(const DynamicalSystem& sys, const Point& x, std::size_t n) {
  require_length(n, "nue_statistic");
  CompensatedSum sum;
  Point p = x;
  for (std::size_t j = 0; j < n; ++j) {
    const Point next = sys.step(p);
    sum.add(sys.log_inverse_norm(p));
    p = next;
  }
  return sum.value() / static_cast<double>(n);
}

double truncation_weight(double distance, double delta) {
  if (distance <= delta) return 1.0;
  if (distance >= 2.0 * delta) return 0.0;
  const double u = (distance - delta) / delta;
  return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
}

double truncated_distance(double distance, double delta) {
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(distance > 0.0)) throw HitSingularSet("truncated distance of a point on the singular set");
  if (distance <= delta) return distance;
  if (distance >= 2.0 * delta) return 1.0;
  const double xi = truncation_weight(distance, delta);
  return xi * distance + 1.0 - xi;
}

double truncated_distance(const DynamicalSystem& sys, const Point& x, double delta) {
  return truncated_distance(sys.singular_distance(x), delta);
}

double delta_log(double distance, double delta) { return std::abs(std::log(truncated_distance(distance, delta))); }

double delta_log(const DynamicalSystem& sys, const Point& x, double delta) {
  return delta_log(sys.singular_distance(x), delta);
}

double slow_recurrence_statistic(const DynamicalSystem& sys, const Point& x, std::size_t n, double delta) {
  require_length(n, "slow_recurrence_statistic");
  CompensatedSum sum;
  Point p = x;
  for (std::size_t j = 0; j < n; ++j) {
    const Point next = sys.step(p);
    sum.add(delta_log(sys, p, delta));
    p = next;
  }
  return sum.value() / static_cast<double>(n);
}

std::string_view to_string(RecurrenceIndexing indexing) {
  return indexing == RecurrenceIndexing::PaperLiteral ? "paper_literal" : "reversed";
}

RecurrenceIndexing recurrence_indexing_from(std::string_view name) {
  if (name == "paper_literal") return RecurrenceIndexing::PaperLiteral;
  if (name == "reversed") return RecurrenceIndexing::Reversed;
  throw ConfigError("unknown recurrence indexing '" + std::string(name) + "'");
}

void HyperbolicTimeParams::validate() const {
  if (!(sigma > 0.0 && sigma < 1.0)) throw ConfigError("sigma must lie in (0, 1)");
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  if (!(b > 0.0)) throw ConfigError("b must be positive");
}

std::vector<std::size_t> contraction_times(std::span<const double> psi, double log_sigma) {
  // worst = max over k of the trailing window sum of (psi - log sigma).
  std::vector<std::size_t> times;
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < psi.size(); ++j) {
    worst = (psi[j] - log_sigma) + std::max(0.0, worst);
    if (worst <= 0.0) times.push_back(j + 1);
  }
  return times;
}

std::vector<std::size_t> hyperbolic_times(const DynamicalSystem& sys, const Point& x, std::size_t n_max,
                                          const HyperbolicTimeParams& params) {
  params.validate();
  require_length(n_max, "hyperbolic_times");
  const double log_sigma = std::log(params.sigma);
  std::vector<std::size_t> times;
  double worst = -std::numeric_limits<double>::infinity();
  bool prefix_ok = true;                                      // literal indexing
  double min_slack = std::numeric_limits<double>::infinity();  // reversed: min_j log d_delta(x_j) - b j
  Point p = x;
  for (std::size_t j = 0; j < n_max; ++j) {
    const Point next = sys.step(p);
    worst = (sys.log_inverse_norm(p) - log_sigma) + std::max(0.0, worst);
    const double log_dd = std::log(truncated_distance(sys, p, params.delta));
    const double jd = static_cast<double>(j);
    bool recurrence_ok;
    if (params.indexing == RecurrenceIndexing::PaperLiteral) {
      prefix_ok = prefix_ok && log_dd + params.b * jd >= 0.0;
      recurrence_ok = prefix_ok;
    } else {
      min_slack = std::min(min_slack, log_dd - params.b * jd);
      recurrence_ok = min_slack + params.b * (jd + 1.0) >= 0.0;
    }
    if (worst <= 0.0 && recurrence_ok) times.push_back(j + 1);
    p = next;
  }
  return times;
}

double hyperbolic_time_density(std::span<const std::size_t> times, std::size_t N) {
  if (N == 0) throw ConfigError("hyperbolic_time_density requires N >= 1");
  const auto count = std::count_if(times.begin(), times.end(), [N](std::size_t t) { return t >= 1 && t <= N; });
  return static_cast<double>(count) / static_cast<double>(N);
}

std::vector<double> lyapunov_spectrum(const DynamicalSystem& sys, const Point& x, std::size_t n,
                                      LyapunovOptions options) {
  require_length(n, "lyapunov_spectrum");
  Point p = x;
  if (sys.dimension() == 1) {
    CompensatedSum sum;
    for (std::size_t j = 0; j < n; ++j) {
      const Point next = sys.step(p);
      sum.add(sys.log_jacobian(p));
      p = next;
    }
    return {sum.value() / static_cast<double>(n)};
  }

  // Column 0 of the frame carries the leading direction; since
  // R11 R22 = |det| for a 2x2 QR, the second exponent comes from the
  // accumulated log-determinant.
  const std::size_t period = std::max<std::size_t>(1, options.period);
  Vector lead(1.0, 0.0);
  CompensatedSum log_r11, log_det;
  Vector block = lead;
  std::size_t since = 0;
  const std::size_t total = options.warmup + n;
  for (std::size_t j = 0; j < total; ++j) {
    const Jacobian df = sys.derivative(p);
    const Point next = sys.step(p);
    block = df * block;
    if (j >= options.warmup) log_det.add(std::log(std::abs(df.determinant())));
    p = next;
    if (++since == period || j + 1 == options.warmup || j + 1 == total) {
      const double norm = block.norm();
      if (j >= options.warmup) log_r11.add(std::log(norm));
      block /= norm;
      since = 0;
    }
  }
  const double l1 = log_r11.value() / static_cast<double>(n);
  const double l2 = log_det.value() / static_cast<double>(n) - l1;
  return {std::max(l1, l2), std::min(l1, l2)};
}

double positive_sum(std::span<const double> spectrum) {
  double s = 0.0;
  for (double v : spectrum) s += std::max(0.0, v);
  return s;
}

double sum_log_jacobian(const DynamicalSystem& sys, const Point& x, std::size_t n) {
  CompensatedSum sum;
  Point p = x;
  for (std::size_t j = 0; j < n; ++j) {
    const Point next = sys.step(p);
    sum.add(sys.log_jacobian(p));
    p = next;
  }
  return sum.value();
}

BallVolume dynamical_ball_volume(const DynamicalSystem& sys, const Point& x, std::size_t n, double r,
                                 std::size_t m, std::uint64_t seed, unsigned workers) {
  require_length(n, "dynamical_ball_volume");
  if (!(r > 0.0)) throw ConfigError("ball radius must be positive");
  if (m < 1000) throw ConfigError("dynamical_ball_volume requires m >= 1000");
  std::vector<Point> centre(n);
  centre[0] = x;
  for (std::size_t i = 1; i < n; ++i) centre[i] = sys.step(centre[i - 1]);
  const DomainSpec& dom = sys.domain();
  const auto inside = map_indices(m, workers, [&](std::size_t idx) -> char {
    StartStream rng(seed, idx);
    Point y = dom.from_unit(rng.uniform_open(), rng.uniform_open());
    try {
      for (std::size_t i = 0; i < n; ++i) {
        if (!(dom.distance(centre[i], y) < r)) return 0;
        if (i + 1 < n) y = sys.step(y);
      }
    } catch (const Error&) {
      return 0;
    }
    return 1;
  });
  BallVolume out;
  out.samples = m;
  out.hits = static_cast<std::uint64_t>(std::count(inside.begin(), inside.end(), 1));
  const double vol = dom.volume();
  out.estimate = vol * static_cast<double>(out.hits) / static_cast<double>(m);
  const Interval ci = clopper_pearson(out.hits, m);
  out.ci = {vol * ci.lo, vol * ci.hi};
  return out;
}

BallVolume dynamical_ball_volume_exact(const DynamicalSystem& sys, const Point& x, std::size_t n, double r) {
  require_length(n, "dynamical_ball_volume_exact");
  if (sys.dimension() != 1 || sys.branches().empty()) {
    throw ConfigError(sys.name() + ": exact ball volume needs a 1-D system with declared branches");
  }
  std::vector<SegmentSet> targets;
  double c = x.x();
  for (std::size_t i = 0; i < n; ++i) {
    targets.push_back(neighbourhood(sys.domain(), c, r));
    if (i + 1 < n) c = branch_step(sys, c);
  }
  BallVolume out;
  out.exact = true;
  out.estimate = constrained_measure(sys, targets);
  out.ci = {out.estimate, out.estimate};
  return out;
}

OrbitSummary summarize_orbit(const DynamicalSystem& sys, const Point& x, std::size_t n,
                             std::span<const Observable> observables, const HyperbolicTimeParams& params) {
  require_length(n, "summarize_orbit");
  OrbitSummary s;
  s.start = x;
  s.length = n;
  std::vector<CompensatedSum> obs(observables.size());
  CompensatedSum psi, delta, jac;
  Point p = x;
  for (std::size_t j = 0; j < n; ++j) {
    const Point next = sys.step(p);
    for (std::size_t k = 0; k < observables.size(); ++k) obs[k].add(observables[k](p));
    psi.add(sys.log_inverse_norm(p));
    delta.add(delta_log(sys, p, params.delta));
    jac.add(sys.log_jacobian(p));
    s.min_singular_distance = std::min(s.min_singular_distance, sys.singular_distance(p));
    p = next;
  }
  for (std::size_t k = 0; k < observables.size(); ++k) {
    s.observable_names.push_back(observables[k].name());
    s.observable_sums.push_back(obs[k].value());
  }
  s.sum_psi = psi.value();
  s.sum_delta = delta.value();
  s.sum_jacobian = jac.value();
  s.hyperbolic_times = hyperbolic_times(sys, x, n, params);
  return s;
}

std::string orbit_csv_header(std::span<const std::string> observable_names) {
  std::string h = "x0 [coord],y0 [coord],n [iterates]";
  for (const auto& name : observable_names) h += ",S_" + name + " [sum]";
  h += ",S_psi [log],S_delta [log],S_J [log],min_sd [distance],n_hyptimes [count],hyp_density [fraction],"
       "first_hyptime [iterate]";
  return h;
}

std::string orbit_csv_row(const OrbitSummary& s) {
  std::string row = fmt::format("{:.17g},{:.17g},{}", s.start.x(), s.start.y(), s.length);
  for (double v : s.observable_sums) row += fmt::format(",{:.17g}", v);
  const double density = hyperbolic_time_density(s.hyperbolic_times, s.length);
  const long long first = s.hyperbolic_times.empty() ? -1 : static_cast<long long>(s.hyperbolic_times.front());
  row += fmt::format(",{:.17g},{:.17g},{:.17g},{:.17g},{},{:.17g},{}", s.sum_psi, s.sum_delta, s.sum_jacobian,
                     s.min_singular_distance, s.hyperbolic_times.size(), density, first);
  return row;
}

}  // namespace nuelab
