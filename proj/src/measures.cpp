#include "nuelab/measures.hpp"

#include "nuelab/diagnostics.hpp"
#include "nuelab/parallel.hpp"
#include "nuelab/random.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nuelab {

namespace {

std::size_t axis_bin(double v, double lo, double hi, std::size_t bins) {
  const double u = (v - lo) / (hi - lo);
  if (!(u > 0.0)) return 0;
  return std::min(bins - 1, static_cast<std::size_t>(u * static_cast<double>(bins)));
}

double axis_lo(const DomainSpec& d, int axis) { return axis == 0 ? d.lo0 : d.lo1; }
double axis_hi(const DomainSpec& d, int axis) { return axis == 0 ? d.hi0 : d.hi1; }

void check_sampling(const SamplingOptions& o) {
  if (o.starts == 0) throw ConfigError("sampling needs at least one start");
  if (o.length == 0) throw ConfigError("sampling needs a positive orbit length");
}

/// Runs the burn-in of start i, redrawing on failure. Returns false when all
/// attempts failed; `failures` counts the failed attempts.
template <class Visit>
bool run_start(const DynamicalSystem& sys, const SamplingOptions& o, std::size_t i, std::size_t& failures,
               Visit&& visit) {
  StartStream rng(o.seed, i);
  for (std::size_t attempt = 0; attempt <= o.retries; ++attempt) {
    Point p = sys.domain().from_unit(rng.uniform_open(), rng.uniform_open());
    try {
      for (std::size_t j = 0; j < o.burn_in; ++j) p = sys.step(p);
      std::vector<Point> orbit;
      orbit.reserve(o.length);
      for (std::size_t j = 0; j < o.length; ++j) {
        orbit.push_back(p);
        p = sys.step(p);
      }
      visit(orbit);
      return true;
    } catch (const HitSingularSet&) {
      ++failures;
    } catch (const LeftDomain&) {
      ++failures;
    }
  }
  return false;
}

struct Partial {
  std::vector<std::uint64_t> counts;
  std::uint64_t samples = 0;
  std::uint64_t failed = 0;
};

EmpiricalMeasure from_counts(EmpiricalMeasure shape, const std::vector<std::uint64_t>& counts) {
  const double total = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}));
  shape.weights.assign(counts.size(), 0.0);
  if (total > 0.0)
    for (std::size_t i = 0; i < counts.size(); ++i) shape.weights[i] = static_cast<double>(counts[i]) / total;
  return shape;
}

}  // namespace

std::size_t EmpiricalMeasure::bin_of(const Point& p) const {
  const std::size_t i0 = axis_bin(p.x(), domain.lo0, domain.hi0, bins0);
  if (bins1 == 1) return i0;
  return i0 + bins0 * axis_bin(p.y(), domain.lo1, domain.hi1, bins1);
}

double EmpiricalMeasure::edge(int axis, std::size_t i) const {
  const double lo = axis_lo(domain, axis), hi = axis_hi(domain, axis);
  const std::size_t bins = axis == 0 ? bins0 : bins1;
  return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
}

Point EmpiricalMeasure::bin_centre(std::size_t index) const {
  const std::size_t i0 = index % bins0, i1 = index / bins0;
  const double x = 0.5 * (edge(0, i0) + edge(0, i0 + 1));
  const double y = bins1 == 1 ? 0.0 : 0.5 * (edge(1, i1) + edge(1, i1 + 1));
  return {x, y};
}

EmpiricalMeasure EmpiricalMeasure::uniform(const DomainSpec& domain, std::size_t bins0, std::size_t bins1) {
  if (bins0 * bins1 < 2) throw ConfigError("a measure needs at least two bins");
  EmpiricalMeasure m;
  m.domain = domain;
  m.bins0 = bins0;
  m.bins1 = domain.dimension() == 1 ? 1 : bins1;
  m.weights.assign(m.size(), 1.0 / static_cast<double>(m.size()));
  return m;
}

EmpiricalMeasure empirical_measure(const DynamicalSystem& sys, std::size_t bins, const SamplingOptions& o) {
  check_sampling(o);
  EmpiricalMeasure shape = EmpiricalMeasure::uniform(sys.domain(), bins, bins);
  const unsigned workers = std::max(1u, o.workers);
  const auto partials = map_indices(workers, workers, [&](std::size_t w) {
    Partial part;
    part.counts.assign(shape.size(), 0);
    const Shard s = shard_of(o.starts, workers, static_cast<unsigned>(w));
    for (std::size_t i = s.begin; i < s.end; ++i) {
      std::size_t failures = 0;
      run_start(sys, o, i, failures, [&](const std::vector<Point>& orbit) {
        for (const Point& p : orbit) ++part.counts[shape.bin_of(p)];
        part.samples += orbit.size();
      });
      part.failed += failures;
    }
    return part;
  });
  std::vector<std::uint64_t> counts(shape.size(), 0);
  std::uint64_t samples = 0, failed = 0;
  for (const auto& part : partials) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += part.counts[i];
    samples += part.samples;
    failed += part.failed;
  }
  if (samples == 0) throw NumericError(sys.name() + ": every start failed");
  EmpiricalMeasure m = from_counts(shape, counts);
  m.samples = samples;
  m.failed_starts = failed;
  return m;
}

double integrate(const EmpiricalMeasure& measure, const Observable& phi) {
  CompensatedSum sum;
  for (std::size_t i = 0; i < measure.size(); ++i)
    if (measure.weights[i] != 0.0) sum.add(measure.weights[i] * phi(measure.bin_centre(i)));
  return sum.value();
}

double l1_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.size() != b.size()) throw ConfigError("histograms have different grids");
  return l1_distance(a, b.weights);
}

double l1_distance(const EmpiricalMeasure& a, const std::vector<double>& masses) {
  if (a.size() != masses.size()) throw ConfigError("reference masses do not match the grid");
  double d = 0.0;
  for (std::size_t i = 0; i < masses.size(); ++i) d += std::abs(a.weights[i] - masses[i]);
  return d;
}

BasinReport basin_count(const DynamicalSystem& sys, std::size_t bins, double tol, const SamplingOptions& o) {
  check_sampling(o);
  const EmpiricalMeasure shape = EmpiricalMeasure::uniform(sys.domain(), bins, bins);
  struct PerStart {
    bool ok = false;
    Point start;
    EmpiricalMeasure histogram;
  };
  const auto per_start = map_indices(o.starts, std::max(1u, o.workers), [&](std::size_t i) {
    PerStart r;
    std::size_t failures = 0;
    r.ok = run_start(sys, o, i, failures, [&](const std::vector<Point>& orbit) {
      std::vector<std::uint64_t> counts(shape.size(), 0);
      for (const Point& p : orbit) ++counts[shape.bin_of(p)];
      r.start = orbit.front();
      r.histogram = from_counts(shape, counts);
      r.histogram.samples = orbit.size();
    });
    return r;
  });
  BasinReport report;
  for (const auto& r : per_start) {
    if (!r.ok) {
      ++report.failed_starts;
      continue;
    }
    auto it = std::find_if(report.clusters.begin(), report.clusters.end(),
                           [&](const BasinCluster& c) { return l1_distance(c.histogram, r.histogram) <= tol; });
    if (it == report.clusters.end()) {
      report.clusters.push_back({r.start, 1, r.histogram});
    } else {
      ++it->members;
    }
  }
  if (report.clusters.empty()) throw NumericError(sys.name() + ": every start failed");
  return report;
}

EmpiricalOrbitSet srb_ensemble(const DynamicalSystem& sys, const SamplingOptions& o) {
  check_sampling(o);
  struct PerStart {
    std::vector<Point> orbit;
    std::size_t failures = 0;
  };
  auto per_start = map_indices(o.starts, std::max(1u, o.workers), [&](std::size_t i) {
    PerStart r;
    run_start(sys, o, i, r.failures, [&](const std::vector<Point>& orbit) { r.orbit = orbit; });
    return r;
  });
  EmpiricalOrbitSet set;
  set.points.reserve(o.starts * o.length);
  for (auto& r : per_start) {
    set.points.insert(set.points.end(), r.orbit.begin(), r.orbit.end());
    if (r.orbit.empty()) ++set.failed_starts;
  }
  if (set.points.empty()) throw NumericError(sys.name() + ": every start failed");
  return set;
}

LocalEntropy local_entropy(const DynamicalSystem& sys, const EmpiricalOrbitSet& ensemble, const Point& x,
                           std::size_t n, double eps, unsigned workers, std::uint64_t min_count) {
  if (n == 0) throw ConfigError("local_entropy requires n >= 1");
  if (!(eps > 0.0)) throw ConfigError("local_entropy requires eps > 0");
  std::vector<Point> centre(n);
  centre[0] = x;
  for (std::size_t k = 1; k < n; ++k) centre[k] = sys.step(centre[k - 1]);

  const DomainSpec& dom = sys.domain();
  const std::size_t N = ensemble.points.size();
  workers = std::max(1u, workers);
  const auto partials = map_indices(workers, workers, [&](std::size_t w) {
    std::vector<std::uint64_t> counts(n, 0);
    const Shard s = shard_of(N, workers, static_cast<unsigned>(w));
    for (std::size_t i = s.begin; i < s.end; ++i) {
      Point y = ensemble.points[i];
      try {
        for (std::size_t k = 0; k < n; ++k) {
          if (!(dom.distance(centre[k], y) < eps)) break;
          ++counts[k];
          if (k + 1 < n) y = sys.step(y);
        }
      } catch (const Error&) {
      }
    }
    return counts;
  });
  LocalEntropy out;
  out.counts.assign(n, 0);
  for (const auto& c : partials)
    for (std::size_t k = 0; k < n; ++k) out.counts[k] += c[k];

  const double total = static_cast<double>(N);
  const double last = out.counts[n - 1] ? static_cast<double>(out.counts[n - 1]) : 3.0;
  out.single_length = -std::log(last / total) / static_cast<double>(n);

  // Slope of -log count_k against k, weighted by count_k (Poisson variance of
  // log count). The first length is a plain eps-ball and is skipped.
  double sw = 0, sk = 0, sy = 0, skk = 0, sky = 0;
  std::size_t used = 0;
  for (std::size_t k = n > 2 ? 1 : 0; k < n; ++k) {
    if (out.counts[k] < min_count) break;
    const double w = static_cast<double>(out.counts[k]);
    const double kk = static_cast<double>(k + 1), yy = -std::log(w);
    sw += w;
    sk += w * kk;
    sy += w * yy;
    skk += w * kk * kk;
    sky += w * kk * yy;
    ++used;
  }
  out.fit_points = used;
  if (used >= 2) {
    out.estimate = (sw * sky - sk * sy) / (sw * skk - sk * sk);
  } else {
    out.estimate = out.single_length;
    out.censored = out.counts[n - 1] == 0;
  }
  return out;
}

RuelleReport ruelle_check(const DynamicalSystem& sys, const RuelleOptions& o) {
  if (o.references == 0) throw ConfigError("ruelle_check needs at least one reference point");
  const EmpiricalOrbitSet ensemble = srb_ensemble(sys, o.sampling);
  RuelleReport r;
  r.system = sys.name();
  r.slack = o.slack;
  // References are taken from an independent ensemble stream.
  SamplingOptions ref_sampling = o.sampling;
  ref_sampling.seed = mix64(o.sampling.seed ^ 0x52554c4c45ULL);
  ref_sampling.starts = o.references;
  ref_sampling.length = 1;
  const EmpiricalOrbitSet refs = srb_ensemble(sys, ref_sampling);
  CompensatedSum h, s;
  for (const Point& x : refs.points) {
    const LocalEntropy le = local_entropy(sys, ensemble, x, o.n, o.eps, o.sampling.workers);
    const auto spectrum = lyapunov_spectrum(sys, x, o.lyapunov_length);
    r.references.push_back(x);
    r.local_entropies.push_back(le.estimate);
    r.positive_exponent_sums.push_back(positive_sum(spectrum));
    h.add(le.estimate);
    s.add(r.positive_exponent_sums.back());
  }
  const double count = static_cast<double>(r.references.size());
  r.mean_entropy = h.value() / count;
  r.mean_positive_sum = s.value() / count;
  return r;
}

std::string measure_csv(const EmpiricalMeasure& m) {
  std::string out = m.bins1 == 1 ? "x_lo [coord],x_hi [coord],weight [probability]\n"
                                  : "x_lo [coord],x_hi [coord],y_lo [coord],y_hi [coord],weight [probability]\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    const std::size_t i0 = i % m.bins0, i1 = i / m.bins0;
    if (m.bins1 == 1) {
      out += fmt::format("{:.17g},{:.17g},{:.17g}\n", m.edge(0, i0), m.edge(0, i0 + 1), m.weights[i]);
    } else {
      out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", m.edge(0, i0), m.edge(0, i0 + 1),
                         m.edge(1, i1), m.edge(1, i1 + 1), m.weights[i]);
    }
  }
  return out;
}

nlohmann::json measure_summary(const EmpiricalMeasure& m) {
  const int dims = m.bins1 == 1 ? 1 : 2;
  nlohmann::json moments = nlohmann::json::array();
  for (int axis = 0; axis < dims; ++axis) {
    double mean = 0.0, second = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double v = m.bin_centre(i)[axis];
      mean += m.weights[i] * v;
      second += m.weights[i] * v * v;
    }
    moments.push_back({{"axis", axis}, {"mean", mean}, {"variance", std::max(0.0, second - mean * mean)}});
  }
  std::size_t support = 0;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m.weights[i] <= 0.0) continue;
    ++support;
    lo = std::min(lo, m.edge(0, i % m.bins0));
    hi = std::max(hi, m.edge(0, i % m.bins0 + 1));
  }
  return {{"domain", std::string(to_string(m.domain.kind))},
          {"bins", {m.bins0, m.bins1}},
          {"samples", m.samples},
          {"failed_starts", m.failed_starts},
          {"moments", moments},
          {"support_bins", support},
          {"support_x", {lo, hi}}};
}

}  // namespace nuelab
