#include "nuelab/deviations.hpp"

#include "nuelab/diagnostics.hpp"
#include "nuelab/intervals.hpp"
#include "nuelab/parallel.hpp"
#include "nuelab/partial_hyperbolic.hpp"
#include "nuelab/random.hpp"

#include <algorithm>
#include <cmath>

namespace nuelab {

namespace {

// Slack absorbing rounding in S_n phi when c n is an exact attainable sum.
constexpr double kThresholdSlack = 1e-10;

void check_grid(const std::vector<std::size_t>& n_grid) {
  if (n_grid.empty()) throw ConfigError("n_grid must not be empty");
  if (n_grid.front() == 0) throw ConfigError("n_grid entries must be positive");
  for (std::size_t i = 1; i < n_grid.size(); ++i)
    if (n_grid[i] <= n_grid[i - 1]) throw ConfigError("n_grid must be strictly increasing");
}

void check_samples(std::size_t m) {
  if (m < 1000) throw ConfigError("sample count m must be at least 1000");
}

std::size_t grid_position(const std::vector<std::size_t>& n_grid, std::size_t n) {
  const auto it = std::find(n_grid.begin(), n_grid.end(), n);
  if (it == n_grid.end()) throw ConfigError("n = " + std::to_string(n) + " is not in n_grid");
  return static_cast<std::size_t>(it - n_grid.begin());
}

Point uniform_start(const DynamicalSystem& sys, std::uint64_t seed, std::size_t i) {
  StartStream rng(seed, i);
  return sys.domain().from_unit(rng.uniform_open(), rng.uniform_open());
}

/// Runs fn(shard) on each worker's contiguous range of [0, m) and sums the
/// per-shard integer tallies, so the total is independent of the worker count.
template <class Tally, class Fn>
Tally sharded_tally(std::size_t m, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  auto parts = map_indices(workers, workers, [&](std::size_t w) { return fn(shard_of(m, workers, static_cast<unsigned>(w))); });
  Tally total = parts.front();
  for (std::size_t w = 1; w < parts.size(); ++w) total += parts[w];
  return total;
}

struct CountTable {
  std::vector<DeviationCounts> rows;
  CountTable& operator+=(const CountTable& o) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      rows[i].trials += o.rows[i].trials;
      rows[i].failed += o.rows[i].failed;
      rows[i].deviation += o.rows[i].deviation;
      rows[i].recurrence_ok += o.rows[i].recurrence_ok;
      rows[i].joint += o.rows[i].joint;
    }
    return *this;
  }
};

double sum_log_bits(const boost::multiprecision::cpp_int& v) {
  if (v <= 0) return -std::numeric_limits<double>::infinity();
  const std::size_t bits = boost::multiprecision::msb(v) + 1;
  if (bits <= 60) return std::log(v.convert_to<double>());
  const std::size_t shift = bits - 60;
  const boost::multiprecision::cpp_int top = v >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

}  // namespace

void DeviationExperiment::validate() const {
  check_grid(n_grid);
  check_samples(m);
  if (mode == DeviationMode::EquilibriumDistance) {
    if (!(omega > 0.0)) throw ConfigError("omega must be positive in equilibrium mode");
    if (targets.empty()) throw ConfigError("equilibrium mode needs at least one target");
  }
  if (gate && (!(gate->delta > 0.0) || !(gate->eps >= 0.0))) throw ConfigError("invalid recurrence gate");
}

FractionEstimate make_estimate(std::size_t n, std::uint64_t hits, std::uint64_t trials, std::uint64_t failed) {
  FractionEstimate e;
  e.n = n;
  e.hits = hits;
  e.trials = trials;
  e.failed = failed;
  if (trials == 0) throw NumericError("no successful trials at n = " + std::to_string(n));
  e.p_hat = static_cast<double>(hits) / static_cast<double>(trials);
  e.ci = clopper_pearson(hits, trials);
  e.censored = hits == 0;
  return e;
}

FractionEstimate exact_estimate(std::size_t n, double p) {
  FractionEstimate e;
  e.n = n;
  e.p_hat = p;
  e.ci = {p, p};
  e.exact = true;
  e.censored = p <= 0.0;
  return e;
}

std::vector<DeviationCounts> deviation_counts(const DeviationExperiment& exp) {
  exp.validate();
  const DynamicalSystem& sys = exp.system;
  const std::size_t n_max = exp.n_grid.back();
  CountTable init;
  for (std::size_t n : exp.n_grid) init.rows.push_back({n, 0, 0, 0, 0, 0});

  auto in_deviation = [&](double sum, std::size_t n) {
    const double nd = static_cast<double>(n);
    if (exp.mode == DeviationMode::Threshold) return sum >= exp.c * nd - kThresholdSlack;
    const double avg = sum / nd;
    return std::all_of(exp.targets.begin(), exp.targets.end(),
                       [&](double eta) { return std::abs(avg - eta) > exp.omega; });
  };

  CountTable total = sharded_tally<CountTable>(exp.m, exp.workers, [&](Shard s) {
    CountTable t = init;
    std::vector<bool> dev(exp.n_grid.size()), rec(exp.n_grid.size());
    for (std::size_t i = s.begin; i < s.end; ++i) {
      try {
        Point p = uniform_start(sys, exp.seed, i);
        std::vector<double> f_jac;
        if (exp.quantity == DeviationQuantity::FJacobian) {
          FOrbit fo = f_orbit(sys, p, n_max, exp.f_warmup);
          p = fo.start;
          f_jac = std::move(fo.log_expansion);
        }
        CompensatedSum s_phi, s_delta;
        std::size_t g = 0;
        for (std::size_t j = 0; j < n_max; ++j) {
          const Point next = sys.step(p);
          s_phi.add(f_jac.empty() ? exp.phi(p) : f_jac[j]);
          if (exp.gate) s_delta.add(delta_log(sys, p, exp.gate->delta));
          p = next;
          if (j + 1 == exp.n_grid[g]) {
            dev[g] = in_deviation(s_phi.value(), j + 1);
            rec[g] = !exp.gate || s_delta.value() <= exp.gate->eps * static_cast<double>(j + 1);
            ++g;
          }
        }
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
          auto& row = t.rows[k];
          ++row.trials;
          row.deviation += dev[k];
          row.recurrence_ok += rec[k];
          row.joint += dev[k] && rec[k];
        }
      } catch (const HitSingularSet&) {
        for (auto& row : t.rows) ++row.failed;
      } catch (const LeftDomain&) {
        for (auto& row : t.rows) ++row.failed;
      }
    }
    return t;
  });
  return total.rows;
}

std::vector<FractionEstimate> deviation_series(const DeviationExperiment& exp) {
  exp.validate();
  if (exp.mode == DeviationMode::Threshold && exp.quantity == DeviationQuantity::Observable && !exp.gate) {
    if (exp.c <= exp.phi.lower() || exp.c > exp.phi.upper()) {
      const double p = exp.c <= exp.phi.lower() ? 1.0 : 0.0;
      std::vector<FractionEstimate> out;
      for (std::size_t n : exp.n_grid) out.push_back(exact_estimate(n, p));
      return out;
    }
  }
  std::vector<FractionEstimate> out;
  for (const auto& row : deviation_counts(exp))
    out.push_back(make_estimate(row.n, exp.gate ? row.joint : row.deviation, row.trials, row.failed));
  return out;
}

FractionEstimate deviation_fraction(const DeviationExperiment& exp, std::size_t n) {
  const std::size_t pos = grid_position(exp.n_grid, n);
  return deviation_series(exp)[pos];
}

std::vector<FractionEstimate> tail_series(const DynamicalSystem& sys, double delta, double eps,
                                          const std::vector<std::size_t>& n_grid, std::size_t m,
                                          std::uint64_t seed, unsigned workers) {
  check_grid(n_grid);
  check_samples(m);
  if (!(delta > 0.0)) throw ConfigError("delta must be positive");
  const std::size_t n_max = n_grid.back();
  CountTable init;
  for (std::size_t n : n_grid) init.rows.push_back({n, 0, 0, 0, 0, 0});
  const CountTable total = sharded_tally<CountTable>(m, workers, [&](Shard s) {
    CountTable t = init;
    std::vector<bool> tail(n_grid.size());
    for (std::size_t i = s.begin; i < s.end; ++i) {
      try {
        Point p = uniform_start(sys, seed, i);
        CompensatedSum s_delta;
        std::size_t g = 0;
        for (std::size_t j = 0; j < n_max; ++j) {
          const Point next = sys.step(p);
          s_delta.add(delta_log(sys, p, delta));
          p = next;
          if (j + 1 == n_grid[g]) tail[g++] = s_delta.value() > eps * static_cast<double>(j + 1);
        }
        for (std::size_t k = 0; k < t.rows.size(); ++k) {
          ++t.rows[k].trials;
          t.rows[k].deviation += tail[k];
        }
      } catch (const HitSingularSet&) {
        for (auto& row : t.rows) ++row.failed;
      } catch (const LeftDomain&) {
        for (auto& row : t.rows) ++row.failed;
      }
    }
    return t;
  });
  std::vector<FractionEstimate> out;
  for (const auto& row : total.rows) out.push_back(make_estimate(row.n, row.deviation, row.trials, row.failed));
  return out;
}

FractionEstimate tail_fraction(const DynamicalSystem& sys, double delta, double eps, std::size_t n, std::size_t m,
                               std::uint64_t seed, unsigned workers) {
  return tail_series(sys, delta, eps, {n}, m, seed, workers).front();
}

bool Region::contains(const Point& p) const {
  if (p.x() < lo0 || p.x() > hi0) return false;
  if (hi1 > lo1 && (p.y() < lo1 || p.y() > hi1)) return false;
  return !predicate || predicate(p);
}

double Region::box_volume(int dimension) const {
  return dimension == 1 ? hi0 - lo0 : (hi0 - lo0) * (hi1 - lo1);
}

Region Region::interval(double lo, double hi) { return {lo, hi, 0.0, 0.0, {}}; }
Region Region::box(double lo0, double hi0, double lo1, double hi1) { return {lo0, hi0, lo1, hi1, {}}; }

Region Region::whole(const DomainSpec& d) {
  if (d.dimension() == 1) return interval(d.lo0, d.hi0);
  return box(d.lo0, d.hi0, d.kind == DomainKind::Torus ? 0.0 : d.lo1, d.kind == DomainKind::Torus ? 1.0 : d.hi1);
}

std::vector<EscapeEstimate> escape_series(const DynamicalSystem& sys, const Region& K,
                                          const std::vector<std::size_t>& n_grid, std::size_t m,
                                          std::uint64_t seed, unsigned workers) {
  check_grid(n_grid);
  check_samples(m);
  const int dim = sys.dimension();
  if (!(K.box_volume(dim) > 0.0)) throw ConfigError("region K has empty bounding box");
  const std::size_t n_max = n_grid.back();
  constexpr std::size_t kMaxDraws = 1000;

  struct Tally {
    CountTable table;
    std::uint64_t draws = 0;
    std::uint64_t accepted = 0;
    Tally& operator+=(const Tally& o) {
      table += o.table;
      draws += o.draws;
      accepted += o.accepted;
      return *this;
    }
  };
  Tally init;
  for (std::size_t n : n_grid) init.table.rows.push_back({n, 0, 0, 0, 0, 0});

  const Tally total = sharded_tally<Tally>(m, workers, [&](Shard s) {
    Tally t = init;
    std::vector<bool> alive(n_grid.size());
    for (std::size_t i = s.begin; i < s.end; ++i) {
      StartStream rng(seed, i);
      Point p;
      bool found = false;
      for (std::size_t d = 0; d < kMaxDraws && !found; ++d) {
        const double u0 = rng.uniform_open(), u1 = rng.uniform_open();
        p = {K.lo0 + (K.hi0 - K.lo0) * u0, dim == 1 ? 0.0 : K.lo1 + (K.hi1 - K.lo1) * u1};
        ++t.draws;
        found = K.contains(p) && sys.domain().contains(p);
      }
      if (!found) continue;
      ++t.accepted;
      try {
        bool inside = true;
        std::size_t g = 0;
        for (std::size_t j = 0; j < n_max; ++j) {
          inside = inside && K.contains(p);
          if (j + 1 == n_grid[g]) alive[g++] = inside;
          if (!inside) {
            for (; g < n_grid.size(); ++g) alive[g] = false;
            break;
          }
          if (j + 1 < n_max) p = sys.step(p);
        }
        for (std::size_t k = 0; k < t.table.rows.size(); ++k) {
          ++t.table.rows[k].trials;
          t.table.rows[k].deviation += alive[k];
        }
      } catch (const HitSingularSet&) {
        for (auto& row : t.table.rows) ++row.failed;
      } catch (const LeftDomain&) {
        for (auto& row : t.table.rows) ++row.failed;
      }
    }
    return t;
  });
  if (total.accepted == 0) throw NumericError("region K is empty under sampling");
  const double acceptance = static_cast<double>(total.accepted) / static_cast<double>(total.draws);
  const double region_volume = K.box_volume(dim) * acceptance / sys.domain().volume();
  std::vector<EscapeEstimate> out;
  for (const auto& row : total.table.rows) {
    EscapeEstimate e;
    e.relative = make_estimate(row.n, row.deviation, row.trials, row.failed);
    e.region_volume = region_volume;
    e.absolute = e.relative.p_hat * region_volume;
    out.push_back(e);
  }
  return out;
}

EscapeEstimate escape_survivor_fraction(const DynamicalSystem& sys, const Region& K, std::size_t n, std::size_t m,
                                        std::uint64_t seed, unsigned workers) {
  return escape_series(sys, K, {n}, m, seed, workers).front();
}

EscapeEstimate escape_survivor_exact(const DynamicalSystem& sys, const Region& K, std::size_t n) {
  if (n == 0) throw ConfigError("escape_survivor_exact requires n >= 1");
  if (sys.dimension() != 1 || sys.branches().empty())
    throw ConfigError(sys.name() + ": exact escape needs a 1-D system with declared branches");
  if (K.predicate) throw ConfigError("exact escape supports interval regions only");
  const SegmentSet k = intersect({{K.lo0, K.hi0}}, {{sys.domain().lo0, sys.domain().hi0}});
  const double vol = sys.domain().volume();
  EscapeEstimate e;
  e.region_volume = total_length(k) / vol;
  if (!(e.region_volume > 0.0)) throw NumericError("region K is empty");
  e.absolute = constrained_measure(sys, std::vector<SegmentSet>(n, k)) / vol;
  e.relative = exact_estimate(n, e.absolute / e.region_volume);
  return e;
}

RateEstimate fit_exponential_rate(const std::vector<SeriesPoint>& series) {
  RateEstimate r;
  bool any_sampled = false;
  std::vector<double> xs, ys, ws;
  for (const auto& pt : series) {
    double p = pt.p;
    bool censored = false;
    if (p <= 0.0) {
      censored = true;
      p = pt.m > 0 ? 3.0 / static_cast<double>(pt.m) : 0.0;
    }
    r.censored.push_back(censored);
    if (censored) continue;
    if (p > 1.0) throw ConfigError("probabilities must lie in [0, 1]");
    double w = 1.0;
    if (pt.m > 0) {
      any_sampled = true;
      const double md = static_cast<double>(pt.m);
      w = md * p / std::max(1.0 - p, 1.0 / md);
    }
    xs.push_back(static_cast<double>(pt.n));
    ys.push_back(-std::log(p));
    ws.push_back(w);
  }
  r.used = xs.size();
  if (r.used < 3) throw NumericError("rate fit needs at least 3 uncensored points");
  r.window_lo = static_cast<std::size_t>(*std::min_element(xs.begin(), xs.end()));
  r.window_hi = static_cast<std::size_t>(*std::max_element(xs.begin(), xs.end()));
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sw += ws[i];
    sx += ws[i] * xs[i];
    sy += ws[i] * ys[i];
  }
  const double xbar = sx / sw, ybar = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += ws[i] * (xs[i] - xbar) * (xs[i] - xbar);
    sxy += ws[i] * (xs[i] - xbar) * (ys[i] - ybar);
  }
  if (!(sxx > 0.0)) throw NumericError("rate fit needs at least two distinct n");
  r.xi = sxy / sxx;
  r.intercept = ybar - r.xi * xbar;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double res = ys[i] - (r.intercept + r.xi * xs[i]);
    chi2 += ws[i] * res * res;
  }
  const double dof = static_cast<double>(xs.size() - 2);
  // Sampled series carry inverse-variance weights; inflate only when the
  // residuals show overdispersion.
  const double scale = any_sampled ? std::max(1.0, chi2 / dof) : chi2 / dof;
  r.std_error = std::sqrt(scale / sxx);
  const double z = normal_quantile_two_sided(0.95);
  r.ci = {r.xi - z * r.std_error, r.xi + z * r.std_error};
  return r;
}

RateEstimate fit_exponential_rate(const std::vector<FractionEstimate>& series) {
  std::vector<SeriesPoint> pts;
  for (const auto& e : series) pts.push_back({e.n, e.p_hat, e.exact ? 0 : e.trials});
  return fit_exponential_rate(pts);
}

double ExactFraction::value() const {
  if (numerator == 0) return 0.0;
  return std::exp(log_value());
}

double ExactFraction::log_value() const { return sum_log_bits(numerator) - sum_log_bits(denominator); }

ExactFraction exact_doubling_oracle(std::size_t n, double c) {
  using boost::multiprecision::cpp_int;
  if (n > 1000) throw ConfigError("exact_doubling_oracle supports n <= 1000");
  ExactFraction f;
  f.denominator = cpp_int(1) << n;
  const double k_real = std::ceil(c * static_cast<double>(n) - kThresholdSlack);
  if (k_real > static_cast<double>(n)) {
    f.numerator = 0;
    return f;
  }
  const std::size_t k_min = k_real <= 0.0 ? 0 : static_cast<std::size_t>(k_real);
  cpp_int binom = 1;  // C(n, k) for k running from 0
  for (std::size_t k = 0; k <= n; ++k) {
    if (k >= k_min) f.numerator += binom;
    binom = binom * (n - k) / (k + 1);
  }
  return f;
}

}  // namespace nuelab
