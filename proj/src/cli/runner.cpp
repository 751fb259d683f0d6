#include "nuelab/cli/runner.hpp"

#include "nuelab/diagnostics.hpp"
#include "nuelab/measures.hpp"
#include "nuelab/parallel.hpp"
#include "nuelab/partial_hyperbolic.hpp"
#include "nuelab/random.hpp"
#include "nuelab/variational.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <numeric>

namespace nuelab::cli {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double v) { return fmt::format("{:.17g}", v); }

Json fit_json(const RateEstimate& r) {
  return {{"xi", r.xi},
          {"std_error", r.std_error},
          {"ci", {r.ci.lo, r.ci.hi}},
          {"intercept", r.intercept},
          {"window", {r.window_lo, r.window_hi}},
          {"points_used", r.used},
          {"decay_detected", r.decay_detected()}};
}

double neg_log_rate(const FractionEstimate& f, double log_p) {
  return f.p_hat > 0.0 ? -log_p / static_cast<double>(f.n) : kNaN;
}

std::string series_csv(const std::vector<FractionEstimate>& series, const std::vector<double>& log_p) {
  std::string out =
      "n [iterates],hits [count],trials [count],failed [count],p_hat [fraction],ci_lo [fraction],ci_hi [fraction],"
      "neg_log_rate [1/iterate],exact [flag]\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& f = series[i];
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", f.n, f.hits, f.trials, f.failed, num(f.p_hat), num(f.ci.lo),
                       num(f.ci.hi), num(neg_log_rate(f, log_p[i])), f.exact ? 1 : 0);
  }
  return out;
}

std::vector<double> plain_logs(const std::vector<FractionEstimate>& series) {
  std::vector<double> out;
  for (const auto& f : series) out.push_back(f.p_hat > 0.0 ? std::log(f.p_hat) : -std::numeric_limits<double>::infinity());
  return out;
}

std::uint64_t total_failed(const std::vector<FractionEstimate>& series) {
  std::uint64_t n = 0;
  for (const auto& f : series) n += f.failed;
  return n;
}

Json try_fit(const std::vector<FractionEstimate>& series) {
  try {
    return fit_json(fit_exponential_rate(series));
  } catch (const NumericError& e) {
    return {{"error", e.what()}};
  }
}

HyperbolicTimeParams hyperbolic_params(const Json& e) {
  HyperbolicTimeParams p{e["sigma"].get<double>(), e["delta"].get<double>(), e["b"].get<double>(),
                         recurrence_indexing_from(e["recurrence_indexing"].get<std::string>())};
  p.validate();
  return p;
}

Point start_point(const DynamicalSystem& sys, std::uint64_t seed, std::size_t i) {
  StartStream rng(seed, i);
  const double u0 = rng.uniform_open();
  const double u1 = rng.uniform_open();
  return sys.domain().from_unit(u0, u1);
}

struct Run {
  std::string csv;
  Json statistics = Json::object();
  Json fit;
  Json oracle = Json::object();
  std::uint64_t failed = 0;
  std::optional<std::string> svg;
};

Run run_simulate(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  const auto params = hyperbolic_params(e);
  const std::size_t n = e["n"].get<std::size_t>();
  std::vector<Observable> obs;
  std::vector<std::string> names;
  for (const auto& o : e["observables"]) {
    if (!o.is_string()) throw ConfigError("[simulate] observables: expected strings");
    names.push_back(o.get<std::string>());
    obs.push_back(observable_by_name(sys, names.back()));
  }
  std::vector<Point> starts;
  if (!e["x0"].empty()) {
    const auto x0 = e["x0"].get<std::vector<double>>();
    if (x0.size() != static_cast<std::size_t>(sys.dimension()))
      throw ConfigError("[simulate] x0 must have one entry per coordinate");
    starts.push_back(Point(x0[0], x0.size() > 1 ? x0[1] : 0.0));
  } else {
    for (std::size_t i = 0; i < cfg.numeric.m; ++i) starts.push_back(start_point(sys, cfg.numeric.seed, i));
  }
  const auto rows = map_indices(starts.size(), cfg.numeric.workers, [&](std::size_t i) -> std::optional<std::string> {
    try {
      return orbit_csv_row(summarize_orbit(sys, starts[i], n, obs, params));
    } catch (const Error&) {
      return std::nullopt;
    }
  });
  Run r;
  r.csv = orbit_csv_header(names) + "\n";
  for (const auto& row : rows) {
    if (row) {
      r.csv += *row + "\n";
    } else {
      ++r.failed;
    }
  }
  r.statistics = {{"orbits", starts.size() - r.failed}};
  return r;
}

Run run_hyptimes(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  const auto params = hyperbolic_params(e);
  const std::size_t n_max = e["n_max"].get<std::size_t>();
  const bool along_f = e["along_f"].get<bool>();
  const std::size_t warmup = e["warmup"].get<std::size_t>();
  if (n_max == 0) throw ConfigError("[hyptimes] n_max must be positive");
  struct Row {
    Point x;
    std::vector<std::size_t> times;
    bool ok;
  };
  const auto rows = map_indices(cfg.numeric.m, cfg.numeric.workers, [&](std::size_t i) {
    const Point x = start_point(sys, cfg.numeric.seed, i);
    try {
      return Row{x, along_f ? ph_hyperbolic_times(sys, x, n_max, params.sigma, warmup)
                            : hyperbolic_times(sys, x, n_max, params), true};
    } catch (const Error&) {
      return Row{x, {}, false};
    }
  });
  Run r;
  r.csv = "x0 [coord],y0 [coord],n_max [iterates],n_hyptimes [count],density [fraction],first_hyptime [iterate]\n";
  double density_sum = 0.0;
  std::size_t positive = 0, used = 0;
  for (const auto& row : rows) {
    if (!row.ok) {
      ++r.failed;
      continue;
    }
    const double d = hyperbolic_time_density(row.times, n_max);
    density_sum += d;
    positive += d > 0.0;
    ++used;
    r.csv += fmt::format("{},{},{},{},{},{}\n", num(row.x.x()), num(row.x.y()), n_max, row.times.size(), num(d),
                         row.times.empty() ? std::int64_t{-1} : static_cast<std::int64_t>(row.times.front()));
  }
  r.statistics = {{"orbits", used},
                  {"mean_density", used ? density_sum / used : kNaN},
                  {"fraction_positive", used ? static_cast<double>(positive) / used : kNaN},
                  {"recurrence_indexing", to_string(params.indexing)}};
  return r;
}

Run run_measure(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  SamplingOptions o{cfg.numeric.m, e["burn_in"].get<std::size_t>(), e["length"].get<std::size_t>(),
                    cfg.numeric.seed, cfg.numeric.workers, 8};
  const std::size_t b0 = e["bins"].get<std::size_t>();
  if (b0 == 0) throw ConfigError("[measure] bins must be positive");
  const EmpiricalMeasure mu = empirical_measure(sys, b0, o);
  Run r;
  r.csv = measure_csv(mu);
  r.failed = mu.failed_starts;
  r.statistics = Json(measure_summary(mu));
  if (e["basins"].get<bool>()) {
    const BasinReport basins = basin_count(sys, b0, e["basin_tol"].get<double>(), o);
    Json members = Json::array();
    for (const auto& c : basins.clusters) members.push_back(c.members);
    r.statistics["basins"] = {{"count", basins.count()}, {"members", members}};
  }
  return r;
}

bool doubling_digit(const ExperimentConfig& cfg) {
  const Json& e = cfg.experiment;
  return cfg.family == "doubling" && e["observable"] == "digit" && e["mode"] == "threshold" &&
         e["quantity"] == "observable" && !e["gate"].get<bool>();
}

Run run_deviate(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  const std::string method = e["method"].get<std::string>();
  if (method != "monte_carlo" && method != "exact")
    throw ConfigError("[deviate] method must be \"monte_carlo\" or \"exact\"");
  const double c = e["c"].get<double>();
  Run r;
  std::vector<FractionEstimate> series;
  std::vector<double> logs;

  if (method == "exact") {
    if (!doubling_digit(cfg))
      throw ConfigError("[deviate] exact method is available for the doubling map with observable \"digit\" only");
    for (std::size_t n : cfg.numeric.n_grid) {
      const ExactFraction f = exact_doubling_oracle(n, c);
      series.push_back(exact_estimate(n, f.value()));
      logs.push_back(f.numerator == 0 ? -std::numeric_limits<double>::infinity() : f.log_value());
    }
  } else {
    const std::string q = e["quantity"].get<std::string>(), mode = e["mode"].get<std::string>();
    if (q != "observable" && q != "f_jacobian") throw ConfigError("[deviate] quantity must be \"observable\" or \"f_jacobian\"");
    if (mode != "threshold" && mode != "equilibrium_distance")
      throw ConfigError("[deviate] mode must be \"threshold\" or \"equilibrium_distance\"");
    DeviationExperiment exp{.system = sys,
                            .phi = q == "f_jacobian" ? Observable::constant(0.0)
                                                     : observable_by_name(sys, e["observable"].get<std::string>())};
    exp.quantity = q == "f_jacobian" ? DeviationQuantity::FJacobian : DeviationQuantity::Observable;
    exp.mode = mode == "threshold" ? DeviationMode::Threshold : DeviationMode::EquilibriumDistance;
    exp.c = c;
    exp.targets = e["targets"].get<std::vector<double>>();
    exp.omega = e["omega"].get<double>();
    if (e["gate"].get<bool>()) exp.gate = RecurrenceGate{e["gate_delta"].get<double>(), e["gate_eps"].get<double>()};
    exp.n_grid = cfg.numeric.n_grid;
    exp.m = cfg.numeric.m;
    exp.seed = cfg.numeric.seed;
    exp.workers = cfg.numeric.workers;
    exp.f_warmup = e["f_warmup"].get<std::size_t>();
    series = deviation_series(exp);
    logs = plain_logs(series);
  }
  r.csv = series_csv(series, logs);
  r.failed = total_failed(series);

  r.fit = try_fit(series);

  std::optional<double> reference;
  if (doubling_digit(cfg)) {
    const double rb = rate_bound(MarkovModel::doubling(), c);
    r.oracle["rate_bound"] = rb;
    r.oracle["model"] = "doubling";
    reference = -rb;
    if (method == "monte_carlo") {
      Json checks = Json::array();
      for (const auto& f : series) {
        if (f.n > 1000 || f.exact) continue;
        const double exact = exact_doubling_oracle(f.n, c).value();
        checks.push_back({{"n", f.n}, {"exact", exact}, {"inside_999_band", binomial_band(exact, f.trials, 0.999).contains(f.p_hat)}});
      }
      r.oracle["exact_points"] = checks;
    }
  }
  r.statistics = {{"c", c}, {"method", method}};
  if (cfg.output.wants("svg")) r.svg = rate_chart_svg(series, reference, fmt::format("{} deviation rate, c = {}", cfg.family, c));
  return r;
}

Run run_escape(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  const std::string method = e["method"].get<std::string>();
  if (method != "monte_carlo" && method != "exact")
    throw ConfigError("[escape] method must be \"monte_carlo\" or \"exact\"");
  const double lo = e["lo"].get<double>(), hi = e["hi"].get<double>();
  if (!(lo < hi)) throw ConfigError("[escape] lo must be smaller than hi");
  const Region K = sys.dimension() == 1 ? Region::interval(lo, hi)
                                        : Region::box(lo, hi, e["lo_y"].get<double>(), e["hi_y"].get<double>());
  Run r;
  std::vector<EscapeEstimate> est;
  if (method == "exact") {
    if (sys.dimension() != 1) throw ConfigError("[escape] exact method needs a one-dimensional system");
    for (std::size_t n : cfg.numeric.n_grid) est.push_back(escape_survivor_exact(sys, K, n));
  } else {
    est = escape_series(sys, K, cfg.numeric.n_grid, cfg.numeric.m, cfg.numeric.seed, cfg.numeric.workers);
  }
  std::vector<FractionEstimate> series;
  for (const auto& x : est) series.push_back(x.relative);
  r.csv = series_csv(series, plain_logs(series));
  r.failed = total_failed(series);
  r.fit = try_fit(series);
  r.statistics = {{"region_volume", est.empty() ? 0.0 : est.front().region_volume}, {"method", method}};

  std::optional<double> reference;
  if (sys.dimension() == 1 && method == "monte_carlo") {
    try {
      std::vector<FractionEstimate> exact;
      Json checks = Json::array();
      for (const auto& f : series) {
        exact.push_back(escape_survivor_exact(sys, K, f.n).relative);
        checks.push_back({{"n", f.n}, {"exact", exact.back().p_hat},
                          {"inside_999_ci", clopper_pearson(f.hits, f.trials, 0.999).contains(exact.back().p_hat)}});
      }
      r.oracle["exact_points"] = checks;
      const RateEstimate fe = fit_exponential_rate(exact);
      r.oracle["exact_xi"] = fe.xi;
      reference = fe.xi;
    } catch (const Error& err) {
      r.oracle["unavailable"] = err.what();
    }
  }
  if (cfg.output.wants("svg")) r.svg = rate_chart_svg(series, reference, fmt::format("{} escape from [{}, {}]", cfg.family, lo, hi));
  return r;
}

Run run_tail(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  const double delta = e["delta"].get<double>(), eps = e["eps"].get<double>();
  if (!(delta > 0.0)) throw ConfigError("[tail] delta must be positive");
  const auto series = tail_series(sys, delta, eps, cfg.numeric.n_grid, cfg.numeric.m, cfg.numeric.seed, cfg.numeric.workers);
  Run r;
  r.csv = series_csv(series, plain_logs(series));
  r.failed = total_failed(series);
  const bool any = std::any_of(series.begin(), series.end(), [](const FractionEstimate& f) { return f.hits > 0; });
  r.fit = any ? try_fit(series) : Json{{"error", "no start reached the tail set"}};
  r.statistics = {{"delta", delta}, {"eps", eps}};
  if (cfg.output.wants("svg")) r.svg = rate_chart_svg(series, std::nullopt, fmt::format("{} tail, eps = {}", cfg.family, eps));
  return r;
}

MarkovModel bound_model(const Json& e) {
  const std::string name = e["model"].get<std::string>();
  const auto vec = [](const Json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  if (name == "doubling") return MarkovModel::doubling();
  if (name == "full_branch") {
    const int k = e["k"].get<int>();
    if (k < 2) throw ConfigError("[bound] k must be at least 2");
    if (e["phi"].empty()) throw ConfigError("[bound] full_branch needs phi");
    return MarkovModel::full_branch(k, vec(e["phi"]));
  }
  if (name == "golden_mean") {
    if (e["phi"].empty() || e["J"].empty()) throw ConfigError("[bound] golden_mean needs phi and J");
    return MarkovModel::golden_mean(vec(e["phi"]), vec(e["J"]));
  }
  if (name == "custom")
    return MarkovModel::from_json(nlohmann::json{{"name", "custom"},
                                                 {"matrix", nlohmann::json::parse(e["matrix"].dump())},
                                                 {"phi", nlohmann::json::parse(e["phi"].dump())},
                                                 {"J", nlohmann::json::parse(e["J"].dump())}});
  throw ConfigError("[bound] model must be one of doubling, full_branch, golden_mean, custom");
}

Run run_bound(const ExperimentConfig& cfg, const DynamicalSystem&) {
  const Json& e = cfg.experiment;
  const MarkovModel model = bound_model(e);
  std::vector<double> cs = e["c"].is_array() ? e["c"].get<std::vector<double>>() : std::vector<double>{e["c"].get<double>()};
  if (cs.empty()) throw ConfigError("[bound] c must not be empty");
  const int grid = e["bruteforce_grid"].get<int>();
  Run r;
  r.csv = "c [observable],rate_bound [nats/iterate],t_star [dimensionless],bruteforce [nats/iterate]\n";
  Json values = Json::array();
  for (double c : cs) {
    const RateBound rb = rate_bound_detail(model, c);
    const double brute = grid > 0 ? rate_bound_bruteforce(model, c, grid) : kNaN;
    r.csv += fmt::format("{},{},{},{}\n", num(c), num(rb.value), num(rb.t_star), num(brute));
    Json v = {{"c", c}, {"rate_bound", rb.value}, {"t_star", std::isfinite(rb.t_star) ? Json(rb.t_star) : Json(nullptr)}};
    if (grid > 0) v["bruteforce"] = std::isfinite(brute) ? Json(brute) : Json(nullptr);
    values.push_back(v);
  }
  r.statistics = {{"model", Json::parse(model.to_json().dump())}, {"values", values}};
  if (e["model"] == "doubling") {
    Json checks = Json::array();
    for (double c : cs) {
      const double h = c > 0.0 && c < 1.0 ? -c * std::log(c) - (1 - c) * std::log(1 - c) : 0.0;
      const double closed = c <= 0.5 ? 0.0 : h - std::log(2.0);
      checks.push_back({{"c", c}, {"closed_form", closed}, {"abs_error", std::abs(closed - rate_bound(model, c))}});
    }
    r.oracle["closed_form"] = checks;
  }
  return r;
}

Run run_ruelle(const ExperimentConfig& cfg, const DynamicalSystem& sys) {
  const Json& e = cfg.experiment;
  RuelleOptions o;
  o.sampling = {e["starts"].get<std::size_t>(), e["burn_in"].get<std::size_t>(), e["length"].get<std::size_t>(),
                cfg.numeric.seed, cfg.numeric.workers, 8};
  o.references = e["references"].get<std::size_t>();
  o.n = e["n"].get<std::size_t>();
  o.eps = e["eps"].get<double>();
  o.lyapunov_length = e["lyapunov_length"].get<std::size_t>();
  o.slack = e["slack"].get<double>();
  const RuelleReport rep = ruelle_check(sys, o);
  Run r;
  r.csv = "x0 [coord],y0 [coord],local_entropy [nats/iterate],positive_exponent_sum [nats/iterate]\n";
  for (std::size_t i = 0; i < rep.references.size(); ++i)
    r.csv += fmt::format("{},{},{},{}\n", num(rep.references[i].x()), num(rep.references[i].y()),
                         num(rep.local_entropies[i]), num(rep.positive_exponent_sums[i]));
  r.statistics = {{"mean_entropy", rep.mean_entropy},
                  {"mean_positive_sum", rep.mean_positive_sum},
                  {"slack", rep.slack},
                  {"holds", rep.holds()}};
  return r;
}

}  // namespace

Bundle run_experiment(const ExperimentConfig& cfg) {
  const DynamicalSystem sys = build_system(cfg.family, cfg.params);
  Run r;
  if (cfg.kind == "simulate") r = run_simulate(cfg, sys);
  else if (cfg.kind == "hyptimes") r = run_hyptimes(cfg, sys);
  else if (cfg.kind == "measure") r = run_measure(cfg, sys);
  else if (cfg.kind == "deviate") r = run_deviate(cfg, sys);
  else if (cfg.kind == "escape") r = run_escape(cfg, sys);
  else if (cfg.kind == "tail") r = run_tail(cfg, sys);
  else if (cfg.kind == "bound") r = run_bound(cfg, sys);
  else if (cfg.kind == "ruelle_check") r = run_ruelle(cfg, sys);
  else throw ConfigError("unknown experiment '" + cfg.kind + "'");

  Bundle b;
  b.results_csv = std::move(r.csv);
  b.summary = {{"schema", kSummarySchema},
               {"experiment", cfg.kind},
               {"config", cfg.to_json()},
               {"results", {{"file", "results.csv"},
                            {"sha1", git_blob_sha1(b.results_csv)},
                            {"rows", std::count(b.results_csv.begin(), b.results_csv.end(), '\n') - 1}}},
               {"failed_starts", r.failed},
               {"fit", r.fit.is_null() ? Json(nullptr) : r.fit},
               {"oracle", r.oracle},
               {"statistics", r.statistics}};
  b.chart_svg = std::move(r.svg);
  return b;
}

}  // namespace nuelab::cli
