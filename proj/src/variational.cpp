#include "nuelab/variational.hpp"

#include "nuelab/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace nuelab {

namespace {

constexpr double kPerronTolerance = 1e-12;
constexpr int kPerronMaxIterations = 10'000'000;

/// Tilted matrix scaled so that its largest column weight is 1; returns the
/// log of the scale that was divided out.
double tilted(const MarkovModel& model, double t, Eigen::MatrixXd& M) {
  const int k = model.size();
  Eigen::VectorXd w(k);
  for (int j = 0; j < k; ++j) w[j] = t * model.phi[j] - model.J[j];
  const double shift = w.maxCoeff();
  M.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      M(i, j) = model.A(i, j) != 0.0 ? std::max(std::exp(w[j] - shift), std::numeric_limits<double>::min()) : 0.0;
  return shift;
}

Eigen::VectorXd power_vector(const Eigen::MatrixXd& M, double& root, int& iterations) {
  const int k = static_cast<int>(M.rows());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(k);
  for (iterations = 1; iterations <= kPerronMaxIterations; ++iterations) {
    Eigen::VectorXd w = M * v + v;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int i = 0; i < k; ++i) {
      const double ratio = w[i] / v[i];
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    v = w / w.maxCoeff();
    if (hi - lo <= kPerronTolerance * hi) {
      root = 0.5 * (lo + hi) - 1.0;
      return v;
    }
  }
  throw NumericError("power iteration did not converge");
}

double spectral_radius(const Eigen::MatrixXd& M) {
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(M, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::VectorXd solve_stationary(const Eigen::MatrixXd& P) {
  const int k = static_cast<int>(P.rows());
  Eigen::MatrixXd S = P.transpose() - Eigen::MatrixXd::Identity(k, k);
  S.row(k - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
  rhs[k - 1] = 1.0;
  return S.colPivHouseholderQr().solve(rhs);
}

double entropy_rate(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi) {
  double h = 0.0;
  for (int i = 0; i < P.rows(); ++i)
    for (int j = 0; j < P.cols(); ++j)
      if (P(i, j) > 0.0) h -= pi[i] * P(i, j) * std::log(P(i, j));
  return h;
}

}  // namespace

bool is_irreducible(const Eigen::MatrixXd& A) {
  const int k = static_cast<int>(A.rows());
  for (int s = 0; s < k; ++s) {
    std::vector<bool> seen(k, false);
    std::vector<int> stack{s};
    int reached = 0;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      for (int j = 0; j < k; ++j)
        if (A(i, j) != 0.0 && !seen[j]) {
          seen[j] = true;
          ++reached;
          stack.push_back(j);
        }
    }
    if (reached != k) return false;
  }
  return true;
}

void MarkovModel::validate() const {
  const int k = size();
  if (k < 2) throw ConfigError("Markov model needs at least 2 symbols");
  if (A.cols() != k) throw ConfigError("transition matrix must be square");
  if (phi.size() != k || J.size() != k) throw ConfigError("phi and J must have one entry per symbol");
  for (int i = 0; i < k; ++i) {
    if (!std::isfinite(phi[i]) || !std::isfinite(J[i])) throw ConfigError("phi and J must be finite");
    for (int j = 0; j < k; ++j)
      if (A(i, j) != 0.0 && A(i, j) != 1.0) throw ConfigError("transition matrix entries must be 0 or 1");
  }
  if (!is_irreducible(A)) throw ConfigError("transition matrix is reducible");
}

MarkovModel MarkovModel::full_branch(int k, Eigen::VectorXd phi) {
  MarkovModel m;
  m.name = "full_branch_" + std::to_string(k);
  m.A = Eigen::MatrixXd::Ones(k, k);
  m.phi = std::move(phi);
  m.J = Eigen::VectorXd::Constant(k, std::log(static_cast<double>(k)));
  m.validate();
  return m;
}

MarkovModel MarkovModel::doubling() {
  MarkovModel m = full_branch(2, Eigen::Vector2d(0.0, 1.0));
  m.name = "doubling";
  return m;
}

MarkovModel MarkovModel::golden_mean(Eigen::VectorXd phi, Eigen::VectorXd J) {
  MarkovModel m;
  m.name = "golden_mean";
  m.A.resize(2, 2);
  m.A << 1, 1, 1, 0;
  m.phi = std::move(phi);
  m.J = std::move(J);
  m.validate();
  return m;
}

MarkovModel MarkovModel::from_json(const nlohmann::json& j) {
  MarkovModel m;
  try {
    m.name = j.value("name", std::string("model"));
    const auto& rows = j.at("matrix");
    const int k = static_cast<int>(rows.size());
    if (j.contains("alphabet") && j.at("alphabet").get<int>() != k)
      throw ConfigError("alphabet size does not match the matrix");
    m.A.resize(k, k);
    for (int i = 0; i < k; ++i) {
      if (static_cast<int>(rows[i].size()) != k) throw ConfigError("transition matrix must be square");
      for (int c = 0; c < k; ++c) m.A(i, c) = rows[i][c].get<double>();
    }
    const auto phi = j.at("phi").get<std::vector<double>>();
    const auto jac = j.at("J").get<std::vector<double>>();
    m.phi = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()));
    m.J = Eigen::Map<const Eigen::VectorXd>(jac.data(), static_cast<Eigen::Index>(jac.size()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid Markov model description: ") + e.what());
  }
  m.validate();
  return m;
}

nlohmann::json MarkovModel::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < size(); ++i) {
    std::vector<double> row;
    for (int c = 0; c < size(); ++c) row.push_back(A(i, c));
    rows.push_back(row);
  }
  return {{"name", name},
          {"alphabet", size()},
          {"matrix", rows},
          {"phi", std::vector<double>(phi.data(), phi.data() + phi.size())},
          {"J", std::vector<double>(J.data(), J.data() + J.size())}};
}

PerronResult perron(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols() || M.rows() == 0) throw ConfigError("Perron root needs a square matrix");
  if ((M.array() < 0.0).any()) throw ConfigError("Perron root needs a nonnegative matrix");
  if (!is_irreducible(M)) throw NumericError("matrix is reducible");
  PerronResult r;
  int it_right = 0, it_left = 0;
  double root_left = 0.0;
  r.right = power_vector(M, r.root, it_right);
  r.left = power_vector(M.transpose(), root_left, it_left);
  r.right /= r.right.sum();
  r.left /= r.left.dot(r.right);
  r.iterations = std::max(it_right, it_left);
  return r;
}

double pressure(const MarkovModel& model, double t) {
  model.validate();
  Eigen::MatrixXd M;
  const double shift = tilted(model, t, M);
  const PerronResult r = perron(M);
  return std::log(r.root) + shift;
}

double pressure_derivative(const MarkovModel& model, double t) {
  model.validate();
  Eigen::MatrixXd M;
  tilted(model, t, M);
  const PerronResult r = perron(M);
  const Eigen::VectorXd w = r.left.cwiseProduct(r.right);
  return w.dot(model.phi) / w.sum();
}

RateBound rate_bound_detail(const MarkovModel& model, double c) {
  model.validate();
  const double phi_max = model.phi.maxCoeff();
  if (c > phi_max) throw ConfigError("rate bound is infeasible: c exceeds max phi");
  if (pressure_derivative(model, 0.0) >= c) return {pressure(model, 0.0), 0.0};
  if (c == phi_max) {
    // Only the symbols attaining max phi survive as t -> infinity.
    std::vector<int> top;
    for (int j = 0; j < model.size(); ++j)
      if (model.phi[j] == phi_max) top.push_back(j);
    Eigen::MatrixXd B(top.size(), top.size());
    for (std::size_t a = 0; a < top.size(); ++a)
      for (std::size_t b = 0; b < top.size(); ++b)
        B(a, b) = model.A(top[a], top[b]) * std::exp(-model.J[top[b]]);
    const double rho = spectral_radius(B);
    return {rho > 0.0 ? std::log(rho) : -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  }
  double lo = 0.0, hi = 1.0;
  while (pressure_derivative(model, hi) < c) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e12) throw NumericError("rate bound bracket diverged");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pressure_derivative(model, mid) < c) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double t = hi;
  return {pressure(model, t) - t * c, t};
}

double rate_bound(const MarkovModel& model, double c) { return rate_bound_detail(model, c).value; }

MarkovChain MarkovChain::from_kernel(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() < 2) throw ConfigError("kernel must be square with k >= 2");
  MarkovChain ch;
  ch.P = P;
  ch.pi = solve_stationary(P);
  return ch;
}

MarkovChain MarkovChain::bernoulli(const Eigen::VectorXd& p) {
  MarkovChain ch;
  ch.P = p.transpose().replicate(p.size(), 1);
  ch.pi = p;
  return ch;
}

MarkovChain MarkovChain::equilibrium(const MarkovModel& model, double t) {
  model.validate();
  Eigen::MatrixXd M;
  tilted(model, t, M);
  const PerronResult r = perron(M);
  MarkovChain ch;
  const int k = model.size();
  ch.P.resize(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) ch.P(i, j) = M(i, j) * r.right[j] / (r.root * r.right[i]);
  ch.pi = r.left.cwiseProduct(r.right);
  ch.pi /= ch.pi.sum();
  return ch;
}

double markov_entropy(const MarkovModel& model, const MarkovChain& chain) {
  model.validate();
  const int k = model.size();
  if (chain.P.rows() != k || chain.P.cols() != k || chain.pi.size() != k)
    throw ConfigError("chain does not match the model alphabet");
  for (int i = 0; i < k; ++i) {
    if (std::abs(chain.P.row(i).sum() - 1.0) > 1e-9) throw ConfigError("kernel rows must sum to 1");
    for (int j = 0; j < k; ++j) {
      if (chain.P(i, j) < 0.0) throw ConfigError("kernel entries must be nonnegative");
      if (chain.P(i, j) > 0.0 && model.A(i, j) == 0.0) throw ConfigError("kernel uses a forbidden transition");
    }
  }
  if ((chain.pi.array() < 0.0).any() || std::abs(chain.pi.sum() - 1.0) > 1e-9)
    throw ConfigError("stationary vector is not a distribution");
  if ((chain.pi.transpose() * chain.P - chain.pi.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("distribution is not stationary for the kernel");
  return entropy_rate(chain.P, chain.pi);
}

double markov_integral(const MarkovModel& model, const Eigen::VectorXd& g, const MarkovChain& chain) {
  if (g.size() != model.size() || chain.pi.size() != model.size())
    throw ConfigError("function does not match the model alphabet");
  return chain.pi.dot(g);
}

namespace {

/// max h(q) - q(J) over stationary edge measures q on the allowed edges,
/// restricted to the affine slice where q(phi) = c when `on_slice`.
/// Returns {-inf, nan} if the slice holds no edge measure, else the best
/// value and the phi-average of the maximizing measure.
std::pair<double, double> edge_measure_search(const MarkovModel& model, double c, bool on_slice, int grid) {
  const int k = model.size();
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      if (model.A(i, j) != 0.0) edges.push_back({i, j});
  const int m = static_cast<int>(edges.size());

  // Rows: total mass, flow balance at nodes 1..k-1, optionally q(phi) = c.
  const int rows = k + (on_slice ? 1 : 0);
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(rows, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(rows);
  for (int e = 0; e < m; ++e) {
    const auto [i, j] = edges[e];
    C(0, e) = 1.0;
    if (i > 0) C(i, e) += 1.0;
    if (j > 0) C(j, e) -= 1.0;
    if (on_slice) C(k, e) = model.phi(i);
  }
  rhs(0) = 1.0;
  if (on_slice) rhs(k) = c;

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C, Eigen::ComputeFullU | Eigen::ComputeFullV);
  svd.setThreshold(1e-12);
  const int rank = static_cast<int>(svd.rank());
  const Eigen::VectorXd q0 = svd.solve(rhs);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  if ((C * q0 - rhs).norm() > 1e-9) return {kNone, std::nan("")};
  const int d = m - rank;
  const Eigen::MatrixXd N = svd.matrixV().rightCols(d);

  auto objective = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd q = (q0 + N * z).cwiseMax(0.0);
    if ((q0 + N * z).minCoeff() < -1e-12) return -std::numeric_limits<double>::infinity();
    Eigen::VectorXd out = Eigen::VectorXd::Zero(k);
    for (int e = 0; e < m; ++e) out(edges[e].first) += q(e);
    double v = 0.0;
    for (int e = 0; e < m; ++e) {
      const auto [i, j] = edges[e];
      if (q(e) > 0.0) v -= q(e) * std::log(q(e) / out(i));
      v -= q(e) * model.J(i);
    }
    return v;
  };
  auto phi_mean = [&](const Eigen::VectorXd& z) {
    const Eigen::VectorXd q = q0 + N * z;
    double v = 0.0;
    for (int e = 0; e < m; ++e) v += q(e) * model.phi(edges[e].first);
    return v;
  };
  if (d == 0) return {objective(Eigen::VectorXd()), phi_mean(Eigen::VectorXd())};

  // Feasible seed: a mixture of the simple cycles with the largest and
  // smallest phi-average (on the slice), or the largest alone.
  struct Cycle {
    Eigen::VectorXd q;
    double phi;
  };
  std::vector<Cycle> cycles;
  auto edge_index = [&](int i, int j) {
    for (int e = 0; e < m; ++e)
      if (edges[e] == std::pair{i, j}) return e;
    return -1;
  };
  std::vector<std::vector<int>> paths;
  for (int a = 0; a < k; ++a) {
    paths.push_back({a});
    for (int b = a + 1; b < k; ++b) {
      paths.push_back({a, b});
      for (int c3 = a + 1; c3 < k; ++c3)
        if (c3 != b) paths.push_back({a, b, c3});
    }
  }
  for (const auto& path : paths) {
    Cycle cy{Eigen::VectorXd::Zero(m), 0.0};
    bool ok = true;
    const double len = static_cast<double>(path.size());
    for (std::size_t s = 0; s < path.size() && ok; ++s) {
      const int e = edge_index(path[s], path[(s + 1) % path.size()]);
      ok = e >= 0;
      if (ok) cy.q(e) += 1.0 / len;
      cy.phi += model.phi(path[s]) / len;
    }
    if (ok) cycles.push_back(cy);
  }
  const auto [lo_it, hi_it] =
      std::minmax_element(cycles.begin(), cycles.end(), [](const Cycle& x, const Cycle& y) { return x.phi < y.phi; });
  Eigen::VectorXd seed = hi_it->q;
  if (on_slice) {
    if (c > hi_it->phi + 1e-12 || c < lo_it->phi - 1e-12) return {kNone, std::nan("")};
    const double span = hi_it->phi - lo_it->phi;
    const double lambda = span > 0.0 ? std::clamp((c - lo_it->phi) / span, 0.0, 1.0) : 1.0;
    seed = lambda * hi_it->q + (1.0 - lambda) * lo_it->q;
  }
  Eigen::VectorXd best_z = N.transpose() * (seed - q0);
  double best = objective(best_z);

  // Scans a points^d grid over centre +- r.
  auto scan = [&](const Eigen::VectorXd& centre, double r, int points) {
    std::vector<int> counter(d, 0);
    Eigen::VectorXd z(d);
    bool improved = false;
    while (true) {
      for (int a = 0; a < d; ++a) z(a) = centre(a) - r + 2.0 * r * counter[a] / (points - 1);
      const double v = objective(z);
      if (v > best) {
        best = v;
        best_z = z;
        improved = true;
      }
      int a = 0;
      while (a < d && ++counter[a] == points) counter[a++] = 0;
      if (a == d) break;
    }
    return improved;
  };

  // Edge measures have Euclidean norm <= 1 and q0 is the minimum-norm
  // solution, so the slice coordinates lie in [-1, 1]^d.
  constexpr double kBudget = 2.0e6;
  const int coarse = std::max(3, std::min(grid + 1, static_cast<int>(std::floor(std::pow(kBudget, 1.0 / d)))));
  scan(Eigen::VectorXd::Zero(d), 1.0, coarse);
  // The objective is concave on the slice: recentre while a 5-point grid
  // improves, halve the radius otherwise.
  double r = 2.0 / (coarse - 1);
  for (int iter = 0; iter < 5000 && r > 1e-11; ++iter)
    if (!scan(best_z, r, 5)) r *= 0.5;
  return {best, phi_mean(best_z)};
}

}  // namespace

double rate_bound_bruteforce(const MarkovModel& model, double c, int grid) {
  model.validate();
  if (model.size() > 3) throw ConfigError("brute-force rate bound supports k <= 3");
  if (grid < 2 || grid > 200) throw ConfigError("grid must lie in [2, 200]");
  // Concavity puts the constrained maximizer either at the free maximizer
  // or on the face q(phi) = c.
  double best = -std::numeric_limits<double>::infinity();
  if (c <= model.phi.maxCoeff()) best = edge_measure_search(model, c, true, grid).first;
  const auto [value, mean] = edge_measure_search(model, c, false, grid);
  if (mean >= c) best = std::max(best, value);
  return best;
}

}  // namespace nuelab
