#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <string>

namespace nuelab {

/// Finite-alphabet Markov structure with per-symbol observable and Jacobian.
struct MarkovModel {
  std::string name;
  Eigen::MatrixXd A;    ///< 0/1 transitions, A(i, j) = 1 if i -> j is allowed
  Eigen::VectorXd phi;  ///< observable value on each symbol
  Eigen::VectorXd J;    ///< log local expansion on each symbol

  int size() const { return static_cast<int>(A.rows()); }
  /// Throws ConfigError unless k >= 2, A is 0/1 and irreducible, and
  /// phi, J are finite with matching length.
  void validate() const;

  /// Full shift on k symbols with J = log k (the map x -> kx mod 1 coded by
  /// the k intervals of length 1/k).
  static MarkovModel full_branch(int k, Eigen::VectorXd phi);
  /// Doubling map coded by the first binary digit, phi = digit.
  static MarkovModel doubling();
  static MarkovModel golden_mean(Eigen::VectorXd phi, Eigen::VectorXd J);

  static MarkovModel from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

bool is_irreducible(const Eigen::MatrixXd& A);

/// Perron root of a nonnegative irreducible matrix by power iteration on
/// M + I (tolerance 1e-12, all-ones start). Also returns the normalized
/// right and left eigenvectors.
struct PerronResult {
  double root = 0.0;
  Eigen::VectorXd right;
  Eigen::VectorXd left;
  int iterations = 0;
};
PerronResult perron(const Eigen::MatrixXd& M);

/// P(t phi - J) = log Perron root of A(i, j) exp(t phi_j - J_j).
double pressure(const MarkovModel& model, double t);
/// d/dt P(t phi - J): the phi-average of the tilted equilibrium state.
double pressure_derivative(const MarkovModel& model, double t);

struct RateBound {
  double value = 0.0;
  /// Minimizing t; +inf when the infimum is only approached (c = max phi).
  double t_star = 0.0;
};

/// inf_{t >= 0} [P(t phi - J) - t c]. ConfigError if c > max phi.
RateBound rate_bound_detail(const MarkovModel& model, double c);
double rate_bound(const MarkovModel& model, double c);

/// A stationary Markov chain on the model's alphabet.
struct MarkovChain {
  Eigen::MatrixXd P;   ///< row-stochastic kernel
  Eigen::VectorXd pi;  ///< stationary distribution

  /// Kernel with pi solved from pi P = pi, sum pi = 1.
  static MarkovChain from_kernel(const Eigen::MatrixXd& P);
  /// i.i.d. chain with marginal p.
  static MarkovChain bernoulli(const Eigen::VectorXd& p);
  /// Equilibrium state of t phi - J: P_ij = M_ij r_j / (rho r_i),
  /// pi_i proportional to l_i r_i.
  static MarkovChain equilibrium(const MarkovModel& model, double t);
};

/// Entropy rate -sum pi_i P_ij log P_ij. ConfigError if the chain uses a
/// forbidden transition or pi is not stationary.
double markov_entropy(const MarkovModel& model, const MarkovChain& chain);
/// sum pi_i g_i.
double markov_integral(const MarkovModel& model, const Eigen::VectorXd& g, const MarkovChain& chain);

/// Grid search over Markov measures compatible with A maximizing
/// h - nu(J) subject to nu(phi) >= c. Measures are parametrized by their
/// stationary edge weights; a coarse grid with `grid` + 1 points per free
/// coordinate is followed by a shrinking local grid search. Returns -inf
/// when no feasible measure exists.
double rate_bound_bruteforce(const MarkovModel& model, double c, int grid);

}  // namespace nuelab
