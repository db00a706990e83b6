#pragma once

// Brute-force view of the learning dynamics at a fixed inverse temperature:
// the full 2^n x 2^n transition matrix, its stationary distribution, and the
// Gibbs distribution of the potential for comparison.
//
// States use the canonical encoding of Configuration::index(): bit i holds
// node i's type, M = 0, C = 1.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "gridgame/game.hpp"
#include "gridgame/log_linear.hpp"

namespace gridgame {

/// Row-stochastic transition matrix of the asynchronous chain at constant
/// eta. Throws SizeGuardError above kMaxChainNodes nodes.
Eigen::MatrixXd transition_matrix(const GameContext& ctx, double eta);

/// True if every state reaches every other through positive entries.
bool is_irreducible(const Eigen::MatrixXd& transition);

/// Unique left fixed point pi P = pi with sum(pi) = 1, from a dense linear
/// solve. Throws SingularChainError if the chain is reducible.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Same fixed point by repeated multiplication; kept as a cross-check.
Eigen::VectorXd stationary_by_power_iteration(const Eigen::MatrixXd& transition, double tolerance = 1e-14,
                                              std::size_t max_iterations = 1'000'000);

/// Probabilities proportional to exp(eta * U(state)).
Eigen::VectorXd gibbs_distribution(const GameContext& ctx, double eta);

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// max over state pairs of |pi_x P_xy - pi_y P_yx|.
double detailed_balance_residual(const Eigen::MatrixXd& transition, const Eigen::VectorXd& pi);

struct ChainModel {
  std::size_t node_count = 0;
  double eta = 0.0;
  Eigen::MatrixXd transition;
  Eigen::VectorXd stationary;
  Eigen::VectorXd gibbs;
  std::vector<double> potentials;  // by state index
  std::vector<bool> maximizer;     // potential within kMaximizerTolerance of the best

  /// Stationary probability on the potential maximizers.
  double maximizer_mass() const;
  /// States carrying the largest stationary probability (within rel. 1e-9).
  std::vector<std::uint64_t> stationary_modes() const;
  /// Whether the most likely stationary states are exactly the maximizers.
  bool modes_match_maximizers() const;
};

ChainModel build_chain(const GameContext& ctx, double eta);

struct GibbsComparison {
  double total_variation = 0.0;
  double detailed_balance_residual = 0.0;
  Eigen::VectorXd stationary;
  Eigen::VectorXd gibbs;
};

GibbsComparison gibbs_comparison(const GameContext& ctx, double eta);

inline constexpr double kBurnInFraction = 0.1;

struct EmpiricalCheck {
  double tv_distance = 0.0;
  Eigen::VectorXd empirical;
  Eigen::VectorXd stationary;
  std::uint64_t samples = 0;
};

/// Simulates the chain at constant eta from all-M, drops the first 10% of
/// steps, and compares visit frequencies with the exact stationary
/// distribution. Throws DomainError when steps < 1e5.
EmpiricalCheck empirical_frequency_check(const GameContext& ctx, double eta, std::uint64_t steps,
                                         std::uint64_t seed);

/// `state_index,cfg_string,stationary_prob,gibbs_prob`.
void write_distribution_csv(std::ostream& out, const ChainModel& chain);

}  // namespace gridgame
