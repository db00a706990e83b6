#include "gridgame/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>

#include <fmt/format.h>

#include "gridgame/errors.hpp"
#include "gridgame/format.hpp"

namespace gridgame {

namespace {

void chain_guard(const GameContext& ctx) {
  if (ctx.size() > kMaxChainNodes) {
    throw SizeGuardError(fmt::format("{} nodes exceeds the chain limit of {}", ctx.size(), kMaxChainNodes));
  }
}

// Every state reachable from state 0 following edges (forward) or their
// reverse (backward).
bool reaches_all(const Eigen::MatrixXd& transition, bool forward) {
  const Eigen::Index size = transition.rows();
  std::vector<bool> seen(static_cast<std::size_t>(size), false);
  std::deque<Eigen::Index> queue{0};
  seen[0] = true;
  Eigen::Index visited = 1;
  while (!queue.empty()) {
    const Eigen::Index x = queue.front();
    queue.pop_front();
    for (Eigen::Index y = 0; y < size; ++y) {
      const double weight = forward ? transition(x, y) : transition(y, x);
      if (weight > 0.0 && !seen[static_cast<std::size_t>(y)]) {
        seen[static_cast<std::size_t>(y)] = true;
        ++visited;
        queue.push_back(y);
      }
    }
  }
  return visited == size;
}

}  // namespace

Eigen::MatrixXd transition_matrix(const GameContext& ctx, double eta) {
  chain_guard(ctx);
  if (!std::isfinite(eta) || eta < 0.0) throw DomainError(fmt::format("eta must be finite and >= 0, got {}", eta));
  const std::size_t n = ctx.size();
  const auto states = static_cast<Eigen::Index>(std::size_t{1} << n);
  const double wake = 1.0 / static_cast<double>(n);
  Eigen::MatrixXd transition = Eigen::MatrixXd::Zero(states, states);
  for (Eigen::Index x = 0; x < states; ++x) {
    const Configuration cfg = Configuration::from_index(static_cast<std::uint64_t>(x), n);
    for (std::size_t i = 0; i < n; ++i) {
      const TypeDistribution dist = update_distribution(ctx, cfg, i, eta);
      const Eigen::Index bit = Eigen::Index{1} << i;
      transition(x, x & ~bit) += wake * dist.of(UnitType::M);
      transition(x, x | bit) += wake * dist.of(UnitType::C);
    }
  }
  return transition;
}

bool is_irreducible(const Eigen::MatrixXd& transition) {
  return reaches_all(transition, true) && reaches_all(transition, false);
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
  if (!is_irreducible(transition)) throw SingularChainError("transition matrix is reducible");
  const Eigen::Index size = transition.rows();
  // (P^T - I) pi = 0 with one balance row swapped for sum(pi) = 1.
  Eigen::MatrixXd system = transition.transpose() - Eigen::MatrixXd::Identity(size, size);
  system.row(size - 1).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(size - 1) = 1.0;
  Eigen::VectorXd pi = system.partialPivLu().solve(rhs);
  if (!pi.allFinite()) throw SingularChainError("stationary solve produced non-finite values");
  return pi;
}

Eigen::VectorXd stationary_by_power_iteration(const Eigen::MatrixXd& transition, double tolerance,
                                              std::size_t max_iterations) {
  const Eigen::Index size = transition.rows();
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Constant(size, 1.0 / static_cast<double>(size));
  for (std::size_t k = 0; k < max_iterations; ++k) {
    Eigen::RowVectorXd next = pi * transition;
    const double change = (next - pi).cwiseAbs().maxCoeff();
    pi = std::move(next);
    if (change < tolerance) break;
  }
  return pi.transpose() / pi.sum();
}

Eigen::VectorXd gibbs_distribution(const GameContext& ctx, double eta) {
  chain_guard(ctx);
  const std::size_t n = ctx.size();
  const auto states = static_cast<Eigen::Index>(std::size_t{1} << n);
  Eigen::VectorXd u(states);
  for (Eigen::Index x = 0; x < states; ++x) u(x) = potential(ctx, Configuration::from_index(static_cast<std::uint64_t>(x), n));
  Eigen::VectorXd weights = (eta * (u.array() - u.maxCoeff())).exp();
  return weights / weights.sum();
}

double total_variation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return 0.5 * (a - b).cwiseAbs().sum(); }

double detailed_balance_residual(const Eigen::MatrixXd& transition, const Eigen::VectorXd& pi) {
  const Eigen::MatrixXd flow = pi.asDiagonal() * transition;
  return (flow - flow.transpose()).cwiseAbs().maxCoeff();
}

double ChainModel::maximizer_mass() const {
  double mass = 0.0;
  for (std::size_t x = 0; x < maximizer.size(); ++x) {
    if (maximizer[x]) mass += stationary(static_cast<Eigen::Index>(x));
  }
  return mass;
}

std::vector<std::uint64_t> ChainModel::stationary_modes() const {
  const double top = stationary.maxCoeff();
  std::vector<std::uint64_t> modes;
  for (Eigen::Index x = 0; x < stationary.size(); ++x) {
    if (stationary(x) >= top * (1.0 - 1e-9)) modes.push_back(static_cast<std::uint64_t>(x));
  }
  return modes;
}

bool ChainModel::modes_match_maximizers() const {
  std::vector<std::uint64_t> best;
  for (std::size_t x = 0; x < maximizer.size(); ++x) {
    if (maximizer[x]) best.push_back(x);
  }
  return best == stationary_modes();
}

ChainModel build_chain(const GameContext& ctx, double eta) {
  ChainModel chain;
  chain.node_count = ctx.size();
  chain.eta = eta;
  chain.transition = transition_matrix(ctx, eta);
  chain.stationary = stationary_distribution(chain.transition);
  chain.gibbs = gibbs_distribution(ctx, eta);
  const std::size_t states = std::size_t{1} << chain.node_count;
  chain.potentials.resize(states);
  for (std::size_t x = 0; x < states; ++x) chain.potentials[x] = potential(ctx, Configuration::from_index(x, chain.node_count));
  const double best = *std::max_element(chain.potentials.begin(), chain.potentials.end());
  chain.maximizer.resize(states);
  for (std::size_t x = 0; x < states; ++x) chain.maximizer[x] = best - chain.potentials[x] <= kMaximizerTolerance;
  return chain;
}

GibbsComparison gibbs_comparison(const GameContext& ctx, double eta) {
  const Eigen::MatrixXd transition = transition_matrix(ctx, eta);
  GibbsComparison result;
  result.stationary = stationary_distribution(transition);
  result.gibbs = gibbs_distribution(ctx, eta);
  result.total_variation = total_variation(result.stationary, result.gibbs);
  result.detailed_balance_residual = detailed_balance_residual(transition, result.stationary);
  return result;
}

EmpiricalCheck empirical_frequency_check(const GameContext& ctx, double eta, std::uint64_t steps, std::uint64_t seed) {
  chain_guard(ctx);
  if (steps < 100'000) throw DomainError(fmt::format("empirical check needs at least 1e5 steps, got {}", steps));
  const auto burn_in = static_cast<std::uint64_t>(kBurnInFraction * static_cast<double>(steps));
  const std::vector<std::uint64_t> counts = visit_counts(ctx, Configuration::uniform(ctx.size(), UnitType::M),
                                                         TemperatureSchedule::constant_eta(eta), steps, burn_in, seed);
  EmpiricalCheck check;
  check.samples = steps - burn_in;
  check.empirical.resize(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t x = 0; x < counts.size(); ++x) {
    check.empirical(static_cast<Eigen::Index>(x)) = static_cast<double>(counts[x]) / static_cast<double>(check.samples);
  }
  check.stationary = stationary_distribution(transition_matrix(ctx, eta));
  check.tv_distance = total_variation(check.empirical, check.stationary);
  return check;
}

void write_distribution_csv(std::ostream& out, const ChainModel& chain) {
  out << "state_index,cfg_string,stationary_prob,gibbs_prob\n";
  for (Eigen::Index x = 0; x < chain.stationary.size(); ++x) {
    out << x << ',' << Configuration::from_index(static_cast<std::uint64_t>(x), chain.node_count).to_string() << ','
        << format_real(chain.stationary(x)) << ',' << format_real(chain.gibbs(x)) << '\n';
  }
}

}  // namespace gridgame
