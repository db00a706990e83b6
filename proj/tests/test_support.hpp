#pragma once

// Shared generators and independent reference computations for the tests.
// Nothing here calls into the code path it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "gridgame/game.hpp"
#include "gridgame/network.hpp"
#include "gridgame/steady_state.hpp"

namespace gridgame::testing {

struct RandomInstance {
  PowerNetwork network;
  DampingParams damping;
  Configuration realized;  // configuration whose angles became the targets
  TargetAngles targets;

  GameContext context(double delta = 0.0) const { return GameContext(network, damping, targets, delta); }
};

/// Random labelled tree: node k > 0 hangs off a uniformly chosen earlier
/// node, orientation is a coin flip, ids are shuffled and sparse.
inline PowerNetwork random_tree(std::size_t n, std::mt19937_64& gen, double b_low = 5.0, double b_high = 16.0) {
  std::uniform_real_distribution<double> p0(0.3, 1.0);
  std::uniform_real_distribution<double> b(b_low, b_high);
  std::bernoulli_distribution flip(0.5);
  std::vector<std::int64_t> ids(n);
  std::iota(ids.begin(), ids.end(), 1);
  for (auto& id : ids) id = id * 7 + 3;
  std::shuffle(ids.begin(), ids.end(), gen);

  std::vector<Node> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back({ids[i], p0(gen)});
  std::vector<EdgeSpec> edges;
  for (std::size_t k = 1; k < n; ++k) {
    std::uniform_int_distribution<std::size_t> parent(0, k - 1);
    std::int64_t a = ids[k];
    std::int64_t c = ids[parent(gen)];
    if (flip(gen)) std::swap(a, c);
    edges.push_back({a, c, b(gen)});
  }
  std::shuffle(edges.begin(), edges.end(), gen);
  return PowerNetwork(std::move(nodes), std::move(edges));
}

inline Configuration random_configuration(std::size_t n, std::mt19937_64& gen) {
  std::uniform_int_distribution<std::uint64_t> pick(0, (std::uint64_t{1} << n) - 1);
  return Configuration::from_index(pick(gen), n);
}

/// Random tree whose targets are the realized angles of a random
/// configuration, so that configuration attains potential 0.
inline RandomInstance random_instance(std::size_t n, std::mt19937_64& gen) {
  const DampingParams damping{25.0, 15.0};
  for (;;) {
    PowerNetwork net = random_tree(n, gen);
    Configuration cfg = random_configuration(n, gen);
    const SteadyState state = solve(net, cfg, damping);
    if (!state.feasible) continue;
    return RandomInstance{std::move(net), damping, std::move(cfg), TargetAngles{state.angle_diffs}};
  }
}

/// Minimum-norm solution of incidence * xi = p by complete orthogonal
/// decomposition.
inline std::vector<double> dense_flows(const PowerNetwork& net, const std::vector<double>& p) {
  const Eigen::MatrixXd inc = incidence(net);
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(p.data(), static_cast<Eigen::Index>(p.size()));
  const Eigen::VectorXd xi = inc.completeOrthogonalDecomposition().solve(rhs);
  return {xi.data(), xi.data() + xi.size()};
}

/// Region test straight from the definition, with the incidence matrix and
/// the unperturbed steady-state sines; valid for any delta.
inline double max_deviation_oracle(const GameContext& ctx, const Configuration& cfg, double delta) {
  const PowerNetwork& net = ctx.network();
  const SteadyState state = solve(net, cfg, ctx.damping(), 0.0);
  const Eigen::MatrixXd inc = incidence(net);
  const auto m = static_cast<Eigen::Index>(net.edge_count());
  Eigen::VectorXd perturbed(m);
  Eigen::VectorXd optimal(m);
  for (Eigen::Index e = 0; e < m; ++e) {
    const double b = net.susceptance(static_cast<std::size_t>(e));
    perturbed(e) = (b - delta) * state.sine_diffs[static_cast<std::size_t>(e)];
    optimal(e) = b * std::sin(ctx.targets().theta[static_cast<std::size_t>(e)]);
  }
  return (inc * (perturbed - optimal)).cwiseAbs().maxCoeff();
}

/// Bisection for the first delta where max_deviation_oracle reaches alpha,
/// assuming inside at 0 and outside at `high`.
inline double bisect_margin(const GameContext& ctx, const Configuration& cfg, double alpha, double high) {
  double low = 0.0;
  for (int k = 0; k < 200 && high - low > 1e-13 * std::max(1.0, high); ++k) {
    const double mid = 0.5 * (low + high);
    (max_deviation_oracle(ctx, cfg, mid) < alpha ? low : high) = mid;
  }
  return 0.5 * (low + high);
}

}  // namespace gridgame::testing
