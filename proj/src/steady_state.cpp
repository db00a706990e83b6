#include "gridgame/steady_state.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "gridgame/errors.hpp"

namespace gridgame {

namespace {

void check_size(const PowerNetwork& net, const Configuration& cfg) {
  if (cfg.size() != net.node_count()) {
    throw ValidationError(
        fmt::format("configuration has {} entries, network has {} nodes", cfg.size(), net.node_count()));
  }
}

}  // namespace

double sync_frequency(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping) {
  check_size(net, cfg);
  double total_damping = 0.0;
  for (std::size_t i = 0; i < cfg.size(); ++i) total_damping += damping.of(cfg[i]);
  return net.total_input() / total_damping;
}

std::vector<double> net_injections(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping) {
  const double omega0 = sync_frequency(net, cfg, damping);
  std::vector<double> p(net.node_count());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = net.p0(i) - omega0 * damping.of(cfg[i]);
  return p;
}

std::vector<double> edge_flows(const PowerNetwork& net, std::span<const double> injections) {
  const std::size_t n = net.node_count();
  if (injections.size() != n) {
    throw ValidationError(fmt::format("{} injections for {} nodes", injections.size(), n));
  }
  double total = 0.0;
  for (double v : injections) total += v;
  if (std::abs(total) > kPowerBalanceTolerance) {
    throw ImbalanceError(fmt::format("injections sum to {:.3e}; no flow solution exists on a tree", total));
  }

  // Peel leaves: a leaf's only edge must carry its whole (accumulated)
  // injection, which is then handed on to the neighbor.
  std::vector<double> residual(injections.begin(), injections.end());
  std::vector<std::size_t> degree(n);
  for (std::size_t v = 0; v < n; ++v) degree[v] = net.incident(v).size();
  std::vector<bool> edge_done(net.edge_count(), false);
  std::vector<std::size_t> leaves;
  for (std::size_t v = 0; v < n; ++v) {
    if (degree[v] == 1) leaves.push_back(v);
  }

  std::vector<double> xi(net.edge_count(), 0.0);
  std::size_t remaining = net.edge_count();
  while (remaining > 0) {
    const std::size_t v = leaves.back();
    leaves.pop_back();
    if (degree[v] != 1) continue;
    for (const Incidence& inc : net.incident(v)) {
      if (edge_done[inc.edge]) continue;
      // incidence(v, e) * xi_e = residual_v
      xi[inc.edge] = inc.sign * residual[v];
      residual[inc.neighbor] += residual[v];
      residual[v] = 0.0;
      edge_done[inc.edge] = true;
      --remaining;
      degree[v] = 0;
      if (--degree[inc.neighbor] == 1) leaves.push_back(inc.neighbor);
      break;
    }
  }
  return xi;
}

void check_delta(const PowerNetwork& net, double delta) {
  if (!std::isfinite(delta) || delta < 0.0 || delta >= net.min_susceptance()) {
    throw DomainError(
        fmt::format("susceptance drop {} outside [0, {}) (smallest line susceptance)", delta, net.min_susceptance()));
  }
}

bool flow_feasibility(const PowerNetwork& net, std::span<const double> flows, double delta) {
  check_delta(net, delta);
  for (std::size_t e = 0; e < flows.size(); ++e) {
    if (std::abs(flows[e]) / (net.susceptance(e) - delta) >= 1.0) return false;
  }
  return true;
}

SteadyState solve(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping, double delta) {
  check_delta(net, delta);
  SteadyState state;
  state.delta = delta;
  state.omega0 = sync_frequency(net, cfg, damping);
  state.injections = net_injections(net, cfg, damping);
  state.edge_flows = edge_flows(net, state.injections);
  state.sine_diffs.resize(net.edge_count());
  for (std::size_t e = 0; e < net.edge_count(); ++e) {
    state.sine_diffs[e] = state.edge_flows[e] / (net.susceptance(e) - delta);
  }
  state.feasible = flow_feasibility(net, state.edge_flows, delta);
  if (state.feasible) {
    state.angle_diffs.resize(net.edge_count());
    for (std::size_t e = 0; e < net.edge_count(); ++e) {
      state.angle_diffs[e] = std::asin(state.sine_diffs[e]);
      state.cohesiveness = std::max(state.cohesiveness, std::abs(state.angle_diffs[e]));
    }
  }
  return state;
}

}  // namespace gridgame
