#pragma once

// Synchronized steady state of a radial network for a given generation-type
// configuration. On a tree the edge flows follow from the injections alone,
// so a uniform susceptance drop only rescales the line loadings.

#include <span>
#include <vector>

#include "gridgame/network.hpp"

namespace gridgame {

/// Absolute tolerance on the sum of injections accepted by edge_flows.
inline constexpr double kPowerBalanceTolerance = 1e-9;

struct SteadyState {
  double omega0 = 0.0;              // synchronized frequency
  std::vector<double> injections;   // p_i = P0_i - omega0 * d_i
  std::vector<double> edge_flows;   // xi, with incidence * xi = p
  std::vector<double> sine_diffs;   // xi_e / (b_e - delta); may exceed 1 when infeasible
  std::vector<double> angle_diffs;  // arcsin(sine_diffs); empty when infeasible
  double delta = 0.0;
  bool feasible = false;
  double cohesiveness = 0.0;  // max_e |angle_diffs_e|, 0 when infeasible
};

/// omega0 = sum P0 / sum d_i, with d_i picked by the configuration.
double sync_frequency(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping);

std::vector<double> net_injections(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping);

/// Unique solution of incidence * xi = p on a tree, by repeated leaf
/// elimination. Throws ImbalanceError if |sum p| > kPowerBalanceTolerance.
std::vector<double> edge_flows(const PowerNetwork& net, std::span<const double> injections);

/// Throws DomainError unless 0 <= delta < min_e b_e.
void check_delta(const PowerNetwork& net, double delta);

/// True iff max_e |xi_e| / (b_e - delta) < 1.
bool flow_feasibility(const PowerNetwork& net, std::span<const double> flows, double delta);

SteadyState solve(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping, double delta = 0.0);

}  // namespace gridgame
