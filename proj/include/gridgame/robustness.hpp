#pragma once

// Robustness of the allocation against a uniform drop delta in every line
// susceptance. A configuration stays admissible while, at every node, the
// power it pushes through the weakened lines stays within alpha of the
// optimal injection:
//
//   | sum_e I_ie (b_e - delta) sin(theta_e) - sum_e I_ie b_e sin(theta*_e) | < alpha
//
// The sines theta_e are those of the unperturbed steady state (sin theta_e =
// xi_e / b_e), held fixed while delta varies. Writing A_i for the value at
// delta = 0 and B_i = sum_e I_ie sin(theta_e), the node deviation is
// |A_i - delta * B_i|, linear in delta.
//
// Only the network, damping and targets of the context are used; its own
// delta is ignored.

#include <iosfwd>
#include <vector>

#include "gridgame/game.hpp"

namespace gridgame {

struct NodeTerms {
  std::vector<double> offset;    // A_i
  std::vector<double> sine_sum;  // B_i
};

NodeTerms node_terms(const GameContext& ctx, const Configuration& cfg);

/// Per-node |sum_e I_ie (b_e - delta) sin theta_e - sum_e I_ie b_e sin theta*_e|.
/// Throws DomainError unless 0 <= delta < min_e b_e.
std::vector<double> power_deviation(const GameContext& ctx, const Configuration& cfg, double delta);

/// max_i power_deviation < alpha. Throws DomainError if alpha <= 0.
bool in_feasibility_region(const GameContext& ctx, const Configuration& cfg, double delta, double alpha);

/// min over nodes with B_i > 0 of (alpha + A_i) / B_i; +inf when no node
/// qualifies.
double margin_closed_form(const GameContext& ctx, const Configuration& cfg, double alpha);

/// Per-node drop at which |A_i - delta B_i| reaches alpha:
/// (alpha + A_i) / B_i for B_i > 0, (A_i - alpha) / B_i for B_i < 0, +inf
/// for B_i = 0.
std::vector<double> node_crossings(const GameContext& ctx, const Configuration& cfg, double alpha);

/// Smallest drop leaving the region (min of node_crossings). Throws
/// PreconditionError if the configuration is already outside at delta = 0.
double margin_exact(const GameContext& ctx, const Configuration& cfg, double alpha);

/// max over all configurations and nodes of |A_i|; alpha must exceed it for
/// every configuration to start inside the region.
double calibrate_alpha(const GameContext& ctx);

/// Largest drop keeping the flows feasible: min_e (b_e - |xi_e|), capped at
/// min_e b_e. Non-positive when the configuration is infeasible at delta = 0.
double delta_flow_limit(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping);

struct MarginRecord {
  Configuration cfg;
  double margin_closed_form = 0.0;
  double margin_exact = 0.0;  // 0 when the configuration starts outside the region
  double delta_flow_limit = 0.0;
  double effective_margin = 0.0;  // min(margin_exact, delta_flow_limit, min_e b_e)
};

struct RobustnessReport {
  double alpha = 0.0;
  std::vector<MarginRecord> records;  // indexed by Configuration::index()
  double network_margin = 0.0;        // min over configurations of margin_closed_form
  double network_margin_exact = 0.0;  // min over configurations of margin_exact
  double network_effective_margin = 0.0;
  double calibrated_alpha_floor = 0.0;
};

RobustnessReport robustness_report(const GameContext& ctx, double alpha);

/// `cfg,margin_closed_form,margin_exact,delta_flow_limit,effective_margin`.
void write_robustness_csv(std::ostream& out, const RobustnessReport& report);

}  // namespace gridgame
