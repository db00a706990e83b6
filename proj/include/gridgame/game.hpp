#pragma once

// The allocation game: each generation unit is a player choosing its type,
// paid by how well the steady-state line loadings next to it match the
// loadings of the (unknown) optimal configuration.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "gridgame/network.hpp"
#include "gridgame/steady_state.hpp"

namespace gridgame {

/// Exhaustive routines (enumeration, exactness check) refuse larger networks.
inline constexpr std::size_t kMaxEnumerationNodes = 20;
/// Two utilities closer than this are treated as a tie.
inline constexpr double kTieTolerance = 1e-12;
/// A configuration is a maximizer when within this of the best potential.
inline constexpr double kMaximizerTolerance = 1e-9;

/// Network, damping, targets and the uniform susceptance drop that weights
/// the game and perturbs the steady state.
class GameContext {
 public:
  /// Throws DomainError / ValidationError on a bad delta or target length.
  GameContext(PowerNetwork net, DampingParams damping, TargetAngles targets, double delta = 0.0);

  const PowerNetwork& network() const { return net_; }
  const DampingParams& damping() const { return damping_; }
  const TargetAngles& targets() const { return targets_; }
  double delta() const { return delta_; }
  std::size_t size() const { return net_.node_count(); }

  /// Perturbed weight b_e - delta.
  double weight(std::size_t edge) const { return net_.susceptance(edge) - delta_; }
  double target_sine(std::size_t edge) const { return target_sines_[edge]; }

  GameContext with_delta(double delta) const { return GameContext(net_, damping_, targets_, delta); }

 private:
  PowerNetwork net_;
  DampingParams damping_;
  TargetAngles targets_;
  double delta_;
  std::vector<double> target_sines_;
};

/// |sin theta_e - sin theta*_e| for every edge, from one steady-state solve.
/// On an overloaded line (|xi_e| >= b_e - delta) the sine is clamped to
/// sign(xi_e).
std::vector<double> edge_costs(const GameContext& ctx, const Configuration& cfg);
double edge_cost(const GameContext& ctx, const Configuration& cfg, std::size_t edge);

/// u_i = -sum over lines at i of (b_e - delta) * cost_e.
double utility(const GameContext& ctx, const Configuration& cfg, std::size_t node);

/// Weighted cost seen by node i; the exponent of the log-linear rule.
/// Equal to -utility.
double local_loss(const GameContext& ctx, std::span<const double> costs, std::size_t node);

/// U = -1/2 sum_e (b_e - delta) * cost_e. Never positive; zero exactly when
/// every line loading matches its target.
double potential(const GameContext& ctx, const Configuration& cfg);
double potential_from_costs(const GameContext& ctx, std::span<const double> costs);

/// max over profiles x, players i and deviations y_i of
/// |u_i(y_i, x_-i) - u_i(x) - (U(y_i, x_-i) - U(x))|. Zero for an exact
/// potential game.
double exactness_check(const GameContext& ctx);

/// argmax over {M, C} of u_i with the rest of cfg held fixed; both types on
/// a tie.
std::vector<UnitType> best_responses(const GameContext& ctx, const Configuration& cfg, std::size_t node);

struct GameRecord {
  Configuration cfg;
  double potential = 0.0;
  bool is_nash = false;
  bool is_maximizer = false;
  bool feasible = false;
};

struct GameReport {
  std::vector<GameRecord> records;  // indexed by Configuration::index()
  double max_potential = 0.0;

  std::size_t maximizer_count() const;
  std::size_t nash_count() const;
  std::vector<Configuration> maximizers() const;
};

/// Every configuration with its potential, Nash flag and maximizer flag.
GameReport enumerate_game(const GameContext& ctx);
void write_game_csv(std::ostream& out, const GameReport& report);

/// Largest |theta_e(cfg) - targets_e| over edges (unperturbed network);
/// +inf when cfg is infeasible.
double angle_mismatch(const PowerNetwork& net, const DampingParams& damping, const TargetAngles& targets,
                      const Configuration& cfg);

/// Reads the optimal damping arrangement off the targets (up to the unknown
/// frequency) and classifies each unit by its damping ratio; falls back to
/// exhaustive search. Throws NoMatchError if no configuration comes within
/// 1e-2 rad of the targets.
Configuration recover_optimal_config(const PowerNetwork& net, const DampingParams& damping,
                                     const TargetAngles& targets);

}  // namespace gridgame
