#include "gridgame/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "gridgame/errors.hpp"
#include "gridgame/format.hpp"

namespace gridgame {

GameContext::GameContext(PowerNetwork net, DampingParams damping, TargetAngles targets, double delta)
    : net_(std::move(net)), damping_(damping), targets_(std::move(targets)), delta_(delta) {
  damping_.validate();
  targets_.validate(net_.edge_count());
  check_delta(net_, delta_);
  target_sines_.reserve(targets_.theta.size());
  for (double theta : targets_.theta) target_sines_.push_back(std::sin(theta));
}

namespace {

std::vector<double> costs_from_flows(const GameContext& ctx, std::span<const double> xi) {
  std::vector<double> costs(xi.size());
  for (std::size_t e = 0; e < xi.size(); ++e) {
    const double sine = std::clamp(xi[e] / ctx.weight(e), -1.0, 1.0);
    costs[e] = std::abs(sine - ctx.target_sine(e));
  }
  return costs;
}

}  // namespace

std::vector<double> edge_costs(const GameContext& ctx, const Configuration& cfg) {
  const std::vector<double> p = net_injections(ctx.network(), cfg, ctx.damping());
  return costs_from_flows(ctx, edge_flows(ctx.network(), p));
}

double edge_cost(const GameContext& ctx, const Configuration& cfg, std::size_t edge) {
  if (edge >= ctx.network().edge_count()) throw ValidationError(fmt::format("edge index {} out of range", edge));
  return edge_costs(ctx, cfg)[edge];
}

double local_loss(const GameContext& ctx, std::span<const double> costs, std::size_t node) {
  double loss = 0.0;
  for (const Incidence& inc : ctx.network().incident(node)) loss += ctx.weight(inc.edge) * costs[inc.edge];
  return loss;
}

double utility(const GameContext& ctx, const Configuration& cfg, std::size_t node) {
  if (node >= ctx.size()) throw ValidationError(fmt::format("node index {} out of range", node));
  return -local_loss(ctx, edge_costs(ctx, cfg), node);
}

double potential_from_costs(const GameContext& ctx, std::span<const double> costs) {
  double sum = 0.0;
  for (std::size_t e = 0; e < costs.size(); ++e) sum += ctx.weight(e) * costs[e];
  return -0.5 * sum;
}

double potential(const GameContext& ctx, const Configuration& cfg) {
  return potential_from_costs(ctx, edge_costs(ctx, cfg));
}

namespace {

void enumeration_guard(const GameContext& ctx) {
  if (ctx.size() > kMaxEnumerationNodes) {
    throw SizeGuardError(
        fmt::format("{} nodes exceeds the enumeration limit of {}", ctx.size(), kMaxEnumerationNodes));
  }
}

// Potential and every player's utility for all 2^n profiles.
struct ProfileTable {
  std::size_t n = 0;
  std::vector<double> potential;
  std::vector<double> utilities;  // [index * n + i]
  std::vector<bool> feasible;

  explicit ProfileTable(const GameContext& ctx) : n(ctx.size()) {
    const std::size_t count = std::size_t{1} << n;
    potential.resize(count);
    utilities.resize(count * n);
    feasible.resize(count);
    for (std::size_t idx = 0; idx < count; ++idx) {
      const Configuration cfg = Configuration::from_index(idx, n);
      const std::vector<double> p = net_injections(ctx.network(), cfg, ctx.damping());
      const std::vector<double> xi = edge_flows(ctx.network(), p);
      feasible[idx] = flow_feasibility(ctx.network(), xi, ctx.delta());
      const std::vector<double> costs = costs_from_flows(ctx, xi);
      potential[idx] = potential_from_costs(ctx, costs);
      for (std::size_t i = 0; i < n; ++i) utilities[idx * n + i] = -local_loss(ctx, costs, i);
    }
  }

  double utility(std::size_t idx, std::size_t i) const { return utilities[idx * n + i]; }
};

}  // namespace

double exactness_check(const GameContext& ctx) {
  enumeration_guard(ctx);
  const ProfileTable table(ctx);
  double worst = 0.0;
  for (std::size_t idx = 0; idx < table.potential.size(); ++idx) {
    for (std::size_t i = 0; i < table.n; ++i) {
      const std::size_t flipped = idx ^ (std::size_t{1} << i);
      const double du = table.utility(flipped, i) - table.utility(idx, i);
      const double dU = table.potential[flipped] - table.potential[idx];
      worst = std::max(worst, std::abs(du - dU));
    }
  }
  return worst;
}

std::vector<UnitType> best_responses(const GameContext& ctx, const Configuration& cfg, std::size_t node) {
  const double u_machine = utility(ctx, cfg.with(node, UnitType::M), node);
  const double u_converter = utility(ctx, cfg.with(node, UnitType::C), node);
  if (std::abs(u_machine - u_converter) <= kTieTolerance) return {UnitType::M, UnitType::C};
  return {u_machine > u_converter ? UnitType::M : UnitType::C};
}

std::size_t GameReport::maximizer_count() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const GameRecord& r) { return r.is_maximizer; }));
}

std::size_t GameReport::nash_count() const {
  return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const GameRecord& r) { return r.is_nash; }));
}

std::vector<Configuration> GameReport::maximizers() const {
  std::vector<Configuration> out;
  for (const GameRecord& r : records) {
    if (r.is_maximizer) out.push_back(r.cfg);
  }
  return out;
}

GameReport enumerate_game(const GameContext& ctx) {
  enumeration_guard(ctx);
  const ProfileTable table(ctx);
  GameReport report;
  report.max_potential = *std::max_element(table.potential.begin(), table.potential.end());
  report.records.reserve(table.potential.size());
  for (std::size_t idx = 0; idx < table.potential.size(); ++idx) {
    GameRecord rec;
    rec.cfg = Configuration::from_index(idx, table.n);
    rec.potential = table.potential[idx];
    rec.feasible = table.feasible[idx];
    rec.is_maximizer = report.max_potential - rec.potential <= kMaximizerTolerance;
    rec.is_nash = true;
    for (std::size_t i = 0; i < table.n && rec.is_nash; ++i) {
      const std::size_t flipped = idx ^ (std::size_t{1} << i);
      rec.is_nash = table.utility(idx, i) >= table.utility(flipped, i) - kTieTolerance;
    }
    report.records.push_back(std::move(rec));
  }
  return report;
}

void write_game_csv(std::ostream& out, const GameReport& report) {
  out << "cfg,potential,is_nash,is_maximizer,feasible\n";
  for (const GameRecord& r : report.records) {
    out << r.cfg.to_string() << ',' << format_real(r.potential) << ',' << r.is_nash << ',' << r.is_maximizer << ','
        << r.feasible << '\n';
  }
}

double angle_mismatch(const PowerNetwork& net, const DampingParams& damping, const TargetAngles& targets,
                      const Configuration& cfg) {
  const SteadyState state = solve(net, cfg, damping, 0.0);
  if (!state.feasible) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t e = 0; e < state.angle_diffs.size(); ++e) {
    worst = std::max(worst, std::abs(state.angle_diffs[e] - targets.theta[e]));
  }
  return worst;
}

namespace {

constexpr double kRecoveryTolerance = 1e-2;

}  // namespace

Configuration recover_optimal_config(const PowerNetwork& net, const DampingParams& damping,
                                     const TargetAngles& targets) {
  damping.validate();
  targets.validate(net.edge_count());
  const std::size_t n = net.node_count();

  // q_i = P0_i - sum_e I_ie b_e sin(theta*_e) = omega0 * d*_i. The unknown
  // omega0 cancels in ratios against the smallest |q|, which belongs to the
  // less damped type.
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) {
    double outflow = 0.0;
    for (const Incidence& inc : net.incident(i)) {
      outflow += inc.sign * net.susceptance(inc.edge) * std::sin(targets.theta[inc.edge]);
    }
    q[i] = net.p0(i) - outflow;
  }
  const double reference =
      *std::min_element(q.begin(), q.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
  if (reference != 0.0 && damping.machine != damping.converter) {
    const UnitType low = damping.machine < damping.converter ? UnitType::M : UnitType::C;
    const double spread = std::max(damping.machine, damping.converter) / std::min(damping.machine, damping.converter);
    std::vector<UnitType> types(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ratio = q[i] / reference;
      types[i] = std::abs(ratio - spread) < std::abs(ratio - 1.0) ? other(low) : low;
    }
    Configuration candidate(std::move(types));
    if (angle_mismatch(net, damping, targets, candidate) <= kRecoveryTolerance) return candidate;
  }

  if (n > kMaxEnumerationNodes) {
    throw NoMatchError("damping-ratio classification failed and the network is too large to search");
  }
  Configuration best;
  double best_mismatch = std::numeric_limits<double>::infinity();
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
    Configuration cfg = Configuration::from_index(idx, n);
    const double mismatch = angle_mismatch(net, damping, targets, cfg);
    if (mismatch < best_mismatch) {
      best_mismatch = mismatch;
      best = std::move(cfg);
    }
  }
  if (!(best_mismatch <= kRecoveryTolerance)) {
    throw NoMatchError(fmt::format("no configuration matches the targets (best mismatch {:.3e} rad)", best_mismatch));
  }
  return best;
}

}  // namespace gridgame
