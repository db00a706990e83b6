#include "gridgame/log_linear.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "gridgame/errors.hpp"
#include "gridgame/format.hpp"

namespace gridgame {

TemperatureSchedule TemperatureSchedule::linear_eta(double slope_divisor) {
  if (!std::isfinite(slope_divisor) || slope_divisor <= 0.0) {
    throw ValidationError(fmt::format("linear schedule needs c > 0, got {}", slope_divisor));
  }
  return {Kind::LinearEta, slope_divisor};
}

TemperatureSchedule TemperatureSchedule::constant_tau(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0) throw ValidationError(fmt::format("temperature must be > 0, got {}", tau));
  return {Kind::ConstantTau, tau};
}

TemperatureSchedule TemperatureSchedule::constant_eta(double eta) {
  if (!std::isfinite(eta) || eta < 0.0) throw ValidationError(fmt::format("eta must be >= 0, got {}", eta));
  return {Kind::ConstantEta, eta};
}

TemperatureSchedule TemperatureSchedule::parse(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ValidationError(fmt::format("bad schedule '{}' (expected linear:<c>, const-eta:<v> or const-tau:<v>)", text));
  }
  const std::string_view kind = text.substr(0, colon);
  const std::string_view number = text.substr(colon + 1);
  double value = 0.0;
  const auto [end, ec] = std::from_chars(number.data(), number.data() + number.size(), value);
  if (ec != std::errc{} || end != number.data() + number.size() || number.empty()) {
    throw ValidationError(fmt::format("bad schedule value in '{}'", text));
  }
  if (kind == "linear") return linear_eta(value);
  if (kind == "const-eta") return constant_eta(value);
  if (kind == "const-tau") return constant_tau(value);
  throw ValidationError(fmt::format("unknown schedule kind '{}'", kind));
}

double TemperatureSchedule::eta(std::uint64_t t) const {
  switch (kind_) {
    case Kind::LinearEta:
      return static_cast<double>(t) / parameter_;
    case Kind::ConstantTau:
      return 1.0 / parameter_;
    case Kind::ConstantEta:
      return parameter_;
  }
  return 0.0;
}

std::string TemperatureSchedule::to_string() const {
  switch (kind_) {
    case Kind::LinearEta:
      return fmt::format("linear:{}", parameter_);
    case Kind::ConstantTau:
      return fmt::format("const-tau:{}", parameter_);
    case Kind::ConstantEta:
      return fmt::format("const-eta:{}", parameter_);
  }
  return {};
}

std::size_t Rng::uniform_index(std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t draw = engine_();
  while (draw >= limit) draw = engine_();
  return static_cast<std::size_t>(draw % range);
}

double Rng::uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

std::array<double, 2> local_losses(const GameContext& ctx, const Configuration& cfg, std::size_t node) {
  if (node >= ctx.size()) throw ValidationError(fmt::format("node index {} out of range", node));
  return {local_loss(ctx, edge_costs(ctx, cfg.with(node, UnitType::M)), node),
          local_loss(ctx, edge_costs(ctx, cfg.with(node, UnitType::C)), node)};
}

TypeDistribution distribution_from_losses(const std::array<double, 2>& losses, double eta) {
  const double lowest = std::min(losses[0], losses[1]);
  const double w_machine = std::exp(-eta * (losses[0] - lowest));
  const double w_converter = std::exp(-eta * (losses[1] - lowest));
  const double total = w_machine + w_converter;
  return TypeDistribution{{w_machine / total, w_converter / total}};
}

TypeDistribution update_distribution(const GameContext& ctx, const Configuration& cfg, std::size_t node, double eta) {
  if (!std::isfinite(eta) || eta < 0.0) throw DomainError(fmt::format("eta must be finite and >= 0, got {}", eta));
  return distribution_from_losses(local_losses(ctx, cfg, node), eta);
}

namespace {

UnitType draw_type(const TypeDistribution& dist, Rng& rng) {
  return rng.uniform01() < dist.of(UnitType::M) ? UnitType::M : UnitType::C;
}

}  // namespace

StepResult step(const GameContext& ctx, const Configuration& cfg, std::uint64_t t, const TemperatureSchedule& schedule,
                Rng& rng) {
  const std::size_t unit = rng.uniform_index(ctx.size());
  const TypeDistribution dist = update_distribution(ctx, cfg, unit, schedule.eta(t));
  return {cfg.with(unit, draw_type(dist, rng)), unit};
}

std::optional<std::uint64_t> LearningTrace::first_hitting_time(double threshold) const {
  for (const TraceStep& s : steps) {
    if (s.potential >= threshold) return s.t;
  }
  return std::nullopt;
}

LearningTrace run(const GameContext& ctx, const Configuration& initial, const TemperatureSchedule& schedule,
                  std::uint64_t steps, std::uint64_t seed) {
  if (steps == 0) throw DomainError("a learning run needs at least one step");
  if (initial.size() != ctx.size()) {
    throw ValidationError(fmt::format("initial configuration has {} entries, network has {} nodes", initial.size(), ctx.size()));
  }
  LearningTrace trace;
  trace.seed = seed;
  trace.steps.reserve(steps);
  Rng rng(seed);
  Configuration cfg = initial;
  for (std::uint64_t t = 0; t < steps; ++t) {
    StepResult next = step(ctx, cfg, t, schedule, rng);
    cfg = std::move(next.cfg);
    const std::vector<double> p = net_injections(ctx.network(), cfg, ctx.damping());
    const std::vector<double> xi = edge_flows(ctx.network(), p);
    TraceStep rec;
    rec.t = t;
    rec.eta = schedule.eta(t);
    rec.unit = next.unit;
    rec.unit_id = ctx.network().nodes()[next.unit].id;
    rec.cfg = cfg;
    rec.potential = potential(ctx, cfg);
    rec.feasible = flow_feasibility(ctx.network(), xi, ctx.delta());
    trace.steps.push_back(std::move(rec));
  }
  trace.final_cfg = cfg;
  return trace;
}

BatchSummary batch_run(const GameContext& ctx, const Configuration& initial, const TemperatureSchedule& schedule,
                       std::uint64_t steps, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw DomainError("batch_run needs at least one seed");
  const GameReport report = enumerate_game(ctx);

  BatchSummary summary;
  summary.traces.reserve(seeds.size());
  std::size_t successes = 0;
  double potential_sum = 0.0;
  double hitting_sum = 0.0;
  for (std::uint64_t seed : seeds) {
    LearningTrace trace = run(ctx, initial, schedule, steps, seed);
    const bool ok = report.records[trace.final_cfg.index()].is_maximizer;
    successes += ok ? 1 : 0;
    potential_sum += trace.final_potential();
    if (auto hit = trace.first_hitting_time(kHitThreshold)) {
      hitting_sum += static_cast<double>(*hit);
      ++summary.hit_count;
    } else {
      hitting_sum += static_cast<double>(steps);
    }
    summary.success.push_back(ok);
    summary.traces.push_back(std::move(trace));
  }
  const auto count = static_cast<double>(seeds.size());
  summary.success_rate = static_cast<double>(successes) / count;
  summary.mean_final_potential = potential_sum / count;
  summary.mean_hitting_time = hitting_sum / count;
  return summary;
}

std::vector<std::uint64_t> visit_counts(const GameContext& ctx, const Configuration& initial,
                                        const TemperatureSchedule& schedule, std::uint64_t steps,
                                        std::uint64_t burn_in, std::uint64_t seed) {
  const std::size_t n = ctx.size();
  if (n > kMaxChainNodes) {
    throw SizeGuardError(fmt::format("{} nodes exceeds the chain table limit of {}", n, kMaxChainNodes));
  }
  if (initial.size() != n) throw ValidationError("initial configuration does not match the network");
  const std::size_t states = std::size_t{1} << n;

  // losses[(state * n + i) * 2 + type]
  std::vector<double> losses(states * n * 2);
  for (std::size_t s = 0; s < states; ++s) {
    const Configuration cfg = Configuration::from_index(s, n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto pair = local_losses(ctx, cfg, i);
      losses[(s * n + i) * 2] = pair[0];
      losses[(s * n + i) * 2 + 1] = pair[1];
    }
  }

  std::vector<std::uint64_t> counts(states, 0);
  Rng rng(seed);
  std::size_t state = initial.index();
  for (std::uint64_t t = 0; t < steps; ++t) {
    const std::size_t unit = rng.uniform_index(n);
    const std::size_t base = (state * n + unit) * 2;
    const TypeDistribution dist = distribution_from_losses({losses[base], losses[base + 1]}, schedule.eta(t));
    const UnitType type = draw_type(dist, rng);
    const std::size_t bit = std::size_t{1} << unit;
    state = type == UnitType::C ? (state | bit) : (state & ~bit);
    if (t >= burn_in) ++counts[state];
  }
  return counts;
}

void write_trace_csv(std::ostream& out, const LearningTrace& trace) {
  out << "t,eta,chosen_unit,cfg,potential,feasible\n";
  for (const TraceStep& s : trace.steps) {
    out << s.t << ',' << format_real(s.eta) << ',' << s.unit_id << ',' << s.cfg.to_string() << ','
        << format_real(s.potential) << ',' << s.feasible << '\n';
  }
}

}  // namespace gridgame
