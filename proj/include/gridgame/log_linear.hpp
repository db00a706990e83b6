#pragma once

// Asynchronous log-linear learning: at every step one unit, drawn uniformly,
// wakes up and resamples its type with probability proportional to
// exp(-eta * weighted local cost).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gridgame/game.hpp"

namespace gridgame {

/// Inverse temperature eta(t) = 1 / tau(t).
class TemperatureSchedule {
 public:
  enum class Kind { LinearEta, ConstantTau, ConstantEta };

  /// eta(t) = t / slope_divisor.
  static TemperatureSchedule linear_eta(double slope_divisor);
  static TemperatureSchedule constant_tau(double tau);
  static TemperatureSchedule constant_eta(double eta);

  /// Accepts `linear:<c>`, `const-eta:<v>` and `const-tau:<v>`. Throws
  /// ValidationError on anything else or an out-of-domain value.
  static TemperatureSchedule parse(std::string_view text);

  double eta(std::uint64_t t) const;
  Kind kind() const { return kind_; }
  double parameter() const { return parameter_; }
  std::string to_string() const;

 private:
  TemperatureSchedule(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}
  Kind kind_;
  double parameter_;
};

/// Seedable 64-bit Mersenne Twister. Its output sequence is fixed by the
/// standard, and the derived draws below avoid implementation-defined
/// distributions, so traces agree across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n), by rejection.
  std::size_t uniform_index(std::size_t n);
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::mt19937_64 engine_;
};

/// Probabilities of the two types for the waking unit, indexed by UnitType.
struct TypeDistribution {
  std::array<double, 2> probability{0.5, 0.5};

  double of(UnitType type) const { return probability[static_cast<std::size_t>(type)]; }
};

/// Weighted local cost of `node` for each of its two types, others fixed.
std::array<double, 2> local_losses(const GameContext& ctx, const Configuration& cfg, std::size_t node);

/// Log-sum-exp evaluation of the update rule from the two local losses.
TypeDistribution distribution_from_losses(const std::array<double, 2>& losses, double eta);

/// Throws DomainError unless eta is finite and non-negative.
TypeDistribution update_distribution(const GameContext& ctx, const Configuration& cfg, std::size_t node, double eta);

struct StepResult {
  Configuration cfg;
  std::size_t unit = 0;  // dense index of the unit that woke up
};

/// One update at time t. Consumes the stream in a fixed order: first the
/// unit (uniform_index), then one uniform01 for the type, with M chosen when
/// the draw is below P(M).
StepResult step(const GameContext& ctx, const Configuration& cfg, std::uint64_t t, const TemperatureSchedule& schedule,
                Rng& rng);

struct TraceStep {
  std::uint64_t t = 0;
  double eta = 0.0;
  std::size_t unit = 0;
  std::int64_t unit_id = 0;
  Configuration cfg;  // after the update
  double potential = 0.0;
  bool feasible = false;
};

struct LearningTrace {
  std::vector<TraceStep> steps;
  std::uint64_t seed = 0;
  Configuration final_cfg;

  double final_potential() const { return steps.back().potential; }
  /// First t whose potential is >= threshold.
  std::optional<std::uint64_t> first_hitting_time(double threshold) const;
};

/// Potential level counted as "reached the optimum" in trace summaries.
inline constexpr double kHitThreshold = -1e-3;

/// Throws DomainError when steps == 0.
LearningTrace run(const GameContext& ctx, const Configuration& initial, const TemperatureSchedule& schedule,
                  std::uint64_t steps, std::uint64_t seed);

struct BatchSummary {
  double success_rate = 0.0;
  double mean_final_potential = 0.0;
  /// Mean first time the potential reaches kHitThreshold; runs that never
  /// do count as `steps`.
  double mean_hitting_time = 0.0;
  std::size_t hit_count = 0;
  std::vector<bool> success;
  std::vector<LearningTrace> traces;
};

/// Independent runs per seed. A run succeeds when its final configuration
/// is a potential maximizer (enumerate_game).
BatchSummary batch_run(const GameContext& ctx, const Configuration& initial, const TemperatureSchedule& schedule,
                       std::uint64_t steps, const std::vector<std::uint64_t>& seeds);

/// Largest network for which 2^n-state tables are built.
inline constexpr std::size_t kMaxChainNodes = 12;

/// Visit counts per state index over steps [burn_in, steps), from the same
/// chain and random stream as run(). Uses a precomputed loss table, so it
/// is limited to kMaxChainNodes nodes.
std::vector<std::uint64_t> visit_counts(const GameContext& ctx, const Configuration& initial,
                                        const TemperatureSchedule& schedule, std::uint64_t steps,
                                        std::uint64_t burn_in, std::uint64_t seed);

/// `t,eta,chosen_unit,cfg,potential,feasible`.
void write_trace_csv(std::ostream& out, const LearningTrace& trace);

}  // namespace gridgame
