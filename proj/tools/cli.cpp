#include "cli.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "gridgame/errors.hpp"
#include "gridgame/exact_oracle.hpp"
#include "gridgame/format.hpp"
#include "gridgame/game.hpp"
#include "gridgame/log_linear.hpp"
#include "gridgame/network.hpp"
#include "gridgame/robustness.hpp"
#include "gridgame/steady_state.hpp"

namespace gridgame::cli {

namespace {

using json = nlohmann::ordered_json;

// Values printed next to the computed ones by `margin`.
constexpr double kReferenceAlphaFloor = 0.8142;
constexpr double kReferenceNetworkMargin = 0.4723;

struct Options {
  std::string network = "paper6";
  double delta = 0.0;
  std::string out = "-";
  std::string summary;
  std::uint64_t seed = 1;
  std::optional<double> damping_m;
  std::optional<double> damping_c;
  std::string target_config;

  std::string config;
  bool strict = false;

  std::string schedule = "linear:5";
  std::uint64_t steps = 300;
  std::string initial;
  std::uint64_t batch = 0;

  double alpha = 1.5;

  std::vector<double> etas{0.0, 1.0, 5.0, 20.0};
};

json real(double v) { return std::isfinite(v) ? json(v) : json(format_real(v)); }

json reals(const std::vector<double>& v) {
  json a = json::array();
  for (double x : v) a.push_back(real(x));
  return a;
}

// Writes to `fallback` for "-", otherwise to the named file.
void emit(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& body) {
  if (path == "-") {
    body(fallback);
    return;
  }
  std::ofstream file(path);
  if (!file) throw ValidationError(fmt::format("cannot open {} for writing", path));
  body(file);
}

NetworkDocument load(const Options& opt) {
  NetworkDocument doc = opt.network == "paper6" ? paper6_fixture() : load_document_file(opt.network);
  if (opt.damping_m) doc.damping.machine = *opt.damping_m;
  if (opt.damping_c) doc.damping.converter = *opt.damping_c;
  doc.damping.validate();
  if (!opt.target_config.empty()) {
    const Configuration cfg = Configuration::parse(opt.target_config, doc.network.node_count());
    const SteadyState state = solve(doc.network, cfg, doc.damping);
    if (!state.feasible) throw ValidationError(fmt::format("target configuration {} is infeasible", cfg.to_string()));
    doc.targets = TargetAngles{state.angle_diffs};
  }
  return doc;
}

GameContext game_context(const Options& opt) {
  NetworkDocument doc = load(opt);
  if (!doc.targets) throw ValidationError("network has no target angles; pass --target-config");
  return GameContext(std::move(doc.network), doc.damping, std::move(*doc.targets), opt.delta);
}

int cmd_solve(const Options& opt, std::ostream& out, std::ostream& err) {
  const NetworkDocument doc = load(opt);
  const Configuration cfg = Configuration::parse(opt.config, doc.network.node_count());
  const SteadyState state = solve(doc.network, cfg, doc.damping, opt.delta);
  json report{{"config", cfg.to_string()},
              {"delta", opt.delta},
              {"omega0", state.omega0},
              {"injections", reals(state.injections)},
              {"edge_flows", reals(state.edge_flows)},
              {"sine_diffs", reals(state.sine_diffs)},
              {"angle_diffs", state.feasible ? reals(state.angle_diffs) : json(nullptr)},
              {"feasible", state.feasible},
              {"cohesiveness", real(state.cohesiveness)}};
  emit(opt.out, out, [&](std::ostream& s) { s << report.dump(2) << '\n'; });
  if (!state.feasible) {
    fmt::print(err, "configuration {} is infeasible (max |xi|/(b - delta) = {})\n", cfg.to_string(),
               format_real(state.cohesiveness));
    if (opt.strict) return kInfeasible;
  }
  return kOk;
}

void write_summary(const Options& opt, std::ostream& out, const json& summary) {
  if (opt.summary.empty()) return;
  emit(opt.summary, out, [&](std::ostream& s) { s << summary.dump(2) << '\n'; });
}

int cmd_learn(const Options& opt, std::ostream& out, std::ostream& err) {
  const GameContext ctx = game_context(opt);
  const TemperatureSchedule schedule = TemperatureSchedule::parse(opt.schedule);
  const Configuration initial = opt.initial.empty() ? Configuration::uniform(ctx.size(), UnitType::M)
                                                    : Configuration::parse(opt.initial, ctx.size());
  json summary{{"schedule", schedule.to_string()}, {"steps", opt.steps}, {"initial", initial.to_string()},
               {"delta", opt.delta}};

  if (opt.batch > 0) {
    std::vector<std::uint64_t> seeds;
    for (std::uint64_t k = 0; k < opt.batch; ++k) seeds.push_back(opt.seed + k);
    const BatchSummary batch = batch_run(ctx, initial, schedule, opt.steps, seeds);
    emit(opt.out, out, [&](std::ostream& s) {
      s << "seed,final_cfg,final_potential,first_hitting_time,success\n";
      for (std::size_t k = 0; k < seeds.size(); ++k) {
        const LearningTrace& trace = batch.traces[k];
        const auto hit = trace.first_hitting_time(kHitThreshold);
        s << seeds[k] << ',' << trace.final_cfg.to_string() << ',' << format_real(trace.final_potential()) << ','
          << (hit ? std::to_string(*hit) : std::string()) << ',' << (batch.success[k] ? 1 : 0) << '\n';
      }
    });
    summary["seeds"] = {opt.seed, opt.seed + opt.batch - 1};
    summary["success_rate"] = batch.success_rate;
    summary["mean_final_potential"] = batch.mean_final_potential;
    summary["mean_hitting_time"] = batch.mean_hitting_time;
    summary["hit_count"] = batch.hit_count;
    fmt::print(err, "success rate {} over {} runs, mean hitting time {}\n", format_real(batch.success_rate),
               seeds.size(), format_real(batch.mean_hitting_time));
    write_summary(opt, out, summary);
    return kOk;
  }

  const LearningTrace trace = run(ctx, initial, schedule, opt.steps, opt.seed);
  emit(opt.out, out, [&](std::ostream& s) { write_trace_csv(s, trace); });
  const auto hit = trace.first_hitting_time(kHitThreshold);
  summary["seed"] = opt.seed;
  summary["final_cfg"] = trace.final_cfg.to_string();
  summary["final_potential"] = trace.final_potential();
  summary["first_hitting_time"] = hit ? json(*hit) : json(nullptr);
  if (ctx.size() <= kMaxEnumerationNodes) {
    summary["success"] = enumerate_game(ctx).records[trace.final_cfg.index()].is_maximizer;
  }
  fmt::print(err, "final {} with potential {}\n", trace.final_cfg.to_string(), format_real(trace.final_potential()));
  write_summary(opt, out, summary);
  return kOk;
}

int cmd_enumerate(const Options& opt, std::ostream& out, std::ostream& err) {
  const GameContext ctx = game_context(opt);
  const GameReport report = enumerate_game(ctx);
  emit(opt.out, out, [&](std::ostream& s) { write_game_csv(s, report); });
  json maximizers = json::array();
  for (const Configuration& cfg : report.maximizers()) maximizers.push_back(cfg.to_string());
  json summary{{"delta", opt.delta},
               {"max_potential", report.max_potential},
               {"maximizer_count", report.maximizer_count()},
               {"nash_count", report.nash_count()},
               {"maximizers", maximizers}};
  try {
    summary["recovered_optimum"] = recover_optimal_config(ctx.network(), ctx.damping(), ctx.targets()).to_string();
  } catch (const NoMatchError& e) {
    summary["recovered_optimum"] = nullptr;
    fmt::print(err, "{}\n", e.what());
  }
  fmt::print(err, "maximizers: {} (max potential {}), nash equilibria: {}\n", report.maximizer_count(),
             format_real(report.max_potential), report.nash_count());
  write_summary(opt, out, summary);
  return kOk;
}

int cmd_margin(const Options& opt, std::ostream& out, std::ostream& err) {
  const GameContext ctx = game_context(opt);
  const RobustnessReport report = robustness_report(ctx, opt.alpha);
  if (opt.alpha <= report.calibrated_alpha_floor) {
    fmt::print(err, "warning: alpha below calibrated floor ({} <= {})\n", format_real(opt.alpha),
               format_real(report.calibrated_alpha_floor));
  }
  emit(opt.out, out, [&](std::ostream& s) { write_robustness_csv(s, report); });
  fmt::print(err, "calibrated alpha floor: {} (reference {})\n", format_real(report.calibrated_alpha_floor),
             kReferenceAlphaFloor);
  fmt::print(err, "network margin: {} (reference {})\n", format_real(report.network_margin), kReferenceNetworkMargin);
  fmt::print(err, "exact margin: {}, effective margin: {}\n", format_real(report.network_margin_exact),
             format_real(report.network_effective_margin));
  write_summary(opt, out,
                json{{"alpha", opt.alpha},
                     {"calibrated_alpha_floor", real(report.calibrated_alpha_floor)},
                     {"reference_alpha_floor", kReferenceAlphaFloor},
                     {"network_margin", real(report.network_margin)},
                     {"reference_network_margin", kReferenceNetworkMargin},
                     {"network_margin_exact", real(report.network_margin_exact)},
                     {"network_effective_margin", real(report.network_effective_margin)}});
  return kOk;
}

int cmd_gibbs(const Options& opt, std::ostream& out, std::ostream& err) {
  const GameContext ctx = game_context(opt);
  std::vector<ChainModel> chains;
  for (double eta : opt.etas) chains.push_back(build_chain(ctx, eta));
  emit(opt.out, out, [&](std::ostream& s) {
    s << "eta,state_index,cfg_string,stationary_prob,gibbs_prob\n";
    for (const ChainModel& chain : chains) {
      for (Eigen::Index x = 0; x < chain.stationary.size(); ++x) {
        s << format_real(chain.eta) << ',' << x << ','
          << Configuration::from_index(static_cast<std::uint64_t>(x), chain.node_count).to_string() << ','
          << format_real(chain.stationary(x)) << ',' << format_real(chain.gibbs(x)) << '\n';
      }
    }
  });
  json rows = json::array();
  for (const ChainModel& chain : chains) {
    const double tv = total_variation(chain.stationary, chain.gibbs);
    const double residual = detailed_balance_residual(chain.transition, chain.stationary);
    json modes = json::array();
    for (std::uint64_t x : chain.stationary_modes()) modes.push_back(Configuration::from_index(x, chain.node_count).to_string());
    rows.push_back({{"eta", chain.eta},
                    {"total_variation", tv},
                    {"maximizer_mass", chain.maximizer_mass()},
                    {"detailed_balance_residual", residual},
                    {"stationary_modes", modes},
                    {"modes_match_maximizers", chain.modes_match_maximizers()}});
    fmt::print(err, "eta {}: maximizer mass {}, tv to gibbs {}{}\n", format_real(chain.eta),
               format_real(chain.maximizer_mass()), format_real(tv),
               chain.modes_match_maximizers() ? "" : ", stationary modes differ from maximizers");
  }
  write_summary(opt, out, json{{"delta", opt.delta}, {"chains", rows}});
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options opt;
  CLI::App app{"Generation allocation game on radial power networks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.add_option("--network", opt.network, "network JSON file, or paper6 for the bundled fixture");
  app.add_option("--delta", opt.delta, "uniform susceptance drop");
  app.add_option("--out", opt.out, "output file, - for stdout");
  app.add_option("--summary", opt.summary, "write a JSON summary to this file (- for stdout)");
  app.add_option("--seed", opt.seed, "random seed");
  app.add_option("--dm", opt.damping_m, "override machine damping");
  app.add_option("--dc", opt.damping_c, "override converter damping");
  app.add_option("--target-config", opt.target_config, "use the angles realized by this configuration as targets");

  CLI::App* solve_cmd = app.add_subcommand("solve", "steady state of one configuration");
  solve_cmd->add_option("--config", opt.config, "configuration string, e.g. MCCCCM")->required();
  solve_cmd->add_flag("--strict", opt.strict, "exit 3 when the steady state is infeasible");

  CLI::App* learn_cmd = app.add_subcommand("learn", "log-linear learning trace");
  learn_cmd->add_option("--schedule", opt.schedule, "linear:<c>, const-eta:<v> or const-tau:<v>");
  learn_cmd->add_option("--steps", opt.steps, "number of updates");
  learn_cmd->add_option("--initial", opt.initial, "starting configuration (default all M)");
  learn_cmd->add_option("--batch", opt.batch, "run this many consecutive seeds and report per-run results");

  app.add_subcommand("enumerate", "potential, Nash and maximizer flags for every configuration");

  CLI::App* margin_cmd = app.add_subcommand("margin", "robustness margins for every configuration");
  margin_cmd->add_option("--alpha", opt.alpha, "admissible power deviation");

  CLI::App* gibbs_cmd = app.add_subcommand("gibbs", "exact stationary distribution against Gibbs");
  gibbs_cmd->add_option("--eta", opt.etas, "inverse temperatures")->delimiter(',');

  std::vector<std::string> argv_storage{"gridgame"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_storage) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  }

  try {
    if (solve_cmd->parsed()) return cmd_solve(opt, out, err);
    if (learn_cmd->parsed()) return cmd_learn(opt, out, err);
    if (margin_cmd->parsed()) return cmd_margin(opt, out, err);
    if (gibbs_cmd->parsed()) return cmd_gibbs(opt, out, err);
    return cmd_enumerate(opt, out, err);
  } catch (const SizeGuardError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kTooLarge;
  } catch (const ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  } catch (const std::invalid_argument& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  } catch (const std::domain_error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kInvalidInput;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kFailure;
  }
}

}  // namespace gridgame::cli
