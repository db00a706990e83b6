#include "gridgame/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "gridgame/errors.hpp"
#include "gridgame/format.hpp"

namespace gridgame {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Unperturbed line sines xi_e / b_e.
std::vector<double> unperturbed_sines(const GameContext& ctx, const Configuration& cfg) {
  const PowerNetwork& net = ctx.network();
  const std::vector<double> xi = edge_flows(net, net_injections(net, cfg, ctx.damping()));
  std::vector<double> sines(xi.size());
  for (std::size_t e = 0; e < xi.size(); ++e) sines[e] = xi[e] / net.susceptance(e);
  return sines;
}

void check_alpha(double alpha) {
  if (!std::isfinite(alpha) || alpha <= 0.0) throw DomainError(fmt::format("alpha must be > 0, got {}", alpha));
}

}  // namespace

NodeTerms node_terms(const GameContext& ctx, const Configuration& cfg) {
  const PowerNetwork& net = ctx.network();
  const std::vector<double> sines = unperturbed_sines(ctx, cfg);
  NodeTerms terms{std::vector<double>(net.node_count(), 0.0), std::vector<double>(net.node_count(), 0.0)};
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    for (const Incidence& inc : net.incident(i)) {
      const double b = net.susceptance(inc.edge);
      terms.offset[i] += inc.sign * b * (sines[inc.edge] - ctx.target_sine(inc.edge));
      terms.sine_sum[i] += inc.sign * sines[inc.edge];
    }
  }
  return terms;
}

std::vector<double> power_deviation(const GameContext& ctx, const Configuration& cfg, double delta) {
  const PowerNetwork& net = ctx.network();
  check_delta(net, delta);
  const std::vector<double> sines = unperturbed_sines(ctx, cfg);
  std::vector<double> deviation(net.node_count());
  for (std::size_t i = 0; i < net.node_count(); ++i) {
    double perturbed = 0.0;
    double optimal = 0.0;
    for (const Incidence& inc : net.incident(i)) {
      const double b = net.susceptance(inc.edge);
      perturbed += inc.sign * (b - delta) * sines[inc.edge];
      optimal += inc.sign * b * ctx.target_sine(inc.edge);
    }
    deviation[i] = std::abs(perturbed - optimal);
  }
  return deviation;
}

bool in_feasibility_region(const GameContext& ctx, const Configuration& cfg, double delta, double alpha) {
  check_alpha(alpha);
  const std::vector<double> deviation = power_deviation(ctx, cfg, delta);
  return *std::max_element(deviation.begin(), deviation.end()) < alpha;
}

double margin_closed_form(const GameContext& ctx, const Configuration& cfg, double alpha) {
  check_alpha(alpha);
  const NodeTerms terms = node_terms(ctx, cfg);
  double margin = kInf;
  for (std::size_t i = 0; i < terms.offset.size(); ++i) {
    if (terms.sine_sum[i] > 0.0) margin = std::min(margin, (alpha + terms.offset[i]) / terms.sine_sum[i]);
  }
  return margin;
}

std::vector<double> node_crossings(const GameContext& ctx, const Configuration& cfg, double alpha) {
  check_alpha(alpha);
  const NodeTerms terms = node_terms(ctx, cfg);
  std::vector<double> crossings(terms.offset.size(), kInf);
  for (std::size_t i = 0; i < crossings.size(); ++i) {
    const double a = terms.offset[i];
    const double b = terms.sine_sum[i];
    if (b > 0.0) {
      crossings[i] = (alpha + a) / b;
    } else if (b < 0.0) {
      crossings[i] = (a - alpha) / b;
    }
  }
  return crossings;
}

double margin_exact(const GameContext& ctx, const Configuration& cfg, double alpha) {
  check_alpha(alpha);
  const NodeTerms terms = node_terms(ctx, cfg);
  for (std::size_t i = 0; i < terms.offset.size(); ++i) {
    if (std::abs(terms.offset[i]) >= alpha) {
      throw PreconditionError(fmt::format("configuration {} is outside the region at delta = 0 (node {}: |{}| >= {})",
                                          cfg.to_string(), ctx.network().nodes()[i].id, terms.offset[i], alpha));
    }
  }
  const std::vector<double> crossings = node_crossings(ctx, cfg, alpha);
  return *std::min_element(crossings.begin(), crossings.end());
}

double calibrate_alpha(const GameContext& ctx) {
  const std::size_t n = ctx.size();
  if (n > kMaxEnumerationNodes) {
    throw SizeGuardError(fmt::format("{} nodes exceeds the enumeration limit of {}", n, kMaxEnumerationNodes));
  }
  double floor = 0.0;
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
    const NodeTerms terms = node_terms(ctx, Configuration::from_index(idx, n));
    for (double a : terms.offset) floor = std::max(floor, std::abs(a));
  }
  return floor;
}

double delta_flow_limit(const PowerNetwork& net, const Configuration& cfg, const DampingParams& damping) {
  const std::vector<double> xi = edge_flows(net, net_injections(net, cfg, damping));
  double limit = net.min_susceptance();
  for (std::size_t e = 0; e < xi.size(); ++e) limit = std::min(limit, net.susceptance(e) - std::abs(xi[e]));
  return limit;
}

RobustnessReport robustness_report(const GameContext& ctx, double alpha) {
  check_alpha(alpha);
  const std::size_t n = ctx.size();
  RobustnessReport report;
  report.alpha = alpha;
  report.calibrated_alpha_floor = calibrate_alpha(ctx);
  report.network_margin = kInf;
  report.network_margin_exact = kInf;
  report.network_effective_margin = kInf;
  for (std::uint64_t idx = 0; idx < (std::uint64_t{1} << n); ++idx) {
    MarginRecord rec;
    rec.cfg = Configuration::from_index(idx, n);
    rec.margin_closed_form = margin_closed_form(ctx, rec.cfg, alpha);
    try {
      rec.margin_exact = margin_exact(ctx, rec.cfg, alpha);
    } catch (const PreconditionError&) {
      rec.margin_exact = 0.0;
    }
    rec.delta_flow_limit = delta_flow_limit(ctx.network(), rec.cfg, ctx.damping());
    rec.effective_margin =
        std::min({rec.margin_exact, rec.delta_flow_limit, ctx.network().min_susceptance()});
    report.network_margin = std::min(report.network_margin, rec.margin_closed_form);
    report.network_margin_exact = std::min(report.network_margin_exact, rec.margin_exact);
    report.network_effective_margin = std::min(report.network_effective_margin, rec.effective_margin);
    report.records.push_back(std::move(rec));
  }
  return report;
}

void write_robustness_csv(std::ostream& out, const RobustnessReport& report) {
  out << "cfg,margin_closed_form,margin_exact,delta_flow_limit,effective_margin\n";
  for (const MarginRecord& r : report.records) {
    out << r.cfg.to_string() << ',' << format_real(r.margin_closed_form) << ',' << format_real(r.margin_exact) << ','
        << format_real(r.delta_flow_limit) << ',' << format_real(r.effective_margin) << '\n';
  }
}

}  // namespace gridgame
