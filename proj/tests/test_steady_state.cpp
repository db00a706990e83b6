#include "doctest.h"

#include <cmath>
#include <random>

#include "gridgame/errors.hpp"
#include "gridgame/steady_state.hpp"
#include "test_support.hpp"

using namespace gridgame;

namespace {

const NetworkDocument& paper6() {
  static const NetworkDocument doc = paper6_fixture();
  return doc;
}

PowerNetwork two_node(double p_first, double p_second, double b = 1.0) {
  return PowerNetwork({{1, p_first}, {2, p_second}}, {{1, 2, b}});
}

const Configuration kOptimum = Configuration::parse("MCCCCM");

}  // namespace

TEST_CASE("synchronized frequency") {
  const auto& doc = paper6();
  CHECK(sync_frequency(doc.network, kOptimum, doc.damping) == doctest::Approx(4.475558 / 110).epsilon(1e-14));
  CHECK(sync_frequency(doc.network, kOptimum, doc.damping) == doctest::Approx(0.0406869).epsilon(1e-6));
  const Configuration all_m = Configuration::uniform(6, UnitType::M);
  CHECK(sync_frequency(doc.network, all_m, doc.damping) == doctest::Approx(4.475558 / 150).epsilon(1e-14));
  CHECK(sync_frequency(two_node(0.1, -0.1), Configuration::parse("MC"), doc.damping) == doctest::Approx(0.0));
}

TEST_CASE("net injections") {
  const auto& doc = paper6();
  const std::vector<double> p = net_injections(doc.network, kOptimum, doc.damping);
  const double expected[] = {-0.2393922727272727, 0.08969663636363634, 0.18858563636363634,
                             0.08969663636363634, 0.18858563636363634, -0.3171722727272728};
  double total = 0.0;
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(p[i] == doctest::Approx(expected[i]).epsilon(1e-12));
    total += p[i];
  }
  CHECK(std::abs(total) <= 1e-12);

  const DampingParams uniform{20.0, 20.0};
  const std::vector<double> q = net_injections(two_node(0.1, -0.1), Configuration::parse("MC"), uniform);
  CHECK(q[0] == doctest::Approx(0.1));
  CHECK(q[1] == doctest::Approx(-0.1));
}

TEST_CASE("edge flows by leaf elimination") {
  const auto& doc = paper6();
  const std::vector<double> xi = edge_flows(doc.network, net_injections(doc.network, kOptimum, doc.damping));
  const double expected[] = {-0.2393922727272727, -0.14969563636363636, 0.03888999999999998, 0.12858663636363632,
                             0.31717227272727266};
  for (std::size_t e = 0; e < 5; ++e) CHECK(xi[e] == doctest::Approx(expected[e]).epsilon(1e-12));

  const std::vector<double> single = edge_flows(two_node(0.1, -0.1), std::vector<double>{0.1, -0.1});
  CHECK(single[0] == doctest::Approx(0.1));

  std::mt19937_64 gen(3);
  const PowerNetwork tree = testing::random_tree(9, gen);
  for (double v : edge_flows(tree, std::vector<double>(9, 0.0))) CHECK(v == 0.0);

  CHECK_THROWS_AS(edge_flows(two_node(0.1, -0.1), std::vector<double>{0.1, 0.1}), ImbalanceError);
}

TEST_CASE("flow feasibility") {
  const auto& doc = paper6();
  const std::vector<double> xi = edge_flows(doc.network, net_injections(doc.network, kOptimum, doc.damping));
  CHECK(flow_feasibility(doc.network, xi, 0.0));
  CHECK(flow_feasibility(doc.network, std::vector<double>(5, 0.0), 4.2));
  const PowerNetwork net = two_node(0.0, 0.0, 1.0);
  CHECK_FALSE(flow_feasibility(net, std::vector<double>{0.5}, 0.6));
  CHECK(flow_feasibility(net, std::vector<double>{0.5}, 0.4));
  CHECK_THROWS_AS(flow_feasibility(net, std::vector<double>{0.5}, 1.0), DomainError);
  CHECK_THROWS_AS(flow_feasibility(net, std::vector<double>{0.5}, -0.1), DomainError);
}

TEST_CASE("solve six-bus optimum") {
  const auto& doc = paper6();
  const SteadyState state = solve(doc.network, kOptimum, doc.damping);
  REQUIRE(state.feasible);
  for (std::size_t e = 0; e < 5; ++e) CHECK(std::abs(state.sine_diffs[e] - doc.targets->theta[e]) <= 5e-4);
  CHECK(state.cohesiveness == doctest::Approx(std::asin(0.07489309863690027)));

  const SteadyState dropped = solve(doc.network, kOptimum, doc.damping, 0.3065);
  const double expected[] = {-0.016005794948535945, -0.038105036620500535, 0.008624780998425402, 0.0085973173290478,
                             0.08073622826200143};
  CHECK(dropped.edge_flows == state.edge_flows);
  for (std::size_t e = 0; e < 5; ++e) CHECK(dropped.sine_diffs[e] == doctest::Approx(expected[e]).epsilon(1e-12));
}

TEST_CASE("quiescent and infeasible states") {
  const SteadyState quiet = solve(two_node(0.0, 0.0), Configuration::parse("MC"), DampingParams{});
  CHECK(quiet.omega0 == 0.0);
  CHECK(quiet.edge_flows[0] == 0.0);
  REQUIRE(quiet.feasible);
  CHECK(quiet.angle_diffs[0] == 0.0);

  // 2 units of flow over a line of susceptance 1
  const SteadyState overloaded = solve(two_node(2.0, -2.0), Configuration::parse("MM"), DampingParams{});
  CHECK_FALSE(overloaded.feasible);
  CHECK(overloaded.edge_flows[0] == doctest::Approx(2.0));
  CHECK(overloaded.angle_diffs.empty());
  CHECK(overloaded.cohesiveness == 0.0);
}

TEST_CASE("property: conservation, delta independence, dense agreement, arcsin round trip") {
  std::mt19937_64 gen(2024);
  const DampingParams damping{25.0, 15.0};
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 11);
    const PowerNetwork net = testing::random_tree(n, gen);
    const Configuration cfg = testing::random_configuration(n, gen);
    const SteadyState state = solve(net, cfg, damping);

    double total = 0.0;
    for (double p : state.injections) total += p;
    CHECK(std::abs(total) <= 1e-12);

    const Eigen::MatrixXd inc = incidence(net);
    const Eigen::VectorXd residual =
        inc * Eigen::Map<const Eigen::VectorXd>(state.edge_flows.data(), static_cast<Eigen::Index>(net.edge_count())) -
        Eigen::Map<const Eigen::VectorXd>(state.injections.data(), static_cast<Eigen::Index>(n));
    CHECK(residual.cwiseAbs().maxCoeff() <= 1e-10);

    const std::vector<double> dense = testing::dense_flows(net, state.injections);
    for (std::size_t e = 0; e < dense.size(); ++e) CHECK(std::abs(dense[e] - state.edge_flows[e]) <= 1e-10);

    for (double delta : {0.1, 0.3}) {
      const SteadyState dropped = solve(net, cfg, damping, delta);
      CHECK(dropped.edge_flows == state.edge_flows);
      if (dropped.feasible) {
        for (std::size_t e = 0; e < net.edge_count(); ++e) {
          CHECK(std::abs(std::sin(dropped.angle_diffs[e]) * (net.susceptance(e) - delta) - dropped.edge_flows[e]) <=
                1e-12);
        }
      }
    }
  }
}
