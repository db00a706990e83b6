#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "gridgame/network.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(const std::vector<std::string>& args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = gridgame::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

std::filesystem::path scratch(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("gridgame_cli_" + name);
}

}  // namespace

TEST_CASE("solve") {
  const Result r = invoke({"solve", "--network", "paper6", "--config", "MCCCCM"});
  REQUIRE(r.code == 0);
  const auto report = nlohmann::json::parse(r.out);
  const std::vector<double> paper{-0.0157, -0.0354, 0.0081, 0.0084, 0.0750};
  for (std::size_t e = 0; e < 5; ++e) CHECK(std::abs(report["sine_diffs"][e].get<double>() - paper[e]) <= 5e-4);
  CHECK(report["feasible"].get<bool>());

  const auto dropped = nlohmann::json::parse(invoke({"solve", "--config", "MCCCCM", "--delta", "0.3065"}).out);
  CHECK(dropped["edge_flows"] == report["edge_flows"]);
  CHECK(dropped["sine_diffs"][4].get<double>() == doctest::Approx(0.08073622826200143).epsilon(1e-12));

  const Result bad = invoke({"solve", "--config", "MCX"});
  CHECK(bad.code == 2);
  CHECK_FALSE(bad.err.empty());
  CHECK(invoke({"solve", "--config", "MCXCCM"}).code == 2);
  CHECK(invoke({"solve"}).code == 2);
  CHECK(invoke({"solve", "--config", "MCCCCM", "--delta", "5"}).code == 2);
  CHECK(invoke({"solve", "--network", "/nonexistent.json", "--config", "MM"}).code == 2);
}

TEST_CASE("solve strict flag on an overloaded line") {
  gridgame::NetworkDocument doc{gridgame::PowerNetwork({{1, 30.0}, {2, 0.0}}, {{1, 2, 1.0}}),
                                gridgame::DampingParams{}, std::nullopt};
  const auto path = scratch("overload.json");
  std::ofstream(path) << gridgame::serialize(doc);
  const Result loose = invoke({"solve", "--network", path.string(), "--config", "MM"});
  CHECK(loose.code == 0);
  CHECK_FALSE(nlohmann::json::parse(loose.out)["feasible"].get<bool>());
  CHECK(invoke({"solve", "--network", path.string(), "--config", "MM", "--strict"}).code == 3);
  // No targets in the file, so game commands need --target-config.
  CHECK(invoke({"enumerate", "--network", path.string()}).code == 2);
  std::filesystem::remove(path);
}

TEST_CASE("learn") {
  const Result r = invoke({"learn", "--network", "paper6", "--schedule", "linear:5", "--steps", "300", "--seed", "7"});
  REQUIRE(r.code == 0);
  CHECK(line_count(r.out) == 301);
  CHECK(r.out.rfind("t,eta,chosen_unit,cfg,potential,feasible\n", 0) == 0);
  CHECK(invoke({"learn", "--schedule", "linear:5", "--steps", "300", "--seed", "7"}).out == r.out);

  CHECK(invoke({"learn", "--schedule", "quadratic:5"}).code == 2);
  CHECK(invoke({"learn", "--steps", "0"}).code == 2);

  const auto out_path = scratch("trace.csv");
  const auto summary_path = scratch("summary.json");
  const Result perturbed = invoke({"learn", "--delta", "0.3065", "--seed", "3", "--out", out_path.string(), "--summary",
                                   summary_path.string()});
  REQUIRE(perturbed.code == 0);
  CHECK(perturbed.out.empty());
  std::ifstream summary_file(summary_path);
  const auto summary = nlohmann::json::parse(summary_file);
  CHECK(summary["final_potential"].get<double>() < -1e-3);
  CHECK(summary["first_hitting_time"].is_null());
  std::filesystem::remove(out_path);
  std::filesystem::remove(summary_path);
}

TEST_CASE("learn batch") {
  const Result r = invoke({"learn", "--batch", "100", "--schedule", "linear:5", "--summary", "-", "--out", scratch("batch.csv").string()});
  REQUIRE(r.code == 0);
  const auto summary = nlohmann::json::parse(r.out);
  CHECK(summary["success_rate"].get<double>() >= 0.8);
  std::filesystem::remove(scratch("batch.csv"));
}

TEST_CASE("enumerate") {
  const Result r = invoke({"enumerate", "--network", "paper6", "--delta", "0"});
  REQUIRE(r.code == 0);
  CHECK(line_count(r.out) == 65);
  CHECK(r.out.find("MCCCCM,-0.000534840815,1,1,1") != std::string::npos);

  const Result flat = invoke({"enumerate", "--dm", "20", "--dc", "20", "--summary", "-", "--out", scratch("e.csv").string()});
  CHECK(nlohmann::json::parse(flat.out)["maximizer_count"].get<int>() == 64);

  const Result dropped = invoke({"enumerate", "--delta", "0.3065", "--summary", "-", "--out", scratch("e.csv").string()});
  const auto summary = nlohmann::json::parse(dropped.out);
  CHECK(summary["max_potential"].get<double>() < 0.0);
  CHECK(summary["recovered_optimum"] == "MCCCCM");
  std::filesystem::remove(scratch("e.csv"));
}

TEST_CASE("margin") {
  const Result r = invoke({"margin", "--network", "paper6", "--alpha", "1.5"});
  REQUIRE(r.code == 0);
  CHECK(line_count(r.out) == 65);
  CHECK(r.err.find("0.8142") != std::string::npos);
  CHECK(r.err.find("0.4723") != std::string::npos);
  CHECK(r.err.find("0.537876754") != std::string::npos);
  CHECK(r.err.find("warning") == std::string::npos);

  const Result low = invoke({"margin", "--alpha", "0.5"});
  CHECK(low.code == 0);
  CHECK(low.err.find("alpha below calibrated floor") != std::string::npos);

  CHECK(invoke({"margin", "--alpha", "0"}).code == 2);

  gridgame::NetworkDocument doc{gridgame::PowerNetwork({{1, 0.5}, {2, 0.1}}, {{1, 2, 2.0}}), gridgame::DampingParams{},
                                std::nullopt};
  const auto path = scratch("two.json");
  std::ofstream(path) << gridgame::serialize(doc);
  const Result two = invoke({"margin", "--network", path.string(), "--target-config", "MC", "--alpha", "1"});
  CHECK(two.code == 0);
  CHECK(line_count(two.out) == 5);
  std::filesystem::remove(path);
}

TEST_CASE("gibbs") {
  const Result r = invoke({"gibbs", "--network", "paper6", "--eta", "0,1,5,20", "--summary", "-", "--out", scratch("g.csv").string()});
  REQUIRE(r.code == 0);
  const auto chains = nlohmann::json::parse(r.out)["chains"];
  REQUIRE(chains.size() == 4);
  CHECK(chains[0]["total_variation"].get<double>() <= 1e-12);
  double previous = 0.0;
  for (const auto& c : chains) {
    CHECK(c["maximizer_mass"].get<double>() >= previous);
    previous = c["maximizer_mass"].get<double>();
  }
  std::ifstream csv(scratch("g.csv"));
  std::string header;
  std::getline(csv, header);
  CHECK(header == "eta,state_index,cfg_string,stationary_prob,gibbs_prob");
  std::filesystem::remove(scratch("g.csv"));

  std::ostringstream big;
  big << R"({"nodes": [)";
  for (int i = 1; i <= 13; ++i) big << (i > 1 ? "," : "") << R"({"id": )" << i << R"(, "p0": 0.1})";
  big << R"(], "edges": [)";
  for (int i = 1; i < 13; ++i) big << (i > 1 ? "," : "") << R"({"tail": )" << i << R"(, "head": )" << i + 1 << R"(, "b": 10})";
  big << R"(], "damping": {"M": 25, "C": 15}})";
  const auto path = scratch("big.json");
  std::ofstream(path) << big.str();
  CHECK(invoke({"gibbs", "--network", path.string(), "--target-config", "MMMMMMMMMMMMM"}).code == 4);
  std::filesystem::remove(path);
}

TEST_CASE("help and unknown commands") {
  CHECK(invoke({"--help"}).code == 0);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"plot"}).code == 2);
}
