#include "gridgame/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>
#include <utility>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridgame/errors.hpp"

namespace gridgame {

using json = nlohmann::json;

char to_char(UnitType type) { return type == UnitType::M ? 'M' : 'C'; }

UnitType unit_type_from_char(char c) {
  switch (c) {
    case 'M':
      return UnitType::M;
    case 'C':
      return UnitType::C;
    default:
      throw ValidationError(fmt::format("invalid unit type '{}' (expected M or C)", c));
  }
}

Configuration Configuration::parse(std::string_view text, std::optional<std::size_t> expected_size) {
  if (expected_size && text.size() != *expected_size) {
    throw ValidationError(
        fmt::format("configuration '{}' has {} entries, network has {} nodes", text, text.size(), *expected_size));
  }
  std::vector<UnitType> types;
  types.reserve(text.size());
  for (char c : text) types.push_back(unit_type_from_char(c));
  return Configuration(std::move(types));
}

Configuration Configuration::from_index(std::uint64_t index, std::size_t n) {
  std::vector<UnitType> types(n);
  for (std::size_t i = 0; i < n; ++i) types[i] = ((index >> i) & 1U) != 0 ? UnitType::C : UnitType::M;
  return Configuration(std::move(types));
}

std::uint64_t Configuration::index() const {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < types_.size(); ++i) {
    if (types_[i] == UnitType::C) idx |= std::uint64_t{1} << i;
  }
  return idx;
}

Configuration Configuration::with(std::size_t i, UnitType type) const {
  Configuration copy = *this;
  copy.types_[i] = type;
  return copy;
}

std::string Configuration::to_string() const {
  std::string s;
  s.reserve(types_.size());
  for (UnitType t : types_) s.push_back(to_char(t));
  return s;
}

void DampingParams::validate() const {
  if (!std::isfinite(machine) || !std::isfinite(converter) || machine <= 0.0 || converter <= 0.0) {
    throw ValidationError(
        fmt::format("damping must be finite and positive (M={}, C={})", machine, converter));
  }
}

namespace {

struct DisjointSets {
  std::vector<std::size_t> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent[a] = b;
    return true;
  }
};

}  // namespace

PowerNetwork::PowerNetwork(std::vector<Node> nodes, std::vector<EdgeSpec> edges) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  if (n < 2) throw ValidationError(fmt::format("network needs at least 2 nodes, got {}", n));

  std::unordered_map<std::int64_t, std::size_t> dense;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(nodes_[i].p0)) throw ValidationError(fmt::format("node {}: p0 is not finite", nodes_[i].id));
    if (!dense.emplace(nodes_[i].id, i).second) throw ValidationError(fmt::format("duplicate node id {}", nodes_[i].id));
  }

  std::set<std::pair<std::size_t, std::size_t>> seen;
  DisjointSets components(n);
  edges_.reserve(edges.size());
  for (const EdgeSpec& spec : edges) {
    auto tail = dense.find(spec.tail);
    auto head = dense.find(spec.head);
    if (tail == dense.end() || head == dense.end()) {
      throw ValidationError(fmt::format("edge ({}, {}) references an unknown node", spec.tail, spec.head));
    }
    if (spec.tail == spec.head) throw ValidationError(fmt::format("self-loop at node {}", spec.tail));
    if (!std::isfinite(spec.b) || spec.b <= 0.0) {
      throw ValidationError(fmt::format("edge ({}, {}): non-positive susceptance {}", spec.tail, spec.head, spec.b));
    }
    auto key = std::minmax(tail->second, head->second);
    if (!seen.insert(key).second) throw ValidationError(fmt::format("duplicate edge ({}, {})", spec.tail, spec.head));
    if (!components.unite(tail->second, head->second)) {
      throw ValidationError(fmt::format("cycle detected at edge ({}, {})", spec.tail, spec.head));
    }
    edges_.push_back(Edge{tail->second, head->second, spec.b});
  }
  if (edges_.size() != n - 1) {
    throw ValidationError(fmt::format("network is disconnected ({} edges for {} nodes)", edges_.size(), n));
  }

  adjacency_.resize(n);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    adjacency_[edges_[e].tail].push_back({e, edges_[e].head, +1});
    adjacency_[edges_[e].head].push_back({e, edges_[e].tail, -1});
  }
  min_b_ = std::min_element(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) { return a.b < b.b; })->b;
}

double PowerNetwork::total_input() const {
  double sum = 0.0;
  for (const Node& node : nodes_) sum += node.p0;
  return sum;
}

std::size_t PowerNetwork::index_of(std::int64_t id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  throw ValidationError(fmt::format("unknown node id {}", id));
}

std::vector<EdgeSpec> PowerNetwork::edge_specs() const {
  std::vector<EdgeSpec> specs;
  specs.reserve(edges_.size());
  for (const Edge& e : edges_) specs.push_back({nodes_[e.tail].id, nodes_[e.head].id, e.b});
  return specs;
}

bool operator==(const PowerNetwork& a, const PowerNetwork& b) {
  if (a.nodes_.size() != b.nodes_.size() || a.edges_.size() != b.edges_.size()) return false;
  for (std::size_t i = 0; i < a.nodes_.size(); ++i) {
    if (a.nodes_[i].id != b.nodes_[i].id || a.nodes_[i].p0 != b.nodes_[i].p0) return false;
  }
  for (std::size_t e = 0; e < a.edges_.size(); ++e) {
    if (a.edges_[e].tail != b.edges_[e].tail || a.edges_[e].head != b.edges_[e].head || a.edges_[e].b != b.edges_[e].b) {
      return false;
    }
  }
  return true;
}

void TargetAngles::validate(std::size_t edge_count) const {
  if (theta.size() != edge_count) {
    throw ValidationError(fmt::format("targets have {} entries, network has {} edges", theta.size(), edge_count));
  }
  for (std::size_t e = 0; e < theta.size(); ++e) {
    if (!std::isfinite(theta[e]) || std::abs(theta[e]) >= std::numbers::pi / 2) {
      throw ValidationError(fmt::format("target angle {} on edge {} is not phase cohesive", theta[e], e + 1));
    }
  }
}

namespace {

template <typename T>
T field(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(fmt::format("{}: missing field \"{}\"", where, key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(fmt::format("{}: field \"{}\" has the wrong type", where, key));
  }
}

const json& array_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) throw ParseError(fmt::format("document: \"{}\" must be an array", key));
  return *it;
}

}  // namespace

NetworkDocument load_document(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("malformed network document: {}", e.what()));
  }
  if (!doc.is_object()) throw ParseError("network document must be a JSON object");

  std::vector<Node> nodes;
  for (const json& item : array_field(doc, "nodes")) {
    if (!item.is_object()) throw ParseError("node entries must be objects");
    nodes.push_back({field<std::int64_t>(item, "id", "node"), field<double>(item, "p0", "node")});
  }
  std::vector<EdgeSpec> edges;
  for (const json& item : array_field(doc, "edges")) {
    if (!item.is_object()) throw ParseError("edge entries must be objects");
    edges.push_back(
        {field<std::int64_t>(item, "tail", "edge"), field<std::int64_t>(item, "head", "edge"), field<double>(item, "b", "edge")});
  }

  auto damping_it = doc.find("damping");
  if (damping_it == doc.end() || !damping_it->is_object()) throw ParseError("document: \"damping\" must be an object");
  DampingParams damping{field<double>(*damping_it, "M", "damping"), field<double>(*damping_it, "C", "damping")};
  damping.validate();

  PowerNetwork net(std::move(nodes), std::move(edges));

  std::optional<TargetAngles> targets;
  if (auto it = doc.find("targets"); it != doc.end() && !it->is_null()) {
    if (!it->is_array()) throw ParseError("document: \"targets\" must be an array");
    TargetAngles t;
    for (const json& v : *it) {
      if (!v.is_number()) throw ParseError("document: \"targets\" must contain numbers");
      t.theta.push_back(v.get<double>());
    }
    t.validate(net.edge_count());
    targets = std::move(t);
  }
  return NetworkDocument{std::move(net), damping, std::move(targets)};
}

PowerNetwork load_network(std::string_view text) { return load_document(text).network; }

NetworkDocument load_document_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open network file '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return load_document(buffer.str());
}

std::string serialize(const NetworkDocument& doc) {
  json out;
  out["nodes"] = json::array();
  for (const Node& node : doc.network.nodes()) out["nodes"].push_back({{"id", node.id}, {"p0", node.p0}});
  out["edges"] = json::array();
  for (const EdgeSpec& e : doc.network.edge_specs()) out["edges"].push_back({{"tail", e.tail}, {"head", e.head}, {"b", e.b}});
  out["damping"] = {{"M", doc.damping.machine}, {"C", doc.damping.converter}};
  if (doc.targets) out["targets"] = doc.targets->theta;
  return out.dump(2);
}

IncidenceMatrix incidence(const PowerNetwork& net) {
  IncidenceMatrix inc = IncidenceMatrix::Zero(static_cast<Eigen::Index>(net.node_count()),
                                              static_cast<Eigen::Index>(net.edge_count()));
  const auto edges = net.edges();
  for (std::size_t e = 0; e < edges.size(); ++e) {
    inc(static_cast<Eigen::Index>(edges[e].tail), static_cast<Eigen::Index>(e)) = 1.0;
    inc(static_cast<Eigen::Index>(edges[e].head), static_cast<Eigen::Index>(e)) = -1.0;
  }
  return inc;
}

NetworkDocument paper6_fixture() {
  const std::vector<double> p0 = {0.77778, 0.7, 0.798889, 0.7, 0.798889, 0.7};
  const std::vector<double> b = {15.2631, 4.2350, 4.8156, 15.2631, 4.2350};
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < p0.size(); ++i) nodes.push_back({static_cast<std::int64_t>(i + 1), p0[i]});
  std::vector<EdgeSpec> edges;
  for (std::size_t e = 0; e < b.size(); ++e) {
    edges.push_back({static_cast<std::int64_t>(e + 1), static_cast<std::int64_t>(e + 2), b[e]});
  }
  return NetworkDocument{PowerNetwork(std::move(nodes), std::move(edges)), DampingParams{25.0, 15.0},
                         TargetAngles{{-0.0157, -0.0354, 0.0081, 0.0084, 0.0750}}};
}

}  // namespace gridgame
