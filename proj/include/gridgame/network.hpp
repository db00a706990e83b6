#pragma once

// Radial power networks: buses with constant power input, purely inductive
// lines, and the per-bus generation type (synchronous machine or
// droop-controlled converter). Voltage magnitudes are fixed at 1 p.u. and
// are not represented.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gridgame {

enum class UnitType : std::uint8_t {
  M = 0,  // synchronous machine
  C = 1,  // DC/AC converter under droop control
};

char to_char(UnitType type);
UnitType unit_type_from_char(char c);  // throws ValidationError
inline UnitType other(UnitType type) { return type == UnitType::M ? UnitType::C : UnitType::M; }

/// Generation type per node, in dense node order.
class Configuration {
 public:
  Configuration() = default;
  explicit Configuration(std::vector<UnitType> types) : types_(std::move(types)) {}

  /// Parses a string such as "MCCCCM". Throws ValidationError on any other
  /// character or when `expected_size` is given and does not match.
  static Configuration parse(std::string_view text, std::optional<std::size_t> expected_size = {});
  static Configuration uniform(std::size_t n, UnitType type) { return Configuration(std::vector<UnitType>(n, type)); }

  /// Canonical state encoding: bit i holds node i's type (M=0, C=1).
  static Configuration from_index(std::uint64_t index, std::size_t n);
  std::uint64_t index() const;

  std::size_t size() const { return types_.size(); }
  UnitType operator[](std::size_t i) const { return types_[i]; }
  std::span<const UnitType> types() const { return types_; }

  /// Copy with node i switched to `type`.
  Configuration with(std::size_t i, UnitType type) const;
  void set(std::size_t i, UnitType type) { types_[i] = type; }

  std::string to_string() const;

  friend bool operator==(const Configuration&, const Configuration&) = default;

 private:
  std::vector<UnitType> types_;
};

/// Per-unit damping of the two generation types.
struct DampingParams {
  double machine = 25.0;
  double converter = 15.0;

  double of(UnitType type) const { return type == UnitType::M ? machine : converter; }
  /// Throws ValidationError unless both values are finite and positive.
  void validate() const;
  /// Machines are normally the more damped type; the opposite is allowed.
  bool conventional() const { return machine > converter; }
};

struct Node {
  std::int64_t id = 0;
  double p0 = 0.0;
};

struct EdgeSpec {
  std::int64_t tail = 0;
  std::int64_t head = 0;
  double b = 0.0;
};

/// A line, with its endpoints resolved to dense node indices. The angle
/// difference on the edge is theta[tail] - theta[head].
struct Edge {
  std::size_t tail = 0;
  std::size_t head = 0;
  double b = 0.0;
};

/// One edge as seen from one of its endpoints. `sign` is +1 at the tail and
/// -1 at the head, i.e. the incidence matrix entry.
struct Incidence {
  std::size_t edge = 0;
  std::size_t neighbor = 0;
  int sign = 0;
};

/// Validated radial network. Immutable after construction.
class PowerNetwork {
 public:
  /// Throws ValidationError naming the violated invariant.
  PowerNetwork(std::vector<Node> nodes, std::vector<EdgeSpec> edges);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Edge> edges() const { return edges_; }
  std::span<const Incidence> incident(std::size_t node) const { return adjacency_[node]; }

  double p0(std::size_t node) const { return nodes_[node].p0; }
  double susceptance(std::size_t edge) const { return edges_[edge].b; }
  double min_susceptance() const { return min_b_; }
  double total_input() const;

  std::size_t index_of(std::int64_t id) const;  // throws ValidationError
  std::vector<EdgeSpec> edge_specs() const;

  friend bool operator==(const PowerNetwork& a, const PowerNetwork& b);

 private:
  std::vector<Node> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Incidence>> adjacency_;
  double min_b_ = 0.0;
};

/// Optimal angle differences per edge, oriented tail minus head.
struct TargetAngles {
  std::vector<double> theta;

  /// Throws ValidationError unless there are `edge_count` finite entries
  /// with |theta| < pi/2.
  void validate(std::size_t edge_count) const;
};

/// Everything a network file carries.
struct NetworkDocument {
  PowerNetwork network;
  DampingParams damping;
  std::optional<TargetAngles> targets;
};

/// Parses and validates a network JSON document. Throws ParseError or
/// ValidationError.
NetworkDocument load_document(std::string_view text);
PowerNetwork load_network(std::string_view text);
NetworkDocument load_document_file(const std::string& path);

/// Inverse of load_document; edges and nodes keep their order.
std::string serialize(const NetworkDocument& doc);

/// n x m signed incidence matrix, +1 at the tail, -1 at the head.
using IncidenceMatrix = Eigen::MatrixXd;
IncidenceMatrix incidence(const PowerNetwork& net);

/// The six-unit line graph used throughout the examples (IEEE 14-bus
/// parameter values), with d_M = 25, d_C = 15 and the optimal angle
/// differences realized by MCCCCM.
NetworkDocument paper6_fixture();

}  // namespace gridgame
