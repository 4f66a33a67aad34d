#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace equiflow {

using NodeId = std::int64_t;
/// Position of an arc in Network::arcs().
using ArcId = int;

enum class Layer : std::uint8_t { walk, bike, road, transit, origin, destination };

enum class ArcKind : std::uint8_t { walk, bike, road, transit, mode_switch };

std::string_view to_string(Layer layer);
std::string_view to_string(ArcKind kind);
std::optional<Layer> parse_layer(std::string_view text);
std::optional<ArcKind> parse_arc_kind(std::string_view text);

/// Intra-layer arc kind for a movement layer; nullopt for origin/destination.
std::optional<ArcKind> movement_kind(Layer layer);

/// True when a mode-switching arc from `from` to `to` is admissible.
bool switch_admissible(Layer from, Layer to);

struct Node
{
  NodeId id = 0;
  Layer layer = Layer::walk;
  double x = 0.0;  ///< meters
  double y = 0.0;  ///< meters
  std::optional<int> region;
};

struct Arc
{
  NodeId tail = 0;
  NodeId head = 0;
  ArcKind kind = ArcKind::walk;
  double time_min = 0.0;
  double cost = 0.0;
  std::optional<double> unsafety;            ///< bike arcs only
  std::optional<double> capacity_users_min;  ///< transit arcs only; absent means uncapacitated
  std::optional<double> flow_cap_veh_min;    ///< road arcs only; absent means uncapacitated
};

/// Multilayer directed graph. Node ids are external; arcs are addressed by
/// their position. Construction never throws on structurally invalid content
/// so that validate_network() can report it.
class Network
{
public:
  Network() = default;
  Network(std::vector<Node> nodes, std::vector<Arc> arcs, double safety_threshold);

  double safety_threshold() const { return safety_threshold_; }
  std::span<const Node> nodes() const { return nodes_; }
  std::span<const Arc> arcs() const { return arcs_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t arc_count() const { return arcs_.size(); }

  const Node& node(std::size_t index) const { return nodes_[index]; }
  const Arc& arc(ArcId a) const { return arcs_[static_cast<std::size_t>(a)]; }

  /// Index of the first node carrying `id`.
  std::optional<std::size_t> node_index(NodeId id) const;
  const Node* find_node(NodeId id) const;

  /// Node index of an arc endpoint, -1 when the id is unknown.
  int tail_index(ArcId a) const { return tail_index_[static_cast<std::size_t>(a)]; }
  int head_index(ArcId a) const { return head_index_[static_cast<std::size_t>(a)]; }

  std::span<const ArcId> out_arcs(std::size_t node) const { return out_[node]; }
  std::span<const ArcId> in_arcs(std::size_t node) const { return in_[node]; }

  /// Same nodes and threshold, different arc list.
  Network with_arcs(std::vector<Arc> arcs) const;
  Network with_safety_threshold(double threshold) const;

private:
  double safety_threshold_ = std::numeric_limits<double>::infinity();
  std::vector<Node> nodes_;
  std::vector<Arc> arcs_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<int> tail_index_;
  std::vector<int> head_index_;
  std::vector<std::vector<ArcId>> out_;
  std::vector<std::vector<ArcId>> in_;
};

enum class Rule : std::uint8_t {
  duplicate_node_id,
  origin_without_region,
  unknown_endpoint,
  negative_travel_time,
  negative_cost,
  negative_attribute,
  non_finite_value,
  kind_layer_mismatch,
  switch_within_layer,
  switch_pair_not_admissible,
  internal_terminal_arc,
  duplicate_arc,
  attribute_not_allowed,
  missing_unsafety,
  // demand cross-checks
  unknown_demand_node,
  unknown_region,
  origin_region_mismatch,
};

std::string_view describe(Rule rule);

struct Violation
{
  std::string subject;  ///< e.g. "node 4" or "arc 12 (3->7 switch)"
  Rule rule;
  std::string message;
};

/// Empty iff every node/arc invariant of the multilayer graph holds.
std::vector<Violation> validate_network(const Network& net);

/// Drops bike arcs whose unsafety exceeds the network threshold.
Network prune_unsafe_bike_arcs(const Network& net);

/// Arcs lying on some origin-to-destination walk. Excludes arcs leaving other
/// origins or entering other destinations; with allow_bike=false also every
/// arc touching a bike node. Result is sorted. Throws DisconnectedDemand.
std::vector<ArcId> reachable_arc_set(const Network& net, NodeId origin, NodeId destination,
                                     bool allow_bike);

/// Parses the network JSON format. Throws SchemaError.
Network parse_network(std::string_view json_text);
Network load_network(const std::filesystem::path& path);
std::string network_to_json(const Network& net);

}  // namespace equiflow
