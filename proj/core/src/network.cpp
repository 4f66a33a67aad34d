#include "equiflow/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <tuple>

#include "equiflow/error.hpp"
#include "json_util.hpp"

namespace equiflow {

namespace {

constexpr std::string_view kLayerNames[] = {"walk", "bike", "road", "transit", "origin",
                                            "destination"};
constexpr std::string_view kKindNames[] = {"walk", "bike", "road", "transit", "switch"};

bool is_movement(Layer l) { return l != Layer::origin && l != Layer::destination; }

std::string arc_subject(const Network& net, ArcId a)
{
  const Arc& arc = net.arc(a);
  return "arc " + std::to_string(a) + " (" + std::to_string(arc.tail) + "->" +
         std::to_string(arc.head) + " " + std::string(to_string(arc.kind)) + ")";
}

}  // namespace

std::string_view to_string(Layer layer) { return kLayerNames[static_cast<int>(layer)]; }
std::string_view to_string(ArcKind kind) { return kKindNames[static_cast<int>(kind)]; }

std::optional<Layer> parse_layer(std::string_view text)
{
  for (int i = 0; i < 6; ++i)
    if (kLayerNames[i] == text) return static_cast<Layer>(i);
  return std::nullopt;
}

std::optional<ArcKind> parse_arc_kind(std::string_view text)
{
  for (int i = 0; i < 5; ++i)
    if (kKindNames[i] == text) return static_cast<ArcKind>(i);
  return std::nullopt;
}

std::optional<ArcKind> movement_kind(Layer layer)
{
  switch (layer) {
    case Layer::walk: return ArcKind::walk;
    case Layer::bike: return ArcKind::bike;
    case Layer::road: return ArcKind::road;
    case Layer::transit: return ArcKind::transit;
    default: return std::nullopt;
  }
}

bool switch_admissible(Layer from, Layer to)
{
  if (from == to) return false;
  if (from == Layer::destination || to == Layer::origin) return false;
  if (from == Layer::origin) return is_movement(to);
  // movement layer -> any other movement layer or destination
  return is_movement(from);
}

Network::Network(std::vector<Node> nodes, std::vector<Arc> arcs, double safety_threshold)
    : safety_threshold_(safety_threshold), nodes_(std::move(nodes)), arcs_(std::move(arcs))
{
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) index_.emplace(nodes_[i].id, i);
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  tail_index_.resize(arcs_.size());
  head_index_.resize(arcs_.size());
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    auto t = index_.find(arcs_[a].tail);
    auto h = index_.find(arcs_[a].head);
    tail_index_[a] = t == index_.end() ? -1 : static_cast<int>(t->second);
    head_index_[a] = h == index_.end() ? -1 : static_cast<int>(h->second);
    if (tail_index_[a] >= 0 && head_index_[a] >= 0) {
      out_[static_cast<std::size_t>(tail_index_[a])].push_back(static_cast<ArcId>(a));
      in_[static_cast<std::size_t>(head_index_[a])].push_back(static_cast<ArcId>(a));
    }
  }
}

std::optional<std::size_t> Network::node_index(NodeId id) const
{
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Node* Network::find_node(NodeId id) const
{
  auto idx = node_index(id);
  return idx ? &nodes_[*idx] : nullptr;
}

Network Network::with_arcs(std::vector<Arc> arcs) const
{
  return Network(nodes_, std::move(arcs), safety_threshold_);
}

Network Network::with_safety_threshold(double threshold) const
{
  return Network(nodes_, arcs_, threshold);
}

std::string_view describe(Rule rule)
{
  switch (rule) {
    case Rule::duplicate_node_id: return "duplicate node id";
    case Rule::origin_without_region: return "origin node without region";
    case Rule::unknown_endpoint: return "arc endpoint is not a known node";
    case Rule::negative_travel_time: return "negative travel time";
    case Rule::negative_cost: return "negative cost";
    case Rule::negative_attribute: return "negative arc attribute";
    case Rule::non_finite_value: return "non-finite value";
    case Rule::kind_layer_mismatch: return "arc kind does not match its layer";
    case Rule::switch_within_layer: return "switch arc within a single layer";
    case Rule::switch_pair_not_admissible: return "switch layer pair not admissible";
    case Rule::internal_terminal_arc: return "origin/destination layers have no internal arcs";
    case Rule::duplicate_arc: return "duplicate (tail, head, kind) arc";
    case Rule::attribute_not_allowed: return "attribute not allowed for arc kind";
    case Rule::missing_unsafety: return "bike arc without unsafety";
    case Rule::unknown_demand_node: return "demand endpoint is not an origin/destination node";
    case Rule::unknown_region: return "unknown region";
    case Rule::origin_region_mismatch: return "origin node region differs from demand region";
  }
  return "unknown rule";
}

std::vector<Violation> validate_network(const Network& net)
{
  std::vector<Violation> out;
  auto report = [&out](std::string subject, Rule rule) {
    out.push_back({std::move(subject), rule, std::string(describe(rule))});
  };

  std::set<NodeId> seen;
  for (const Node& n : net.nodes()) {
    const std::string subject = "node " + std::to_string(n.id);
    if (!seen.insert(n.id).second) report(subject, Rule::duplicate_node_id);
    if (!std::isfinite(n.x) || !std::isfinite(n.y)) report(subject, Rule::non_finite_value);
    if (n.layer == Layer::origin && !n.region) report(subject, Rule::origin_without_region);
  }

  std::set<std::tuple<NodeId, NodeId, ArcKind>> arc_keys;
  for (ArcId a = 0; a < static_cast<ArcId>(net.arc_count()); ++a) {
    const Arc& arc = net.arc(a);
    const std::string subject = arc_subject(net, a);

    if (!std::isfinite(arc.time_min) || !std::isfinite(arc.cost))
      report(subject, Rule::non_finite_value);
    if (arc.time_min < 0) report(subject, Rule::negative_travel_time);
    if (arc.cost < 0) report(subject, Rule::negative_cost);
    for (const auto& attr : {arc.unsafety, arc.capacity_users_min, arc.flow_cap_veh_min}) {
      if (attr && std::isnan(*attr)) report(subject, Rule::non_finite_value);
      if (attr && *attr < 0) report(subject, Rule::negative_attribute);
    }
    if (arc.unsafety && arc.kind != ArcKind::bike) report(subject, Rule::attribute_not_allowed);
    if (arc.capacity_users_min && arc.kind != ArcKind::transit)
      report(subject, Rule::attribute_not_allowed);
    if (arc.flow_cap_veh_min && arc.kind != ArcKind::road)
      report(subject, Rule::attribute_not_allowed);
    if (arc.kind == ArcKind::bike && !arc.unsafety) report(subject, Rule::missing_unsafety);

    if (!arc_keys.insert({arc.tail, arc.head, arc.kind}).second)
      report(subject, Rule::duplicate_arc);

    const int t = net.tail_index(a);
    const int h = net.head_index(a);
    if (t < 0 || h < 0) {
      report(subject, Rule::unknown_endpoint);
      continue;
    }
    const Layer lt = net.node(static_cast<std::size_t>(t)).layer;
    const Layer lh = net.node(static_cast<std::size_t>(h)).layer;
    if (lt == lh) {
      if (!is_movement(lt))
        report(subject, Rule::internal_terminal_arc);
      else if (arc.kind == ArcKind::mode_switch)
        report(subject, Rule::switch_within_layer);
      else if (movement_kind(lt) != arc.kind)
        report(subject, Rule::kind_layer_mismatch);
    } else if (arc.kind != ArcKind::mode_switch) {
      report(subject, Rule::kind_layer_mismatch);
    } else if (!switch_admissible(lt, lh)) {
      report(subject, Rule::switch_pair_not_admissible);
    }
  }
  return out;
}

Network prune_unsafe_bike_arcs(const Network& net)
{
  std::vector<Arc> kept;
  kept.reserve(net.arc_count());
  const double limit = net.safety_threshold();
  for (const Arc& arc : net.arcs()) {
    if (arc.kind == ArcKind::bike && arc.unsafety.value_or(0.0) > limit) continue;
    kept.push_back(arc);
  }
  return net.with_arcs(std::move(kept));
}

std::vector<ArcId> reachable_arc_set(const Network& net, NodeId origin, NodeId destination,
                                     bool allow_bike)
{
  const auto o = net.node_index(origin);
  const auto d = net.node_index(destination);
  if (!o || net.node(*o).layer != Layer::origin)
    throw DisconnectedDemand("node " + std::to_string(origin) + " is not an origin node");
  if (!d || net.node(*d).layer != Layer::destination)
    throw DisconnectedDemand("node " + std::to_string(destination) +
                             " is not a destination node");

  auto admissible = [&](ArcId a) {
    const int t = net.tail_index(a);
    const int h = net.head_index(a);
    if (t < 0 || h < 0) return false;
    const Node& tn = net.node(static_cast<std::size_t>(t));
    const Node& hn = net.node(static_cast<std::size_t>(h));
    if (tn.layer == Layer::origin && static_cast<std::size_t>(t) != *o) return false;
    if (hn.layer == Layer::destination && static_cast<std::size_t>(h) != *d) return false;
    if (!allow_bike && (tn.layer == Layer::bike || hn.layer == Layer::bike)) return false;
    return true;
  };

  const std::size_t n = net.node_count();
  std::vector<char> fwd(n, 0), bwd(n, 0);
  std::deque<std::size_t> queue;

  fwd[*o] = 1;
  queue.push_back(*o);
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (ArcId a : net.out_arcs(v)) {
      if (!admissible(a)) continue;
      auto h = static_cast<std::size_t>(net.head_index(a));
      if (!fwd[h]) {
        fwd[h] = 1;
        queue.push_back(h);
      }
    }
  }
  if (!fwd[*d])
    throw DisconnectedDemand("no path from origin " + std::to_string(origin) +
                             " to destination " + std::to_string(destination) +
                             (allow_bike ? "" : " without bike arcs"));

  bwd[*d] = 1;
  queue.push_back(*d);
  while (!queue.empty()) {
    std::size_t v = queue.front();
    queue.pop_front();
    for (ArcId a : net.in_arcs(v)) {
      if (!admissible(a)) continue;
      auto t = static_cast<std::size_t>(net.tail_index(a));
      if (!bwd[t]) {
        bwd[t] = 1;
        queue.push_back(t);
      }
    }
  }

  std::vector<ArcId> result;
  for (ArcId a = 0; a < static_cast<ArcId>(net.arc_count()); ++a) {
    if (!admissible(a)) continue;
    if (fwd[static_cast<std::size_t>(net.tail_index(a))] &&
        bwd[static_cast<std::size_t>(net.head_index(a))])
      result.push_back(a);
  }
  return result;
}

// --- JSON -------------------------------------------------------------------

namespace {

std::optional<double> optional_number(const detail::json& j, const char* key,
                                      std::string_view ctx)
{
  if (!j.contains(key)) return std::nullopt;
  return detail::get_number(j, key, ctx);
}

}  // namespace

Network parse_network(std::string_view json_text)
{
  using namespace detail;
  const json doc = parse_json(json_text, "network");
  require_known_keys(doc, {"safety_threshold", "nodes", "arcs"}, "network");

  double threshold = std::numeric_limits<double>::infinity();
  if (const auto& s = field(doc, "safety_threshold", "network"); !s.is_null()) {
    if (!s.is_number()) throw SchemaError("network: safety_threshold must be a number or null");
    threshold = s.get<double>();
  }

  std::vector<Node> nodes;
  for (const json& jn : get_array(doc, "nodes", "network")) {
    require_known_keys(jn, {"id", "layer", "x", "y", "region"}, "network.nodes[]");
    Node n;
    n.id = get_integer(jn, "id", "network.nodes[]");
    auto layer = parse_layer(get_string(jn, "layer", "network.nodes[]"));
    if (!layer) throw SchemaError("network.nodes[]: unknown layer for node " + std::to_string(n.id));
    n.layer = *layer;
    n.x = get_number(jn, "x", "network.nodes[]");
    n.y = get_number(jn, "y", "network.nodes[]");
    if (jn.contains("region")) n.region = static_cast<int>(get_integer(jn, "region", "network.nodes[]"));
    nodes.push_back(n);
  }

  std::vector<Arc> arcs;
  constexpr std::string_view ctx = "network.arcs[]";
  for (const json& ja : get_array(doc, "arcs", "network")) {
    require_known_keys(ja,
                       {"tail", "head", "kind", "time_min", "cost", "unsafety",
                        "capacity_users_min", "flow_cap_veh_min"},
                       ctx);
    Arc a;
    a.tail = get_integer(ja, "tail", ctx);
    a.head = get_integer(ja, "head", ctx);
    auto kind = parse_arc_kind(get_string(ja, "kind", ctx));
    if (!kind) throw SchemaError("network.arcs[]: unknown arc kind");
    a.kind = *kind;
    a.time_min = get_number(ja, "time_min", ctx);
    a.cost = get_number(ja, "cost", ctx);
    a.unsafety = optional_number(ja, "unsafety", ctx);
    a.capacity_users_min = optional_number(ja, "capacity_users_min", ctx);
    a.flow_cap_veh_min = optional_number(ja, "flow_cap_veh_min", ctx);
    arcs.push_back(a);
  }
  return Network(std::move(nodes), std::move(arcs), threshold);
}

Network load_network(const std::filesystem::path& path)
{
  return parse_network(read_text_file(path));
}

std::string network_to_json(const Network& net)
{
  using detail::ordered_json;
  ordered_json doc;
  doc["format"] = kFormatVersion;
  if (std::isfinite(net.safety_threshold()))
    doc["safety_threshold"] = net.safety_threshold();
  else
    doc["safety_threshold"] = nullptr;

  ordered_json nodes = ordered_json::array();
  for (const Node& n : net.nodes()) {
    ordered_json jn;
    jn["id"] = n.id;
    jn["layer"] = to_string(n.layer);
    jn["x"] = n.x;
    jn["y"] = n.y;
    if (n.region) jn["region"] = *n.region;
    nodes.push_back(std::move(jn));
  }
  ordered_json arcs = ordered_json::array();
  for (const Arc& a : net.arcs()) {
    ordered_json ja;
    ja["tail"] = a.tail;
    ja["head"] = a.head;
    ja["kind"] = to_string(a.kind);
    ja["time_min"] = a.time_min;
    ja["cost"] = a.cost;
    if (a.unsafety) ja["unsafety"] = *a.unsafety;
    if (a.capacity_users_min) ja["capacity_users_min"] = *a.capacity_users_min;
    if (a.flow_cap_veh_min) ja["flow_cap_veh_min"] = *a.flow_cap_veh_min;
    arcs.push_back(std::move(ja));
  }
  doc["nodes"] = std::move(nodes);
  doc["arcs"] = std::move(arcs);
  return doc.dump(1) + "\n";
}

}  // namespace equiflow
