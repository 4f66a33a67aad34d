#include "equiflow/generator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "equiflow/error.hpp"
#include "equiflow/format.hpp"
#include "equiflow/rng.hpp"
#include "json_util.hpp"

namespace equiflow {

namespace {

void check_range(const Range& r, const char* name, bool allow_zero = true)
{
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo < 0 || r.hi < r.lo || (!allow_zero && r.lo <= 0))
    throw SpecError(std::string("grid spec: ") + name + " must be a range 0 " + (allow_zero ? "<=" : "<") +
                    " lo <= hi");
}

void check_nonneg(double v, const char* name)
{
  if (!std::isfinite(v) || v < 0) throw SpecError(std::string("grid spec: ") + name + " must be >= 0");
}

}  // namespace

void check_spec(const GridCitySpec& s)
{
  if (s.rows < 1 || s.cols < 1 || s.rows * s.cols < 2) throw SpecError("grid spec: grid needs at least two cells");
  if (!(s.spacing_m > 0)) throw SpecError("grid spec: spacing_m must be > 0");
  check_range(s.road_time_min, "road_time_min", false);
  check_range(s.walk_time_min, "walk_time_min", false);
  check_range(s.bike_time_min, "bike_time_min", false);
  check_range(s.transit_time_min, "transit_time_min", false);
  check_range(s.bike_unsafety, "bike_unsafety");
  check_range(s.population, "population", false);
  check_range(s.budget, "budget");
  check_range(s.daily_users, "daily_users", false);
  check_range(s.bike_incapable_share, "bike_incapable_share");
  if (s.bike_incapable_share.hi > 1) throw SpecError("grid spec: bike_incapable_share must lie in [0, 1]");
  if (s.road_flow_cap_veh_min) check_nonneg(*s.road_flow_cap_veh_min, "road_flow_cap_veh_min");
  if (s.transit_capacity_users_min) check_nonneg(*s.transit_capacity_users_min, "transit_capacity_users_min");
  if (s.safety_threshold) check_nonneg(*s.safety_threshold, "safety_threshold");
  check_nonneg(s.amod_base_fare, "amod_base_fare");
  check_nonneg(s.amod_fare_per_min, "amod_fare_per_min");
  check_nonneg(s.transit_fare, "transit_fare");
  check_nonneg(s.bike_fare, "bike_fare");
  check_nonneg(s.amod_wait_min, "amod_wait_min");
  check_nonneg(s.transit_wait_min, "transit_wait_min");
  check_nonneg(s.bike_unlock_min, "bike_unlock_min");
  check_nonneg(s.alight_min, "alight_min");
  if (!(s.operating_window_min > 0)) throw SpecError("grid spec: operating_window_min must be > 0");
  if (s.region_rows < 1 || s.region_cols < 1 || s.region_rows > s.rows || s.region_cols > s.cols)
    throw SpecError("grid spec: region blocks must tile the grid");
  const long long cells = static_cast<long long>(s.rows) * s.cols;
  if (s.demand_count < 1 || s.demand_count > cells * (cells - 1))
    throw SpecError("grid spec: demand_count must lie in [1, cells*(cells-1)]");
  for (const TransitLine& line : s.transit_lines) {
    const int limit = line.orientation == TransitLine::Orientation::row ? s.rows : s.cols;
    const int length = line.orientation == TransitLine::Orientation::row ? s.cols : s.rows;
    if (line.index < 0 || line.index >= limit) throw SpecError("grid spec: transit line index out of range");
    if (line.stop_every < 1 || line.stop_every >= length)
      throw SpecError("grid spec: transit line needs stop_every in [1, line length - 1]");
  }
}

namespace {

using detail::json;

Range get_range(const json& j, const char* key, Range fallback)
{
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
    throw SchemaError(std::string("grid spec: ") + key + " must be [lo, hi]");
  return {v[0].get<double>(), v[1].get<double>()};
}

std::optional<double> get_optional(const json& j, const char* key, std::optional<double> fallback)
{
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_null()) return std::nullopt;
  return detail::get_number(j, key, "grid spec");
}

}  // namespace

GridCitySpec parse_grid_spec(std::string_view json_text)
{
  const json doc = detail::parse_json(json_text, "grid spec");
  detail::require_known_keys(
      doc,
      {"rows", "cols", "spacing_m", "road_time_min", "walk_time_min", "bike_time_min", "transit_time_min",
       "bike_unsafety", "road_flow_cap_veh_min", "transit_capacity_users_min", "amod_base_fare", "amod_fare_per_min",
       "transit_fare", "bike_fare", "amod_wait_min", "transit_wait_min", "bike_unlock_min", "alight_min",
       "transit_lines", "region_rows", "region_cols", "population", "budget", "bike_incapable_share", "demand_count",
       "daily_users", "operating_window_min", "safety_threshold"},
      "grid spec");
  GridCitySpec s;
  auto integer = [&](const char* key, int& out) {
    if (doc.contains(key)) out = static_cast<int>(detail::get_integer(doc, key, "grid spec"));
  };
  auto number = [&](const char* key, double& out) {
    if (doc.contains(key)) out = detail::get_number(doc, key, "grid spec");
  };
  integer("rows", s.rows);
  integer("cols", s.cols);
  number("spacing_m", s.spacing_m);
  s.road_time_min = get_range(doc, "road_time_min", s.road_time_min);
  s.walk_time_min = get_range(doc, "walk_time_min", s.walk_time_min);
  s.bike_time_min = get_range(doc, "bike_time_min", s.bike_time_min);
  s.transit_time_min = get_range(doc, "transit_time_min", s.transit_time_min);
  s.bike_unsafety = get_range(doc, "bike_unsafety", s.bike_unsafety);
  s.road_flow_cap_veh_min = get_optional(doc, "road_flow_cap_veh_min", s.road_flow_cap_veh_min);
  s.transit_capacity_users_min = get_optional(doc, "transit_capacity_users_min", s.transit_capacity_users_min);
  number("amod_base_fare", s.amod_base_fare);
  number("amod_fare_per_min", s.amod_fare_per_min);
  number("transit_fare", s.transit_fare);
  number("bike_fare", s.bike_fare);
  number("amod_wait_min", s.amod_wait_min);
  number("transit_wait_min", s.transit_wait_min);
  number("bike_unlock_min", s.bike_unlock_min);
  number("alight_min", s.alight_min);
  if (doc.contains("transit_lines")) {
    for (const json& jl : detail::get_array(doc, "transit_lines", "grid spec")) {
      detail::require_known_keys(jl, {"orientation", "index", "stop_every"}, "grid spec transit line");
      TransitLine line;
      const std::string o = detail::get_string(jl, "orientation", "grid spec transit line");
      if (o == "row") line.orientation = TransitLine::Orientation::row;
      else if (o == "col") line.orientation = TransitLine::Orientation::col;
      else throw SchemaError("grid spec: transit line orientation must be \"row\" or \"col\"");
      line.index = static_cast<int>(detail::get_integer(jl, "index", "grid spec transit line"));
      line.stop_every = static_cast<int>(detail::get_integer(jl, "stop_every", "grid spec transit line"));
      s.transit_lines.push_back(line);
    }
  }
  integer("region_rows", s.region_rows);
  integer("region_cols", s.region_cols);
  s.population = get_range(doc, "population", s.population);
  s.budget = get_range(doc, "budget", s.budget);
  s.bike_incapable_share = get_range(doc, "bike_incapable_share", s.bike_incapable_share);
  integer("demand_count", s.demand_count);
  s.daily_users = get_range(doc, "daily_users", s.daily_users);
  number("operating_window_min", s.operating_window_min);
  s.safety_threshold = get_optional(doc, "safety_threshold", s.safety_threshold);
  check_spec(s);
  return s;
}

GridCitySpec load_grid_spec(const std::filesystem::path& path) { return parse_grid_spec(read_text_file(path)); }

std::string grid_spec_to_json(const GridCitySpec& s)
{
  using detail::ordered_json;
  auto range = [](const Range& r) { return ordered_json::array({r.lo, r.hi}); };
  auto optional = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["rows"] = s.rows;
  doc["cols"] = s.cols;
  doc["spacing_m"] = s.spacing_m;
  doc["road_time_min"] = range(s.road_time_min);
  doc["walk_time_min"] = range(s.walk_time_min);
  doc["bike_time_min"] = range(s.bike_time_min);
  doc["transit_time_min"] = range(s.transit_time_min);
  doc["bike_unsafety"] = range(s.bike_unsafety);
  doc["road_flow_cap_veh_min"] = optional(s.road_flow_cap_veh_min);
  doc["transit_capacity_users_min"] = optional(s.transit_capacity_users_min);
  doc["amod_base_fare"] = s.amod_base_fare;
  doc["amod_fare_per_min"] = s.amod_fare_per_min;
  doc["transit_fare"] = s.transit_fare;
  doc["bike_fare"] = s.bike_fare;
  doc["amod_wait_min"] = s.amod_wait_min;
  doc["transit_wait_min"] = s.transit_wait_min;
  doc["bike_unlock_min"] = s.bike_unlock_min;
  doc["alight_min"] = s.alight_min;
  ordered_json lines = ordered_json::array();
  for (const TransitLine& l : s.transit_lines)
    lines.push_back({{"orientation", l.orientation == TransitLine::Orientation::row ? "row" : "col"},
                     {"index", l.index},
                     {"stop_every", l.stop_every}});
  doc["transit_lines"] = std::move(lines);
  doc["region_rows"] = s.region_rows;
  doc["region_cols"] = s.region_cols;
  doc["population"] = range(s.population);
  doc["budget"] = range(s.budget);
  doc["bike_incapable_share"] = range(s.bike_incapable_share);
  doc["demand_count"] = s.demand_count;
  doc["daily_users"] = range(s.daily_users);
  doc["operating_window_min"] = s.operating_window_min;
  doc["safety_threshold"] = optional(s.safety_threshold);
  return doc.dump(1) + "\n";
}

std::pair<Network, DemandSet> generate_grid_city(const GridCitySpec& s, std::uint64_t seed)
{
  check_spec(s);
  const int cells = s.rows * s.cols;
  auto cell = [&](int r, int c) { return r * s.cols + c; };
  auto region_of = [&](int r, int c) { return (r * s.region_rows / s.rows) * s.region_cols + c * s.region_cols / s.cols; };

  // Sequential id blocks: walk, bike, road, transit stops, origins, destinations.
  const NodeId walk0 = 0, bike0 = cells, road0 = 2 * static_cast<NodeId>(cells);
  NodeId next_id = 3 * static_cast<NodeId>(cells);
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  for (auto [base, layer] : {std::pair{walk0, Layer::walk}, {bike0, Layer::bike}, {road0, Layer::road}})
    for (int r = 0; r < s.rows; ++r)
      for (int c = 0; c < s.cols; ++c)
        nodes.push_back({base + cell(r, c), layer, c * s.spacing_m, r * s.spacing_m, std::nullopt});

  // Movement arcs: one draw per undirected grid edge, used in both directions.
  RandomStream road_rng(seed, "road"), walk_rng(seed, "walk"), bike_rng(seed, "bike"), transit_rng(seed, "transit");
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < s.rows; ++r)
    for (int c = 0; c < s.cols; ++c) {
      if (c + 1 < s.cols) edges.emplace_back(cell(r, c), cell(r, c + 1));
      if (r + 1 < s.rows) edges.emplace_back(cell(r, c), cell(r + 1, c));
    }
  for (auto [u, v] : edges) {
    const double t = road_rng.uniform(s.road_time_min.lo, s.road_time_min.hi);
    for (auto [a, b] : {std::pair{u, v}, {v, u}}) {
      Arc arc{road0 + a, road0 + b, ArcKind::road, t, s.amod_fare_per_min * t, {}, {}, s.road_flow_cap_veh_min};
      arcs.push_back(arc);
    }
  }
  for (auto [u, v] : edges) {
    const double t = walk_rng.uniform(s.walk_time_min.lo, s.walk_time_min.hi);
    for (auto [a, b] : {std::pair{u, v}, {v, u}}) arcs.push_back({walk0 + a, walk0 + b, ArcKind::walk, t, 0.0, {}, {}, {}});
  }
  for (auto [u, v] : edges) {
    const double t = bike_rng.uniform(s.bike_time_min.lo, s.bike_time_min.hi);
    const double unsafety = bike_rng.uniform(s.bike_unsafety.lo, s.bike_unsafety.hi);
    for (auto [a, b] : {std::pair{u, v}, {v, u}}) arcs.push_back({bike0 + a, bike0 + b, ArcKind::bike, t, 0.0, unsafety, {}, {}});
  }

  // Transit lines: stop nodes of their own, consecutive stops linked both ways.
  std::vector<std::pair<NodeId, int>> stops;  // (stop node, cell)
  for (const TransitLine& line : s.transit_lines) {
    const bool row = line.orientation == TransitLine::Orientation::row;
    const int length = row ? s.cols : s.rows;
    std::vector<int> positions;
    for (int p = 0; p < length; p += line.stop_every) positions.push_back(p);
    if (positions.back() != length - 1) positions.push_back(length - 1);
    std::vector<double> edge_time(static_cast<std::size_t>(length - 1));
    for (double& t : edge_time) t = transit_rng.uniform(s.transit_time_min.lo, s.transit_time_min.hi);
    std::vector<NodeId> ids;
    for (int p : positions) {
      const int r = row ? line.index : p;
      const int c = row ? p : line.index;
      const NodeId id = next_id++;
      nodes.push_back({id, Layer::transit, c * s.spacing_m, r * s.spacing_m, std::nullopt});
      stops.emplace_back(id, cell(r, c));
      ids.push_back(id);
    }
    for (std::size_t k = 0; k + 1 < positions.size(); ++k) {
      double t = 0.0;
      for (int p = positions[k]; p < positions[k + 1]; ++p) t += edge_time[static_cast<std::size_t>(p)];
      arcs.push_back({ids[k], ids[k + 1], ArcKind::transit, t, 0.0, {}, s.transit_capacity_users_min, {}});
      arcs.push_back({ids[k + 1], ids[k], ArcKind::transit, t, 0.0, {}, s.transit_capacity_users_min, {}});
    }
  }

  // Mode switches through the walk layer.
  for (int k = 0; k < cells; ++k) {
    arcs.push_back({walk0 + k, road0 + k, ArcKind::mode_switch, s.amod_wait_min, s.amod_base_fare, {}, {}, {}});
    arcs.push_back({road0 + k, walk0 + k, ArcKind::mode_switch, s.alight_min, 0.0, {}, {}, {}});
    arcs.push_back({walk0 + k, bike0 + k, ArcKind::mode_switch, s.bike_unlock_min, s.bike_fare, {}, {}, {}});
    arcs.push_back({bike0 + k, walk0 + k, ArcKind::mode_switch, s.alight_min, 0.0, {}, {}, {}});
  }
  for (auto [id, k] : stops) {
    arcs.push_back({walk0 + k, id, ArcKind::mode_switch, s.transit_wait_min, s.transit_fare, {}, {}, {}});
    arcs.push_back({id, walk0 + k, ArcKind::mode_switch, s.alight_min, 0.0, {}, {}, {}});
  }

  // Regions.
  RandomStream region_rng(seed, "region");
  DemandSet dem;
  dem.operating_window_min = s.operating_window_min;
  std::map<int, double> share;
  for (int rid = 0; rid < s.region_rows * s.region_cols; ++rid) {
    Region region;
    region.id = rid;
    region.population = std::round(region_rng.uniform(s.population.lo, s.population.hi));
    if (region.population <= 0) region.population = 1.0;
    region.budget = region_rng.uniform(s.budget.lo, s.budget.hi);
    share[rid] = region_rng.uniform(s.bike_incapable_share.lo, s.bike_incapable_share.hi);
    dem.regions.push_back(region);
  }

  // Demands: distinct ordered cell pairs.
  RandomStream demand_rng(seed, "demand");
  std::set<std::pair<int, int>> pairs;
  std::vector<std::pair<int, int>> order;
  while (static_cast<int>(order.size()) < s.demand_count) {
    const int o = static_cast<int>(demand_rng.below(static_cast<std::uint64_t>(cells)));
    int d = static_cast<int>(demand_rng.below(static_cast<std::uint64_t>(cells - 1)));
    if (d >= o) ++d;
    if (pairs.insert({o, d}).second) order.emplace_back(o, d);
  }
  std::map<int, NodeId> origin_node, destination_node;
  for (auto [o, d] : order) {
    origin_node.emplace(o, 0);
    destination_node.emplace(d, 0);
  }
  for (auto& [k, id] : origin_node) {
    id = next_id++;
    nodes.push_back({id, Layer::origin, (k % s.cols) * s.spacing_m, (k / s.cols) * s.spacing_m,
                     region_of(k / s.cols, k % s.cols)});
    arcs.push_back({id, walk0 + k, ArcKind::mode_switch, 0.0, 0.0, {}, {}, {}});
  }
  for (auto& [k, id] : destination_node) {
    id = next_id++;
    nodes.push_back({id, Layer::destination, (k % s.cols) * s.spacing_m, (k / s.cols) * s.spacing_m, std::nullopt});
    arcs.push_back({walk0 + k, id, ArcKind::mode_switch, 0.0, 0.0, {}, {}, {}});
  }
  for (auto [o, d] : order) {
    Demand dm;
    dm.id = static_cast<int>(dem.demands.size());
    dm.origin = origin_node.at(o);
    dm.destination = destination_node.at(d);
    dm.rate = std::round(demand_rng.uniform(s.daily_users.lo, s.daily_users.hi)) / s.operating_window_min;
    if (dm.rate <= 0) dm.rate = 1.0 / s.operating_window_min;
    dm.region = region_of(o / s.cols, o % s.cols);
    dm.bike_capable = true;
    dem.demands.push_back(dm);
  }
  dem = split_by_bike_share(dem, share);

  const double threshold = s.safety_threshold.value_or(std::numeric_limits<double>::infinity());
  return {Network(std::move(nodes), std::move(arcs), threshold), std::move(dem)};
}

}  // namespace equiflow
