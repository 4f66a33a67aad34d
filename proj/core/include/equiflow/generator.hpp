#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "equiflow/demand.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

struct Range
{
  double lo = 0.0;
  double hi = 0.0;
};

struct TransitLine
{
  enum class Orientation { row, col } orientation = Orientation::row;
  int index = 0;       ///< grid row (or column) the line runs along
  int stop_every = 1;  ///< cells between stops
};

/// Synthetic grid city. Every cell carries a walk, bike and road node; transit
/// lines add their own stop nodes; cells used by demands get origin and
/// destination nodes. Mode changes go through the walk layer.
struct GridCitySpec
{
  int rows = 4;
  int cols = 4;
  double spacing_m = 400.0;
  Range road_time_min{1.0, 2.0};
  Range walk_time_min{5.0, 7.0};
  Range bike_time_min{2.0, 3.0};
  Range transit_time_min{0.8, 1.2};  ///< per grid edge between stops
  Range bike_unsafety{0.0, 1.0};
  std::optional<double> road_flow_cap_veh_min;
  std::optional<double> transit_capacity_users_min;
  double amod_base_fare = 2.5;
  double amod_fare_per_min = 0.5;
  double transit_fare = 2.9;
  double bike_fare = 1.0;
  double amod_wait_min = 3.0;
  double transit_wait_min = 4.0;
  double bike_unlock_min = 1.0;
  double alight_min = 0.5;
  std::vector<TransitLine> transit_lines;
  int region_rows = 2;
  int region_cols = 2;
  Range population{1000.0, 5000.0};
  Range budget{3.0, 8.0};
  Range bike_incapable_share{0.1, 0.4};
  int demand_count = 6;  ///< origin-destination cell pairs before the bike split
  Range daily_users{50.0, 500.0};
  double operating_window_min = 1440.0;
  std::optional<double> safety_threshold;
};

/// Throws SpecError.
void check_spec(const GridCitySpec& spec);
/// Missing fields keep their defaults. Throws SchemaError / SpecError.
GridCitySpec parse_grid_spec(std::string_view json_text);
GridCitySpec load_grid_spec(const std::filesystem::path& path);
std::string grid_spec_to_json(const GridCitySpec& spec);

/// Deterministic in (spec, seed). Throws SpecError.
std::pair<Network, DemandSet> generate_grid_city(const GridCitySpec& spec, std::uint64_t seed);

}  // namespace equiflow
