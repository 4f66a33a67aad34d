#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "equiflow/network.hpp"

namespace equiflow {

struct Region
{
  int id = 0;
  double population = 0.0;
  double budget = 0.0;  ///< currency per trip, bounds the mean cost of each demand
};

struct Demand
{
  int id = 0;
  NodeId origin = 0;
  NodeId destination = 0;
  double rate = 0.0;  ///< users/min
  int region = 0;
  bool bike_capable = true;
};

struct DemandSet
{
  std::vector<Region> regions;
  std::vector<Demand> demands;
  double operating_window_min = 1440.0;

  const Region* find_region(int id) const;
  /// Position of region `id` in `regions`, -1 when absent.
  int region_position(int id) const;
  double total_population() const;
  double total_rate() const;
};

/// Parses the demand JSON format. Daily user counts become rates
/// daily_users / operating_window_min; zero-count demands are dropped.
/// `window_override` replaces the document's window when set.
/// Throws SchemaError or PartitionError.
DemandSet parse_demand(std::string_view json_text,
                       std::optional<double> window_override = std::nullopt);
DemandSet load_demand(const std::filesystem::path& path,
                      std::optional<double> window_override = std::nullopt);
std::string demand_to_json(const DemandSet& dem);

/// Splits every bike-capable demand into a bike-capable part (1-share)*rate
/// and a bike-incapable part share*rate, dropping zero-rate halves. Regions
/// absent from `share_incapable` use share 0. Ids are renumbered in order.
DemandSet split_by_bike_share(const DemandSet& dem, const std::map<int, double>& share_incapable);

/// Cross-checks demand endpoints and regions against a network.
std::vector<Violation> check_demand_references(const Network& net, const DemandSet& dem);

}  // namespace equiflow
