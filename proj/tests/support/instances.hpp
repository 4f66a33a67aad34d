#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "equiflow/config.hpp"
#include "equiflow/demand.hpp"
#include "equiflow/generator.hpp"
#include "equiflow/network.hpp"

namespace equiflow::testing {

struct Instance
{
  Network network;
  DemandSet demand;
  ScenarioConfig config;
};

/// One origin, one destination, two routes: a 30 min free walk and a 10 min
/// AMoD ride costing 3. Rate 1 user/min, budget 1.5 per trip.
Instance two_route_instance(bool budget_enabled);

/// A single walk route of three arcs (2 + 3 + 4 min) at rate `rate`.
Instance single_path_instance(double rate);

/// Small grid-city variants whose demands have at most a dozen simple routes:
/// one row of two or three cells, optional transit line, varied budgets,
/// fleet size, capacities and sufficiency threshold.
Instance tiny_instance(int variant);
inline constexpr int kTinyVariants = 30;

/// 3×3 grid cities with one transit line and tight budgets, for ordering and
/// monotonicity properties.
Instance small_city(std::uint64_t seed);

/// 20×20 grid, 50 single-class demands, three transit lines.
GridCitySpec scale_spec();

}  // namespace equiflow::testing
