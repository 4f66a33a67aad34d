#pragma once

#include "equiflow/config.hpp"
#include "equiflow/demand.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

struct OracleLimits
{
  int max_paths_per_demand = 12;
  int max_road_arcs = 8;
};

struct OracleResult
{
  bool feasible = false;
  double objective = 0.0;
  int paths = 0;  ///< simple paths enumerated over all demands
  int cuts = 0;   ///< tangent cuts added for the quadratic term
};

/// Reference optimum of the same program as assemble()+solve(), computed
/// independently over path-flow variables with a dense simplex (Bland's
/// rule). The quadratic insufficiency term is handled by tangent cutting
/// planes. Throws TooLarge beyond `limits`, InfeasibleStructure for a
/// demand without a route.
OracleResult brute_force_oracle(const Network& net, const DemandSet& dem, const ScenarioConfig& cfg,
                                ObjectiveKind kind, const OracleLimits& limits = {});

}  // namespace equiflow
