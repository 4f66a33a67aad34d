#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "equiflow/demand.hpp"
#include "equiflow/flows.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

struct PathFlow
{
  std::vector<NodeId> nodes;
  std::vector<ArcId> arcs;
  double share = 0.0;  ///< users/min
  double time_min = 0.0;
  double cost = 0.0;
  std::string mode_set;       ///< sorted, '+'-joined movement kinds
  std::string dominant_mode;  ///< movement kind with the largest time share
};

struct CycleFlow
{
  std::vector<NodeId> nodes;  ///< closed: first == last
  std::vector<ArcId> arcs;
  double flow = 0.0;
  double time_min = 0.0;
};

struct DemandPaths
{
  int demand_id = 0;
  double rate = 0.0;
  std::vector<PathFlow> paths;
  std::vector<CycleFlow> cycles;
};

struct PathAssignment
{
  std::vector<DemandPaths> demands;
};

/// Flows below this are treated as zero before decomposition.
inline constexpr double kDustThreshold = 1e-9;

/// Minimum-time source→sink path over arcs with positive `residual` (dense by
/// arc id); ties go to the lexicographically smaller node-id sequence.
std::optional<std::vector<ArcId>> shortest_positive_path(const Network& net, std::span<const double> residual,
                                                         std::size_t source, std::size_t sink);

/// Shortest-first path extraction with bottleneck subtraction, then cycle
/// extraction on what remains. Throws ConservationViolation when more than
/// 1000·solver_tolerance of flow cannot be attributed to paths or cycles.
PathAssignment decompose(const FlowSolution& flows, const Network& net, const DemandSet& dem,
                         double solver_tolerance = 1e-8);

/// paths.csv: demand,path,share,time_min,cost,mode_set,dominant_mode,nodes
std::string paths_to_csv(const PathAssignment& pa);
/// cycles.csv: demand,cycle,flow,time_min,nodes
std::string cycles_to_csv(const PathAssignment& pa);

}  // namespace equiflow
