#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "equiflow/config.hpp"
#include "equiflow/demand.hpp"
#include "equiflow/network.hpp"
#include "equiflow/problem.hpp"
#include "equiflow/solver.hpp"

namespace equiflow {

struct ArcFlow
{
  ArcId arc = -1;
  double flow = 0.0;  ///< users/min (vehicles/min for rebalancing)
};

/// Optimal flows of one solve, in model terms.
struct FlowSolution
{
  ObjectiveKind kind = ObjectiveKind::util_eff;
  SolveStatus status = SolveStatus::numerical_failure;
  double objective = 0.0;
  double duality_gap = 0.0;
  int iterations = 0;
  double max_violation = 0.0;
  /// Per demand (DemandSet order), arcs sorted by id; entries with
  /// |flow| ≤ kFlowDropThreshold are omitted.
  std::vector<std::vector<ArcFlow>> demand_flows;
  std::vector<ArcFlow> rebalancing;
  /// Solver-side insufficiency per demand; empty under util-eff.
  std::vector<double> epsilon;

  /// Flow of demand m on arc a (0 when absent).
  double flow(std::size_t m, ArcId a) const;
  /// Σ_m x_a^m + x_a^R for every arc of `net` (dense by arc id).
  std::vector<double> total_arc_flow(std::size_t arc_count, bool include_rebalancing) const;
};

inline constexpr double kFlowDropThreshold = 1e-13;

/// Maps a solver vector back onto demands and arcs.
FlowSolution extract_flows(const StandardProblem& p, const SolveResult& r);

/// flows.json: exact 17-digit values so that reports can be regenerated
/// bit-for-bit from the file alone.
std::string flows_to_json(const FlowSolution& fs, const DemandSet& dem);
/// Throws SchemaError when the file does not match `dem` or `net`.
FlowSolution parse_flows(std::string_view json_text, const DemandSet& dem, const Network& net);
FlowSolution load_flows(const std::filesystem::path& path, const DemandSet& dem, const Network& net);

}  // namespace equiflow
