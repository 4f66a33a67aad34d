#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "equiflow/config.hpp"
#include "equiflow/demand.hpp"
#include "equiflow/flows.hpp"
#include "equiflow/metrics.hpp"
#include "equiflow/network.hpp"
#include "equiflow/paths.hpp"
#include "equiflow/solver.hpp"

namespace equiflow {

/// Fare policy, safety-threshold override and unsafe-bike pruning.
Network prepare_network(const Network& net, const ScenarioConfig& cfg);

struct ScenarioOutcome
{
  ObjectiveKind kind = ObjectiveKind::util_eff;
  Network network;  ///< effective network after prepare_network
  SolveResult solve;
  FlowSolution flows;
  /// Present only when the solve is optimal.
  std::optional<MetricsReport> metrics;
  std::optional<PathAssignment> paths;

  bool ok() const { return metrics.has_value(); }
};

/// prepare → assemble → solve → decompose → evaluate. A non-optimal solve
/// yields an outcome without metrics or paths. Throws InfeasibleStructure,
/// ConfigError, ConservationViolation.
ScenarioOutcome run_scenario(const Network& net, const DemandSet& dem, const ScenarioConfig& cfg, ObjectiveKind kind);

/// Writes the scenario directory: config.json, network.json, demand.json
/// (`demand_text` verbatim), solve_log.txt and, on success, flows.json,
/// metrics.json, histogram.csv, histogram_mean.csv, heatmap.csv, paths.csv,
/// cycles.csv; on failure failure.json.
void write_scenario(const std::filesystem::path& dir, const ScenarioOutcome& outcome, const ScenarioConfig& cfg,
                    const DemandSet& dem, std::string_view demand_text);

/// Everything needed to rebuild reports from a scenario directory.
struct ScenarioRecord
{
  ScenarioConfig config;
  Network network;
  DemandSet demand;
  FlowSolution flows;
};

ScenarioRecord load_scenario(const std::filesystem::path& dir);
/// Rewrites paths.csv and cycles.csv from flows.json.
PathAssignment write_decomposition(const std::filesystem::path& dir);
/// Rewrites every derived file (metrics, histograms, heatmap, paths).
MetricsReport write_reports(const std::filesystem::path& dir);

}  // namespace equiflow
