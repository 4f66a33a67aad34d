#pragma once

#include <map>
#include <string>
#include <vector>

#include "equiflow/demand.hpp"
#include "equiflow/flows.hpp"
#include "equiflow/network.hpp"
#include "equiflow/paths.hpp"

namespace equiflow {

struct DemandMetrics
{
  int demand_id = 0;
  int region = 0;
  double rate = 0.0;
  double mean_time_min = 0.0;
  double insufficiency_min = 0.0;  ///< max(0, mean time - threshold)
  double cost = 0.0;               ///< mean fare per user
};

struct RegionMetrics
{
  int region = 0;
  double population = 0.0;
  double rate = 0.0;
  double insufficiency_sq = 0.0;  ///< rate-weighted mean of squared insufficiency, min²
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

struct HistogramRow
{
  double bin_start = 0.0;
  double bin_end = 0.0;
  std::string mode;
  double users_per_min = 0.0;
};

struct MetricsReport
{
  double t_suff_min = 0.0;
  double total_rate = 0.0;
  double total_travel_time = 0.0;        ///< Σ_a t_a Σ_m x_a^m, min·users/min
  double avg_travel_time = 0.0;          ///< min/user
  double commute_insufficiency = 0.0;    ///< population-weighted, min²
  double rebalancing_time = 0.0;         ///< Σ_a t_a x_a^R
  double vehicles_in_motion = 0.0;       ///< Σ_road t_a (x_a^R + Σ_m x_a^m)
  std::vector<DemandMetrics> demands;
  std::vector<RegionMetrics> regions;
  /// Share of users per dominant mode and per mode set (filled when paths
  /// are supplied).
  std::map<std::string, double> dominant_mode_share;
  std::map<std::string, double> mode_set_share;
};

/// Scores any flow, independently of the solver that produced it.
MetricsReport evaluate(const FlowSolution& flows, const DemandSet& dem, const Network& net, double t_suff_min);
/// Same plus mode shares from a decomposition.
MetricsReport evaluate(const FlowSolution& flows, const DemandSet& dem, const Network& net, double t_suff_min,
                       const PathAssignment& paths);

/// Population-weighted insufficiency from per-region values.
double population_weighted(const std::vector<double>& population, const std::vector<double>& u);

/// User rate per (time bin, dominant mode) from path times; bin b covers
/// [b·w, (b+1)·w). Rows sorted by bin, then mode.
std::vector<HistogramRow> histogram(const PathAssignment& paths, double bin_width_min = 1.0);
/// User rate per bin of per-demand mean trip time, mode "all".
std::vector<HistogramRow> mean_time_histogram(const MetricsReport& report, double bin_width_min = 1.0);

std::string histogram_to_csv(const std::vector<HistogramRow>& rows);
/// heatmap.csv: region,x,y,u_r
std::string heatmap_to_csv(const MetricsReport& report);
/// metrics.json with every scalar and the per-region and per-demand tables.
std::string metrics_to_json(const MetricsReport& report, ObjectiveKind kind);

}  // namespace equiflow
