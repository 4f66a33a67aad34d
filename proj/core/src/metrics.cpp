#include "equiflow/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "equiflow/format.hpp"
#include "json_util.hpp"

namespace equiflow {

double population_weighted(const std::vector<double>& population, const std::vector<double>& u)
{
  double num = 0.0, den = 0.0;
  for (std::size_t r = 0; r < population.size(); ++r) {
    num += population[r] * u[r];
    den += population[r];
  }
  return den > 0 ? num / den : 0.0;
}

MetricsReport evaluate(const FlowSolution& flows, const DemandSet& dem, const Network& net, double t_suff_min)
{
  MetricsReport rep;
  rep.t_suff_min = t_suff_min;
  for (std::size_t m = 0; m < dem.demands.size(); ++m) {
    const Demand& d = dem.demands[m];
    DemandMetrics dm;
    dm.demand_id = d.id;
    dm.region = d.region;
    dm.rate = d.rate;
    double time = 0.0, cost = 0.0;
    for (const ArcFlow& f : flows.demand_flows[m]) {
      time += net.arc(f.arc).time_min * f.flow;
      cost += net.arc(f.arc).cost * f.flow;
    }
    dm.mean_time_min = time / d.rate;
    dm.cost = cost / d.rate;
    dm.insufficiency_min = std::max(0.0, dm.mean_time_min - t_suff_min);
    rep.total_travel_time += time;
    rep.total_rate += d.rate;
    rep.demands.push_back(dm);
  }
  rep.avg_travel_time = rep.total_rate > 0 ? rep.total_travel_time / rep.total_rate : 0.0;

  const auto total = flows.total_arc_flow(net.arc_count(), true);
  for (const ArcFlow& f : flows.rebalancing) rep.rebalancing_time += net.arc(f.arc).time_min * f.flow;
  for (ArcId a = 0; a < static_cast<ArcId>(net.arc_count()); ++a)
    if (net.arc(a).kind == ArcKind::road) rep.vehicles_in_motion += net.arc(a).time_min * total[static_cast<std::size_t>(a)];

  std::vector<double> population, u;
  for (const Region& region : dem.regions) {
    RegionMetrics rm;
    rm.region = region.id;
    rm.population = region.population;
    double weighted = 0.0, wx = 0.0, wy = 0.0;
    for (std::size_t m = 0; m < dem.demands.size(); ++m) {
      const Demand& d = dem.demands[m];
      if (d.region != region.id) continue;
      const DemandMetrics& dm = rep.demands[m];
      rm.rate += d.rate;
      weighted += d.rate * dm.insufficiency_min * dm.insufficiency_min;
      if (const Node* o = net.find_node(d.origin)) {
        wx += d.rate * o->x;
        wy += d.rate * o->y;
      }
    }
    if (rm.rate > 0) {
      rm.insufficiency_sq = weighted / rm.rate;
      rm.centroid_x = wx / rm.rate;
      rm.centroid_y = wy / rm.rate;
    } else {
      // No demand: plain mean of the region's origin nodes.
      int count = 0;
      for (const Node& node : net.nodes())
        if (node.layer == Layer::origin && node.region == region.id) {
          rm.centroid_x += node.x;
          rm.centroid_y += node.y;
          ++count;
        }
      if (count) {
        rm.centroid_x /= count;
        rm.centroid_y /= count;
      }
    }
    population.push_back(rm.population);
    u.push_back(rm.insufficiency_sq);
    rep.regions.push_back(rm);
  }
  rep.commute_insufficiency = population_weighted(population, u);
  return rep;
}

MetricsReport evaluate(const FlowSolution& flows, const DemandSet& dem, const Network& net, double t_suff_min,
                       const PathAssignment& paths)
{
  MetricsReport rep = evaluate(flows, dem, net, t_suff_min);
  double total = 0.0;
  for (const DemandPaths& d : paths.demands)
    for (const PathFlow& p : d.paths) {
      rep.dominant_mode_share[p.dominant_mode] += p.share;
      rep.mode_set_share[p.mode_set] += p.share;
      total += p.share;
    }
  if (total > 0) {
    for (auto& [k, v] : rep.dominant_mode_share) v /= total;
    for (auto& [k, v] : rep.mode_set_share) v /= total;
  }
  return rep;
}

namespace {

long long bin_of(double t, double w) { return static_cast<long long>(std::floor(t / w + 1e-9)); }

std::vector<HistogramRow> collect(const std::map<std::pair<long long, std::string>, double>& cells, double w)
{
  std::vector<HistogramRow> rows;
  for (const auto& [key, value] : cells)
    rows.push_back({static_cast<double>(key.first) * w, static_cast<double>(key.first + 1) * w, key.second, value});
  return rows;
}

}  // namespace

std::vector<HistogramRow> histogram(const PathAssignment& paths, double bin_width_min)
{
  std::map<std::pair<long long, std::string>, double> cells;
  for (const DemandPaths& d : paths.demands)
    for (const PathFlow& p : d.paths) cells[{bin_of(p.time_min, bin_width_min), p.dominant_mode}] += p.share;
  return collect(cells, bin_width_min);
}

std::vector<HistogramRow> mean_time_histogram(const MetricsReport& report, double bin_width_min)
{
  std::map<std::pair<long long, std::string>, double> cells;
  for (const DemandMetrics& d : report.demands) cells[{bin_of(d.mean_time_min, bin_width_min), "all"}] += d.rate;
  return collect(cells, bin_width_min);
}

std::string histogram_to_csv(const std::vector<HistogramRow>& rows)
{
  std::ostringstream out;
  out << "bin_start,bin_end,mode,users_per_min\n";
  for (const HistogramRow& r : rows)
    out << format_number(r.bin_start) << ',' << format_number(r.bin_end) << ',' << r.mode << ','
        << format_number(r.users_per_min) << '\n';
  return out.str();
}

std::string heatmap_to_csv(const MetricsReport& report)
{
  std::ostringstream out;
  out << "region,x,y,u_r\n";
  for (const RegionMetrics& r : report.regions)
    out << r.region << ',' << format_number(r.centroid_x) << ',' << format_number(r.centroid_y) << ','
        << format_number(r.insufficiency_sq) << '\n';
  return out.str();
}

std::string metrics_to_json(const MetricsReport& report, ObjectiveKind kind)
{
  using detail::ordered_json;
  using detail::report_number;
  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["objective_kind"] = to_string(kind);
  doc["t_suff_min"] = report_number(report.t_suff_min);
  doc["total_rate"] = report_number(report.total_rate);
  doc["avg_travel_time"] = report_number(report.avg_travel_time);
  doc["commute_insufficiency"] = report_number(report.commute_insufficiency);
  doc["total_travel_time"] = report_number(report.total_travel_time);
  doc["rebalancing_time"] = report_number(report.rebalancing_time);
  doc["vehicles_in_motion"] = report_number(report.vehicles_in_motion);
  ordered_json dominant = ordered_json::object(), sets = ordered_json::object();
  for (const auto& [k, v] : report.dominant_mode_share) dominant[k] = report_number(v);
  for (const auto& [k, v] : report.mode_set_share) sets[k] = report_number(v);
  doc["dominant_mode_share"] = std::move(dominant);
  doc["mode_set_share"] = std::move(sets);
  ordered_json regions = ordered_json::array();
  for (const RegionMetrics& r : report.regions) {
    ordered_json jr;
    jr["region"] = r.region;
    jr["population"] = report_number(r.population);
    jr["rate"] = report_number(r.rate);
    jr["u_r"] = report_number(r.insufficiency_sq);
    jr["centroid_x"] = report_number(r.centroid_x);
    jr["centroid_y"] = report_number(r.centroid_y);
    regions.push_back(std::move(jr));
  }
  doc["regions"] = std::move(regions);
  ordered_json demands = ordered_json::array();
  for (const DemandMetrics& d : report.demands) {
    ordered_json jd;
    jd["demand"] = d.demand_id;
    jd["region"] = d.region;
    jd["rate"] = report_number(d.rate);
    jd["mean_time_min"] = report_number(d.mean_time_min);
    jd["insufficiency_min"] = report_number(d.insufficiency_min);
    jd["mean_cost"] = report_number(d.cost);
    demands.push_back(std::move(jd));
  }
  doc["demands"] = std::move(demands);
  return doc.dump(1) + "\n";
}

}  // namespace equiflow
