#include "checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace equiflow::testing {

namespace {

void note(double value, double& slot, std::string& worst, double& worst_value, const std::string& what)
{
  slot = std::max(slot, value);
  if (value > worst_value) {
    worst_value = value;
    worst = what;
  }
}

}  // namespace

FeasibilityReport check_feasibility(const FlowSolution& flows, const Network& net, const DemandSet& dem,
                                    const ScenarioConfig& cfg)
{
  FeasibilityReport r;
  double worst_value = 0.0;
  const std::size_t n_nodes = net.node_count();
  const std::size_t n_arcs = net.arc_count();

  std::vector<double> occupied(n_arcs, 0.0);
  std::vector<double> transit_users(n_arcs, 0.0);
  for (std::size_t m = 0; m < dem.demands.size(); ++m) {
    const Demand& d = dem.demands[m];
    std::vector<double> net_out(n_nodes, 0.0);
    double cost = 0.0;
    for (const ArcFlow& f : flows.demand_flows[m]) {
      const Arc& arc = net.arc(f.arc);
      const auto t = static_cast<std::size_t>(net.tail_index(f.arc));
      const auto h = static_cast<std::size_t>(net.head_index(f.arc));
      net_out[t] += f.flow;
      net_out[h] -= f.flow;
      cost += arc.cost * f.flow;
      note(-f.flow, r.negative, r.worst, worst_value, "negative flow");
      if (arc.kind == ArcKind::road) occupied[static_cast<std::size_t>(f.arc)] += f.flow;
      if (arc.kind == ArcKind::transit) transit_users[static_cast<std::size_t>(f.arc)] += f.flow;
      if (!d.bike_capable && (net.node(t).layer == Layer::bike || net.node(h).layer == Layer::bike))
        note(std::abs(f.flow), r.excluded_flow, r.worst, worst_value, "bike flow of bike-incapable demand");
    }
    const std::size_t o = *net.node_index(d.origin);
    const std::size_t dst = *net.node_index(d.destination);
    for (std::size_t v = 0; v < n_nodes; ++v) {
      double supply = 0.0;
      if (v == o) supply += d.rate;
      if (v == dst) supply -= d.rate;
      std::ostringstream what;
      what << "conservation demand " << d.id << " node " << net.node(v).id;
      note(std::abs(net_out[v] - supply), r.conservation, r.worst, worst_value, what.str());
    }
    if (cfg.budget_enabled) {
      const double budget = dem.find_region(d.region)->budget;
      note(cost - budget * d.rate, r.budget_excess, r.worst, worst_value, "budget demand " + std::to_string(d.id));
    }
  }

  std::vector<double> vehicles(n_arcs, 0.0);
  for (std::size_t a = 0; a < n_arcs; ++a) vehicles[a] = occupied[a];
  for (const ArcFlow& f : flows.rebalancing) {
    vehicles[static_cast<std::size_t>(f.arc)] += f.flow;
    note(-f.flow, r.negative, r.worst, worst_value, "negative rebalancing flow");
  }
  std::vector<double> balance(n_nodes, 0.0);
  double in_motion = 0.0;
  for (std::size_t a = 0; a < n_arcs; ++a) {
    const Arc& arc = net.arc(static_cast<ArcId>(a));
    if (arc.kind == ArcKind::road) {
      balance[static_cast<std::size_t>(net.tail_index(static_cast<ArcId>(a)))] += vehicles[a];
      balance[static_cast<std::size_t>(net.head_index(static_cast<ArcId>(a)))] -= vehicles[a];
      in_motion += arc.time_min * vehicles[a];
      if (arc.flow_cap_veh_min)
        note(vehicles[a] - *arc.flow_cap_veh_min, r.road_cap_excess, r.worst, worst_value, "road capacity");
    }
    if (arc.kind == ArcKind::transit && arc.capacity_users_min)
      note(transit_users[a] - *arc.capacity_users_min, r.transit_cap_excess, r.worst, worst_value,
           "transit capacity");
  }
  for (std::size_t v = 0; v < n_nodes; ++v)
    if (net.node(v).layer == Layer::road)
      note(std::abs(balance[v]), r.balance, r.worst, worst_value, "vehicle balance node " + std::to_string(net.node(v).id));
  note(in_motion - cfg.n_amod_max, r.fleet_excess, r.worst, worst_value, "fleet size");
  return r;
}

ReconstructionReport check_reconstruction(const PathAssignment& pa, const FlowSolution& flows, const Network& net,
                                          const DemandSet& dem)
{
  ReconstructionReport r;
  for (std::size_t m = 0; m < dem.demands.size(); ++m) {
    const Demand& d = dem.demands[m];
    const DemandPaths& dp = pa.demands[m];
    std::vector<double> rebuilt(net.arc_count(), 0.0);
    double shares = 0.0;
    double last_time = -1.0;
    for (const PathFlow& p : dp.paths) {
      shares += p.share;
      for (ArcId a : p.arcs) rebuilt[static_cast<std::size_t>(a)] += p.share;
      if (p.share <= 0 || p.arcs.empty() || p.nodes.front() != d.origin || p.nodes.back() != d.destination)
        r.paths_valid = false;
      for (std::size_t k = 0; k < p.arcs.size(); ++k) {
        const Arc& arc = net.arc(p.arcs[k]);
        if (arc.tail != p.nodes[k] || arc.head != p.nodes[k + 1] || !(flows.flow(m, p.arcs[k]) > 0))
          r.paths_valid = false;
      }
      if (p.time_min < last_time - 1e-12) r.times_sorted = false;
      last_time = p.time_min;
    }
    for (const CycleFlow& c : dp.cycles) {
      for (ArcId a : c.arcs) rebuilt[static_cast<std::size_t>(a)] += c.flow;
      r.cycle_time_flow += c.flow * c.time_min;
    }
    for (std::size_t a = 0; a < net.arc_count(); ++a)
      r.arc_error = std::max(r.arc_error, std::abs(rebuilt[a] - flows.flow(m, static_cast<ArcId>(a))));
    r.share_error = std::max(r.share_error, std::abs(shares - d.rate));
  }
  return r;
}

}  // namespace equiflow::testing
