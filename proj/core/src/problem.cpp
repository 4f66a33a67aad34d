#include "equiflow/problem.hpp"

#include <algorithm>
#include <cmath>

#include "equiflow/error.hpp"

namespace equiflow {

std::string_view to_string(RowFamily family)
{
  switch (family) {
    case RowFamily::conservation: return "conservation";
    case RowFamily::amod_balance: return "amod-balance";
    case RowFamily::fleet: return "fleet";
    case RowFamily::budget: return "budget";
    case RowFamily::road_cap: return "road-cap";
    case RowFamily::transit_cap: return "transit-cap";
    case RowFamily::slack: return "slack";
  }
  return "unknown";
}

void VariableIndex::add_demand(std::vector<ArcId> arcs)
{
  const int demand = static_cast<int>(demand_arcs_.size());
  demand_offset_.push_back(static_cast<int>(columns_.size()));
  for (ArcId a : arcs) columns_.push_back({ColumnType::demand_flow, demand, a});
  demand_arcs_.push_back(std::move(arcs));
}

void VariableIndex::set_rebalancing(std::vector<ArcId> road_arcs)
{
  rebalancing_offset_ = static_cast<int>(columns_.size());
  for (ArcId a : road_arcs) columns_.push_back({ColumnType::rebalancing, -1, a});
  road_arcs_ = std::move(road_arcs);
}

void VariableIndex::add_insufficiency()
{
  epsilon_offset_ = static_cast<int>(columns_.size());
  for (int m = 0; m < static_cast<int>(demand_arcs_.size()); ++m)
    columns_.push_back({ColumnType::insufficiency, m, -1});
}

std::optional<int> VariableIndex::flow_column(int demand, ArcId a) const
{
  if (demand < 0 || static_cast<std::size_t>(demand) >= demand_arcs_.size()) return std::nullopt;
  const auto& arcs = demand_arcs_[static_cast<std::size_t>(demand)];
  auto it = std::lower_bound(arcs.begin(), arcs.end(), a);
  if (it == arcs.end() || *it != a) return std::nullopt;
  return demand_offset(demand) + static_cast<int>(it - arcs.begin());
}

std::optional<int> VariableIndex::rebalancing_column(ArcId a) const
{
  auto it = std::lower_bound(road_arcs_.begin(), road_arcs_.end(), a);
  if (it == road_arcs_.end() || *it != a) return std::nullopt;
  return rebalancing_offset_ + static_cast<int>(it - road_arcs_.begin());
}

std::optional<int> VariableIndex::epsilon_column(int demand) const
{
  if (epsilon_offset_ < 0 || demand < 0 || static_cast<std::size_t>(demand) >= demand_arcs_.size())
    return std::nullopt;
  return epsilon_offset_ + demand;
}

std::size_t StandardProblem::count_rows(RowFamily family) const
{
  auto pred = [family](const RowTag& t) { return t.family == family; };
  return static_cast<std::size_t>(std::count_if(eq_rows.begin(), eq_rows.end(), pred) +
                                  std::count_if(in_rows.begin(), in_rows.end(), pred));
}

namespace {

using Triplet = Eigen::Triplet<double, int>;

SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& t)
{
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

}  // namespace

StandardProblem assemble(const Network& net, const DemandSet& dem, const ScenarioConfig& cfg,
                         ObjectiveKind kind)
{
  check_config(cfg);
  const bool comm_suff = kind == ObjectiveKind::comm_suff;
  const int demand_count = static_cast<int>(dem.demands.size());

  StandardProblem p;
  p.kind = kind;

  // Columns.
  std::vector<std::vector<int>> arc_columns(net.arc_count());
  for (int m = 0; m < demand_count; ++m) {
    const Demand& d = dem.demands[static_cast<std::size_t>(m)];
    if (!(d.rate > 0)) throw InfeasibleStructure("demand " + std::to_string(d.id) + " has no positive rate");
    if (!dem.find_region(d.region))
      throw InfeasibleStructure("demand " + std::to_string(d.id) + " references unknown region");
    std::vector<ArcId> arcs;
    try {
      arcs = reachable_arc_set(net, d.origin, d.destination, d.bike_capable);
    } catch (const DisconnectedDemand& e) {
      throw InfeasibleStructure("demand " + std::to_string(d.id) + ": " + e.what());
    }
    const int offset = static_cast<int>(p.index.size());
    for (std::size_t k = 0; k < arcs.size(); ++k)
      arc_columns[static_cast<std::size_t>(arcs[k])].push_back(offset + static_cast<int>(k));
    p.index.add_demand(std::move(arcs));
  }
  std::vector<ArcId> road_arcs;
  std::vector<ArcId> transit_arcs;
  for (ArcId a = 0; a < static_cast<ArcId>(net.arc_count()); ++a) {
    if (net.arc(a).kind == ArcKind::road) road_arcs.push_back(a);
    if (net.arc(a).kind == ArcKind::transit) transit_arcs.push_back(a);
  }
  p.index.set_rebalancing(road_arcs);
  if (comm_suff) p.index.add_insufficiency();
  const int n = static_cast<int>(p.index.size());
  p.free_column.assign(static_cast<std::size_t>(n), 0);

  // Equalities: per-demand conservation, then AMoD vehicle balance.
  std::vector<Triplet> eq;
  std::vector<double> b_eq;
  std::vector<int> row_of_node(net.node_count(), -1);
  for (int m = 0; m < demand_count; ++m) {
    const Demand& d = dem.demands[static_cast<std::size_t>(m)];
    const auto arcs = p.index.demand_arcs(m);
    std::vector<int> nodes;
    for (ArcId a : arcs) {
      nodes.push_back(net.tail_index(a));
      nodes.push_back(net.head_index(a));
    }
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    for (int v : nodes) {
      row_of_node[static_cast<std::size_t>(v)] = static_cast<int>(b_eq.size());
      p.eq_rows.push_back({RowFamily::conservation, m, v, -1});
      b_eq.push_back(0.0);
    }
    // out - in = rate at the origin, -rate at the destination
    b_eq[static_cast<std::size_t>(row_of_node[*net.node_index(d.origin)])] += d.rate;
    b_eq[static_cast<std::size_t>(row_of_node[*net.node_index(d.destination)])] -= d.rate;
    const int offset = p.index.demand_offset(m);
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const int col = offset + static_cast<int>(k);
      eq.emplace_back(row_of_node[static_cast<std::size_t>(net.tail_index(arcs[k]))], col, 1.0);
      eq.emplace_back(row_of_node[static_cast<std::size_t>(net.head_index(arcs[k]))], col, -1.0);
    }
    for (int v : nodes) row_of_node[static_cast<std::size_t>(v)] = -1;
  }
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    if (net.node(v).layer != Layer::road) continue;
    row_of_node[v] = static_cast<int>(b_eq.size());
    p.eq_rows.push_back({RowFamily::amod_balance, -1, static_cast<int>(v), -1});
    b_eq.push_back(0.0);
  }
  for (ArcId a : road_arcs) {
    const int tail_row = row_of_node[static_cast<std::size_t>(net.tail_index(a))];
    const int head_row = row_of_node[static_cast<std::size_t>(net.head_index(a))];
    auto add = [&](int col) {
      eq.emplace_back(tail_row, col, 1.0);
      eq.emplace_back(head_row, col, -1.0);
    };
    add(*p.index.rebalancing_column(a));
    for (int col : arc_columns[static_cast<std::size_t>(a)]) add(col);
  }

  // Inequalities.
  std::vector<Triplet> in;
  std::vector<double> b_in;
  auto new_in_row = [&](RowTag tag, double rhs) {
    p.in_rows.push_back(tag);
    b_in.push_back(rhs);
    return static_cast<int>(b_in.size()) - 1;
  };

  {
    const int row = new_in_row({RowFamily::fleet, -1, -1, -1}, cfg.n_amod_max);
    for (ArcId a : road_arcs) {
      const double t = net.arc(a).time_min;
      if (t == 0.0) continue;
      in.emplace_back(row, *p.index.rebalancing_column(a), t);
      for (int col : arc_columns[static_cast<std::size_t>(a)]) in.emplace_back(row, col, t);
    }
  }
  if (cfg.budget_enabled) {
    for (int m = 0; m < demand_count; ++m) {
      const Demand& d = dem.demands[static_cast<std::size_t>(m)];
      const double budget = dem.find_region(d.region)->budget;
      const int row = new_in_row({RowFamily::budget, m, -1, -1}, budget * d.rate);
      const auto arcs = p.index.demand_arcs(m);
      const int offset = p.index.demand_offset(m);
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        const double c = net.arc(arcs[k]).cost;
        if (c != 0.0) in.emplace_back(row, offset + static_cast<int>(k), c);
      }
    }
  }
  for (ArcId a : road_arcs) {
    const auto& cap = net.arc(a).flow_cap_veh_min;
    if (!cap) continue;
    const int row = new_in_row({RowFamily::road_cap, -1, -1, a}, *cap);
    in.emplace_back(row, *p.index.rebalancing_column(a), 1.0);
    for (int col : arc_columns[static_cast<std::size_t>(a)]) in.emplace_back(row, col, 1.0);
  }
  for (ArcId a : transit_arcs) {
    const auto& cap = net.arc(a).capacity_users_min;
    if (!cap) continue;
    const int row = new_in_row({RowFamily::transit_cap, -1, -1, a}, *cap);
    for (int col : arc_columns[static_cast<std::size_t>(a)]) in.emplace_back(row, col, 1.0);
  }
  if (comm_suff) {
    for (int m = 0; m < demand_count; ++m) {
      const Demand& d = dem.demands[static_cast<std::size_t>(m)];
      const int row = new_in_row({RowFamily::slack, m, -1, -1}, cfg.t_suff_min);
      const auto arcs = p.index.demand_arcs(m);
      const int offset = p.index.demand_offset(m);
      for (std::size_t k = 0; k < arcs.size(); ++k) {
        const double t = net.arc(arcs[k]).time_min;
        if (t != 0.0) in.emplace_back(row, offset + static_cast<int>(k), t / d.rate);
      }
      in.emplace_back(row, *p.index.epsilon_column(m), -1.0);
    }
  }

  p.A_eq = from_triplets(static_cast<int>(b_eq.size()), n, eq);
  p.b_eq = Eigen::Map<const Eigen::VectorXd>(b_eq.data(), static_cast<Eigen::Index>(b_eq.size()));
  p.A_in = from_triplets(static_cast<int>(b_in.size()), n, in);
  p.b_in = Eigen::Map<const Eigen::VectorXd>(b_in.data(), static_cast<Eigen::Index>(b_in.size()));

  // Objective: total travel time plus regularized rebalancing time; under
  // comm-suff the same linear term is weighted by gamma_time and the
  // population-weighted squared insufficiency enters through Q.
  const double weight = comm_suff ? cfg.gamma_time : 1.0;
  p.q = Eigen::VectorXd::Zero(n);
  for (int m = 0; m < demand_count; ++m) {
    const auto arcs = p.index.demand_arcs(m);
    const int offset = p.index.demand_offset(m);
    for (std::size_t k = 0; k < arcs.size(); ++k)
      p.q[offset + static_cast<int>(k)] = weight * net.arc(arcs[k]).time_min;
  }
  for (ArcId a : road_arcs)
    p.q[*p.index.rebalancing_column(a)] = weight * cfg.gamma_r * net.arc(a).time_min;

  std::vector<Triplet> quad;
  if (comm_suff) {
    const double n_pop = dem.total_population();
    std::vector<double> region_rate(dem.regions.size(), 0.0);
    for (const Demand& d : dem.demands)
      region_rate[static_cast<std::size_t>(dem.region_position(d.region))] += d.rate;
    for (int m = 0; m < demand_count; ++m) {
      const Demand& d = dem.demands[static_cast<std::size_t>(m)];
      const int r = dem.region_position(d.region);
      const double n_r = dem.regions[static_cast<std::size_t>(r)].population;
      if (!(n_r > 0) || !(n_pop > 0))
        throw ConfigError("region " + std::to_string(d.region) +
                          " has demands but zero population; insufficiency weight vanishes");
      const double coeff = 2.0 * n_r * d.rate / (n_pop * region_rate[static_cast<std::size_t>(r)]);
      const int col = *p.index.epsilon_column(m);
      quad.emplace_back(col, col, coeff);
      // Left free: minimizing its square already pins it at max(excess, 0).
      p.free_column[static_cast<std::size_t>(col)] = 1;
    }
  }
  p.Q = from_triplets(n, n, quad);
  return p;
}

Network apply_fare_policy(const Network& net, FarePolicy policy)
{
  if (policy == FarePolicy::nominal) return net;
  std::vector<Arc> arcs(net.arcs().begin(), net.arcs().end());
  for (ArcId a = 0; a < static_cast<ArcId>(arcs.size()); ++a) {
    Arc& arc = arcs[static_cast<std::size_t>(a)];
    if (policy == FarePolicy::free_all) {
      arc.cost = 0.0;
      continue;
    }
    const int h = net.head_index(a);
    const bool boards_transit = arc.kind == ArcKind::mode_switch && h >= 0 &&
                                net.node(static_cast<std::size_t>(h)).layer == Layer::transit;
    if (arc.kind == ArcKind::transit || boards_transit) arc.cost = 0.0;
  }
  return net.with_arcs(std::move(arcs));
}

}  // namespace equiflow
