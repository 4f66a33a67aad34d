#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "equiflow/error.hpp"
#include "equiflow/paths.hpp"
#include "equiflow/problem.hpp"
#include "json.hpp"
#include "support/instances.hpp"

using namespace equiflow;
using namespace equiflow::testing;

namespace {

bool close(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

std::vector<Instance> structure_instances()
{
  std::vector<Instance> out;
  for (int v = 0; v < kTinyVariants; ++v) out.push_back(tiny_instance(v));
  for (std::uint64_t s = 1; s <= 3; ++s) out.push_back(small_city(s));
  return out;
}

}  // namespace

TEST_CASE("single demand on a three-arc chain")
{
  const Instance in = single_path_instance(1.0);
  const StandardProblem lp = assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff);
  CHECK(lp.columns() == 3);
  CHECK(lp.count_rows(RowFamily::conservation) == 4);
  CHECK(lp.Q.nonZeros() == 0);
  CHECK(lp.count_rows(RowFamily::slack) == 0);

  const StandardProblem qp = assemble(in.network, in.demand, in.config, ObjectiveKind::comm_suff);
  CHECK(qp.columns() == 4);
  CHECK(qp.A_in.rows() == lp.A_in.rows() + 1);
  CHECK(qp.count_rows(RowFamily::slack) == 1);
  CHECK(qp.Q.nonZeros() == 1);
  CHECK(qp.Q.coeff(3, 3) > 0);
}

TEST_CASE("disabling the budget removes every budget row")
{
  Instance in = two_route_instance(true);
  CHECK(assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff).count_rows(RowFamily::budget) == 1);
  in.config.budget_enabled = false;
  for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff})
    CHECK(assemble(in.network, in.demand, in.config, kind).count_rows(RowFamily::budget) == 0);
}

TEST_CASE("column and row counts follow the per-family formulas")
{
  for (const Instance& in : structure_instances()) {
    const Network& net = in.network;
    std::size_t flow_columns = 0;
    std::size_t conservation = 0;
    for (const Demand& d : in.demand.demands) {
      const auto arcs = reachable_arc_set(net, d.origin, d.destination, d.bike_capable);
      flow_columns += arcs.size();
      std::set<int> nodes;
      for (ArcId a : arcs) {
        nodes.insert(net.tail_index(a));
        nodes.insert(net.head_index(a));
      }
      conservation += nodes.size();
    }
    std::size_t road_arcs = 0, road_nodes = 0, road_caps = 0, transit_caps = 0;
    for (const Arc& a : net.arcs()) {
      road_arcs += a.kind == ArcKind::road;
      road_caps += a.kind == ArcKind::road && a.flow_cap_veh_min.has_value();
      transit_caps += a.kind == ArcKind::transit && a.capacity_users_min.has_value();
    }
    for (const Node& v : net.nodes()) road_nodes += v.layer == Layer::road;
    const std::size_t demands = in.demand.demands.size();

    for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff}) {
      const bool qp = kind == ObjectiveKind::comm_suff;
      const StandardProblem p = assemble(net, in.demand, in.config, kind);
      CHECK(p.columns() == flow_columns + road_arcs + (qp ? demands : 0));
      CHECK(p.count_rows(RowFamily::conservation) == conservation);
      CHECK(p.count_rows(RowFamily::amod_balance) == road_nodes);
      CHECK(p.count_rows(RowFamily::fleet) == 1);
      CHECK(p.count_rows(RowFamily::budget) == (in.config.budget_enabled ? demands : 0));
      CHECK(p.count_rows(RowFamily::road_cap) == road_caps);
      CHECK(p.count_rows(RowFamily::transit_cap) == transit_caps);
      CHECK(p.count_rows(RowFamily::slack) == (qp ? demands : 0));
      CHECK(p.eq_rows.size() == static_cast<std::size_t>(p.A_eq.rows()));
      CHECK(p.in_rows.size() == static_cast<std::size_t>(p.A_in.rows()));
    }
  }
}

TEST_CASE("variable index is a bijection")
{
  const Instance in = small_city(2);
  const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::comm_suff);
  std::vector<int> hits(p.columns(), 0);
  for (int m = 0; m < static_cast<int>(in.demand.demands.size()); ++m) {
    for (ArcId a : p.index.demand_arcs(m)) {
      const auto col = p.index.flow_column(m, a);
      REQUIRE(col);
      ++hits[static_cast<std::size_t>(*col)];
      CHECK(p.index.column(static_cast<std::size_t>(*col)).arc == a);
      CHECK(p.index.column(static_cast<std::size_t>(*col)).demand == m);
    }
    ++hits[static_cast<std::size_t>(*p.index.epsilon_column(m))];
  }
  for (ArcId a : p.index.road_arcs()) ++hits[static_cast<std::size_t>(*p.index.rebalancing_column(a))];
  CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  CHECK_FALSE(p.index.flow_column(0, -5));
  CHECK_FALSE(p.index.epsilon_column(99));
}

TEST_CASE("every matrix coefficient comes from the model's coefficient set")
{
  for (const Instance& in : structure_instances()) {
    const Network& net = in.network;
    for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff}) {
      const StandardProblem p = assemble(net, in.demand, in.config, kind);
      for (int k = 0; k < p.A_eq.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(p.A_eq, k); it; ++it) CHECK(std::abs(it.value()) == 1.0);
      for (int k = 0; k < p.A_in.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(p.A_in, k); it; ++it) {
          const RowTag& tag = p.in_rows[static_cast<std::size_t>(it.row())];
          const ColumnTag& col = p.index.column(static_cast<std::size_t>(it.col()));
          const double v = it.value();
          switch (tag.family) {
            case RowFamily::fleet: CHECK(close(v, net.arc(col.arc).time_min)); break;
            case RowFamily::budget: CHECK(close(v, net.arc(col.arc).cost)); break;
            case RowFamily::road_cap:
            case RowFamily::transit_cap: CHECK(v == 1.0); break;
            case RowFamily::slack:
              if (col.type == ColumnType::insufficiency)
                CHECK(v == -1.0);
              else
                CHECK(close(v, net.arc(col.arc).time_min /
                                   in.demand.demands[static_cast<std::size_t>(col.demand)].rate));
              break;
            default: FAIL("unexpected inequality family");
          }
        }
      }
      // Linear objective: t_a on flows, gamma_R·t_a on rebalancing, scaled by
      // gamma_time under comm-suff.
      const double w = kind == ObjectiveKind::comm_suff ? in.config.gamma_time : 1.0;
      for (std::size_t j = 0; j < p.columns(); ++j) {
        const ColumnTag& col = p.index.column(j);
        const auto jj = static_cast<Eigen::Index>(j);
        if (col.type == ColumnType::demand_flow) CHECK(close(p.q[jj], w * net.arc(col.arc).time_min));
        if (col.type == ColumnType::rebalancing)
          CHECK(close(p.q[jj], w * in.config.gamma_r * net.arc(col.arc).time_min));
        if (col.type == ColumnType::insufficiency) CHECK(p.q[jj] == 0.0);
      }
    }
  }
}

TEST_CASE("quadratic term is diagonal and positive exactly on insufficiency columns")
{
  for (const Instance& in : structure_instances()) {
    const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::comm_suff);
    const DemandSet& dem = in.demand;
    std::vector<double> region_rate(dem.regions.size(), 0.0);
    for (const Demand& d : dem.demands) region_rate[static_cast<std::size_t>(dem.region_position(d.region))] += d.rate;
    int entries = 0;
    for (int k = 0; k < p.Q.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(p.Q, k); it; ++it) {
        ++entries;
        REQUIRE(it.row() == it.col());
        const ColumnTag& col = p.index.column(static_cast<std::size_t>(it.col()));
        REQUIRE(col.type == ColumnType::insufficiency);
        const Demand& d = dem.demands[static_cast<std::size_t>(col.demand)];
        const int r = dem.region_position(d.region);
        const double want = 2.0 * dem.regions[static_cast<std::size_t>(r)].population * d.rate /
                            (dem.total_population() * region_rate[static_cast<std::size_t>(r)]);
        CHECK(it.value() > 0);
        CHECK(close(it.value(), want));
      }
    CHECK(entries == static_cast<int>(dem.demands.size()));
  }
}

TEST_CASE("pushing a demand along one route satisfies its conservation rows exactly")
{
  for (const Instance& in : structure_instances()) {
    const Network& net = in.network;
    const StandardProblem p = assemble(net, in.demand, in.config, ObjectiveKind::comm_suff);
    for (int m = 0; m < static_cast<int>(in.demand.demands.size()); ++m) {
      const Demand& d = in.demand.demands[static_cast<std::size_t>(m)];
      std::vector<double> usable(net.arc_count(), 0.0);
      for (ArcId a : p.index.demand_arcs(m)) usable[static_cast<std::size_t>(a)] = 1.0;
      const auto route = shortest_positive_path(net, usable, *net.node_index(d.origin), *net.node_index(d.destination));
      REQUIRE(route);
      Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.columns()));
      double time = 0.0;
      for (ArcId a : *route) {
        x[*p.index.flow_column(m, a)] = d.rate;
        time += net.arc(a).time_min;
      }
      x[*p.index.epsilon_column(m)] = std::max(0.0, time - in.config.t_suff_min);
      const Eigen::VectorXd r = p.A_eq * x - p.b_eq;
      for (std::size_t i = 0; i < p.eq_rows.size(); ++i)
        if (p.eq_rows[i].family == RowFamily::conservation && p.eq_rows[i].demand == m)
          CHECK(r[static_cast<Eigen::Index>(i)] == 0.0);
      const Eigen::VectorXd s = p.A_in * x - p.b_in;
      for (std::size_t i = 0; i < p.in_rows.size(); ++i)
        if (p.in_rows[i].family == RowFamily::slack && p.in_rows[i].demand == m)
          CHECK(s[static_cast<Eigen::Index>(i)] <= 1e-12);
    }
  }
}

TEST_CASE("assembly errors")
{
  Instance in = single_path_instance(1.0);
  SUBCASE("negative fleet size")
  {
    in.config.n_amod_max = -1;
    CHECK_THROWS_AS(assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff), ConfigError);
  }
  SUBCASE("demand without a route")
  {
    in.demand.demands[0].destination = 11;
    CHECK_THROWS_AS(assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff), InfeasibleStructure);
  }
  SUBCASE("populated demand in an empty region under comm-suff")
  {
    in.demand.regions[0].population = 0;
    CHECK_NOTHROW(assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff));
    CHECK_THROWS_AS(assemble(in.network, in.demand, in.config, ObjectiveKind::comm_suff), ConfigError);
  }
}

TEST_CASE("fare policies")
{
  std::vector<Node> nodes = {{1, Layer::origin, 0, 0, 1},    {2, Layer::walk, 0, 0, {}},    {3, Layer::transit, 0, 0, {}},
                             {4, Layer::transit, 1, 0, {}},  {5, Layer::road, 0, 0, {}},    {6, Layer::road, 1, 0, {}},
                             {7, Layer::walk, 1, 0, {}},     {8, Layer::destination, 1, 0, {}}};
  auto mk = [](NodeId t, NodeId h, ArcKind k, double c) {
    Arc a;
    a.tail = t;
    a.head = h;
    a.kind = k;
    a.time_min = 1;
    a.cost = c;
    return a;
  };
  const Network net(nodes,
                    {mk(1, 2, ArcKind::mode_switch, 0), mk(2, 3, ArcKind::mode_switch, 2.9), mk(3, 4, ArcKind::transit, 0.4),
                     mk(4, 7, ArcKind::mode_switch, 0), mk(2, 5, ArcKind::mode_switch, 2.5), mk(5, 6, ArcKind::road, 5),
                     mk(6, 7, ArcKind::mode_switch, 0), mk(7, 8, ArcKind::mode_switch, 0)},
                    std::numeric_limits<double>::infinity());
  const Network nominal = apply_fare_policy(net, FarePolicy::nominal);
  const Network transit = apply_fare_policy(net, FarePolicy::free_transit);
  const Network all = apply_fare_policy(net, FarePolicy::free_all);
  CHECK(nominal.arc(1).cost == 2.9);
  CHECK(transit.arc(1).cost == 0.0);  // boarding
  CHECK(transit.arc(2).cost == 0.0);  // riding
  CHECK(transit.arc(5).cost == 5.0);  // road
  CHECK(transit.arc(4).cost == 2.5);  // AMoD entry
  for (const Arc& a : all.arcs()) CHECK(a.cost == 0.0);

  // Free fares leave every budget row without coefficients and a nonnegative bound.
  DemandSet dem;
  dem.regions = {{1, 10, 0.5}};
  dem.demands = {{0, 1, 8, 1.0, 1, true}};
  const StandardProblem p = assemble(all, dem, ScenarioConfig{}, ObjectiveKind::util_eff);
  const Eigen::SparseMatrix<double, Eigen::RowMajor> by_row = p.A_in;
  for (std::size_t i = 0; i < p.in_rows.size(); ++i)
    if (p.in_rows[i].family == RowFamily::budget) {
      CHECK(by_row.row(static_cast<Eigen::Index>(i)).norm() == 0.0);
      CHECK(p.b_in[static_cast<Eigen::Index>(i)] >= 0);
    }
}

TEST_CASE("triplet export round trip and index sidecar")
{
  const Instance in = small_city(1);
  const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::comm_suff);
  const StandardProblem back = parse_triplets(problem_to_triplets(p));
  CHECK(back.columns() == p.columns());
  CHECK((SparseMatrix(back.A_eq - p.A_eq)).norm() == 0.0);
  CHECK((SparseMatrix(back.A_in - p.A_in)).norm() == 0.0);
  CHECK((SparseMatrix(back.Q - p.Q)).norm() == 0.0);
  CHECK((back.q - p.q).norm() == 0.0);
  CHECK((back.b_eq - p.b_eq).norm() == 0.0);
  CHECK((back.b_in - p.b_in).norm() == 0.0);
  CHECK(back.free_column == p.free_column);
  CHECK_THROWS_AS(parse_triplets("garbage"), SchemaError);

  const auto sidecar = nlohmann::json::parse(index_to_json(p, in.network, in.demand));
  CHECK(sidecar["columns"].size() == p.columns());
  CHECK(sidecar["rows_eq"].size() == p.eq_rows.size());
  CHECK(sidecar["rows_in"].size() == p.in_rows.size());
  CHECK(sidecar["objective_kind"] == "comm-suff");
}
