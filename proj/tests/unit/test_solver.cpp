#include <cmath>
#include <limits>

#include "doctest.h"
#include "equiflow/error.hpp"
#include "equiflow/flows.hpp"
#include "equiflow/metrics.hpp"
#include "equiflow/problem.hpp"
#include "equiflow/solver.hpp"
#include "support/checks.hpp"
#include "support/instances.hpp"

using namespace equiflow;
using namespace equiflow::testing;
using Eigen::VectorXd;

namespace {

// One variable: min ½·qq·x² + c·x subject to lo ≤ x ≤ hi, with optional
// free sign.
StandardProblem scalar_problem(double qq, double c, double lo, double hi, bool free_sign)
{
  StandardProblem p;
  p.Q = SparseMatrix(1, 1);
  if (qq != 0) p.Q.insert(0, 0) = qq;
  p.q = VectorXd::Constant(1, c);
  p.A_eq = SparseMatrix(0, 1);
  p.b_eq = VectorXd(0);
  std::vector<Eigen::Triplet<double, int>> t;
  std::vector<double> b;
  if (std::isfinite(lo)) {
    t.emplace_back(static_cast<int>(b.size()), 0, -1.0);
    b.push_back(-lo);
  }
  if (std::isfinite(hi)) {
    t.emplace_back(static_cast<int>(b.size()), 0, 1.0);
    b.push_back(hi);
  }
  p.A_in = SparseMatrix(static_cast<int>(b.size()), 1);
  p.A_in.setFromTriplets(t.begin(), t.end());
  p.b_in = Eigen::Map<VectorXd>(b.data(), static_cast<Eigen::Index>(b.size()));
  p.in_rows.assign(b.size(), RowTag{RowFamily::fleet});
  p.free_column = {static_cast<char>(free_sign)};
  return p;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

double avg_time(const Instance& in, const SolveResult& r, const StandardProblem& p)
{
  return evaluate(extract_flows(p, r), in.demand, in.network, in.config.t_suff_min).avg_travel_time;
}

ScenarioConfig scaled(ScenarioConfig cfg, double k)
{
  cfg.n_amod_max *= k;
  return cfg;
}

Network scale_times(const Network& net, double k)
{
  std::vector<Arc> arcs(net.arcs().begin(), net.arcs().end());
  for (Arc& a : arcs) a.time_min *= k;
  return net.with_arcs(std::move(arcs));
}

}  // namespace

TEST_CASE("minimize x subject to x >= 3")
{
  const SolveResult r = solve(scalar_problem(0, 1, 3, kInf, false), SolveSettings{});
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r.objective == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("scalar quadratic programs")
{
  SUBCASE("interior minimizer")
  {
    const SolveResult r = solve(scalar_problem(2, -4, 0, 10, false), SolveSettings{});
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(r.objective == doctest::Approx(-4.0).epsilon(1e-8));
  }
  SUBCASE("free variable pinned by a lower bound")
  {
    const SolveResult r = solve(scalar_problem(2, 0, 1.5, kInf, true), SolveSettings{});
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(r.x[0] == doctest::Approx(1.5).epsilon(1e-9));
  }
  SUBCASE("free variable with an inactive lower bound settles at zero")
  {
    const SolveResult r = solve(scalar_problem(2, 0, -4, kInf, true), SolveSettings{});
    REQUIRE(r.status == SolveStatus::optimal);
    CHECK(std::abs(r.x[0]) <= 1e-8);
  }
}

TEST_CASE("infeasible and unbounded programs are reported, not solved")
{
  const SolveResult infeasible = solve(scalar_problem(0, 1, 3, 1, false), SolveSettings{});
  CHECK(infeasible.status == SolveStatus::infeasible);
  const SolveResult unbounded = solve(scalar_problem(0, -1, 0, kInf, false), SolveSettings{});
  CHECK(unbounded.status == SolveStatus::unbounded);
}

TEST_CASE("an unmeetable fleet bound names the fleet family")
{
  Instance in = two_route_instance(false);
  in.config.n_amod_max = 0.0;
  // Force every user onto the AMoD leg by stretching the walk beyond any
  // budget: the fleet row is then the only obstacle.
  std::vector<Arc> arcs(in.network.arcs().begin(), in.network.arcs().end());
  arcs.erase(arcs.begin() + 1);
  in.network = in.network.with_arcs(arcs);
  const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff);
  const SolveResult r = solve(p, SolveSettings{});
  CHECK(r.status == SolveStatus::infeasible);
  REQUIRE(r.suspect_family.has_value());
  CHECK(*r.suspect_family == RowFamily::fleet);
}

TEST_CASE("two-route instance: budget splits the demand evenly")
{
  const Instance in = two_route_instance(true);
  const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff);
  const SolveResult r = solve(p, SolveSettings{});
  REQUIRE(r.status == SolveStatus::optimal);
  const FlowSolution f = extract_flows(p, r);
  CHECK(f.flow(0, 1) == doctest::Approx(0.5).epsilon(1e-8));  // walk
  CHECK(f.flow(0, 3) == doctest::Approx(0.5).epsilon(1e-8));  // AMoD ride
  CHECK(avg_time(in, r, p) == doctest::Approx(20.0).epsilon(1e-8));
}

TEST_CASE("two-route instance: without a budget everyone rides")
{
  const Instance in = two_route_instance(false);
  const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff);
  const SolveResult r = solve(p, SolveSettings{});
  REQUIRE(r.status == SolveStatus::optimal);
  CHECK(extract_flows(p, r).flow(0, 3) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(avg_time(in, r, p) == doctest::Approx(10.0).epsilon(1e-8));
}

TEST_CASE("optimal results respect the feasibility tolerance")
{
  const SolveSettings s;
  for (int v = 0; v < kTinyVariants; ++v) {
    const Instance in = tiny_instance(v);
    for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff}) {
      const StandardProblem p = assemble(in.network, in.demand, in.config, kind);
      const SolveResult r = solve(p, s);
      if (r.status != SolveStatus::optimal) continue;
      CHECK(r.max_violation <= s.feasibility_tol);
      CHECK(r.duality_gap <= (kind == ObjectiveKind::util_eff ? s.gap_tol_lp : s.gap_tol_qp));
      for (Eigen::Index j = 0; j < r.x.size(); ++j) CHECK(r.x[j] >= -s.feasibility_tol);
    }
  }
}

TEST_CASE("scaling every travel time by k scales the util-eff optimum by k")
{
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const Instance in = small_city(seed);
    const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff);
    const SolveResult base = solve(p, SolveSettings{});
    REQUIRE(base.status == SolveStatus::optimal);
    for (double k : {0.25, 3.0, 17.0}) {
      // The fleet row bounds vehicle-minutes per minute, so it scales with time too.
      const StandardProblem pk =
          assemble(scale_times(in.network, k), in.demand, scaled(in.config, k), ObjectiveKind::util_eff);
      const SolveResult rk = solve(pk, SolveSettings{});
      REQUIRE(rk.status == SolveStatus::optimal);
      CHECK(std::abs(rk.objective - k * base.objective) <= 1e-8 * std::abs(k * base.objective));
    }
  }
}

TEST_CASE("dropping a constraint family never raises the optimum")
{
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    Instance in = small_city(seed);
    in.config.n_amod_max = 0.6;
    std::vector<Arc> arcs(in.network.arcs().begin(), in.network.arcs().end());
    for (Arc& a : arcs) {
      if (a.kind == ArcKind::road) a.flow_cap_veh_min = 0.02;
      if (a.kind == ArcKind::transit) a.capacity_users_min = 0.05;
    }
    const Network capped = in.network.with_arcs(arcs);
    for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff}) {
      const SolveResult base = solve(assemble(capped, in.demand, in.config, kind), SolveSettings{});
      CAPTURE(base.message);
      REQUIRE(base.status == SolveStatus::optimal);
      const double tol = 1e-7 * (1 + std::abs(base.objective));

      ScenarioConfig no_budget = in.config;
      no_budget.budget_enabled = false;
      ScenarioConfig no_fleet = in.config;
      no_fleet.n_amod_max = 1e9;
      std::vector<Arc> no_road = arcs, no_transit = arcs;
      for (Arc& a : no_road) a.flow_cap_veh_min.reset();
      for (Arc& a : no_transit) a.capacity_users_min.reset();

      const SolveResult relaxed[] = {
          solve(assemble(capped, in.demand, no_budget, kind), SolveSettings{}),
          solve(assemble(capped, in.demand, no_fleet, kind), SolveSettings{}),
          solve(assemble(in.network.with_arcs(no_road), in.demand, in.config, kind), SolveSettings{}),
          solve(assemble(in.network.with_arcs(no_transit), in.demand, in.config, kind), SolveSettings{}),
      };
      for (const SolveResult& r : relaxed) {
        CAPTURE(seed);
        CAPTURE(r.message);
        REQUIRE(r.status == SolveStatus::optimal);
        CHECK(r.objective <= base.objective + tol);
      }
    }
  }
}

TEST_CASE("solver-side insufficiency equals max(0, mean time - threshold)")
{
  for (int v = 0; v < kTinyVariants; ++v) {
    const Instance in = tiny_instance(v);
    const StandardProblem p = assemble(in.network, in.demand, in.config, ObjectiveKind::comm_suff);
    const SolveResult r = solve(p, SolveSettings{});
    if (r.status != SolveStatus::optimal) continue;
    const FlowSolution f = extract_flows(p, r);
    const MetricsReport m = evaluate(f, in.demand, in.network, in.config.t_suff_min);
    for (std::size_t k = 0; k < in.demand.demands.size(); ++k)
      CHECK(std::abs(f.epsilon[k] - m.demands[k].insufficiency_min) <= 1e-6);
  }
}

TEST_CASE("repeated solves are bit-identical")
{
  const Instance in = small_city(4);
  for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff}) {
    const StandardProblem p = assemble(in.network, in.demand, in.config, kind);
    const SolveResult a = solve(p, SolveSettings{});
    const SolveResult b = solve(p, SolveSettings{});
    REQUIRE(a.x.size() == b.x.size());
    CHECK(a.iterations == b.iterations);
    for (Eigen::Index j = 0; j < a.x.size(); ++j) CHECK(a.x[j] == b.x[j]);
  }
}

TEST_CASE("iteration limit is reported as such")
{
  const Instance in = small_city(1);
  SolveSettings s;
  s.max_iterations = 2;
  const SolveResult r = solve(assemble(in.network, in.demand, in.config, ObjectiveKind::util_eff), s);
  CHECK(r.status == SolveStatus::iteration_limit);
}

TEST_CASE("solution text round trip and errors")
{
  VectorXd x(3);
  x << 1.0, 0.1, -2.5e-300;
  const auto [status, back] = parse_solution_text(solution_to_text(SolveStatus::optimal, x), 3);
  CHECK(status == SolveStatus::optimal);
  CHECK(back == x);
  CHECK_THROWS_AS(parse_solution_text("status optimal\n1 2\n", 3), SchemaError);
  CHECK_THROWS_AS(parse_solution_text("status great\n1 2 3\n", 3), SchemaError);
  CHECK_THROWS_AS(parse_solution_text("1 2 3\n", 3), SchemaError);
  CHECK_THROWS_AS(parse_solution_text("status optimal\n1 x 3\n", 3), SchemaError);
  // Non-optimal statuses may come without a vector.
  const auto [st, zeros] = parse_solution_text("status infeasible\n", 2);
  CHECK(st == SolveStatus::infeasible);
  CHECK(zeros.size() == 2);
}
