#include "doctest.h"
#include "equiflow/error.hpp"
#include "equiflow/problem.hpp"
#include "equiflow/scenario.hpp"
#include "equiflow/solver.hpp"
#include "support/instances.hpp"

using namespace equiflow;
using namespace equiflow::testing;

namespace {

ScenarioOutcome run_external(const std::string& mode, ObjectiveKind kind)
{
  Instance in = two_route_instance(true);
  in.config.solver.backend = Backend::external;
  in.config.solver.external_command = std::string("\"") + EQUIFLOW_FAKE_SOLVER + "\"" + (mode.empty() ? "" : " " + mode);
  return run_scenario(in.network, in.demand, in.config, kind);
}

}  // namespace

TEST_CASE("external backend matches the embedded one")
{
  const Instance in = two_route_instance(true);
  for (auto kind : {ObjectiveKind::util_eff, ObjectiveKind::comm_suff}) {
    const ScenarioOutcome ext = run_external("", kind);
    const ScenarioOutcome emb = run_scenario(in.network, in.demand, in.config, kind);
    REQUIRE(ext.ok());
    REQUIRE(emb.ok());
    CHECK(ext.solve.status == SolveStatus::optimal);
    CHECK(ext.solve.objective == doctest::Approx(emb.solve.objective).epsilon(1e-9));
    CHECK(ext.metrics->avg_travel_time == doctest::Approx(20.0).epsilon(1e-7));
  }
}

TEST_CASE("external backend failures surface as non-optimal solves")
{
  for (const char* mode : {"--fail", "--garbage", "--short"}) {
    CAPTURE(mode);
    const ScenarioOutcome o = run_external(mode, ObjectiveKind::util_eff);
    CHECK_FALSE(o.ok());
    CHECK(o.solve.status != SolveStatus::optimal);
    CHECK_FALSE(o.solve.message.empty());
  }
}

TEST_CASE("external backend needs a command")
{
  Instance in = two_route_instance(true);
  in.config.solver.backend = Backend::external;
  CHECK_THROWS_AS(run_scenario(in.network, in.demand, in.config, ObjectiveKind::util_eff), ConfigError);
}
