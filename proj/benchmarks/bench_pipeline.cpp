#include <benchmark/benchmark.h>

#include "equiflow/generator.hpp"
#include "equiflow/paths.hpp"
#include "equiflow/problem.hpp"
#include "equiflow/scenario.hpp"
#include "equiflow/solver.hpp"

using namespace equiflow;

namespace {

GridCitySpec city(int side)
{
  GridCitySpec s;
  s.rows = side;
  s.cols = side;
  s.demand_count = side * 2;
  s.transit_lines = {{TransitLine::Orientation::row, side / 2, 2}, {TransitLine::Orientation::col, side / 2, 2}};
  return s;
}

ObjectiveKind kind_of(const benchmark::State& state)
{
  return state.range(1) ? ObjectiveKind::comm_suff : ObjectiveKind::util_eff;
}

void BM_Generate(benchmark::State& state)
{
  const GridCitySpec s = city(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(generate_grid_city(s, 1));
}
BENCHMARK(BM_Generate)->Arg(6)->Arg(12)->Unit(benchmark::kMillisecond);

void BM_Assemble(benchmark::State& state)
{
  const auto [net, dem] = generate_grid_city(city(static_cast<int>(state.range(0))), 1);
  const ScenarioConfig cfg;
  for (auto _ : state) {
    const StandardProblem p = assemble(net, dem, cfg, kind_of(state));
    state.counters["columns"] = static_cast<double>(p.columns());
    benchmark::DoNotOptimize(p.q.data());
  }
}
BENCHMARK(BM_Assemble)->Args({6, 0})->Args({12, 0})->Args({12, 1})->Unit(benchmark::kMillisecond);

void BM_Solve(benchmark::State& state)
{
  const auto [net, dem] = generate_grid_city(city(static_cast<int>(state.range(0))), 1);
  const StandardProblem p = assemble(net, dem, ScenarioConfig{}, kind_of(state));
  for (auto _ : state) {
    const SolveResult r = solve(p, SolveSettings{});
    if (r.status != SolveStatus::optimal) state.SkipWithError("solve not optimal");
    state.counters["iterations"] = r.iterations;
  }
}
BENCHMARK(BM_Solve)->Args({4, 0})->Args({4, 1})->Args({8, 0})->Args({8, 1})->Unit(benchmark::kMillisecond);

void BM_Decompose(benchmark::State& state)
{
  const auto [net, dem] = generate_grid_city(city(static_cast<int>(state.range(0))), 1);
  const ScenarioOutcome o = run_scenario(net, dem, ScenarioConfig{}, ObjectiveKind::util_eff);
  if (!o.ok()) {
    state.SkipWithError("solve not optimal");
    return;
  }
  for (auto _ : state) benchmark::DoNotOptimize(decompose(o.flows, o.network, dem));
}
BENCHMARK(BM_Decompose)->Arg(8)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
