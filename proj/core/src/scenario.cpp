#include "equiflow/scenario.hpp"

#include <sstream>

#include "equiflow/error.hpp"
#include "equiflow/format.hpp"
#include "equiflow/problem.hpp"
#include "json_util.hpp"

namespace equiflow {

namespace fs = std::filesystem;

Network prepare_network(const Network& net, const ScenarioConfig& cfg)
{
  Network out = apply_fare_policy(net, cfg.fare_policy);
  if (cfg.safety_threshold) out = out.with_safety_threshold(*cfg.safety_threshold);
  return prune_unsafe_bike_arcs(out);
}

ScenarioOutcome run_scenario(const Network& net, const DemandSet& dem, const ScenarioConfig& cfg, ObjectiveKind kind)
{
  check_config(cfg);
  ScenarioOutcome out;
  out.kind = kind;
  out.network = prepare_network(net, cfg);
  const StandardProblem p = assemble(out.network, dem, cfg, kind);
  const std::string index =
      cfg.solver.backend == Backend::external ? index_to_json(p, out.network, dem) : std::string();
  out.solve = solve(p, cfg.solver, index);
  out.flows = extract_flows(p, out.solve);
  if (out.solve.status != SolveStatus::optimal) return out;
  out.paths = decompose(out.flows, out.network, dem, cfg.solver.feasibility_tol);
  out.metrics = evaluate(out.flows, dem, out.network, cfg.t_suff_min, *out.paths);
  return out;
}

namespace {

std::string solve_log(const ScenarioOutcome& o)
{
  std::ostringstream log;
  log << "objective_kind " << to_string(o.kind) << '\n';
  log << "status " << to_string(o.solve.status) << '\n';
  log << "objective " << format_number(o.solve.objective, 17) << '\n';
  log << "iterations " << o.solve.iterations << '\n';
  log << "duality_gap " << format_number(o.solve.duality_gap) << '\n';
  log << "dual_residual " << format_number(o.solve.dual_residual) << '\n';
  log << "max_violation " << format_number(o.solve.max_violation) << '\n';
  log << "wall_time_s " << format_number(o.solve.wall_time_s, 6) << '\n';
  if (o.solve.suspect_family) log << "suspect_family " << to_string(*o.solve.suspect_family) << '\n';
  if (!o.solve.message.empty()) log << "message " << o.solve.message << '\n';
  return log.str();
}

void write_derived(const fs::path& dir, const MetricsReport& metrics, const PathAssignment& paths, ObjectiveKind kind,
                   double bin_width)
{
  write_text_file(dir / "metrics.json", metrics_to_json(metrics, kind));
  write_text_file(dir / "histogram.csv", histogram_to_csv(histogram(paths, bin_width)));
  write_text_file(dir / "histogram_mean.csv", histogram_to_csv(mean_time_histogram(metrics, bin_width)));
  write_text_file(dir / "heatmap.csv", heatmap_to_csv(metrics));
  write_text_file(dir / "paths.csv", paths_to_csv(paths));
  write_text_file(dir / "cycles.csv", cycles_to_csv(paths));
}

}  // namespace

void write_scenario(const fs::path& dir, const ScenarioOutcome& o, const ScenarioConfig& cfg, const DemandSet& dem,
                    std::string_view demand_text)
{
  fs::create_directories(dir);
  write_text_file(dir / "config.json", config_to_json(cfg));
  write_text_file(dir / "network.json", network_to_json(o.network));
  write_text_file(dir / "demand.json", demand_text);
  write_text_file(dir / "solve_log.txt", solve_log(o));
  if (!o.ok()) {
    detail::ordered_json doc;
    doc["format"] = kFormatVersion;
    doc["objective_kind"] = to_string(o.kind);
    doc["status"] = to_string(o.solve.status);
    doc["suspect_family"] =
        o.solve.suspect_family ? detail::ordered_json(to_string(*o.solve.suspect_family)) : detail::ordered_json(nullptr);
    doc["message"] = o.solve.message;
    write_text_file(dir / "failure.json", doc.dump(1) + "\n");
    return;
  }
  std::error_code ec;
  fs::remove(dir / "failure.json", ec);
  write_text_file(dir / "flows.json", flows_to_json(o.flows, dem));
  write_derived(dir, *o.metrics, *o.paths, o.kind, cfg.histogram_bin_min);
}

ScenarioRecord load_scenario(const fs::path& dir)
{
  ScenarioRecord r;
  r.config = load_config(dir / "config.json");
  r.network = load_network(dir / "network.json");
  r.demand = load_demand(dir / "demand.json", r.config.operating_window_min);
  if (!fs::exists(dir / "flows.json")) throw SchemaError(dir.string() + ": no flows.json (solve did not succeed)");
  r.flows = load_flows(dir / "flows.json", r.demand, r.network);
  return r;
}

PathAssignment write_decomposition(const fs::path& dir)
{
  const ScenarioRecord r = load_scenario(dir);
  PathAssignment paths = decompose(r.flows, r.network, r.demand, r.config.solver.feasibility_tol);
  write_text_file(dir / "paths.csv", paths_to_csv(paths));
  write_text_file(dir / "cycles.csv", cycles_to_csv(paths));
  return paths;
}

MetricsReport write_reports(const fs::path& dir)
{
  const ScenarioRecord r = load_scenario(dir);
  const PathAssignment paths = decompose(r.flows, r.network, r.demand, r.config.solver.feasibility_tol);
  MetricsReport metrics = evaluate(r.flows, r.demand, r.network, r.config.t_suff_min, paths);
  write_derived(dir, metrics, paths, r.flows.kind, r.config.histogram_bin_min);
  return metrics;
}

}  // namespace equiflow
