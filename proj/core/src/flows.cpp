#include "equiflow/flows.hpp"

#include <algorithm>
#include <cmath>

#include "equiflow/error.hpp"
#include "equiflow/format.hpp"
#include "json_util.hpp"

namespace equiflow {

double FlowSolution::flow(std::size_t m, ArcId a) const
{
  const auto& list = demand_flows[m];
  auto it = std::lower_bound(list.begin(), list.end(), a, [](const ArcFlow& f, ArcId id) { return f.arc < id; });
  return it != list.end() && it->arc == a ? it->flow : 0.0;
}

std::vector<double> FlowSolution::total_arc_flow(std::size_t arc_count, bool include_rebalancing) const
{
  std::vector<double> total(arc_count, 0.0);
  for (const auto& list : demand_flows)
    for (const ArcFlow& f : list) total[static_cast<std::size_t>(f.arc)] += f.flow;
  if (include_rebalancing)
    for (const ArcFlow& f : rebalancing) total[static_cast<std::size_t>(f.arc)] += f.flow;
  return total;
}

FlowSolution extract_flows(const StandardProblem& p, const SolveResult& r)
{
  FlowSolution fs;
  fs.kind = p.kind;
  fs.status = r.status;
  fs.objective = r.objective;
  fs.duality_gap = r.duality_gap;
  fs.iterations = r.iterations;
  fs.max_violation = r.max_violation;
  const auto& idx = p.index;
  auto keep = [](double v) { return std::abs(v) > kFlowDropThreshold; };
  fs.demand_flows.resize(idx.demand_count());
  for (std::size_t m = 0; m < idx.demand_count(); ++m) {
    const auto arcs = idx.demand_arcs(static_cast<int>(m));
    const int offset = idx.demand_offset(static_cast<int>(m));
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const double v = r.x[offset + static_cast<int>(k)];
      if (keep(v)) fs.demand_flows[m].push_back({arcs[k], v});
    }
  }
  const auto road = idx.road_arcs();
  for (std::size_t k = 0; k < road.size(); ++k) {
    const double v = r.x[idx.rebalancing_offset() + static_cast<int>(k)];
    if (keep(v)) fs.rebalancing.push_back({road[k], v});
  }
  if (idx.has_insufficiency()) {
    fs.epsilon.resize(idx.demand_count());
    for (std::size_t m = 0; m < idx.demand_count(); ++m)
      fs.epsilon[m] = r.x[idx.epsilon_offset() + static_cast<int>(m)];
  }
  return fs;
}

std::string flows_to_json(const FlowSolution& fs, const DemandSet& dem)
{
  using detail::ordered_json;
  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["objective_kind"] = to_string(fs.kind);
  doc["status"] = to_string(fs.status);
  doc["objective"] = fs.objective;
  doc["duality_gap"] = fs.duality_gap;
  doc["iterations"] = fs.iterations;
  doc["max_violation"] = fs.max_violation;
  auto split = [](const std::vector<ArcFlow>& list, ordered_json& out) {
    ordered_json arcs = ordered_json::array(), values = ordered_json::array();
    for (const ArcFlow& f : list) {
      arcs.push_back(f.arc);
      values.push_back(f.flow);
    }
    out["arcs"] = std::move(arcs);
    out["flows"] = std::move(values);
  };
  ordered_json demands = ordered_json::array();
  for (std::size_t m = 0; m < fs.demand_flows.size(); ++m) {
    ordered_json jd;
    jd["demand"] = dem.demands[m].id;
    split(fs.demand_flows[m], jd);
    if (!fs.epsilon.empty()) jd["insufficiency"] = fs.epsilon[m];
    demands.push_back(std::move(jd));
  }
  doc["demands"] = std::move(demands);
  ordered_json reb;
  split(fs.rebalancing, reb);
  doc["rebalancing"] = std::move(reb);
  return doc.dump(1) + "\n";
}

namespace {

std::vector<ArcFlow> parse_arc_flows(const detail::json& j, const Network& net, std::string_view context)
{
  const auto& arcs = detail::get_array(j, "arcs", context);
  const auto& values = detail::get_array(j, "flows", context);
  if (arcs.size() != values.size()) throw SchemaError(std::string(context) + ": arcs/flows length mismatch");
  std::vector<ArcFlow> out;
  out.reserve(arcs.size());
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (!arcs[k].is_number_integer() || !values[k].is_number())
      throw SchemaError(std::string(context) + ": malformed arc flow entry");
    const long long a = arcs[k].get<long long>();
    if (a < 0 || a >= static_cast<long long>(net.arc_count()))
      throw SchemaError(std::string(context) + ": arc " + std::to_string(a) + " out of range");
    if (!out.empty() && out.back().arc >= a) throw SchemaError(std::string(context) + ": arcs not sorted");
    out.push_back({static_cast<ArcId>(a), values[k].get<double>()});
  }
  return out;
}

}  // namespace

FlowSolution parse_flows(std::string_view json_text, const DemandSet& dem, const Network& net)
{
  const auto doc = detail::parse_json(json_text, "flows");
  detail::require_known_keys(doc,
                             {"objective_kind", "status", "objective", "duality_gap", "iterations", "max_violation",
                              "demands", "rebalancing"},
                             "flows");
  FlowSolution fs;
  auto kind = parse_objective_kind(detail::get_string(doc, "objective_kind", "flows"));
  if (!kind) throw SchemaError("flows: unknown objective kind");
  fs.kind = *kind;
  auto status = parse_solve_status(detail::get_string(doc, "status", "flows"));
  if (!status) throw SchemaError("flows: unknown status");
  fs.status = *status;
  fs.objective = detail::get_number(doc, "objective", "flows");
  fs.duality_gap = detail::get_number(doc, "duality_gap", "flows");
  fs.iterations = static_cast<int>(detail::get_integer(doc, "iterations", "flows"));
  fs.max_violation = detail::get_number(doc, "max_violation", "flows");
  const auto& demands = detail::get_array(doc, "demands", "flows");
  if (demands.size() != dem.demands.size()) throw SchemaError("flows: demand count does not match the demand file");
  const bool with_eps = fs.kind == ObjectiveKind::comm_suff;
  for (std::size_t m = 0; m < demands.size(); ++m) {
    const auto& jd = demands[m];
    detail::require_known_keys(jd, {"demand", "arcs", "flows", "insufficiency"}, "flows demand");
    if (detail::get_integer(jd, "demand", "flows demand") != dem.demands[m].id)
      throw SchemaError("flows: demand order does not match the demand file");
    fs.demand_flows.push_back(parse_arc_flows(jd, net, "flows demand"));
    if (with_eps) fs.epsilon.push_back(detail::get_number(jd, "insufficiency", "flows demand"));
  }
  const auto& reb = detail::field(doc, "rebalancing", "flows");
  detail::require_known_keys(reb, {"arcs", "flows"}, "flows rebalancing");
  fs.rebalancing = parse_arc_flows(reb, net, "flows rebalancing");
  return fs;
}

FlowSolution load_flows(const std::filesystem::path& path, const DemandSet& dem, const Network& net)
{
  return parse_flows(read_text_file(path), dem, net);
}

}  // namespace equiflow
