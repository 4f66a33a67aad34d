#include "equiflow/config.hpp"

#include <cmath>

#include "equiflow/error.hpp"
#include "json_util.hpp"

namespace equiflow {

std::string_view to_string(ObjectiveKind kind)
{
  return kind == ObjectiveKind::util_eff ? "util-eff" : "comm-suff";
}

std::string_view to_string(FarePolicy policy)
{
  switch (policy) {
    case FarePolicy::nominal: return "nominal";
    case FarePolicy::free_transit: return "free-transit";
    case FarePolicy::free_all: return "free-all";
  }
  return "nominal";
}

std::string_view to_string(Backend backend)
{
  return backend == Backend::embedded ? "embedded" : "external";
}

std::optional<ObjectiveKind> parse_objective_kind(std::string_view text)
{
  if (text == "util-eff") return ObjectiveKind::util_eff;
  if (text == "comm-suff") return ObjectiveKind::comm_suff;
  return std::nullopt;
}

std::optional<FarePolicy> parse_fare_policy(std::string_view text)
{
  if (text == "nominal") return FarePolicy::nominal;
  if (text == "free-transit") return FarePolicy::free_transit;
  if (text == "free-all") return FarePolicy::free_all;
  return std::nullopt;
}

std::optional<Backend> parse_backend(std::string_view text)
{
  if (text == "embedded") return Backend::embedded;
  if (text == "external") return Backend::external;
  return std::nullopt;
}

void check_config(const ScenarioConfig& cfg)
{
  auto nonneg = [](double v, const char* name) {
    if (!(v >= 0)) throw ConfigError(std::string(name) + " must be nonnegative");
  };
  if (cfg.safety_threshold) nonneg(*cfg.safety_threshold, "safety_threshold");
  nonneg(cfg.n_amod_max, "n_amod_max");
  nonneg(cfg.gamma_r, "gamma_r");
  nonneg(cfg.gamma_time, "gamma_time");
  if (!(cfg.histogram_bin_min > 0) || !std::isfinite(cfg.histogram_bin_min))
    throw ConfigError("histogram_bin_min must be positive and finite");
  if (!(cfg.t_suff_min > 0) || !std::isfinite(cfg.t_suff_min))
    throw ConfigError("t_suff_min must be positive and finite");
  if (cfg.operating_window_min && !(*cfg.operating_window_min > 0))
    throw ConfigError("operating_window_min must be positive");
  const SolveSettings& s = cfg.solver;
  if (!(s.feasibility_tol > 0) || !(s.gap_tol_lp > 0) || !(s.gap_tol_qp > 0) ||
      !(s.target_gap > 0))
    throw ConfigError("solver tolerances must be positive");
  if (s.max_iterations <= 0) throw ConfigError("solver max_iterations must be positive");
  if (s.backend == Backend::external && s.external_command.empty())
    throw ConfigError("external backend requires solver.external_command");
}

ScenarioConfig parse_config(std::string_view json_text)
{
  using namespace detail;
  const json doc = parse_json(json_text, "config");
  require_known_keys(doc,
                     {"safety_threshold", "n_amod_max", "t_suff_min", "gamma_r", "gamma_time",
                      "budget_enabled", "fare_policy", "operating_window_min", "histogram_bin_min",
                      "solver", "seed"},
                     "config");
  constexpr std::string_view ctx = "config";
  ScenarioConfig cfg;
  if (doc.contains("safety_threshold") && !doc["safety_threshold"].is_null())
    cfg.safety_threshold = get_number(doc, "safety_threshold", ctx);
  if (doc.contains("n_amod_max")) cfg.n_amod_max = get_number(doc, "n_amod_max", ctx);
  if (doc.contains("t_suff_min")) cfg.t_suff_min = get_number(doc, "t_suff_min", ctx);
  if (doc.contains("gamma_r")) cfg.gamma_r = get_number(doc, "gamma_r", ctx);
  if (doc.contains("gamma_time")) cfg.gamma_time = get_number(doc, "gamma_time", ctx);
  if (doc.contains("budget_enabled")) cfg.budget_enabled = get_bool(doc, "budget_enabled", ctx);
  if (doc.contains("fare_policy")) {
    auto p = parse_fare_policy(get_string(doc, "fare_policy", ctx));
    if (!p) throw SchemaError("config: fare_policy must be nominal, free-transit or free-all");
    cfg.fare_policy = *p;
  }
  if (doc.contains("operating_window_min") && !doc["operating_window_min"].is_null())
    cfg.operating_window_min = get_number(doc, "operating_window_min", ctx);
  if (doc.contains("histogram_bin_min")) cfg.histogram_bin_min = get_number(doc, "histogram_bin_min", ctx);
  if (doc.contains("seed")) {
    long long seed = get_integer(doc, "seed", ctx);
    if (seed < 0) throw ConfigError("seed must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }
  if (doc.contains("solver")) {
    const json& js = doc["solver"];
    constexpr std::string_view sctx = "config.solver";
    require_known_keys(js,
                       {"feasibility_tol", "gap_tol_lp", "gap_tol_qp", "target_gap", "max_iterations",
                        "backend", "external_command"},
                       sctx);
    SolveSettings& s = cfg.solver;
    if (js.contains("feasibility_tol")) s.feasibility_tol = get_number(js, "feasibility_tol", sctx);
    if (js.contains("gap_tol_lp")) s.gap_tol_lp = get_number(js, "gap_tol_lp", sctx);
    if (js.contains("gap_tol_qp")) s.gap_tol_qp = get_number(js, "gap_tol_qp", sctx);
    if (js.contains("target_gap")) s.target_gap = get_number(js, "target_gap", sctx);
    if (js.contains("max_iterations"))
      s.max_iterations = static_cast<int>(get_integer(js, "max_iterations", sctx));
    if (js.contains("backend")) {
      auto b = parse_backend(get_string(js, "backend", sctx));
      if (!b) throw SchemaError("config.solver: backend must be embedded or external");
      s.backend = *b;
    }
    if (js.contains("external_command"))
      s.external_command = get_string(js, "external_command", sctx);
  }
  check_config(cfg);
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path)
{
  return parse_config(read_text_file(path));
}

std::string config_to_json(const ScenarioConfig& cfg)
{
  using detail::ordered_json;
  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["safety_threshold"] =
      cfg.safety_threshold ? ordered_json(*cfg.safety_threshold) : ordered_json(nullptr);
  doc["n_amod_max"] = cfg.n_amod_max;
  doc["t_suff_min"] = cfg.t_suff_min;
  doc["gamma_r"] = cfg.gamma_r;
  doc["gamma_time"] = cfg.gamma_time;
  doc["budget_enabled"] = cfg.budget_enabled;
  doc["fare_policy"] = to_string(cfg.fare_policy);
  doc["operating_window_min"] =
      cfg.operating_window_min ? ordered_json(*cfg.operating_window_min) : ordered_json(nullptr);
  doc["histogram_bin_min"] = cfg.histogram_bin_min;
  ordered_json s;
  s["feasibility_tol"] = cfg.solver.feasibility_tol;
  s["gap_tol_lp"] = cfg.solver.gap_tol_lp;
  s["gap_tol_qp"] = cfg.solver.gap_tol_qp;
  s["target_gap"] = cfg.solver.target_gap;
  s["max_iterations"] = cfg.solver.max_iterations;
  s["backend"] = to_string(cfg.solver.backend);
  s["external_command"] = cfg.solver.external_command;
  doc["solver"] = std::move(s);
  doc["seed"] = cfg.seed;
  return doc.dump(1) + "\n";
}

}  // namespace equiflow
