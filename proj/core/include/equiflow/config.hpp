#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace equiflow {

enum class ObjectiveKind : std::uint8_t { util_eff, comm_suff };

enum class FarePolicy : std::uint8_t { nominal, free_transit, free_all };

enum class Backend : std::uint8_t { embedded, external };

std::string_view to_string(ObjectiveKind kind);  // "util-eff" / "comm-suff"
std::string_view to_string(FarePolicy policy);   // "nominal" / "free-transit" / "free-all"
std::string_view to_string(Backend backend);
std::optional<ObjectiveKind> parse_objective_kind(std::string_view text);
std::optional<FarePolicy> parse_fare_policy(std::string_view text);
std::optional<Backend> parse_backend(std::string_view text);

struct SolveSettings
{
  double feasibility_tol = 1e-8;  ///< absolute primal, relative dual
  double gap_tol_lp = 1e-8;       ///< relative duality gap, LP
  double gap_tol_qp = 1e-6;       ///< relative duality gap, QP
  double target_gap = 1e-12;      ///< once certified, iterate on toward this gap while it keeps shrinking
  int max_iterations = 200;
  Backend backend = Backend::embedded;
  /// Executable invoked as `<cmd> problem.txt index.json solution.txt`.
  std::string external_command;
};

struct ScenarioConfig
{
  /// Overrides the network's unsafety threshold when set.
  std::optional<double> safety_threshold;
  double n_amod_max = 240.0;  ///< vehicles
  double t_suff_min = 20.0;
  double gamma_r = 1e-3;
  double gamma_time = 1e-3;
  bool budget_enabled = true;
  FarePolicy fare_policy = FarePolicy::nominal;
  /// Overrides the demand file's operating window when set.
  std::optional<double> operating_window_min;
  double histogram_bin_min = 1.0;
  SolveSettings solver;
  std::uint64_t seed = 0;
};

/// Throws ConfigError when a numeric field is out of range.
void check_config(const ScenarioConfig& cfg);

/// Parses config.json; missing fields keep their defaults, unknown fields are
/// rejected. Throws SchemaError / ConfigError.
ScenarioConfig parse_config(std::string_view json_text);
ScenarioConfig load_config(const std::filesystem::path& path);
/// Every field, defaults included.
std::string config_to_json(const ScenarioConfig& cfg);

}  // namespace equiflow
