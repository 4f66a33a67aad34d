#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "equiflow/config.hpp"
#include "equiflow/problem.hpp"

namespace equiflow {

enum class SolveStatus : std::uint8_t {
  optimal,
  infeasible,
  unbounded,
  iteration_limit,
  numerical_failure,
};

std::string_view to_string(SolveStatus status);
std::optional<SolveStatus> parse_solve_status(std::string_view text);

struct SolveResult
{
  SolveStatus status = SolveStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective = 0.0;
  double duality_gap = 0.0;  ///< relative
  int iterations = 0;
  double wall_time_s = 0.0;
  double max_violation = 0.0;  ///< max over equality |residual| and inequality excess
  double dual_residual = 0.0;  ///< relative
  /// Heuristic culprit for non-optimal outcomes: the row family carrying the
  /// largest dual weight when the iteration stopped.
  std::optional<RowFamily> suspect_family;
  std::string message;
};

/// Solves to global optimality with the embedded primal-dual interior-point
/// method or, when settings.backend is external, through the process adapter.
/// `index_json` is handed to the external backend as the column/row sidecar.
SolveResult solve(const StandardProblem& p, const SolveSettings& settings, std::string_view index_json = {});

/// Objective ½xᵀQx + qᵀx.
double objective_value(const StandardProblem& p, const Eigen::VectorXd& x);

/// Largest equality residual or inequality excess at x.
double max_constraint_violation(const StandardProblem& p, const Eigen::VectorXd& x);

/// Solution file of the external backend: "status <name>" line followed by
/// whitespace-separated column values.
std::string solution_to_text(SolveStatus status, const Eigen::VectorXd& x);
/// Throws SchemaError.
std::pair<SolveStatus, Eigen::VectorXd> parse_solution_text(std::string_view text,
                                                            std::size_t expected_columns);

}  // namespace equiflow
