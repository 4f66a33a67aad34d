#pragma once

// Primal-dual interior-point method (Mehrotra predictor-corrector) for
//   min ½ xᵀ diag(q) x + cᵀx   s.t.  A x = b,  x_j ≥ 0 unless free_j.
// Newton systems are reduced to normal equations A D Aᵀ and factored by a
// sparse Cholesky.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "equiflow/problem.hpp"

namespace equiflow::detail {

struct IpmProblem
{
  SparseMatrix A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  Eigen::VectorXd q_diag;
  std::vector<char> free;
};

struct IpmOptions
{
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-8;      ///< certifies optimality
  double target_gap = 1e-12;  ///< keep iterating toward this once certified
  int max_iterations = 200;
};

enum class IpmStatus { optimal, primal_infeasible, dual_infeasible, iteration_limit, numerical_failure };

struct IpmResult
{
  IpmStatus status = IpmStatus::numerical_failure;
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Eigen::VectorXd z;
  int iterations = 0;
  double primal_residual = 0.0;  ///< absolute, unscaled, infinity norm
  double dual_residual = 0.0;    ///< relative to 1 + |c|
  double gap = 0.0;              ///< relative complementarity
  double primal_objective = 0.0;
  std::string message;
};

IpmResult solve_ipm(const IpmProblem& problem, const IpmOptions& options);

}  // namespace equiflow::detail
