#include "ipm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <memory>

#include <Eigen/SparseCholesky>

#ifdef EQUIFLOW_HAS_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

namespace equiflow::detail {

namespace {

using Eigen::Index;
using Eigen::VectorXd;

// Factor of M = A diag(d) Aᵀ + shift·I. The lower-triangular pattern of M and,
// per column of A, the positions its outer product scatters into are computed
// once; every iteration only refreshes values.
class NormalEquations
{
public:
  explicit NormalEquations(const SparseMatrix& A) : A_(A)
  {
#ifdef EQUIFLOW_HAS_CHOLMOD
    solver_.cholmod().print = 0;  // failed attempts are retried with a larger shift
#endif
    const Index m = A.rows();
    SparseMatrix pattern = A;
    for (Index k = 0; k < pattern.nonZeros(); ++k) pattern.valuePtr()[k] = 1.0;
    SparseMatrix at = pattern.transpose();
    SparseMatrix full = pattern * at;
    SparseMatrix eye(m, m);
    eye.setIdentity();
    full += eye;
    M_ = full.triangularView<Eigen::Lower>();
    M_.makeCompressed();

    diag_pos_.resize(static_cast<std::size_t>(m));
    for (Index j = 0; j < m; ++j) diag_pos_[static_cast<std::size_t>(j)] = position(j, j);

    const int* outer = A.outerIndexPtr();
    const int* inner = A.innerIndexPtr();
    std::size_t total = 0;
    for (Index k = 0; k < A.cols(); ++k) {
      const std::size_t p = static_cast<std::size_t>(outer[k + 1] - outer[k]);
      total += p * (p + 1) / 2;
    }
    scatter_.reserve(total);
    for (Index k = 0; k < A.cols(); ++k) {
      for (int a = outer[k]; a < outer[k + 1]; ++a)
        for (int b = a; b < outer[k + 1]; ++b)
          scatter_.push_back(position(inner[b], inner[a]));  // row ≥ col
    }
  }

  Index size() const { return M_.rows(); }

  /// Each diagonal entry is raised by relative_shift·(1 + entry).
  bool factor(const VectorXd& d, double relative_shift)
  {
    if (M_.rows() == 0) return true;
    double* values = M_.valuePtr();
    std::fill(values, values + M_.nonZeros(), 0.0);
    const int* outer = A_.outerIndexPtr();
    const double* aval = A_.valuePtr();
    std::size_t s = 0;
    for (Index k = 0; k < A_.cols(); ++k) {
      const double dk = d[k];
      for (int a = outer[k]; a < outer[k + 1]; ++a) {
        const double va = dk * aval[a];
        for (int b = a; b < outer[k + 1]; ++b) values[scatter_[s++]] += va * aval[b];
      }
    }
    for (int p : diag_pos_) values[p] += relative_shift * (1.0 + values[p]);
    shift_ = relative_shift;

    if (!analyzed_) {
      solver_.analyzePattern(M_);
      analyzed_ = true;
    }
    solver_.factorize(M_);
    return solver_.info() == Eigen::Success;
  }

  /// Solves M y = r against the unshifted M, correcting the shift with a
  /// few refinement sweeps.
  VectorXd solve(const VectorXd& r, const VectorXd& d) const
  {
    if (M_.rows() == 0) return VectorXd();
    VectorXd y = solver_.solve(r);
    if (shift_ == 0.0) return y;
    const double rnorm = std::max(r.lpNorm<Eigen::Infinity>(), 1e-300);
    for (int sweep = 0; sweep < 4; ++sweep) {
      VectorXd res = r - apply(y, d);
      if (res.lpNorm<Eigen::Infinity>() <= 1e-14 * rnorm) break;
      y += solver_.solve(res);
    }
    return y;
  }

  VectorXd apply(const VectorXd& y, const VectorXd& d) const
  {
    VectorXd t = A_.transpose() * y;
    return A_ * d.cwiseProduct(t);
  }

private:
  int position(Index row, Index col) const
  {
    const int* outer = M_.outerIndexPtr();
    const int* inner = M_.innerIndexPtr();
    const int* first = inner + outer[col];
    const int* last = inner + outer[col + 1];
    const int* it = std::lower_bound(first, last, static_cast<int>(row));
    return static_cast<int>(it - inner);
  }

  const SparseMatrix& A_;
  SparseMatrix M_;
  std::vector<int> diag_pos_;
  std::vector<int> scatter_;
  double shift_ = 0.0;
  bool analyzed_ = false;
#ifdef EQUIFLOW_HAS_CHOLMOD
  Eigen::CholmodSupernodalLLT<SparseMatrix, Eigen::Lower> solver_;
#else
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> solver_;
#endif
};

// Ruiz equilibration: rows and columns scaled towards unit infinity norm.
void equilibrate(SparseMatrix& A, VectorXd& row_scale, VectorXd& col_scale)
{
  const Index m = A.rows();
  const Index n = A.cols();
  row_scale = VectorXd::Ones(m);
  col_scale = VectorXd::Ones(n);
  VectorXd row_max(m), col_max(n);
  for (int pass = 0; pass < 12; ++pass) {
    row_max.setZero();
    col_max.setZero();
    for (Index k = 0; k < n; ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it) {
        const double v = std::abs(it.value());
        row_max[it.row()] = std::max(row_max[it.row()], v);
        col_max[k] = std::max(col_max[k], v);
      }
    double worst = 0.0;
    for (Index i = 0; i < m; ++i)
      if (row_max[i] > 0) worst = std::max(worst, std::abs(1.0 - row_max[i]));
    for (Index k = 0; k < n; ++k)
      if (col_max[k] > 0) worst = std::max(worst, std::abs(1.0 - col_max[k]));
    if (worst < 1e-2) break;
    for (Index i = 0; i < m; ++i) row_max[i] = row_max[i] > 0 ? 1.0 / std::sqrt(row_max[i]) : 1.0;
    for (Index k = 0; k < n; ++k) col_max[k] = col_max[k] > 0 ? 1.0 / std::sqrt(col_max[k]) : 1.0;
    for (Index k = 0; k < n; ++k)
      for (SparseMatrix::InnerIterator it(A, k); it; ++it)
        it.valueRef() *= row_max[it.row()] * col_max[k];
    row_scale.array() *= row_max.array();
    col_scale.array() *= col_max.array();
  }
}

// Largest step in (0, 1] keeping bounded entries of v + step·dv positive.
double max_step(const VectorXd& v, const VectorXd& dv, const std::vector<char>& bounded)
{
  double step = 1.0;
  for (Index j = 0; j < v.size(); ++j)
    if (bounded[static_cast<std::size_t>(j)] && dv[j] < 0) step = std::min(step, -v[j] / dv[j]);
  return step;
}

double bounded_dot(const VectorXd& a, const VectorXd& b, const std::vector<char>& bounded)
{
  double s = 0.0;
  for (Index j = 0; j < a.size(); ++j)
    if (bounded[static_cast<std::size_t>(j)]) s += a[j] * b[j];
  return s;
}

}  // namespace

IpmResult solve_ipm(const IpmProblem& problem, const IpmOptions& options)
{
  IpmResult result;
  const Index m = problem.A.rows();
  const Index n = problem.A.cols();

  std::vector<char> bounded(static_cast<std::size_t>(n));
  Index n_bounded = 0;
  for (Index j = 0; j < n; ++j) {
    bounded[static_cast<std::size_t>(j)] = !problem.free[static_cast<std::size_t>(j)];
    n_bounded += bounded[static_cast<std::size_t>(j)];
    if (!bounded[static_cast<std::size_t>(j)] && !(problem.q_diag[j] > 0)) {
      result.message = "free column without positive curvature";
      return result;
    }
  }

  // Scaled data: Â = R A S, b̂ = R b, ĉ = S c / κ, q̂ = S² q / κ.
  SparseMatrix A = problem.A;
  VectorXd R, S;
  equilibrate(A, R, S);
  const VectorXd b = R.cwiseProduct(problem.b);
  VectorXd c = S.cwiseProduct(problem.c);
  VectorXd q = S.cwiseProduct(S).cwiseProduct(problem.q_diag);
  const double kappa =
      std::max({1.0, c.size() ? c.lpNorm<Eigen::Infinity>() : 0.0, q.size() ? q.maxCoeff() : 0.0});
  c /= kappa;
  q /= kappa;
  const double c_norm = problem.c.size() ? problem.c.lpNorm<Eigen::Infinity>() : 0.0;

  const bool trace = std::getenv("EQUIFLOW_IPM_TRACE") != nullptr;
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  NormalEquations normal(A);
  if (trace) std::fprintf(stderr, "ipm: %ld rows %ld cols %ld nnz, setup %.3fs\n", (long)m, (long)n, (long)A.nonZeros(), elapsed());
  double shift_scale = 1e-15;

  auto factor = [&](const VectorXd& d) {
    // Redundant rows make M singular; a shift proportional to each diagonal
    // entry keeps the factorization defined. Refinement undoes most of it, so
    // it starts near rounding level and grows only on failure.
    for (int attempt = 0; attempt < 6; ++attempt) {
      if (normal.factor(d, shift_scale)) return true;
      shift_scale *= 100.0;
    }
    return false;
  };

  // Starting point.
  VectorXd x(n), y(m), z(n);
  {
    VectorXd d = VectorXd::Ones(n);
    for (Index j = 0; j < n; ++j)
      if (!bounded[static_cast<std::size_t>(j)]) d[j] = 1.0 / (1.0 + q[j]);
    if (!factor(d)) {
      result.message = "factorization failed at the starting point";
      return result;
    }
    VectorXd w = m ? normal.solve(b, d) : VectorXd();
    x = m ? VectorXd(d.cwiseProduct(A.transpose() * w)) : VectorXd::Zero(n);
    y = m ? normal.solve(A * d.cwiseProduct(c), d) : VectorXd();
    z = c + q.cwiseProduct(x) - (m ? VectorXd(A.transpose() * y) : VectorXd::Zero(n));
    double min_x = std::numeric_limits<double>::infinity();
    double min_z = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < n; ++j) {
      if (!bounded[static_cast<std::size_t>(j)]) {
        z[j] = 0.0;
        continue;
      }
      min_x = std::min(min_x, x[j]);
      min_z = std::min(min_z, z[j]);
    }
    const double shift_x = std::max(-1.5 * min_x, 0.0);
    const double shift_z = std::max(-1.5 * min_z, 0.0);
    double sum_x = 0, sum_z = 0;
    for (Index j = 0; j < n; ++j) {
      if (!bounded[static_cast<std::size_t>(j)]) continue;
      x[j] += shift_x;
      z[j] += shift_z;
      sum_x += x[j];
      sum_z += z[j];
    }
    const double xz = bounded_dot(x, z, bounded);
    const bool usable = std::isfinite(xz) && sum_x > 0 && sum_z > 0 && xz > 0;
    for (Index j = 0; j < n; ++j) {
      if (!bounded[static_cast<std::size_t>(j)]) continue;
      if (usable) {
        x[j] += 0.5 * xz / sum_z;
        z[j] += 0.5 * xz / sum_x;
      }
      if (!usable || !(x[j] > 0)) x[j] = 1.0;
      if (!usable || !(z[j] > 0)) z[j] = 1.0;
      // When curvature sets the cost scale the linear cost can be tiny and
      // the heuristic above leaves z near zero.
      z[j] = std::max(z[j], 0.1);
    }
  }

  auto unscale = [&] {
    result.x = S.cwiseProduct(x);
    result.y = kappa * R.cwiseProduct(y);
    result.z = kappa * z.cwiseQuotient(S);
  };

  VectorXd d(n), dx(n), dy(m), dz(n), rp(m), rd(n), rc(n);
  double best_merit = std::numeric_limits<double>::infinity();
  int since_best = 0;
  // Best iterate meeting the certification tolerances, if any.
  std::optional<IpmResult> certified;
  int polish_stall = 0;
  auto polished = [&] {
    IpmResult r = *certified;
    r.iterations = result.iterations;
    return r;
  };
  auto fail = [&](IpmStatus status, const char* message) {
    if (certified) return polished();
    result.status = status;
    result.message = message;
    unscale();
    return result;
  };
  const double y0 = 1.0 + (m ? y.lpNorm<Eigen::Infinity>() : 0.0);

  auto newton = [&](const VectorXd& comp) {
    VectorXd t(n);
    for (Index j = 0; j < n; ++j)
      t[j] = (bounded[static_cast<std::size_t>(j)] ? comp[j] / x[j] : 0.0) - rd[j];
    if (m) {
      VectorXd rhs = rp - A * d.cwiseProduct(t);
      dy = normal.solve(rhs, d);
      dx = d.cwiseProduct(A.transpose() * dy + t);
    } else {
      dx = d.cwiseProduct(t);
    }
    for (Index j = 0; j < n; ++j)
      dz[j] = bounded[static_cast<std::size_t>(j)] ? (comp[j] - z[j] * dx[j]) / x[j] : 0.0;
  };

  const SparseMatrix A_abs = A.cwiseAbs();
  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double xz = 0.0, mu = 0.0, pres = 0.0, dres = 0.0, pobj = 0.0, gap = 0.0;
  auto measure = [&] {
    rp = b - A * x;
    rd = c + q.cwiseProduct(x) - z - (m ? VectorXd(A.transpose() * y) : VectorXd::Zero(n));
    xz = bounded_dot(x, z, bounded);
    mu = n_bounded ? xz / static_cast<double>(n_bounded) : 0.0;
    // Whatever rounding of the row's own terms cannot resolve counts as zero:
    // a row with a right-hand side near 1e9 is never met to 1e-8 in doubles.
    pres = 0.0;
    if (m) {
      const VectorXd activity = A_abs * x.cwiseAbs() + b.cwiseAbs();
      for (Index i = 0; i < m; ++i)
        pres = std::max(pres, std::max(0.0, std::abs(rp[i]) - 16 * kEps * activity[i]) / R[i]);
    }
    dres = 0.0;
    for (Index j = 0; j < n; ++j) dres = std::max(dres, std::abs(rd[j] / S[j]));
    dres = kappa * dres / (1.0 + c_norm);
    pobj = kappa * (0.5 * x.dot(q.cwiseProduct(x)) + c.dot(x));
    gap = kappa * xz / (1.0 + std::abs(pobj));
  };

  for (int iter = 0;; ++iter) {
    measure();
    // Late in the polish the long Newton steps lose primal accuracy on rows
    // with huge diagonals. A feasibility-only step has a tiny right-hand side
    // and recovers it with the factor already in hand.
    if (certified && m && pres > options.feasibility_tol && dres <= options.feasibility_tol &&
        gap <= options.gap_tol) {
      const VectorXd keep = x;
      const double before = pres;
      // Free columns stay put: moving them would reopen the dual residual.
      VectorXd d_bounded = d;
      for (Index j = 0; j < n; ++j)
        if (!bounded[static_cast<std::size_t>(j)]) d_bounded[j] = 0.0;
      dy = normal.solve(rp, d_bounded);
      dx = d_bounded.cwiseProduct(A.transpose() * dy);
      x += std::min(1.0, 0.9995 * max_step(x, dx, bounded)) * dx;
      measure();
      if (!(pres < before)) {
        x = keep;
        measure();
      }
    }

    result.iterations = iter;
    if (trace)
      std::fprintf(stderr, "ipm %3d  pres %.2e  dres %.2e  gap %.2e  mu %.2e  t %.3fs\n", iter, pres, dres, gap, mu,
                   elapsed());
    result.primal_residual = pres;
    result.dual_residual = dres;
    result.gap = gap;
    result.primal_objective = pobj;

    if (!std::isfinite(pres) || !std::isfinite(dres) || !std::isfinite(gap))
      return fail(IpmStatus::numerical_failure, "non-finite iterate");
    if (pres <= options.feasibility_tol && dres <= options.feasibility_tol && gap <= options.gap_tol) {
      const bool reached = gap <= options.target_gap;
      if (!certified || reached || gap < 0.5 * certified->gap) {
        result.status = IpmStatus::optimal;
        unscale();
        certified = result;
        polish_stall = 0;
      } else {
        ++polish_stall;
      }
      if (reached || polish_stall >= 3) return polished();
    } else if (certified && ++polish_stall >= 3) {
      return polished();
    }

    const double bnorm = 1.0 + (m ? problem.b.lpNorm<Eigen::Infinity>() : 0.0);
    const double pres_rel = pres / bnorm;
    const double merit = std::max({pres_rel, dres, gap});
    if (merit < 0.9 * best_merit) {
      best_merit = merit;
      since_best = 0;
    } else {
      ++since_best;
    }
    const double ynorm = m ? y.lpNorm<Eigen::Infinity>() : 0.0;
    const double xnorm = x.lpNorm<Eigen::Infinity>();
    if (ynorm > 1e10 * y0 && pres_rel > 1e-6)
      return fail(IpmStatus::primal_infeasible, "dual iterates diverge while primal residual persists");
    if (xnorm > 1e12 * (1.0 + bnorm) && dres > 1e-6)
      return fail(IpmStatus::dual_infeasible, "primal iterates diverge while dual residual persists");
    if (since_best >= 25) {
      const IpmStatus status = pres_rel > 1e-6 ? IpmStatus::primal_infeasible
                               : dres > 1e-6   ? IpmStatus::dual_infeasible
                                               : IpmStatus::numerical_failure;
      return fail(status, "no progress in 25 iterations");
    }
    if (iter >= options.max_iterations) return fail(IpmStatus::iteration_limit, "");

    for (Index j = 0; j < n; ++j)
      d[j] = bounded[static_cast<std::size_t>(j)] ? 1.0 / (q[j] + z[j] / x[j]) : 1.0 / q[j];
    if (!factor(d)) return fail(IpmStatus::numerical_failure, "normal-equation factorization failed");

    // Predictor.
    for (Index j = 0; j < n; ++j) rc[j] = bounded[static_cast<std::size_t>(j)] ? -x[j] * z[j] : 0.0;
    newton(rc);
    double step_p = max_step(x, dx, bounded);
    double step_d = max_step(z, dz, bounded);
    double mu_aff = 0.0;
    for (Index j = 0; j < n; ++j)
      if (bounded[static_cast<std::size_t>(j)]) mu_aff += (x[j] + step_p * dx[j]) * (z[j] + step_d * dz[j]);
    mu_aff /= std::max<double>(1.0, static_cast<double>(n_bounded));
    const double sigma = mu > 0 ? std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0) : 0.0;

    // Corrector.
    for (Index j = 0; j < n; ++j)
      rc[j] = bounded[static_cast<std::size_t>(j)] ? sigma * mu - x[j] * z[j] - dx[j] * dz[j] : 0.0;
    newton(rc);
    const double eta = std::clamp(1.0 - mu, 0.995, 0.9999);
    step_p = std::min(1.0, eta * max_step(x, dx, bounded));
    step_d = std::min(1.0, eta * max_step(z, dz, bounded));

    x += step_p * dx;
    if (m) y += step_d * dy;
    z += step_d * dz;
  }
}

}  // namespace equiflow::detail
