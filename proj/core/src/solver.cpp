#include "equiflow/solver.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include <unistd.h>

#include "equiflow/error.hpp"
#include "equiflow/format.hpp"
#include "ipm.hpp"
#include "json_util.hpp"

namespace equiflow {

namespace fs = std::filesystem;
using Eigen::Index;
using Eigen::VectorXd;

std::string_view to_string(SolveStatus status)
{
  switch (status) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::infeasible: return "infeasible";
    case SolveStatus::unbounded: return "unbounded";
    case SolveStatus::iteration_limit: return "iteration-limit";
    case SolveStatus::numerical_failure: return "numerical-failure";
  }
  return "numerical-failure";
}

std::optional<SolveStatus> parse_solve_status(std::string_view text)
{
  for (auto s : {SolveStatus::optimal, SolveStatus::infeasible, SolveStatus::unbounded,
                 SolveStatus::iteration_limit, SolveStatus::numerical_failure})
    if (to_string(s) == text) return s;
  return std::nullopt;
}

double objective_value(const StandardProblem& p, const VectorXd& x)
{
  return 0.5 * x.dot(p.Q * x) + p.q.dot(x);
}

double max_constraint_violation(const StandardProblem& p, const VectorXd& x)
{
  double v = 0.0;
  if (p.A_eq.rows() > 0) v = std::max(v, (p.A_eq * x - p.b_eq).lpNorm<Eigen::Infinity>());
  if (p.A_in.rows() > 0) {
    VectorXd excess = p.A_in * x - p.b_in;
    v = std::max(v, excess.maxCoeff());
  }
  for (Index j = 0; j < x.size(); ++j)
    if (!p.free_column[static_cast<std::size_t>(j)]) v = std::max(v, -x[j]);
  return v;
}

std::string solution_to_text(SolveStatus status, const VectorXd& x)
{
  std::ostringstream out;
  out << "status " << to_string(status) << '\n';
  char buf[40];
  for (Index j = 0; j < x.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.17g", x[j]);
    out << buf << '\n';
  }
  return out.str();
}

std::pair<SolveStatus, VectorXd> parse_solution_text(std::string_view text, std::size_t expected_columns)
{
  std::istringstream in{std::string(text)};
  std::string word, name;
  in >> word >> name;
  if (word != "status") throw SchemaError("solution: expected status line");
  auto status = parse_solve_status(name);
  if (!status) throw SchemaError("solution: unknown status \"" + name + "\"");
  std::vector<double> values;
  double v = 0;
  while (in >> v) values.push_back(v);
  if (!in.eof()) throw SchemaError("solution: malformed value");
  if (values.size() != expected_columns) {
    if (*status == SolveStatus::optimal || !values.empty())
      throw SchemaError("solution: expected " + std::to_string(expected_columns) + " values, got " +
                        std::to_string(values.size()));
    values.assign(expected_columns, 0.0);
  }
  return {*status, Eigen::Map<VectorXd>(values.data(), static_cast<Index>(values.size()))};
}

namespace {

bool is_diagonal(const SparseMatrix& Q)
{
  for (int k = 0; k < Q.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(Q, k); it; ++it)
      if (it.row() != it.col() && it.value() != 0.0) return false;
  return true;
}

struct StandardForm
{
  detail::IpmProblem ipm;
  std::vector<int> eq_kept;  ///< original equality row per kept row
  std::vector<int> in_kept;  ///< original inequality row per kept row
};

// A_eq x = b_eq and A_in x + s = b_in with s ≥ 0; rows without entries are
// dropped after checking their right-hand side.
StandardForm to_standard_form(const StandardProblem& p, std::string& infeasible_reason)
{
  const Index n = static_cast<Index>(p.columns());
  std::vector<int> eq_count(static_cast<std::size_t>(p.A_eq.rows()), 0);
  std::vector<int> in_count(static_cast<std::size_t>(p.A_in.rows()), 0);
  for (int k = 0; k < p.A_eq.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p.A_eq, k); it; ++it)
      if (it.value() != 0.0) ++eq_count[static_cast<std::size_t>(it.row())];
  for (int k = 0; k < p.A_in.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p.A_in, k); it; ++it)
      if (it.value() != 0.0) ++in_count[static_cast<std::size_t>(it.row())];

  StandardForm sf;
  std::vector<int> eq_map(eq_count.size(), -1), in_map(in_count.size(), -1);
  for (std::size_t i = 0; i < eq_count.size(); ++i) {
    if (eq_count[i] > 0) {
      eq_map[i] = static_cast<int>(sf.eq_kept.size());
      sf.eq_kept.push_back(static_cast<int>(i));
    } else if (p.b_eq[static_cast<Index>(i)] != 0.0) {
      infeasible_reason = "empty equality row with nonzero right-hand side";
    }
  }
  const int n_eq = static_cast<int>(sf.eq_kept.size());
  for (std::size_t i = 0; i < in_count.size(); ++i) {
    if (in_count[i] > 0) {
      in_map[i] = n_eq + static_cast<int>(sf.in_kept.size());
      sf.in_kept.push_back(static_cast<int>(i));
    } else if (p.b_in[static_cast<Index>(i)] < 0.0) {
      infeasible_reason = "empty inequality row with negative right-hand side";
    }
  }
  const Index n_in = static_cast<Index>(sf.in_kept.size());
  const Index rows = n_eq + n_in;
  const Index cols = n + n_in;

  std::vector<Eigen::Triplet<double, int>> t;
  t.reserve(static_cast<std::size_t>(p.A_eq.nonZeros() + p.A_in.nonZeros() + n_in));
  for (int k = 0; k < p.A_eq.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p.A_eq, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(eq_map[static_cast<std::size_t>(it.row())], k, it.value());
  for (int k = 0; k < p.A_in.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(p.A_in, k); it; ++it)
      if (it.value() != 0.0) t.emplace_back(in_map[static_cast<std::size_t>(it.row())], k, it.value());
  for (Index i = 0; i < n_in; ++i)
    t.emplace_back(static_cast<int>(n_eq + i), static_cast<int>(n + i), 1.0);

  auto& ipm = sf.ipm;
  ipm.A.resize(rows, cols);
  ipm.A.setFromTriplets(t.begin(), t.end());
  ipm.A.makeCompressed();
  ipm.b.resize(rows);
  for (int i = 0; i < n_eq; ++i) ipm.b[i] = p.b_eq[sf.eq_kept[static_cast<std::size_t>(i)]];
  for (Index i = 0; i < n_in; ++i) ipm.b[n_eq + i] = p.b_in[sf.in_kept[static_cast<std::size_t>(i)]];
  ipm.c = VectorXd::Zero(cols);
  ipm.c.head(n) = p.q;
  ipm.q_diag = VectorXd::Zero(cols);
  ipm.q_diag.head(n) = p.Q.diagonal();
  ipm.free.assign(static_cast<std::size_t>(cols), 0);
  for (Index j = 0; j < n; ++j) ipm.free[static_cast<std::size_t>(j)] = p.free_column[static_cast<std::size_t>(j)];
  return sf;
}

// Row family carrying the largest total dual weight; inequality families
// take precedence when any carries weight.
std::optional<RowFamily> suspect_family(const StandardProblem& p, const StandardForm& sf, const VectorXd& y)
{
  if (y.size() == 0) return std::nullopt;
  constexpr int kFamilies = 7;
  std::array<double, kFamilies> in_weight{}, eq_weight{};
  const std::size_t n_eq = sf.eq_kept.size();
  for (std::size_t i = 0; i < n_eq; ++i) {
    const auto& tag = p.eq_rows[static_cast<std::size_t>(sf.eq_kept[i])];
    eq_weight[static_cast<std::size_t>(tag.family)] += std::abs(y[static_cast<Index>(i)]);
  }
  for (std::size_t i = 0; i < sf.in_kept.size(); ++i) {
    const auto& tag = p.in_rows[static_cast<std::size_t>(sf.in_kept[i])];
    in_weight[static_cast<std::size_t>(tag.family)] += std::abs(y[static_cast<Index>(n_eq + i)]);
  }
  auto argmax = [](const std::array<double, kFamilies>& w) {
    int best = 0;
    for (int f = 1; f < kFamilies; ++f)
      if (w[static_cast<std::size_t>(f)] > w[static_cast<std::size_t>(best)]) best = f;
    return best;
  };
  const int bi = argmax(in_weight);
  const double total_eq = std::accumulate(eq_weight.begin(), eq_weight.end(), 0.0);
  if (in_weight[static_cast<std::size_t>(bi)] > 1e-6 * std::max(1.0, total_eq))
    return static_cast<RowFamily>(bi);
  const int be = argmax(eq_weight);
  if (eq_weight[static_cast<std::size_t>(be)] > 0) return static_cast<RowFamily>(be);
  return std::nullopt;
}

SolveResult solve_embedded(const StandardProblem& p, const SolveSettings& settings)
{
  SolveResult out;
  const Index n = static_cast<Index>(p.columns());
  if (!is_diagonal(p.Q)) {
    out.message = "only diagonal quadratic terms are supported";
    out.x = VectorXd::Zero(n);
    return out;
  }
  std::string reason;
  StandardForm sf = to_standard_form(p, reason);
  if (!reason.empty()) {
    out.status = SolveStatus::infeasible;
    out.message = reason;
    out.x = VectorXd::Zero(n);
    return out;
  }
  const bool qp = p.Q.nonZeros() > 0 && p.Q.diagonal().maxCoeff() > 0;
  detail::IpmOptions opt;
  opt.feasibility_tol = settings.feasibility_tol;
  opt.gap_tol = qp ? settings.gap_tol_qp : settings.gap_tol_lp;
  opt.target_gap = std::min(opt.gap_tol, settings.target_gap);
  opt.max_iterations = settings.max_iterations;

  detail::IpmResult r = detail::solve_ipm(sf.ipm, opt);
  out.x = r.x.size() ? VectorXd(r.x.head(n)) : VectorXd::Zero(n);
  out.iterations = r.iterations;
  out.duality_gap = r.gap;
  out.dual_residual = r.dual_residual;
  out.message = r.message;
  switch (r.status) {
    case detail::IpmStatus::optimal: out.status = SolveStatus::optimal; break;
    case detail::IpmStatus::primal_infeasible: out.status = SolveStatus::infeasible; break;
    case detail::IpmStatus::dual_infeasible: out.status = SolveStatus::unbounded; break;
    case detail::IpmStatus::iteration_limit: out.status = SolveStatus::iteration_limit; break;
    case detail::IpmStatus::numerical_failure: out.status = SolveStatus::numerical_failure; break;
  }
  if (out.status != SolveStatus::optimal && r.y.size()) out.suspect_family = suspect_family(p, sf, r.y);
  return out;
}

std::string shell_quote(const std::string& s)
{
  std::string q = "'";
  for (char ch : s) {
    if (ch == '\'') q += "'\\''";
    else q += ch;
  }
  return q + "'";
}

fs::path make_temp_dir()
{
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  for (int attempt = 0; attempt < 100; ++attempt) {
    fs::path dir = fs::temp_directory_path() /
                   ("equiflow-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" +
                    std::to_string(rd() % 1000000));
    std::error_code ec;
    if (fs::create_directory(dir, ec)) return dir;
  }
  throw Error("cannot create a temporary directory");
}

// Minimal sidecar when the caller has no network or demand names at hand.
std::string anonymous_index(const StandardProblem& p)
{
  detail::ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["objective_kind"] = to_string(p.kind);
  doc["columns"] = p.columns();
  doc["rows_eq"] = p.A_eq.rows();
  doc["rows_in"] = p.A_in.rows();
  return doc.dump(1) + "\n";
}

SolveResult solve_external(const StandardProblem& p, const SolveSettings& settings, std::string_view index_json)
{
  SolveResult out;
  const Index n = static_cast<Index>(p.columns());
  out.x = VectorXd::Zero(n);
  if (settings.external_command.empty()) throw ConfigError("external backend requires a command");
  const fs::path dir = make_temp_dir();
  const fs::path problem = dir / "problem.txt";
  const fs::path index = dir / "index.json";
  const fs::path solution = dir / "solution.txt";
  write_text_file(problem, problem_to_triplets(p));
  write_text_file(index, index_json.empty() ? anonymous_index(p) : std::string(index_json));
  const std::string cmd = settings.external_command + " " + shell_quote(problem.string()) + " " +
                          shell_quote(index.string()) + " " + shell_quote(solution.string());
  const int rc = std::system(cmd.c_str());
  std::string text;
  if (rc == 0) {
    try {
      text = read_text_file(solution);
    } catch (const Error&) {
    }
  }
  std::error_code ec;
  if (rc != 0 || text.empty()) {
    fs::remove_all(dir, ec);
    out.message = "external backend failed (exit status " + std::to_string(rc) + ")";
    return out;
  }
  try {
    auto [status, x] = parse_solution_text(text, p.columns());
    out.status = status;
    out.x = std::move(x);
  } catch (const SchemaError& e) {
    out.message = std::string("external backend output rejected: ") + e.what();
  }
  fs::remove_all(dir, ec);
  return out;
}

}  // namespace

SolveResult solve(const StandardProblem& p, const SolveSettings& settings, std::string_view index_json)
{
  const auto start = std::chrono::steady_clock::now();
  SolveResult r = settings.backend == Backend::external ? solve_external(p, settings, index_json)
                                                        : solve_embedded(p, settings);
  r.objective = objective_value(p, r.x);
  r.max_violation = max_constraint_violation(p, r.x);
  r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

}  // namespace equiflow
