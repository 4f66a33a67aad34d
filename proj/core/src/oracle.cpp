#include "equiflow/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "equiflow/error.hpp"

namespace equiflow {

namespace {

// Dense tableau simplex for min cᵀx s.t. A x = b, x ≥ 0.
class DenseSimplex
{
public:
  enum class Status { optimal, infeasible, unbounded };

  struct Solution
  {
    Status status = Status::infeasible;
    std::vector<double> x;
    double objective = 0.0;
  };

  static Solution solve(std::vector<std::vector<double>> A, std::vector<double> b, const std::vector<double>& c)
  {
    const std::size_t m = A.size();
    const std::size_t n = c.size();
    for (std::size_t i = 0; i < m; ++i) {
      if (b[i] < 0) {
        for (double& v : A[i]) v = -v;
        b[i] = -b[i];
      }
    }
    // Columns: structural [0, n), artificial [n, n+m), rhs at n+m.
    const std::size_t width = n + m + 1;
    std::vector<std::vector<double>> T(m, std::vector<double>(width, 0.0));
    std::vector<std::size_t> basis(m);
    for (std::size_t i = 0; i < m; ++i) {
      std::copy(A[i].begin(), A[i].end(), T[i].begin());
      T[i][n + i] = 1.0;
      T[i][width - 1] = b[i];
      basis[i] = n + i;
    }
    double scale = 1.0;
    for (double v : b) scale = std::max(scale, std::abs(v));

    Solution out;
    std::vector<double> phase1(n + m, 0.0);
    for (std::size_t j = n; j < n + m; ++j) phase1[j] = 1.0;
    std::vector<char> allowed(n + m, 1);
    if (!run(T, basis, phase1, allowed)) return out;  // phase 1 is bounded; defensive
    double infeas = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      if (basis[i] >= n) infeas += T[i][width - 1];
    if (infeas > 1e-9 * scale) return out;

    // Drive remaining artificials out of the basis; rows where that is
    // impossible are redundant.
    for (std::size_t i = 0; i < T.size();) {
      if (basis[i] < n) {
        ++i;
        continue;
      }
      std::size_t pivot_col = n;
      for (std::size_t j = 0; j < n; ++j)
        if (std::abs(T[i][j]) > 1e-9) {
          pivot_col = j;
          break;
        }
      if (pivot_col == n) {
        T.erase(T.begin() + static_cast<std::ptrdiff_t>(i));
        basis.erase(basis.begin() + static_cast<std::ptrdiff_t>(i));
        continue;
      }
      pivot(T, basis, i, pivot_col);
      ++i;
    }
    for (std::size_t j = n; j < n + m; ++j) allowed[j] = 0;
    std::vector<double> phase2(n + m, 0.0);
    std::copy(c.begin(), c.end(), phase2.begin());
    if (!run(T, basis, phase2, allowed)) {
      out.status = Status::unbounded;
      return out;
    }
    out.status = Status::optimal;
    out.x.assign(n, 0.0);
    for (std::size_t i = 0; i < T.size(); ++i)
      if (basis[i] < n) out.x[basis[i]] = T[i][width - 1];
    for (std::size_t j = 0; j < n; ++j) out.objective += c[j] * out.x[j];
    return out;
  }

private:
  static void pivot(std::vector<std::vector<double>>& T, std::vector<std::size_t>& basis, std::size_t r,
                    std::size_t col)
  {
    const double p = T[r][col];
    for (double& v : T[r]) v /= p;
    for (std::size_t i = 0; i < T.size(); ++i) {
      if (i == r) continue;
      const double f = T[i][col];
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < T[i].size(); ++j) T[i][j] -= f * T[r][j];
      T[i][col] = 0.0;
    }
    basis[r] = col;
  }

  // Bland's rule: smallest improving column enters, smallest basic index
  // leaves among ratio ties. Returns false when unbounded.
  static bool run(std::vector<std::vector<double>>& T, std::vector<std::size_t>& basis, const std::vector<double>& cost,
                  const std::vector<char>& allowed)
  {
    const std::size_t cols = cost.size();
    const std::size_t rhs = T.empty() ? 0 : T[0].size() - 1;
    for (int iter = 0; iter < 100000; ++iter) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!allowed[j]) continue;
        double reduced = cost[j];
        for (std::size_t i = 0; i < T.size(); ++i) reduced -= cost[basis[i]] * T[i][j];
        if (reduced < -1e-11) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = T.size();
      double best = 0.0;
      for (std::size_t i = 0; i < T.size(); ++i) {
        if (T[i][enter] <= 1e-12) continue;
        const double ratio = T[i][rhs] / T[i][enter];
        if (leave == T.size() || ratio < best - 1e-13 ||
            (ratio <= best + 1e-13 && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == T.size()) return false;
      pivot(T, basis, leave, enter);
    }
    return true;
  }
};

struct Path
{
  std::vector<ArcId> arcs;
};

std::vector<Path> enumerate_paths(const Network& net, const Demand& d, int limit)
{
  std::vector<ArcId> allowed_arcs;
  try {
    allowed_arcs = reachable_arc_set(net, d.origin, d.destination, d.bike_capable);
  } catch (const DisconnectedDemand& e) {
    throw InfeasibleStructure("demand " + std::to_string(d.id) + ": " + e.what());
  }
  std::vector<char> allowed(net.arc_count(), 0);
  for (ArcId a : allowed_arcs) allowed[static_cast<std::size_t>(a)] = 1;

  const std::size_t source = *net.node_index(d.origin);
  const std::size_t sink = *net.node_index(d.destination);
  std::vector<Path> paths;
  std::vector<char> on_path(net.node_count(), 0);
  std::vector<ArcId> stack;

  auto dfs = [&](auto&& self, std::size_t v) -> void {
    if (v == sink) {
      paths.push_back({stack});
      if (static_cast<int>(paths.size()) > limit)
        throw TooLarge("demand " + std::to_string(d.id) + " has more than " + std::to_string(limit) +
                       " simple paths");
      return;
    }
    on_path[v] = 1;
    for (ArcId a : net.out_arcs(v)) {
      if (!allowed[static_cast<std::size_t>(a)]) continue;
      const auto h = static_cast<std::size_t>(net.head_index(a));
      if (on_path[h]) continue;
      stack.push_back(a);
      self(self, h);
      stack.pop_back();
    }
    on_path[v] = 0;
  };
  dfs(dfs, source);
  return paths;
}

}  // namespace

OracleResult brute_force_oracle(const Network& net, const DemandSet& dem, const ScenarioConfig& cfg,
                                ObjectiveKind kind, const OracleLimits& limits)
{
  check_config(cfg);
  const bool comm_suff = kind == ObjectiveKind::comm_suff;
  std::vector<ArcId> road_arcs;
  for (ArcId a = 0; a < static_cast<ArcId>(net.arc_count()); ++a)
    if (net.arc(a).kind == ArcKind::road) road_arcs.push_back(a);
  if (static_cast<int>(road_arcs.size()) > limits.max_road_arcs)
    throw TooLarge("network has more than " + std::to_string(limits.max_road_arcs) + " road arcs");

  OracleResult result;
  const std::size_t demand_count = dem.demands.size();
  std::vector<std::vector<Path>> paths(demand_count);
  for (std::size_t m = 0; m < demand_count; ++m) {
    paths[m] = enumerate_paths(net, dem.demands[m], limits.max_paths_per_demand);
    result.paths += static_cast<int>(paths[m].size());
  }

  // Variables: path flows, rebalancing per road arc, then (comm-suff) the
  // insufficiency and its epigraph per demand, then one slack per inequality.
  std::vector<std::size_t> path_offset(demand_count);
  std::size_t n_struct = 0;
  for (std::size_t m = 0; m < demand_count; ++m) {
    path_offset[m] = n_struct;
    n_struct += paths[m].size();
  }
  const std::size_t reb_offset = n_struct;
  n_struct += road_arcs.size();
  const std::size_t eps_offset = n_struct;
  const std::size_t theta_offset = eps_offset + (comm_suff ? demand_count : 0);
  if (comm_suff) n_struct += 2 * demand_count;

  auto path_time = [&](const Path& p) {
    double t = 0.0;
    for (ArcId a : p.arcs) t += net.arc(a).time_min;
    return t;
  };
  auto path_cost = [&](const Path& p) {
    double c = 0.0;
    for (ArcId a : p.arcs) c += net.arc(a).cost;
    return c;
  };
  auto path_uses = [&](const Path& p, ArcId a) {
    return static_cast<double>(std::count(p.arcs.begin(), p.arcs.end(), a));
  };

  struct Row
  {
    std::vector<double> coeff;
    double rhs;
  };
  std::vector<Row> equalities, inequalities;
  auto blank = [&] { return std::vector<double>(n_struct, 0.0); };

  for (std::size_t m = 0; m < demand_count; ++m) {
    Row r{blank(), dem.demands[m].rate};
    for (std::size_t k = 0; k < paths[m].size(); ++k) r.coeff[path_offset[m] + k] = 1.0;
    equalities.push_back(std::move(r));
  }
  for (std::size_t v = 0; v < net.node_count(); ++v) {
    if (net.node(v).layer != Layer::road) continue;
    Row r{blank(), 0.0};
    for (std::size_t k = 0; k < road_arcs.size(); ++k) {
      const ArcId a = road_arcs[k];
      const double sign = (static_cast<std::size_t>(net.tail_index(a)) == v ? 1.0 : 0.0) -
                          (static_cast<std::size_t>(net.head_index(a)) == v ? 1.0 : 0.0);
      if (sign == 0.0) continue;
      r.coeff[reb_offset + k] += sign;
      for (std::size_t m = 0; m < demand_count; ++m)
        for (std::size_t p = 0; p < paths[m].size(); ++p)
          r.coeff[path_offset[m] + p] += sign * path_uses(paths[m][p], a);
    }
    equalities.push_back(std::move(r));
  }

  {
    Row r{blank(), cfg.n_amod_max};
    for (std::size_t k = 0; k < road_arcs.size(); ++k) {
      const ArcId a = road_arcs[k];
      const double t = net.arc(a).time_min;
      r.coeff[reb_offset + k] += t;
      for (std::size_t m = 0; m < demand_count; ++m)
        for (std::size_t p = 0; p < paths[m].size(); ++p)
          r.coeff[path_offset[m] + p] += t * path_uses(paths[m][p], a);
    }
    inequalities.push_back(std::move(r));
  }
  if (cfg.budget_enabled) {
    for (std::size_t m = 0; m < demand_count; ++m) {
      const Demand& d = dem.demands[m];
      Row r{blank(), dem.find_region(d.region)->budget * d.rate};
      for (std::size_t p = 0; p < paths[m].size(); ++p) r.coeff[path_offset[m] + p] = path_cost(paths[m][p]);
      inequalities.push_back(std::move(r));
    }
  }
  for (ArcId a = 0; a < static_cast<ArcId>(net.arc_count()); ++a) {
    const Arc& arc = net.arc(a);
    std::optional<double> cap;
    if (arc.kind == ArcKind::road) cap = arc.flow_cap_veh_min;
    if (arc.kind == ArcKind::transit) cap = arc.capacity_users_min;
    if (!cap) continue;
    Row r{blank(), *cap};
    if (arc.kind == ArcKind::road) {
      const auto k = static_cast<std::size_t>(std::lower_bound(road_arcs.begin(), road_arcs.end(), a) - road_arcs.begin());
      r.coeff[reb_offset + k] = 1.0;
    }
    for (std::size_t m = 0; m < demand_count; ++m)
      for (std::size_t p = 0; p < paths[m].size(); ++p) r.coeff[path_offset[m] + p] = path_uses(paths[m][p], a);
    inequalities.push_back(std::move(r));
  }

  // Objective weights.
  const double weight = comm_suff ? cfg.gamma_time : 1.0;
  std::vector<double> linear(n_struct, 0.0);
  for (std::size_t m = 0; m < demand_count; ++m)
    for (std::size_t p = 0; p < paths[m].size(); ++p)
      linear[path_offset[m] + p] = weight * path_time(paths[m][p]);
  for (std::size_t k = 0; k < road_arcs.size(); ++k)
    linear[reb_offset + k] = weight * cfg.gamma_r * net.arc(road_arcs[k]).time_min;

  // Quadratic weight h_m: objective carries h_m·ε_m².
  std::vector<double> h(demand_count, 0.0);
  if (comm_suff) {
    const double n_pop = dem.total_population();
    std::vector<double> region_rate(dem.regions.size(), 0.0);
    for (const Demand& d : dem.demands) region_rate[static_cast<std::size_t>(dem.region_position(d.region))] += d.rate;
    for (std::size_t m = 0; m < demand_count; ++m) {
      const Demand& d = dem.demands[m];
      const auto r = static_cast<std::size_t>(dem.region_position(d.region));
      const double n_r = dem.regions[r].population;
      if (!(n_r > 0) || !(n_pop > 0)) throw ConfigError("region with demands has zero population");
      h[m] = n_r * d.rate / (n_pop * region_rate[r]);
      // mean time - ε ≤ T_suff
      Row slack{blank(), cfg.t_suff_min};
      for (std::size_t p = 0; p < paths[m].size(); ++p)
        slack.coeff[path_offset[m] + p] = path_time(paths[m][p]) / d.rate;
      slack.coeff[eps_offset + m] = -1.0;
      inequalities.push_back(std::move(slack));
      linear[theta_offset + m] = 1.0;
    }
  }

  // Tangent cuts θ_m ≥ h_m(2eε_m − e²).
  std::vector<std::pair<std::size_t, double>> cuts;
  if (comm_suff)
    for (std::size_t m = 0; m < demand_count; ++m)
      for (double e : {0.0, 1.0, 5.0, 20.0, 60.0}) cuts.emplace_back(m, e);

  for (int round = 0; round < 500; ++round) {
    const std::size_t n_ineq = inequalities.size() + cuts.size();
    const std::size_t n = n_struct + n_ineq;
    std::vector<std::vector<double>> A;
    std::vector<double> b;
    for (const Row& r : equalities) {
      A.push_back(r.coeff);
      A.back().resize(n, 0.0);
      b.push_back(r.rhs);
    }
    std::size_t s = n_struct;
    for (const Row& r : inequalities) {
      A.push_back(r.coeff);
      A.back().resize(n, 0.0);
      A.back()[s++] = 1.0;
      b.push_back(r.rhs);
    }
    for (const auto& [m, e] : cuts) {
      std::vector<double> row(n, 0.0);
      row[eps_offset + m] = 2.0 * h[m] * e;
      row[theta_offset + m] = -1.0;
      row[s++] = 1.0;
      A.push_back(std::move(row));
      b.push_back(h[m] * e * e);
    }
    std::vector<double> c = linear;
    c.resize(n, 0.0);

    const auto sol = DenseSimplex::solve(std::move(A), std::move(b), c);
    if (sol.status != DenseSimplex::Status::optimal) {
      result.feasible = false;
      return result;
    }
    double true_obj = 0.0;
    for (std::size_t j = 0; j < theta_offset; ++j) true_obj += linear[j] * sol.x[j];
    double gap = 0.0;
    for (std::size_t m = 0; comm_suff && m < demand_count; ++m) {
      const double eps = sol.x[eps_offset + m];
      true_obj += h[m] * eps * eps;
      gap += std::max(0.0, h[m] * eps * eps - sol.x[theta_offset + m]);
    }
    if (gap <= 1e-10 * (1.0 + std::abs(true_obj))) {
      result.feasible = true;
      result.objective = true_obj;
      return result;
    }
    for (std::size_t m = 0; m < demand_count; ++m) {
      const double eps = sol.x[eps_offset + m];
      if (h[m] * eps * eps - sol.x[theta_offset + m] > 1e-12 * (1.0 + std::abs(true_obj))) {
        cuts.emplace_back(m, eps);
        ++result.cuts;
      }
    }
  }
  throw TooLarge("cutting planes did not converge");
}

}  // namespace equiflow
