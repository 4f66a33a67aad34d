#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "equiflow/config.hpp"
#include "equiflow/demand.hpp"
#include "equiflow/network.hpp"

namespace equiflow {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, int>;

/// Constraint family of a row, kept for diagnostics and row-count checks.
enum class RowFamily : std::uint8_t {
  conservation,
  amod_balance,
  fleet,
  budget,
  road_cap,
  transit_cap,
  slack,
};

std::string_view to_string(RowFamily family);

struct RowTag
{
  RowFamily family = RowFamily::conservation;
  int demand = -1;  ///< position in DemandSet::demands (conservation, budget, slack)
  int node = -1;    ///< node index (conservation, amod_balance)
  ArcId arc = -1;   ///< road_cap, transit_cap
};

enum class ColumnType : std::uint8_t { demand_flow, rebalancing, insufficiency };

struct ColumnTag
{
  ColumnType type = ColumnType::demand_flow;
  int demand = -1;  ///< position in DemandSet::demands
  ArcId arc = -1;
};

/// Bijection between model variables and columns. Columns are laid out as
/// [per-demand arc flows | rebalancing flows on road arcs | insufficiency].
class VariableIndex
{
public:
  /// Appends a block of flow columns for the next demand; `arcs` sorted.
  void add_demand(std::vector<ArcId> arcs);
  void set_rebalancing(std::vector<ArcId> road_arcs);
  void add_insufficiency();

  std::size_t size() const { return columns_.size(); }
  std::size_t demand_count() const { return demand_arcs_.size(); }
  const ColumnTag& column(std::size_t col) const { return columns_[col]; }

  std::span<const ArcId> demand_arcs(int demand) const { return demand_arcs_[static_cast<std::size_t>(demand)]; }
  int demand_offset(int demand) const { return demand_offset_[static_cast<std::size_t>(demand)]; }
  std::span<const ArcId> road_arcs() const { return road_arcs_; }
  int rebalancing_offset() const { return rebalancing_offset_; }
  bool has_insufficiency() const { return epsilon_offset_ >= 0; }
  int epsilon_offset() const { return epsilon_offset_; }

  std::optional<int> flow_column(int demand, ArcId a) const;
  std::optional<int> rebalancing_column(ArcId a) const;
  std::optional<int> epsilon_column(int demand) const;

private:
  std::vector<ColumnTag> columns_;
  std::vector<std::vector<ArcId>> demand_arcs_;
  std::vector<int> demand_offset_;
  std::vector<ArcId> road_arcs_;
  int rebalancing_offset_ = -1;
  int epsilon_offset_ = -1;
};

/// min ½ xᵀQx + qᵀx  s.t.  A_eq x = b_eq,  A_in x ≤ b_in,  x ≥ 0
/// (columns flagged in `free_column` carry no lower bound).
struct StandardProblem
{
  ObjectiveKind kind = ObjectiveKind::util_eff;
  SparseMatrix Q;
  Eigen::VectorXd q;
  SparseMatrix A_eq;
  Eigen::VectorXd b_eq;
  std::vector<RowTag> eq_rows;
  SparseMatrix A_in;
  Eigen::VectorXd b_in;
  std::vector<RowTag> in_rows;
  std::vector<char> free_column;
  VariableIndex index;

  std::size_t columns() const { return static_cast<std::size_t>(q.size()); }
  std::size_t count_rows(RowFamily family) const;
};

/// Builds the flow program for one objective. The network is used as given:
/// apply fare policy and safety pruning beforehand. Throws
/// InfeasibleStructure (demand without an admissible route, unknown
/// endpoints) and ConfigError (negative parameters, zero-population region
/// with demands under comm-suff).
StandardProblem assemble(const Network& net, const DemandSet& dem, const ScenarioConfig& cfg,
                         ObjectiveKind kind);

/// Zeroes fares according to the policy. Transit fares live on transit arcs
/// and on switch arcs boarding a transit node.
Network apply_fare_policy(const Network& net, FarePolicy policy);

/// Sparse triplet text export, one "row col value" line per nonzero, grouped
/// in sections (Q, q, A_eq, b_eq, A_in, b_in, free).
std::string problem_to_triplets(const StandardProblem& p);
/// Inverse of problem_to_triplets (matrices and vectors only; the variable
/// index and row tags are not part of the triplet file). Throws SchemaError.
StandardProblem parse_triplets(std::string_view text);
/// JSON sidecar describing every column and row.
std::string index_to_json(const StandardProblem& p, const Network& net, const DemandSet& dem);

}  // namespace equiflow
