#include <cstdio>
#include <sstream>

#include "equiflow/error.hpp"
#include "equiflow/problem.hpp"
#include "json_util.hpp"

namespace equiflow {

namespace {

using Triplet = Eigen::Triplet<double, int>;

// Exact round trip; the triplet file feeds external solvers.
std::string exact(double v)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostringstream& out, const char* name, const SparseMatrix& m)
{
  out << "section " << name << ' ' << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (int k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      out << it.row() << ' ' << it.col() << ' ' << exact(it.value()) << '\n';
}

void write_vector(std::ostringstream& out, const char* name, const Eigen::VectorXd& v)
{
  Eigen::Index nnz = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) nnz += v[i] != 0.0;
  out << "section " << name << ' ' << v.size() << " 1 " << nnz << '\n';
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out << i << " 0 " << exact(v[i]) << '\n';
}

}  // namespace

std::string problem_to_triplets(const StandardProblem& p)
{
  std::ostringstream out;
  out << kFormatVersion << " standard-problem\n";
  out << "kind " << to_string(p.kind) << '\n';
  out << "columns " << p.columns() << '\n';
  write_matrix(out, "Q", p.Q);
  write_vector(out, "q", p.q);
  write_matrix(out, "A_eq", p.A_eq);
  write_vector(out, "b_eq", p.b_eq);
  write_matrix(out, "A_in", p.A_in);
  write_vector(out, "b_in", p.b_in);
  Eigen::VectorXd free_flags = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p.columns()));
  for (std::size_t j = 0; j < p.free_column.size(); ++j)
    if (p.free_column[j]) free_flags[static_cast<Eigen::Index>(j)] = 1.0;
  write_vector(out, "free", free_flags);
  out << "end\n";
  return out.str();
}

StandardProblem parse_triplets(std::string_view text)
{
  std::istringstream in{std::string(text)};
  auto fail = [](const std::string& why) -> void { throw SchemaError("triplets: " + why); };

  std::string tag, word;
  in >> tag >> word;
  if (tag != kFormatVersion || word != "standard-problem") fail("bad header");
  in >> word;
  if (word != "kind") fail("expected kind");
  in >> word;
  auto kind = parse_objective_kind(word);
  if (!kind) fail("unknown objective kind");
  long long n = 0;
  in >> word >> n;
  if (word != "columns" || n < 0) fail("expected columns");

  StandardProblem p;
  p.kind = *kind;
  p.free_column.assign(static_cast<std::size_t>(n), 0);
  bool seen_end = false;
  while (in >> word) {
    if (word == "end") {
      seen_end = true;
      break;
    }
    if (word != "section") fail("expected section");
    std::string name;
    long long rows = 0, cols = 0, nnz = 0;
    in >> name >> rows >> cols >> nnz;
    if (!in || rows < 0 || cols < 0 || nnz < 0) fail("bad section header");
    std::vector<Triplet> t;
    t.reserve(static_cast<std::size_t>(nnz));
    for (long long k = 0; k < nnz; ++k) {
      long long r = 0, c = 0;
      double v = 0;
      in >> r >> c >> v;
      if (!in || r < 0 || r >= rows || c < 0 || c >= cols) fail("bad entry in section " + name);
      t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
    }
    auto matrix = [&] {
      SparseMatrix m(static_cast<int>(rows), static_cast<int>(cols));
      m.setFromTriplets(t.begin(), t.end());
      m.makeCompressed();
      return m;
    };
    auto vector = [&] {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(rows);
      for (const auto& e : t) v[e.row()] += e.value();
      return v;
    };
    if (name == "Q") p.Q = matrix();
    else if (name == "q") p.q = vector();
    else if (name == "A_eq") p.A_eq = matrix();
    else if (name == "b_eq") p.b_eq = vector();
    else if (name == "A_in") p.A_in = matrix();
    else if (name == "b_in") p.b_in = vector();
    else if (name == "free") {
      if (rows != n) fail("free section size mismatch");
      for (const auto& e : t) p.free_column[static_cast<std::size_t>(e.row())] = e.value() != 0.0;
    } else fail("unknown section " + name);
  }
  if (!seen_end) fail("missing end marker");
  if (p.q.size() != n || p.Q.rows() != n || p.A_eq.cols() != n || p.A_in.cols() != n ||
      p.b_eq.size() != p.A_eq.rows() || p.b_in.size() != p.A_in.rows())
    fail("inconsistent dimensions");
  p.eq_rows.assign(static_cast<std::size_t>(p.A_eq.rows()), RowTag{});
  p.in_rows.assign(static_cast<std::size_t>(p.A_in.rows()), RowTag{});
  return p;
}

std::string index_to_json(const StandardProblem& p, const Network& net, const DemandSet& dem)
{
  using detail::ordered_json;
  auto demand_id = [&](int pos) { return pos < 0 ? -1 : dem.demands[static_cast<std::size_t>(pos)].id; };
  auto node_id = [&](int idx) { return idx < 0 ? NodeId{-1} : net.node(static_cast<std::size_t>(idx)).id; };

  ordered_json doc;
  doc["format"] = kFormatVersion;
  doc["objective_kind"] = to_string(p.kind);
  ordered_json cols = ordered_json::array();
  for (std::size_t j = 0; j < p.index.size(); ++j) {
    const ColumnTag& c = p.index.column(j);
    ordered_json jc;
    jc["col"] = j;
    switch (c.type) {
      case ColumnType::demand_flow:
        jc["type"] = "flow";
        jc["demand"] = demand_id(c.demand);
        jc["arc"] = c.arc;
        break;
      case ColumnType::rebalancing:
        jc["type"] = "rebalancing";
        jc["arc"] = c.arc;
        break;
      case ColumnType::insufficiency:
        jc["type"] = "insufficiency";
        jc["demand"] = demand_id(c.demand);
        break;
    }
    cols.push_back(std::move(jc));
  }
  auto rows = [&](const std::vector<RowTag>& tags) {
    ordered_json out = ordered_json::array();
    for (std::size_t i = 0; i < tags.size(); ++i) {
      const RowTag& t = tags[i];
      ordered_json jr;
      jr["row"] = i;
      jr["family"] = to_string(t.family);
      if (t.demand >= 0) jr["demand"] = demand_id(t.demand);
      if (t.node >= 0) jr["node"] = node_id(t.node);
      if (t.arc >= 0) jr["arc"] = t.arc;
      out.push_back(std::move(jr));
    }
    return out;
  };
  doc["columns"] = std::move(cols);
  doc["rows_eq"] = rows(p.eq_rows);
  doc["rows_in"] = rows(p.in_rows);
  return doc.dump(1) + "\n";
}

}  // namespace equiflow
