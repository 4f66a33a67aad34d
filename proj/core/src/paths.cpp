#include "equiflow/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <sstream>

#include "equiflow/error.hpp"
#include "equiflow/format.hpp"

namespace equiflow {

namespace {

std::vector<NodeId> node_sequence(const Network& net, std::size_t source, const std::vector<ArcId>& arcs)
{
  std::vector<NodeId> seq{net.node(source).id};
  for (ArcId a : arcs) seq.push_back(net.arc(a).head);
  return seq;
}

std::vector<ArcId> trace(const Network& net, const std::vector<ArcId>& pred, std::size_t source, std::size_t v)
{
  std::vector<ArcId> arcs;
  while (v != source) {
    const ArcId a = pred[v];
    arcs.push_back(a);
    v = static_cast<std::size_t>(net.tail_index(a));
  }
  std::reverse(arcs.begin(), arcs.end());
  return arcs;
}

void describe_modes(const Network& net, PathFlow& p)
{
  std::map<std::string, double> time_by_kind;
  for (ArcId a : p.arcs) {
    const Arc& arc = net.arc(a);
    if (arc.kind == ArcKind::mode_switch) continue;
    time_by_kind[std::string(to_string(arc.kind))] += arc.time_min;
  }
  std::string joined;
  double best = -1.0;
  for (const auto& [kind, t] : time_by_kind) {
    if (!joined.empty()) joined += '+';
    joined += kind;
    if (t > best) {
      best = t;
      p.dominant_mode = kind;
    }
  }
  p.mode_set = joined.empty() ? "none" : joined;
  if (p.dominant_mode.empty()) p.dominant_mode = "none";
}

}  // namespace

std::optional<std::vector<ArcId>> shortest_positive_path(const Network& net, std::span<const double> residual,
                                                         std::size_t source, std::size_t sink)
{
  const std::size_t n = net.node_count();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, inf);
  std::vector<ArcId> pred(n, -1);
  std::vector<char> done(n, 0);
  using Entry = std::pair<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> heap;
  dist[source] = 0.0;
  heap.push({0.0, source});

  // Node-id sequences are compared only on time ties.
  auto lex_less = [&](std::size_t tail, std::size_t v) {
    auto a = node_sequence(net, source, trace(net, pred, source, tail));
    a.push_back(net.node(v).id);
    auto b = node_sequence(net, source, trace(net, pred, source, v));
    return a < b;
  };

  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (done[u] || d > dist[u]) continue;
    done[u] = 1;
    if (u == sink) break;
    for (ArcId a : net.out_arcs(u)) {
      if (!(residual[static_cast<std::size_t>(a)] > 0.0)) continue;
      const auto v = static_cast<std::size_t>(net.head_index(a));
      if (done[v]) continue;
      const double nd = d + net.arc(a).time_min;
      const double tol = 1e-12 * (1.0 + std::abs(nd));
      if (nd < dist[v] - tol) {
        dist[v] = nd;
        pred[v] = a;
        heap.push({nd, v});
      } else if (nd <= dist[v] + tol && lex_less(u, v)) {
        pred[v] = a;
        if (nd < dist[v]) {
          dist[v] = nd;
          heap.push({nd, v});
        }
      }
    }
  }
  if (!done[sink]) return std::nullopt;
  return trace(net, pred, source, sink);
}

PathAssignment decompose(const FlowSolution& flows, const Network& net, const DemandSet& dem, double solver_tolerance)
{
  PathAssignment out;
  const double limit = 1e3 * solver_tolerance;
  std::vector<double> residual(net.arc_count(), 0.0);
  for (std::size_t m = 0; m < dem.demands.size(); ++m) {
    const Demand& d = dem.demands[m];
    DemandPaths dp;
    dp.demand_id = d.id;
    dp.rate = d.rate;
    std::vector<ArcId> touched;
    for (const ArcFlow& f : flows.demand_flows[m]) {
      if (f.flow < -limit)
        throw ConservationViolation("demand " + std::to_string(d.id) + " has negative flow on arc " +
                                    std::to_string(f.arc));
      if (f.flow < kDustThreshold) continue;
      residual[static_cast<std::size_t>(f.arc)] = f.flow;
      touched.push_back(f.arc);
    }
    const std::size_t source = *net.node_index(d.origin);
    const std::size_t sink = *net.node_index(d.destination);
    auto source_excess = [&] {
      double e = 0.0;
      for (ArcId a : net.out_arcs(source)) e += residual[static_cast<std::size_t>(a)];
      for (ArcId a : net.in_arcs(source)) e -= residual[static_cast<std::size_t>(a)];
      return e;
    };

    while (source_excess() >= kDustThreshold) {
      auto arcs = shortest_positive_path(net, residual, source, sink);
      if (!arcs) break;
      double bottleneck = std::numeric_limits<double>::infinity();
      for (ArcId a : *arcs) bottleneck = std::min(bottleneck, residual[static_cast<std::size_t>(a)]);
      PathFlow p;
      p.arcs = *arcs;
      p.nodes = node_sequence(net, source, p.arcs);
      p.share = bottleneck;
      for (ArcId a : p.arcs) {
        double& r = residual[static_cast<std::size_t>(a)];
        r = r - bottleneck < kDustThreshold ? 0.0 : r - bottleneck;
        p.time_min += net.arc(a).time_min;
        p.cost += net.arc(a).cost;
      }
      describe_modes(net, p);
      dp.paths.push_back(std::move(p));
    }

    // Remaining flow: closed walks, then whatever does not close.
    double unattributed = 0.0;
    for (ArcId start : touched) {
      while (residual[static_cast<std::size_t>(start)] >= kDustThreshold) {
        std::vector<ArcId> walk{start};
        std::vector<int> position(net.node_count(), -1);
        position[static_cast<std::size_t>(net.tail_index(start))] = 0;
        std::size_t v = static_cast<std::size_t>(net.head_index(start));
        bool closed = false;
        while (true) {
          if (position[v] >= 0) {
            walk.erase(walk.begin(), walk.begin() + position[v]);
            closed = true;
            break;
          }
          position[v] = static_cast<int>(walk.size());
          ArcId next = -1;
          for (ArcId a : net.out_arcs(v))
            if (residual[static_cast<std::size_t>(a)] >= kDustThreshold &&
                (next < 0 || residual[static_cast<std::size_t>(a)] > residual[static_cast<std::size_t>(next)]))
              next = a;
          if (next < 0) break;
          walk.push_back(next);
          v = static_cast<std::size_t>(net.head_index(next));
        }
        if (!closed) {
          // Dead end: the first arc carries flow that no walk can close.
          unattributed = std::max(unattributed, residual[static_cast<std::size_t>(start)]);
          residual[static_cast<std::size_t>(start)] = 0.0;
          break;
        }
        double amount = std::numeric_limits<double>::infinity();
        for (ArcId a : walk) amount = std::min(amount, residual[static_cast<std::size_t>(a)]);
        CycleFlow c;
        c.arcs = walk;
        const auto first = static_cast<std::size_t>(net.tail_index(walk.front()));
        c.nodes = node_sequence(net, first, walk);
        c.flow = amount;
        for (ArcId a : walk) {
          double& r = residual[static_cast<std::size_t>(a)];
          r = r - amount < kDustThreshold ? 0.0 : r - amount;
          c.time_min += net.arc(a).time_min;
        }
        dp.cycles.push_back(std::move(c));
      }
    }
    double shares = 0.0;
    for (const PathFlow& p : dp.paths) shares += p.share;
    const double missing = std::abs(shares - d.rate);
    for (ArcId a : touched) residual[static_cast<std::size_t>(a)] = 0.0;
    if (unattributed > limit || missing > limit)
      throw ConservationViolation("demand " + std::to_string(d.id) + ": path shares " + format_number(shares) +
                                  " vs rate " + format_number(d.rate) + ", unattributed flow " +
                                  format_number(unattributed));
    out.demands.push_back(std::move(dp));
  }
  return out;
}

namespace {

std::string join_nodes(const std::vector<NodeId>& nodes)
{
  std::string s;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) s += '>';
    s += std::to_string(nodes[i]);
  }
  return s;
}

}  // namespace

std::string paths_to_csv(const PathAssignment& pa)
{
  std::ostringstream out;
  out << "demand,path,share,time_min,cost,mode_set,dominant_mode,nodes\n";
  for (const DemandPaths& d : pa.demands)
    for (std::size_t k = 0; k < d.paths.size(); ++k) {
      const PathFlow& p = d.paths[k];
      out << d.demand_id << ',' << k << ',' << format_number(p.share) << ',' << format_number(p.time_min) << ','
          << format_number(p.cost) << ',' << p.mode_set << ',' << p.dominant_mode << ',' << join_nodes(p.nodes)
          << '\n';
    }
  return out.str();
}

std::string cycles_to_csv(const PathAssignment& pa)
{
  std::ostringstream out;
  out << "demand,cycle,flow,time_min,nodes\n";
  for (const DemandPaths& d : pa.demands)
    for (std::size_t k = 0; k < d.cycles.size(); ++k) {
      const CycleFlow& c = d.cycles[k];
      out << d.demand_id << ',' << k << ',' << format_number(c.flow) << ',' << format_number(c.time_min) << ','
          << join_nodes(c.nodes) << '\n';
    }
  return out.str();
}

}  // namespace equiflow
