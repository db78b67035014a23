#pragma once

// Lorentz-Finsler length of polygonal causal curves and the distance as a
// longest-path problem: exact dynamic programming in topological order on
// acyclic graphs, +infinity through positive-weight cycles, and the stable
// distance via a widening schedule.

#include <limits>
#include <optional>
#include <vector>

#include "causal.hpp"

namespace conegrid {

using CausalPath = std::vector<int>;

inline double path_length(const CausalGraph& g, const CausalPath& path) {
  if (path.empty()) throw std::invalid_argument("path_length: empty path");
  double total = 0;
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const Edge* found = nullptr;
    for (const Edge& e : g.adj[path[i]])
      if (e.to == path[i + 1] && (!found || e.weight > found->weight)) found = &e;
    if (!found)
      throw std::invalid_argument("path_length: step " + std::to_string(i) + " (" +
                                  std::to_string(path[i]) + " -> " +
                                  std::to_string(path[i + 1]) + ") is not an edge");
    total += found->weight;
  }
  return total;
}

struct DistanceField {
  int source = 0;
  std::vector<double> value;    // 0 off the future of the source
  std::vector<char> infinite;   // reachable through a positive-weight cycle
  std::vector<int> parent;      // -1 off the future / at the source
  bool any_infinite = false;

  std::vector<int> witness(int q) const {
    std::vector<int> path;
    for (int u = q; u != -1; u = parent[u]) path.push_back(u);
    std::reverse(path.begin(), path.end());
    return path;
  }
};

namespace detail {

// Tarjan strongly connected components, iterative. Returns comp id per node.
inline int scc_components(const CausalGraph& g, std::vector<int>& comp) {
  comp.assign(g.n, -1);
  std::vector<int> low(g.n), disc(g.n, -1), stk;
  std::vector<char> on(g.n, 0);
  int timer = 0, ncomp = 0;
  std::vector<std::pair<int, size_t>> call;
  for (int s = 0; s < g.n; ++s) {
    if (disc[s] != -1) continue;
    call.push_back({s, 0});
    while (!call.empty()) {
      auto& [u, ei] = call.back();
      if (ei == 0) {
        disc[u] = low[u] = timer++;
        stk.push_back(u);
        on[u] = 1;
      }
      if (ei < g.adj[u].size()) {
        int v = g.adj[u][ei++].to;
        if (disc[v] == -1) {
          call.push_back({v, 0});
        } else if (on[v]) {
          low[u] = std::min(low[u], disc[v]);
        }
      } else {
        if (low[u] == disc[u]) {
          while (true) {
            int w = stk.back();
            stk.pop_back();
            on[w] = 0;
            comp[w] = ncomp;
            if (w == u) break;
          }
          ++ncomp;
        }
        int done = u;
        call.pop_back();
        if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
      }
    }
  }
  return ncomp;
}

// Lexicographic comparison of the parent-chain paths through a and b into
// a shared target node.
inline bool path_less(const std::vector<int>& parent, int a, int b, int target) {
  std::vector<int> pa, pb;
  pa.push_back(target);
  pb.push_back(target);
  for (int u = a; u != -1; u = parent[u]) pa.push_back(u);
  for (int u = b; u != -1; u = parent[u]) pb.push_back(u);
  std::reverse(pa.begin(), pa.end());
  std::reverse(pb.begin(), pb.end());
  return pa < pb;
}

}  // namespace detail

// Longest-path distances from p to all nodes. On acyclic graphs the result
// is exact and carries lexicographically-smallest witnesses; with cycles,
// nodes reachable through a positive-weight cycle are flagged infinite.
inline DistanceField distance_field(const CausalGraph& g, int p) {
  if (p < 0 || p >= g.n) throw std::invalid_argument("distance_field: node out of range");
  DistanceField f;
  f.source = p;
  f.value.assign(g.n, 0.0);
  f.infinite.assign(g.n, 0);
  f.parent.assign(g.n, -1);

  auto topo = topological_order(g);
  std::vector<char> reach(g.n, 0);
  for (int q : future(g, p)) reach[q] = 1;

  if (topo) {
    std::vector<double> d(g.n, 0.0);
    for (int u : *topo) {
      if (!reach[u]) continue;
      for (const Edge& e : g.adj[u]) {
        double cand = d[u] + e.weight;
        if (cand > d[e.to]) {
          d[e.to] = cand;
          f.parent[e.to] = u;
        } else if (cand == d[e.to] && reach[e.to]) {
          // Tie: keep the lexicographically smallest witness sequence.
          int old = f.parent[e.to];
          if (old == -1 && e.to != p) {
            f.parent[e.to] = u;
          } else if (old != -1 && detail::path_less(f.parent, u, old, e.to)) {
            f.parent[e.to] = u;
          }
        }
      }
    }
    for (int q = 0; q < g.n; ++q) f.value[q] = reach[q] ? d[q] : 0.0;
    return f;
  }

  // Cyclic: condense SCCs. Any positive-weight edge inside an SCC lies on a
  // cycle, so such components force infinity downstream.
  std::vector<int> comp;
  int ncomp = detail::scc_components(g, comp);
  std::vector<char> comp_cyclic(ncomp, 0), comp_positive(ncomp, 0);
  std::vector<int> comp_size(ncomp, 0);
  for (int u = 0; u < g.n; ++u) ++comp_size[comp[u]];
  for (int u = 0; u < g.n; ++u)
    for (const Edge& e : g.adj[u])
      if (comp[u] == comp[e.to]) {
        comp_cyclic[comp[u]] = 1;
        if (e.weight > 0) comp_positive[comp[u]] = 1;
      }

  // Condensation adjacency with max cross weight per edge.
  std::vector<std::vector<std::pair<int, double>>> cadj(ncomp);
  for (int u = 0; u < g.n; ++u)
    for (const Edge& e : g.adj[u])
      if (comp[u] != comp[e.to]) cadj[comp[u]].push_back({comp[e.to], e.weight});

  // Components in Tarjan order are already reverse-topological.
  std::vector<double> cd(ncomp, 0.0);
  std::vector<char> cinf(ncomp, 0), creach(ncomp, 0);
  creach[comp[p]] = 1;
  if (comp_positive[comp[p]]) cinf[comp[p]] = 1;
  for (int c = ncomp - 1; c >= 0; --c) {
    if (!creach[c]) continue;
    for (auto [to, w] : cadj[c]) {
      creach[to] = 1;
      if (cinf[c] || comp_positive[to]) cinf[to] = 1;
      cd[to] = std::max(cd[to], cd[c] + w);
    }
  }
  for (int q = 0; q < g.n; ++q) {
    int c = comp[q];
    if (!creach[c] || !reach[q]) continue;
    f.value[q] = cd[c];
    if (cinf[c]) {
      f.infinite[q] = 1;
      f.any_infinite = true;
      f.value[q] = std::numeric_limits<double>::infinity();
    }
  }
  return f;
}

struct DistanceResult {
  double value = 0.0;
  bool finite = true;
  std::optional<CausalPath> witness;
};

inline DistanceResult distance(const CausalGraph& g, int p, int q) {
  DistanceField f = distance_field(g, p);
  DistanceResult r;
  if (f.infinite[q]) {
    r.value = std::numeric_limits<double>::infinity();
    r.finite = false;
    return r;
  }
  r.value = f.value[q];
  bool reached = (q == p) || f.parent[q] != -1;
  if (reached && !f.any_infinite) r.witness = f.witness(q);
  return r;
}

struct StableDistanceResult {
  double estimate = 0.0;
  bool finite = true;  // finite at some schedule step
  std::vector<double> schedule;
  std::vector<double> values;      // d_eps per step, +inf where infinite
  std::vector<char> finite_flags;
};

// d_eps for each widened (C_eps, F_eps); the smallest-eps value is the
// estimate and an upper bound for the stable distance up to discretization.
inline StableDistanceResult stable_distance(const Spacetime& st, int p, int q,
                                            const std::vector<double>& eps_schedule,
                                            int stencil_radius) {
  if (eps_schedule.empty())
    throw std::invalid_argument("stable_distance: empty schedule");
  for (size_t i = 1; i < eps_schedule.size(); ++i)
    if (eps_schedule[i] >= eps_schedule[i - 1])
      throw std::invalid_argument("stable_distance: schedule must strictly decrease");
  StableDistanceResult r;
  r.schedule = eps_schedule;
  r.finite = false;
  for (double eps : eps_schedule) {
    CausalGraph ge = build_causal_graph(widen_spacetime(st, eps), stencil_radius);
    DistanceResult de = distance(ge, p, q);
    r.values.push_back(de.value);
    r.finite_flags.push_back(de.finite ? 1 : 0);
    if (de.finite) r.finite = true;
  }
  r.estimate = r.values.back();
  return r;
}

// Distance matrix export: source,target,value,finite per line.
inline std::string distance_rows_csv(const CausalGraph& g, const std::vector<int>& sources) {
  std::string out = "source,target,value,finite\n";
  for (int p : sources) {
    DistanceField f = distance_field(g, p);
    for (int q = 0; q < g.n; ++q) {
      out += std::to_string(p) + "," + std::to_string(q) + ",";
      out += f.infinite[q] ? "inf" : format_real(f.value[q]);
      out += f.infinite[q] ? ",0\n" : ",1\n";
    }
  }
  return out;
}

}  // namespace conegrid
