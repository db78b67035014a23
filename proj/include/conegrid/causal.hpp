#pragma once

// Causal DAG built from a Spacetime: stencil edges whose displacement lies
// in the local cone, reachability queries, cycle detection, and the
// widening-schedule approximation of the Seifert relation.

#include <algorithm>
#include <numeric>
#include <optional>
#include <queue>
#include <vector>

#include "geometry.hpp"
#include "util.hpp"

namespace conegrid {

struct Edge {
  int to;
  double weight;  // F at the source node on the displacement
  std::array<int, kMaxDim> offset;
  bool interior;  // displacement in the open cone
};

struct CausalGraph {
  Grid grid;
  int stencil_radius = 1;
  int n = 0;
  std::vector<std::vector<Edge>> adj;

  int edge_count() const {
    int e = 0;
    for (const auto& a : adj) e += static_cast<int>(a.size());
    return e;
  }

  CausalGraph reversed() const {
    CausalGraph r;
    r.grid = grid;
    r.stencil_radius = stencil_radius;
    r.n = n;
    r.adj.resize(n);
    for (int u = 0; u < n; ++u)
      for (const Edge& e : adj[u]) {
        Edge re = e;
        re.to = u;
        for (int a = 0; a < grid.dim; ++a) re.offset[a] = -e.offset[a];
        r.adj[e.to].push_back(re);
      }
    return r;
  }
};

namespace detail {

inline int gcd3(int a, int b, int c) {
  return std::gcd(std::gcd(std::abs(a), std::abs(b)), std::abs(c));
}

// All nonzero primitive offsets with max-norm <= radius, in a fixed order.
inline std::vector<std::array<int, kMaxDim>> primitive_offsets(int dim, int radius) {
  std::vector<std::array<int, kMaxDim>> out;
  const int zmax = dim == 3 ? radius : 0;
  for (int i = -radius; i <= radius; ++i)
    for (int j = -radius; j <= radius; ++j)
      for (int k = -zmax; k <= zmax; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        if (gcd3(i, j, k) != 1) continue;
        out.push_back({i, j, k});
      }
  return out;
}

}  // namespace detail

inline CausalGraph build_causal_graph(const Spacetime& st, int stencil_radius) {
  if (stencil_radius < 1)
    throw std::invalid_argument("build_causal_graph: stencil_radius must be >= 1");
  st.validate();
  CausalGraph g;
  g.grid = st.grid;
  g.stencil_radius = stencil_radius;
  g.n = st.grid.node_count();
  g.adj.resize(g.n);
  const auto offsets = detail::primitive_offsets(st.grid.dim, stencil_radius);
  for (int p = 0; p < g.n; ++p) {
    auto pc = st.grid.coords(p);
    for (const auto& off : offsets) {
      Vec disp = st.grid.displacement(off);
      if (!st.cone(p).contains(disp)) continue;
      auto qc = pc;
      for (int a = 0; a < st.grid.dim; ++a) qc[a] += off[a];
      int q = st.grid.wrapped_index(qc);
      if (q < 0) continue;
      Edge e;
      e.to = q;
      e.weight = st.finsler(p).value_unchecked(disp);
      e.offset = off;
      e.interior = st.cone(p).contains_interior(disp);
      g.adj[p].push_back(e);
    }
  }
  return g;
}

// Nodes reachable from p by directed paths, p included.
inline std::vector<int> future(const CausalGraph& g, int p) {
  if (p < 0 || p >= g.n) throw std::invalid_argument("future: node out of range");
  std::vector<char> seen(g.n, 0);
  std::vector<int> stack = {p}, out;
  seen[p] = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (const Edge& e : g.adj[u])
      if (!seen[e.to]) {
        seen[e.to] = 1;
        stack.push_back(e.to);
      }
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline std::vector<int> past(const CausalGraph& g, int p) {
  return future(g.reversed(), p);
}

// Topological order, or nullopt when the graph has a cycle.
inline std::optional<std::vector<int>> topological_order(const CausalGraph& g) {
  std::vector<int> indeg(g.n, 0), order;
  order.reserve(g.n);
  for (int u = 0; u < g.n; ++u)
    for (const Edge& e : g.adj[u]) ++indeg[e.to];
  std::vector<int> q;
  for (int u = 0; u < g.n; ++u)
    if (indeg[u] == 0) q.push_back(u);
  for (size_t h = 0; h < q.size(); ++h) {
    int u = q[h];
    order.push_back(u);
    for (const Edge& e : g.adj[u])
      if (--indeg[e.to] == 0) q.push_back(e.to);
  }
  if (static_cast<int>(order.size()) != g.n) return std::nullopt;
  return order;
}

struct CausalityResult {
  bool causal;
  std::vector<int> witness_cycle;  // nonempty iff !causal
};

inline CausalityResult is_causal(const CausalGraph& g) {
  // Iterative DFS with colors; a back edge yields the witness cycle.
  std::vector<int> color(g.n, 0);  // 0 white, 1 gray, 2 black
  std::vector<std::pair<int, size_t>> stack;
  for (int s = 0; s < g.n; ++s) {
    if (color[s] != 0) continue;
    stack.push_back({s, 0});
    color[s] = 1;
    while (!stack.empty()) {
      auto& [u, ei] = stack.back();
      if (ei < g.adj[u].size()) {
        int v = g.adj[u][ei++].to;
        if (color[v] == 0) {
          color[v] = 1;
          stack.push_back({v, 0});
        } else if (color[v] == 1) {
          std::vector<int> cycle;
          for (size_t k = 0; k < stack.size(); ++k)
            if (stack[k].first == v || !cycle.empty()) cycle.push_back(stack[k].first);
          cycle.push_back(v);
          return {false, cycle};
        }
      } else {
        color[u] = 2;
        stack.pop_back();
      }
    }
  }
  return {true, {}};
}

// Reflexive transitive closure; bitset DP over reverse topological order
// when acyclic, per-source BFS otherwise.
inline Relation reachability(const CausalGraph& g) {
  Relation rel(g.n);
  auto topo = topological_order(g);
  if (topo) {
    for (auto it = topo->rbegin(); it != topo->rend(); ++it) {
      int u = *it;
      rel.rows[u].set(u);
      for (const Edge& e : g.adj[u]) rel.rows[u] |= rel.rows[e.to];
    }
  } else {
    for (int p = 0; p < g.n; ++p)
      for (int q : future(g, p)) rel.rows[p].set(q);
  }
  return rel;
}

struct SeifertResult {
  Relation relation;
  bool converged = false;      // last two schedule steps agree
  bool stably_causal = false;  // some widened graph in the schedule is acyclic
  std::vector<double> schedule;
  int acyclic_count = 0;
};

inline std::vector<double> default_eps_schedule(int steps = 6, double eps0 = 0.2) {
  std::vector<double> s;
  for (int k = 0; k < steps; ++k) s.push_back(eps0 * std::pow(2.0, -k));
  return s;
}

inline SeifertResult seifert_relation(const Spacetime& st,
                                      const std::vector<double>& eps_schedule,
                                      int stencil_radius) {
  if (eps_schedule.empty())
    throw std::invalid_argument("seifert_relation: empty schedule");
  for (size_t i = 1; i < eps_schedule.size(); ++i)
    if (eps_schedule[i] >= eps_schedule[i - 1])
      throw std::invalid_argument("seifert_relation: schedule must strictly decrease");

  SeifertResult res;
  res.schedule = eps_schedule;
  std::vector<Relation> steps;
  steps.reserve(eps_schedule.size());
  for (double eps : eps_schedule) {
    CausalGraph ge = build_causal_graph(widen_spacetime(st, eps), stencil_radius);
    if (is_causal(ge).causal) ++res.acyclic_count;
    steps.push_back(reachability(ge));
  }
  res.relation = steps.front();
  for (size_t i = 1; i < steps.size(); ++i) res.relation.intersect_with(steps[i]);
  res.stably_causal = res.acyclic_count > 0;
  res.converged = steps.size() < 2 || steps[steps.size() - 1] == steps[steps.size() - 2];
  return res;
}

inline bool is_stably_causal(const Spacetime& st, const std::vector<double>& eps_schedule,
                             int stencil_radius) {
  for (double eps : eps_schedule) {
    if (eps <= 0) throw std::invalid_argument("is_stably_causal: eps must be positive");
    CausalGraph ge = build_causal_graph(widen_spacetime(st, eps), stencil_radius);
    if (is_causal(ge).causal) return true;
  }
  return false;
}

// Relation export: "source,target" per line for small grids.
inline std::string relation_to_csv(const Relation& rel) {
  std::string out = "source,target\n";
  for (int p = 0; p < rel.n; ++p)
    for (int q = 0; q < rel.n; ++q)
      if (rel.related(p, q)) {
        out += std::to_string(p);
        out += ',';
        out += std::to_string(q);
        out += '\n';
      }
  return out;
}

}  // namespace conegrid
