#pragma once

// The product trick: lift a spacetime to M x R with the non-strictly-convex
// cone C_down = {(y, z): y in C u {0}, z <= F(y)} \ {0}, lift causal curves
// by accumulated length, and brute-force compare the Seifert relation of
// the product against the base Seifert relation plus the stable distance.

#include <cmath>
#include <sstream>
#include <vector>

#include "distance.hpp"

namespace conegrid {

// Membership predicate for C_down at one node: (y in C and z <= F(y)) or
// (y = 0 and z < 0). The fiber direction stays lightlike.
struct ProductConeDown {
  ConeSpec cone;
  FinslerSpec finsler;

  bool contains(const Vec& y, double z) const {
    if (y.is_zero()) return z < 0;
    if (!cone.contains(y)) return false;
    return z <= finsler.value_unchecked(y) + 1e-12;
  }
};

// Symmetric variant C_x: y in C and |z| <= F(y); no pure fiber direction.
struct ProductConeSym {
  ConeSpec cone;
  FinslerSpec finsler;

  bool contains(const Vec& y, double z) const {
    if (y.is_zero()) return false;
    if (!cone.contains(y)) return false;
    return std::abs(z) <= finsler.value_unchecked(y) + 1e-12;
  }
};

inline ProductConeDown lift_cone_down(const ConeSpec& c, const FinslerSpec& f) {
  return {c, f};
}
inline ProductConeSym lift_cone_sym(const ConeSpec& c, const FinslerSpec& f) {
  return {c, f};
}

struct LiftedPath {
  CausalPath base;
  std::vector<double> fiber;  // running accumulated length, fiber[0] = 0
};

inline LiftedPath lift_curve(const CausalGraph& g, const CausalPath& path) {
  LiftedPath lifted;
  lifted.base = path;
  lifted.fiber.assign(path.size(), 0.0);
  for (size_t i = 0; i + 1 < path.size(); ++i) {
    const Edge* found = nullptr;
    for (const Edge& e : g.adj[path[i]])
      if (e.to == path[i + 1] && (!found || e.weight > found->weight)) found = &e;
    if (!found) throw std::invalid_argument("lift_curve: invalid step");
    lifted.fiber[i + 1] = lifted.fiber[i] + found->weight;
  }
  return lifted;
}

// Product causal graph over base nodes x fiber levels. Fiber index k has
// coordinate z = fiber_origin + k * fiber_spacing; the future direction
// along the fiber is decreasing k (the always-present fiber-down edge).
// A base-moving edge (p,k) -> (q,k') exists iff p -> q is a base edge with
// weight w and (k' - k) * fiber_spacing <= w, rounded down to the grid.
struct ProductSpacetime {
  Spacetime base;
  CausalGraph base_graph;
  int levels = 0;
  double fiber_spacing = 1.0;
  double fiber_origin = 0.0;
  int n = 0;
  std::vector<std::vector<int>> adj;

  int pindex(int p, int k) const { return p * levels + k; }
  int base_of(int idx) const { return idx / levels; }
  int level_of(int idx) const { return idx % levels; }
  double fiber_coord(int k) const { return fiber_origin + k * fiber_spacing; }
};

inline ProductSpacetime build_product_graph(const Spacetime& st, int fiber_levels,
                                            double fiber_spacing, int stencil_radius,
                                            double fiber_origin = 0.0) {
  if (fiber_levels < 2)
    throw std::invalid_argument("build_product_graph: fiber_levels must be >= 2");
  if (fiber_spacing <= 0)
    throw std::invalid_argument("build_product_graph: fiber_spacing must be positive");
  ProductSpacetime ps;
  ps.base = st;
  ps.base_graph = build_causal_graph(st, stencil_radius);
  ps.levels = fiber_levels;
  ps.fiber_spacing = fiber_spacing;
  ps.fiber_origin = fiber_origin;
  ps.n = ps.base_graph.n * fiber_levels;
  ps.adj.resize(ps.n);
  for (int p = 0; p < ps.base_graph.n; ++p) {
    for (int k = 0; k < fiber_levels; ++k) {
      int u = ps.pindex(p, k);
      if (k >= 1) ps.adj[u].push_back(ps.pindex(p, k - 1));
      for (const Edge& e : ps.base_graph.adj[p]) {
        int max_up = static_cast<int>(std::floor(e.weight / fiber_spacing + 1e-12));
        int hi = std::min(fiber_levels - 1, k + max_up);
        for (int k2 = 0; k2 <= hi; ++k2) ps.adj[u].push_back(ps.pindex(e.to, k2));
      }
    }
  }
  return ps;
}

inline CausalGraph product_as_graph(const ProductSpacetime& ps) {
  CausalGraph g;
  g.n = ps.n;
  g.grid = ps.base.grid;  // base grid retained for reference only
  g.stencil_radius = ps.base_graph.stencil_radius;
  g.adj.resize(ps.n);
  for (int u = 0; u < ps.n; ++u)
    for (int v : ps.adj[u]) g.adj[u].push_back({v, 0.0, {0, 0, 0}, false});
  return g;
}

// Seifert approximation on the product: intersection over the widening
// schedule of product reachabilities, with the product cones built from the
// widened base pair only (the fiber direction never opens).
inline SeifertResult product_seifert(const Spacetime& st, int fiber_levels,
                                     double fiber_spacing, int stencil_radius,
                                     const std::vector<double>& eps_schedule,
                                     double fiber_origin = 0.0) {
  SeifertResult res;
  res.schedule = eps_schedule;
  std::vector<Relation> steps;
  for (double eps : eps_schedule) {
    ProductSpacetime wps = build_product_graph(widen_spacetime(st, eps), fiber_levels,
                                               fiber_spacing, stencil_radius, fiber_origin);
    CausalGraph g = product_as_graph(wps);
    if (is_causal(g).causal) ++res.acyclic_count;
    steps.push_back(reachability(g));
  }
  res.relation = steps.front();
  for (size_t i = 1; i < steps.size(); ++i) res.relation.intersect_with(steps[i]);
  res.stably_causal = res.acyclic_count > 0;
  res.converged = steps.size() < 2 || steps[steps.size() - 1] == steps[steps.size() - 2];
  return res;
}

struct VyvReport {
  int base_nodes = 0;
  int fiber_levels = 0;
  double fiber_spacing = 0.0;
  long long left_size = 0;   // product Seifert pairs
  long long right_size = 0;  // pairs with (p,p') in base J_S and dz <= D
  // Mismatches robust to one fiber quantum of slack.
  std::vector<std::array<int, 4>> left_only;   // (p, k, p', k')
  std::vector<std::array<int, 4>> right_only;
  long long boundary_pairs = 0;  // disagreements within one quantum, tolerated
  bool consistent() const { return left_only.empty() && right_only.empty(); }

  std::string to_text() const {
    std::ostringstream os;
    os << "vyv-check base_nodes=" << base_nodes << " fiber_levels=" << fiber_levels
       << " fiber_spacing=" << format_real(fiber_spacing) << "\n";
    os << "left(product seifert) pairs: " << left_size << "\n";
    os << "right(base seifert + stable distance) pairs: " << right_size << "\n";
    os << "boundary pairs within one fiber quantum: " << boundary_pairs << "\n";
    os << "robust left-only mismatches: " << left_only.size() << "\n";
    for (const auto& m : left_only)
      os << "  L (" << m[0] << "," << m[1] << ") -> (" << m[2] << "," << m[3] << ")\n";
    os << "robust right-only mismatches: " << right_only.size() << "\n";
    for (const auto& m : right_only)
      os << "  R (" << m[0] << "," << m[1] << ") -> (" << m[2] << "," << m[3] << ")\n";
    os << (consistent() ? "CONSISTENT" : "INCONSISTENT") << " within one fiber quantum\n";
    return os.str();
  }
};

// Brute-force check of the product-Seifert characterization on a small
// spacetime: both sides computed independently, symmetric difference
// reported modulo one fiber quantum of quantization slack.
inline VyvReport verify_vyv(const Spacetime& st, int fiber_levels, double fiber_spacing,
                            int stencil_radius, const std::vector<double>& eps_schedule,
                            int budget = 5000, double fiber_origin = 0.0) {
  const int bn = st.grid.node_count();
  const int pn = bn * fiber_levels;
  if (pn > budget)
    throw std::invalid_argument("verify_vyv: product has " + std::to_string(pn) +
                                " nodes, exceeding budget " + std::to_string(budget) +
                                "; shrink the grid or fiber");

  SeifertResult left = product_seifert(st, fiber_levels, fiber_spacing, stencil_radius,
                                       eps_schedule, fiber_origin);
  SeifertResult base = seifert_relation(st, eps_schedule, stencil_radius);

  // Stable-distance matrix from the smallest widening step.
  CausalGraph gmin =
      build_causal_graph(widen_spacetime(st, eps_schedule.back()), stencil_radius);
  std::vector<DistanceField> dmat;
  dmat.reserve(bn);
  for (int p = 0; p < bn; ++p) dmat.push_back(distance_field(gmin, p));

  VyvReport rep;
  rep.base_nodes = bn;
  rep.fiber_levels = fiber_levels;
  rep.fiber_spacing = fiber_spacing;
  ProductSpacetime ps =
      build_product_graph(st, fiber_levels, fiber_spacing, stencil_radius, fiber_origin);

  for (int p = 0; p < bn; ++p)
    for (int k = 0; k < fiber_levels; ++k)
      for (int p2 = 0; p2 < bn; ++p2)
        for (int k2 = 0; k2 < fiber_levels; ++k2) {
          int u = ps.pindex(p, k), v = ps.pindex(p2, k2);
          bool in_left = left.relation.related(u, v);
          double dz = ps.fiber_coord(k2) - ps.fiber_coord(k);
          bool base_rel = base.relation.related(p, p2);
          double D = dmat[p].infinite[p2]
                         ? std::numeric_limits<double>::infinity()
                         : dmat[p].value[p2];
          bool in_right = base_rel && dz <= D + 1e-12;
          if (in_left) ++rep.left_size;
          if (in_right) ++rep.right_size;
          if (in_left == in_right) continue;
          // One quantum of slack on the fiber inequality.
          bool boundary = base_rel && std::isfinite(D) &&
                          std::abs(dz - D) <= fiber_spacing + 1e-12;
          if (boundary) {
            ++rep.boundary_pairs;
          } else if (in_left) {
            rep.left_only.push_back({p, k, p2, k2});
          } else {
            rep.right_only.push_back({p, k, p2, k2});
          }
        }
  return rep;
}

}  // namespace conegrid
