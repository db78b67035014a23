#pragma once

// Averaging time functions on the product, level-set graph extraction,
// steepness validation, volume functions, and steep-candidate generation.
//
// tau_down(P) = -avg_a mu(J+_a(P)) over a one-parameter widening family of
// product cones built from widened base pairs only, so the fiber direction
// stays lightlike; tau_up is the dual with pasts; their log-quotient is a
// time function whose zero level set cuts every fiber column and whose
// graphing function is edgewise F-steep up to one fiber quantum.

#include <cmath>
#include <set>
#include <sstream>
#include <vector>

#include "product.hpp"

namespace conegrid {

using GridFunction = std::vector<double>;

// Per-node nonnegative weights normalized to total 1.
struct Measure {
  std::vector<double> w;

  static Measure uniform(int n) {
    Measure m;
    m.w.assign(n, 1.0 / n);
    return m;
  }

  // Gaussian weighting toward the chart center of the product grid.
  static Measure gaussian(const ProductSpacetime& ps, double sigma) {
    Measure m;
    m.w.resize(ps.n);
    const Grid& gr = ps.base.grid;
    Vec center;
    center.dim = gr.dim;
    for (int a = 0; a < gr.dim; ++a)
      center[a] = gr.origin[a] + 0.5 * (gr.dims[a] - 1) * gr.spacing[a];
    double zc = ps.fiber_coord(0) + 0.5 * (ps.levels - 1) * ps.fiber_spacing;
    double total = 0;
    for (int i = 0; i < ps.n; ++i) {
      Vec pos = gr.position(ps.base_of(i));
      double r2 = (pos - center).dot(pos - center);
      double dz = ps.fiber_coord(ps.level_of(i)) - zc;
      m.w[i] = std::exp(-(r2 + dz * dz) / (2 * sigma * sigma));
      total += m.w[i];
    }
    for (auto& v : m.w) v /= total;
    return m;
  }

  void validate(int n) const {
    if (static_cast<int>(w.size()) != n)
      throw std::invalid_argument("measure: size mismatch");
    double total = 0;
    for (double v : w) {
      if (v < 0) throw std::invalid_argument("measure: negative weight");
      total += v;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::invalid_argument("measure: weights must sum to 1");
  }
};

// One-parameter widening family over a in [1, 2].
struct WideningFamily {
  double eps_max = 0.3;
  double eps(double a) const { return (a - 1.0) * eps_max; }
};

namespace detail {

inline Relation product_reachability(const ProductSpacetime& ps, bool* acyclic = nullptr) {
  CausalGraph g = product_as_graph(ps);
  if (acyclic) *acyclic = is_causal(g).causal;
  return reachability(g);
}

inline GridFunction tau_average(const ProductSpacetime& ps, const Measure& mu,
                                int a_samples, const WideningFamily& fam, bool down) {
  if (a_samples < 1) throw std::invalid_argument("tau: a_samples must be >= 1");
  mu.validate(ps.n);
  GridFunction tau(ps.n, 0.0);
  for (int j = 0; j < a_samples; ++j) {
    double a = 1.0 + (j + 0.5) / a_samples;  // midpoint rule on [1, 2]
    ProductSpacetime wps =
        build_product_graph(widen_spacetime(ps.base, fam.eps(a)), ps.levels,
                            ps.fiber_spacing, ps.base_graph.stencil_radius,
                            ps.fiber_origin);
    bool acyclic = false;
    Relation reach = product_reachability(wps, &acyclic);
    if (!acyclic)
      throw std::runtime_error("tau: widened product graph at a=" + format_real(a) +
                               " has a closed causal curve");
    if (down) {
      // mu(J+(P)) accumulated directly.
      for (int p = 0; p < ps.n; ++p) {
        double m = 0;
        for (int q = 0; q < ps.n; ++q)
          if (reach.related(p, q)) m += mu.w[q];
        tau[p] -= m / a_samples;
      }
    } else {
      for (int q = 0; q < ps.n; ++q) {
        double m = 0;
        for (int p2 = 0; p2 < ps.n; ++p2)
          if (reach.related(p2, q)) m += mu.w[p2];
        tau[q] += m / a_samples;
      }
    }
  }
  return tau;
}

}  // namespace detail

// Values in [-1, 0]; strictly increasing along every product causal edge.
inline GridFunction tau_down(const ProductSpacetime& ps, const Measure& mu, int a_samples,
                             const WideningFamily& fam) {
  return detail::tau_average(ps, mu, a_samples, fam, true);
}

// Values in [0, 1]; dual of tau_down with pasts.
inline GridFunction tau_up(const ProductSpacetime& ps, const Measure& mu, int a_samples,
                           const WideningFamily& fam) {
  return detail::tau_average(ps, mu, a_samples, fam, false);
}

struct GerochResult {
  GridFunction tau;
  std::vector<char> defined;
  int excluded = 0;
};

// tau = log(tau_up / -tau_down) wherever both factors are nonzero.
inline GerochResult geroch_tau(const GridFunction& td, const GridFunction& tu) {
  if (td.size() != tu.size()) throw std::invalid_argument("geroch_tau: size mismatch");
  GerochResult r;
  r.tau.assign(td.size(), 0.0);
  r.defined.assign(td.size(), 1);
  for (size_t i = 0; i < td.size(); ++i) {
    if (!(td[i] < 0.0) || !(tu[i] > 0.0)) {
      r.defined[i] = 0;
      ++r.excluded;
      continue;
    }
    r.tau[i] = std::log(tu[i] / (-td[i]));
  }
  return r;
}

struct LevelSetResult {
  GridFunction t;              // fiber coordinate of the crossing, per base node
  std::vector<char> defined;   // column brackets or extrapolates the level
  int missing = 0;             // columns not bracketing (extrapolation off)
  int extrapolated = 0;        // columns resolved beyond the sampled range
};

// Fiber coordinate where tau crosses the level, per base column, by linear
// interpolation. tau must be monotone along each fiber column (the fiber
// cone edge forces this); the future fiber direction is decreasing index.
// Columns whose sampled range misses the level (the fiber is truncated to
// finitely many levels) are resolved by linear extrapolation from the
// nearest column end when extrapolate is set.
inline LevelSetResult level_set_graph(const ProductSpacetime& ps, const GridFunction& tau,
                                      double level, bool extrapolate = true) {
  if (static_cast<int>(tau.size()) != ps.n)
    throw std::invalid_argument("level_set_graph: size mismatch");
  const int bn = ps.base_graph.n;
  const int L = ps.levels;
  LevelSetResult r;
  r.t.assign(bn, 0.0);
  r.defined.assign(bn, 0);
  for (int p = 0; p < bn; ++p) {
    for (int k = 0; k + 1 < L; ++k)
      if (tau[ps.pindex(p, k + 1)] > tau[ps.pindex(p, k)] + 1e-12)
        throw std::runtime_error("level_set_graph: non-monotone fiber column at base node " +
                                 std::to_string(p));
    double lo = tau[ps.pindex(p, L - 1)];
    double hi = tau[ps.pindex(p, 0)];
    if (level < lo || level > hi) {
      if (!extrapolate || L < 2) {
        ++r.missing;
        continue;
      }
      int k = level > hi ? 0 : L - 2;
      double a = tau[ps.pindex(p, k)], b = tau[ps.pindex(p, k + 1)];
      if (!(a > b)) {
        ++r.missing;  // flat column end; no usable slope
        continue;
      }
      r.t[p] = ps.fiber_coord(k) + (a - level) / (a - b) * ps.fiber_spacing;
      r.defined[p] = 1;
      ++r.extrapolated;
      continue;
    }
    for (int k = 0; k + 1 < L; ++k) {
      double a = tau[ps.pindex(p, k)], b = tau[ps.pindex(p, k + 1)];
      if (!(a >= level && level >= b)) continue;
      double frac = (a > b) ? (a - level) / (a - b) : 0.0;
      r.t[p] = ps.fiber_coord(k) + frac * ps.fiber_spacing;
      r.defined[p] = 1;
      break;
    }
  }
  return r;
}

enum class SteepMode { FSteep, HSteep, Temporal };

struct SteepReport {
  bool steep = false;
  double worst_margin = 0.0;  // min over edges of increment minus threshold
  std::vector<std::pair<int, int>> violations;
};

// Edgewise steepness: F-steep compares the increment against the edge
// F-weight, h-steep against the Euclidean displacement norm, temporal
// against zero with strict inequality.
inline SteepReport is_steep(const GridFunction& t, const CausalGraph& g,
                            SteepMode mode = SteepMode::FSteep, double tol = 0.0) {
  if (static_cast<int>(t.size()) != g.n)
    throw std::invalid_argument("is_steep: function size mismatch");
  SteepReport rep;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  bool any_edge = false;
  for (int u = 0; u < g.n; ++u)
    for (const Edge& e : g.adj[u]) {
      any_edge = true;
      double incr = t[e.to] - t[u];
      double rhs = 0.0;
      if (mode == SteepMode::FSteep) rhs = e.weight;
      if (mode == SteepMode::HSteep) rhs = g.grid.displacement(e.offset).norm();
      double margin = incr - rhs;
      rep.worst_margin = std::min(rep.worst_margin, margin);
      bool bad = (mode == SteepMode::Temporal) ? (margin <= tol) : (margin < -tol);
      if (bad) rep.violations.push_back({u, e.to});
    }
  if (!any_edge) rep.worst_margin = 0.0;
  rep.steep = rep.violations.empty();
  return rep;
}

// Past mode: value at q is the phi.mu mass of past(q), nondecreasing along
// causal edges; future mode negates the mass over futures.
enum class VolumeDirection { Past, Future };

inline GridFunction volume_function(const CausalGraph& g, const GridFunction& phi,
                                    const Measure& mu, VolumeDirection dir) {
  if (static_cast<int>(phi.size()) != g.n || static_cast<int>(mu.w.size()) != g.n)
    throw std::invalid_argument("volume_function: size mismatch");
  for (double v : phi)
    if (v < 0) throw std::invalid_argument("volume_function: phi must be nonnegative");
  Relation reach = reachability(g);
  GridFunction out(g.n, 0.0);
  for (int p = 0; p < g.n; ++p)
    for (int q = 0; q < g.n; ++q)
      if (reach.related(p, q)) {
        if (dir == VolumeDirection::Past)
          out[q] += phi[p] * mu.w[p];
        else
          out[p] -= phi[q] * mu.w[q];
      }
  return out;
}

struct FrancoAnchor {
  int node;
  int sign;  // +1: d(r, .), -1: -d(., r)
};

struct FrancoCandidate {
  GridFunction values;
  std::vector<std::pair<int, int>> uncovered_edges;
  bool fully_covered() const { return uncovered_edges.empty(); }
};

// f = sum over anchors of d(r, .) resp. -d(., r). Each summand is causally
// nondecreasing everywhere and F-steep on the edges whose source (resp.
// target) lies in the anchor's future (resp. past), by the reverse triangle
// inequality; edges not in any such region are reported.
inline FrancoCandidate franco_candidate(const CausalGraph& g,
                                        const std::vector<FrancoAnchor>& anchors) {
  if (anchors.empty()) throw std::invalid_argument("franco_candidate: no anchors");
  FrancoCandidate fc;
  fc.values.assign(g.n, 0.0);
  std::vector<char> covered_src(g.n, 0), covered_tgt(g.n, 0);
  CausalGraph rg = g.reversed();
  for (const FrancoAnchor& a : anchors) {
    if (a.node < 0 || a.node >= g.n)
      throw std::invalid_argument("franco_candidate: anchor out of range");
    if (a.sign > 0) {
      DistanceField df = distance_field(g, a.node);
      if (df.any_infinite)
        throw std::runtime_error("franco_candidate: infinite distance field");
      for (int i = 0; i < g.n; ++i) fc.values[i] += df.value[i];
      for (int i : future(g, a.node)) covered_src[i] = 1;
    } else {
      DistanceField df = distance_field(rg, a.node);
      if (df.any_infinite)
        throw std::runtime_error("franco_candidate: infinite distance field");
      for (int i = 0; i < g.n; ++i) fc.values[i] -= df.value[i];
      for (int i : future(rg, a.node)) covered_tgt[i] = 1;
    }
  }
  for (int u = 0; u < g.n; ++u)
    for (const Edge& e : g.adj[u])
      if (!covered_src[u] && !covered_tgt[e.to]) fc.uncovered_edges.push_back({u, e.to});
  return fc;
}

enum class Provenance { LevelSet, Franco, Coordinate };

struct SteepMember {
  GridFunction values;
  Provenance provenance;
  double margin = 0.0;       // worst F-steep margin over edges
  bool zero_margin = false;  // accepted with margin 0, flagged
  std::string id;
};

struct SteepFamily {
  std::vector<SteepMember> members;
  int dropped = 0;

  bool empty() const { return members.empty(); }
  int size() const { return static_cast<int>(members.size()); }

  // inf over members of [f(q) - f(p)]^+; also reports the best member.
  std::pair<double, int> infimum(int p, int q) const {
    double best = std::numeric_limits<double>::infinity();
    int best_id = -1;
    for (size_t i = 0; i < members.size(); ++i) {
      double v = std::max(0.0, members[i].values[q] - members[i].values[p]);
      if (v < best) {
        best = v;
        best_id = static_cast<int>(i);
      }
    }
    return {best, best_id};
  }
};

struct FamilyConfig {
  std::vector<double> eps_maxes = {0.3, 0.15};
  std::vector<double> levels = {0.0};  // geroch-tau extraction levels
  int fiber_levels = 9;
  double fiber_spacing = 1.0;
  int a_samples = 8;
  double strict_delta = 1e-6;   // members below this margin are flagged
  double validation_tol = 1e-9;
  bool include_level_sets = true;
  bool include_franco = true;
  bool include_coordinate = true;
};

namespace detail {

// Raise t minimally so that every edge satisfies t(q) - t(p) >= weight.
inline GridFunction steep_repair(const CausalGraph& g, GridFunction t,
                                 const std::vector<int>& topo) {
  for (int u : topo)
    for (const Edge& e : g.adj[u]) t[e.to] = std::max(t[e.to], t[u] + e.weight);
  return t;
}

inline void try_add_member(SteepFamily& fam, const CausalGraph& g, GridFunction values,
                           Provenance prov, const std::string& id,
                           const FamilyConfig& cfg) {
  SteepReport rep = is_steep(values, g, SteepMode::FSteep, cfg.validation_tol);
  if (!rep.steep) {
    ++fam.dropped;
    return;
  }
  SteepMember m;
  m.values = std::move(values);
  m.provenance = prov;
  m.margin = rep.worst_margin;
  m.zero_margin = rep.worst_margin < cfg.strict_delta;
  m.id = id;
  fam.members.push_back(std::move(m));
}

}  // namespace detail

// Assembles steep candidates from level-set extractions of the averaging
// time function, Franco-style distance sums anchored on the boundary
// slices, and linear chart functions; every member is re-validated before
// inclusion and failures are dropped and counted.
inline SteepFamily build_steep_family(const Spacetime& st, const CausalGraph& g,
                                      const FamilyConfig& cfg = {}) {
  auto topo = topological_order(g);
  if (!topo)
    throw std::runtime_error(
        "build_steep_family: causal graph has a cycle; no steep function exists");

  SteepFamily fam;
  const Grid& gr = st.grid;
  const int n = g.n;

  if (cfg.include_coordinate) {
    // a * t + lambda . x; the admissible tilt grows with the time slope.
    const std::vector<double> slopes = {1.0, 1.02, 1.05, 1.1, 1.25, 1.5, 2.0, 3.0};
    const std::vector<double> fracs = {0.0, -1.0, 1.0, -0.7, 0.7, -0.9, 0.9, -0.99, 0.99};
    std::vector<Vec> dirs;
    if (gr.dim == 2) {
      dirs.push_back(Vec(0.0, 1.0));
    } else {
      for (double ang : {0.0, 45.0, 90.0, 135.0})
        dirs.push_back(Vec(0.0, std::cos(ang * M_PI / 180.0), std::sin(ang * M_PI / 180.0)));
    }
    for (double a : slopes)
      for (double fr : fracs) {
        if (fr == 0.0 && a != slopes.front() && a != 2.0) continue;
        double lam = fr * std::sqrt(std::max(0.0, a * a - 1.0));
        if (fr != 0.0 && lam == 0.0) continue;
        for (size_t di = 0; di < dirs.size(); ++di) {
          GridFunction f(n);
          for (int i = 0; i < n; ++i) {
            Vec pos = gr.position(i);
            f[i] = a * pos[0];
            for (int ax = 1; ax < gr.dim; ++ax) f[i] += lam * dirs[di][ax] * pos[ax];
          }
          detail::try_add_member(fam, g, std::move(f), Provenance::Coordinate,
                                 "linear_a" + format_real(a) + "_l" + format_real(lam) +
                                     "_d" + std::to_string(di),
                                 cfg);
          if (fr == 0.0) break;  // direction irrelevant without tilt
        }
      }
  }

  if (cfg.include_franco) {
    // Bottom-slice futures (and top-slice pasts) cover every edge.
    std::vector<FrancoAnchor> bottom, top;
    for (int i = 0; i < n; ++i) {
      auto c = gr.coords(i);
      if (c[0] == 0) bottom.push_back({i, +1});
      if (c[0] == gr.dims[0] - 1) top.push_back({i, -1});
    }
    for (auto* anchors : {&bottom, &top}) {
      try {
        FrancoCandidate fc = franco_candidate(g, *anchors);
        if (fc.fully_covered()) {
          detail::try_add_member(fam, g, std::move(fc.values), Provenance::Franco,
                                 anchors == &bottom ? "franco_bottom" : "franco_top", cfg);
        } else {
          ++fam.dropped;
        }
      } catch (const std::runtime_error&) {
        ++fam.dropped;
      }
    }
  }

  if (cfg.include_level_sets) {
    for (double em : cfg.eps_maxes) {
      ProductSpacetime ps =
          build_product_graph(st, cfg.fiber_levels, cfg.fiber_spacing, g.stencil_radius,
                              -0.5 * (cfg.fiber_levels - 1) * cfg.fiber_spacing);
      Measure mu = Measure::uniform(ps.n);
      WideningFamily fam_a{em};
      GridFunction td = tau_down(ps, mu, cfg.a_samples, fam_a);
      GridFunction tu = tau_up(ps, mu, cfg.a_samples, fam_a);
      GerochResult ger = geroch_tau(td, tu);
      for (double level : cfg.levels) {
        LevelSetResult ls = level_set_graph(ps, ger.tau, level);
        if (ls.missing > 0) {
          ++fam.dropped;
          continue;
        }
        GridFunction t = detail::steep_repair(g, ls.t, *topo);
        detail::try_add_member(fam, g, std::move(t), Provenance::LevelSet,
                               "levelset_em" + format_real(em) + "_c" + format_real(level),
                               cfg);
      }
    }
  }

  if (fam.empty())
    throw std::runtime_error("build_steep_family: no candidate survived validation");
  return fam;
}

}  // namespace conegrid
