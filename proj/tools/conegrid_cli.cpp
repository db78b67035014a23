// conegrid command-line driver.
//
// Subcommands:
//   scenario-validate  parse a scenario file and report its contents
//   distance           longest-path distances (optionally the widening
//                      schedule estimate) for configured pairs
//   timefn             averaging time functions, level-set extraction,
//                      SVG plot of level curves and cones
//   verify             formula | order | topology | vyv | properties
//
// Exit codes: 0 ok, 1 soft (tolerance) failure, 2 config error,
// 3 cyclic graph in timefn, 4 unconditional verification failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "conegrid/conegrid.hpp"

namespace fs = std::filesystem;
using namespace conegrid;

namespace {

constexpr const char* kVersion = "conegrid 1.0.0";

struct Session {
  std::string scenario_path;
  std::string out_dir;
  int threads = 1;
  ScenarioConfig cfg;
  Spacetime st;
  std::string raw_config;

  void load() {
    std::ifstream f(scenario_path);
    if (!f) throw std::runtime_error("cannot open scenario file: " + scenario_path);
    std::ostringstream buf;
    buf << f.rdbuf();
    raw_config = buf.str();
    std::istringstream is(raw_config);
    cfg = parse_scenario(is);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (threads > 1) cfg.threads = threads;
    st = scenario_spacetime(cfg);
  }

  void write_output(const std::string& name, const std::string& content) const {
    fs::create_directories(cfg.out_dir);
    std::ofstream o(fs::path(cfg.out_dir) / name, std::ios::binary);
    if (!o) throw std::runtime_error("cannot write output file: " + name);
    o << content;
  }

  void write_manifest(const std::vector<std::string>& outputs,
                      const std::string& extra = "") const {
    std::ostringstream m;
    m << "version: " << kVersion << "\n";
    m << "config: " << scenario_path << "\n";
    m << "config_hash: " << std::hex << fnv1a(raw_config + "\n" + extra) << std::dec
      << "\n";
    for (const auto& o : outputs) m << "output: " << o << "\n";
    write_output("manifest.txt", m.str());
  }
};

std::vector<std::pair<int, int>> resolve_pairs(const Session& s, const CausalGraph& g,
                                               bool causal_only) {
  const Grid& gr = s.st.grid;
  std::vector<std::pair<int, int>> pairs;
  for (const auto& pr : s.cfg.pairs) {
    std::array<int, kMaxDim> cp{pr[0], pr[1], pr[2]}, cq{pr[3], pr[4], pr[5]};
    for (int a = 0; a < gr.dim; ++a)
      if (cp[a] < 0 || cp[a] >= gr.dims[a] || cq[a] < 0 || cq[a] >= gr.dims[a])
        throw ScenarioError(0, "field 'pair': coordinates out of grid bounds");
    pairs.push_back({gr.index(cp), gr.index(cq)});
  }
  if (s.cfg.pair_count > 0) {
    std::mt19937 rng(static_cast<uint32_t>(s.cfg.seed));
    if (causal_only) {
      Relation reach = reachability(g);
      std::vector<std::pair<int, int>> related;
      for (int p = 0; p < g.n; ++p)
        for (int q = 0; q < g.n; ++q)
          if (p != q && reach.related(p, q)) related.push_back({p, q});
      if (related.empty()) throw std::runtime_error("no causally related pairs to sample");
      std::uniform_int_distribution<size_t> pick(0, related.size() - 1);
      for (int i = 0; i < s.cfg.pair_count; ++i) pairs.push_back(related[pick(rng)]);
    } else {
      std::uniform_int_distribution<int> pick(0, g.n - 1);
      for (int i = 0; i < s.cfg.pair_count; ++i) {
        int p = pick(rng), q = pick(rng);
        pairs.push_back({p, q});
      }
    }
  }
  if (pairs.empty()) throw ScenarioError(0, "field 'pair': no pairs configured");
  return pairs;
}

std::vector<double> schedule_of(const ScenarioConfig& cfg) {
  return cfg.eps_schedule.empty() ? default_eps_schedule() : cfg.eps_schedule;
}

int cmd_scenario_validate(Session& s) {
  s.load();
  const Grid& gr = s.st.grid;
  std::cout << "scenario ok\n";
  if (s.cfg.has_builtin()) std::cout << "builtin: " << s.cfg.builtin << "\n";
  std::cout << "dim: " << gr.dim << "\nnodes: " << gr.node_count() << "\ndims:";
  for (int a = 0; a < gr.dim; ++a) std::cout << " " << gr.dims[a];
  std::cout << "\nstencil_radius: " << s.cfg.stencil_radius << "\n";
  std::cout << "pairs: " << s.cfg.pairs.size() << " explicit, " << s.cfg.pair_count
            << " sampled\n";
  return 0;
}

int cmd_distance(Session& s, bool stable, bool allow_infinite, bool witness) {
  s.load();
  CausalGraph g = build_causal_graph(s.st, s.cfg.stencil_radius);
  auto pairs = resolve_pairs(s, g, false);

  std::ostringstream table;
  table << "p,q,d,finite" << (stable ? ",D_estimate" : "") << "\n";
  std::ostringstream wits;
  bool any_infinite = false;
  for (auto [p, q] : pairs) {
    DistanceResult dr = distance(g, p, q);
    if (!dr.finite) any_infinite = true;
    table << p << "," << q << "," << (dr.finite ? format_real(dr.value) : "inf") << ","
          << (dr.finite ? 1 : 0);
    if (stable) {
      StableDistanceResult sd = stable_distance(s.st, p, q, schedule_of(s.cfg),
                                                s.cfg.stencil_radius);
      table << "," << (sd.finite ? format_real(sd.estimate) : "inf");
    }
    table << "\n";
    if (witness && dr.finite && dr.witness) {
      wits << p << " -> " << q << ":";
      for (int v : *dr.witness) wits << " " << v;
      wits << "\n";
    }
  }
  s.write_output("distances.csv", table.str());
  std::vector<std::string> outs = {"distances.csv"};
  if (witness) {
    s.write_output("witnesses.txt", wits.str());
    outs.push_back("witnesses.txt");
  }
  s.write_manifest(outs, "cmd=distance");
  std::cout << table.str();
  if (any_infinite && !allow_infinite) {
    std::cerr << "error: infinite distance encountered (pass --allow-infinite to accept)\n";
    return 1;
  }
  return 0;
}

int cmd_timefn(Session& s) {
  s.load();
  CausalGraph g = build_causal_graph(s.st, s.cfg.stencil_radius);
  double fo = -0.5 * (s.cfg.fiber_levels - 1) * s.cfg.fiber_spacing;
  ProductSpacetime ps = build_product_graph(s.st, s.cfg.fiber_levels, s.cfg.fiber_spacing,
                                            s.cfg.stencil_radius, fo);
  Measure mu = Measure::uniform(ps.n);
  WideningFamily fam{0.3};
  GridFunction td, tu;
  try {
    td = tau_down(ps, mu, s.cfg.a_samples, fam);
    tu = tau_up(ps, mu, s.cfg.a_samples, fam);
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    CausalityResult cr = is_causal(product_as_graph(ps));
    if (!cr.causal) {
      std::cerr << "witness cycle:";
      for (int v : cr.witness_cycle) std::cerr << " " << v;
      std::cerr << "\n";
    }
    return 3;
  }
  GerochResult ger = geroch_tau(td, tu);
  LevelSetResult ls = level_set_graph(ps, ger.tau, 0.0);

  auto dump = [&](const GridFunction& v) {
    std::ostringstream o;
    o << "node,value\n";
    for (size_t i = 0; i < v.size(); ++i) o << i << "," << format_real(v[i]) << "\n";
    return o.str();
  };
  s.write_output("tau_down.csv", dump(td));
  s.write_output("tau_up.csv", dump(tu));
  s.write_output("geroch_tau.csv", dump(ger.tau));
  std::ostringstream lso;
  lso << "base_node,t,defined\n";
  for (int p = 0; p < g.n; ++p)
    lso << p << "," << format_real(ls.t[p]) << "," << int(ls.defined[p]) << "\n";
  s.write_output("level_set.csv", lso.str());

  // steepness of the extracted graphing function (one fiber quantum slack)
  SteepReport rep = is_steep(ls.t, g, SteepMode::FSteep, s.cfg.fiber_spacing);
  std::ostringstream sum;
  sum << "product nodes: " << ps.n << "\n";
  sum << "geroch excluded nodes: " << ger.excluded << "\n";
  sum << "level-set missing columns: " << ls.missing << "\n";
  sum << "steepness margin (one-fiber-quantum slack): " << format_real(rep.worst_margin)
      << " -> " << (rep.steep ? "PASS" : "FAIL") << "\n";
  s.write_output("summary.txt", sum.str());

  GridFunction base_tau(g.n, 0.0);
  for (int p = 0; p < g.n; ++p) base_tau[p] = ger.tau[ps.pindex(p, ps.levels / 2)];
  std::vector<double> levels;
  for (int k = -3; k <= 3; ++k) levels.push_back(0.25 * k);
  s.write_output("levelsets.svg", render_field_svg(s.st, base_tau, levels));

  s.write_manifest({"tau_down.csv", "tau_up.csv", "geroch_tau.csv", "level_set.csv",
                    "summary.txt", "levelsets.svg"},
                   "cmd=timefn");
  std::cout << sum.str();
  return 0;
}

int cmd_verify(Session& s, const std::string& which) {
  s.load();
  CausalGraph g = build_causal_graph(s.st, s.cfg.stencil_radius);

  if (which == "vyv") {
    VyvReport rep = verify_vyv(s.st, s.cfg.fiber_levels, s.cfg.fiber_spacing,
                               s.cfg.stencil_radius, schedule_of(s.cfg));
    s.write_output("vyv_report.txt", rep.to_text());
    s.write_manifest({"vyv_report.txt"}, "cmd=verify_vyv");
    std::cout << rep.to_text();
    return rep.consistent() ? 0 : 1;
  }

  if (which == "properties") {
    // Reverse-triangle and monotonicity spot checks at CLI scale.
    std::mt19937 rng(static_cast<uint32_t>(s.cfg.seed < 0 ? 7 : s.cfg.seed));
    int viol = 0, checked = 0;
    for (int i = 0; i < 200; ++i) {
      int node = std::uniform_int_distribution<int>(0, g.n - 1)(rng);
      const ConeSpec& cone = s.st.cone(node);
      const FinslerSpec& fin = s.st.finsler(node);
      Vec y1 = sample_cone_vector(cone, rng);
      Vec y2 = sample_cone_vector(cone, rng);
      double f1 = finsler_value(fin, cone, y1), f2 = finsler_value(fin, cone, y2);
      double fs = finsler_value(fin, cone, y1 + y2);
      double scale = std::max(1.0, std::abs(f1) + std::abs(f2));
      ++checked;
      if (fs < f1 + f2 - 1e-9 * scale) ++viol;
    }
    std::ostringstream rep;
    rep << "superadditivity samples: " << checked << " violations: " << viol << "\n";
    rep << (viol == 0 ? "PASS" : "FAIL") << "\n";
    s.write_output("properties_report.txt", rep.str());
    s.write_manifest({"properties_report.txt"}, "cmd=verify_properties");
    std::cout << rep.str();
    return viol == 0 ? 0 : 4;
  }

  // formula / order / topology need a steep family.
  FamilyConfig fc;
  fc.fiber_levels = s.cfg.fiber_levels;
  fc.fiber_spacing = s.cfg.fiber_spacing;
  fc.a_samples = s.cfg.a_samples;
  SteepFamily family = build_steep_family(s.st, g, fc);

  if (which == "formula") {
    auto pairs = resolve_pairs(s, g, true);
    FormulaTolerance tol;
    tol.rel = s.cfg.tol_rel;
    double sp = 0;
    for (int a = 0; a < s.st.grid.dim; ++a) sp = std::max(sp, s.st.grid.spacing[a]);
    tol.abs = 2 * sp + s.cfg.fiber_spacing;
    FormulaReport rep = verify_distance_formula(s.st, g, family, pairs, tol);
    s.write_output("formula_report.txt", rep.to_text());
    s.write_manifest({"formula_report.txt"}, "cmd=verify_formula");
    std::cout << rep.to_text();
    if (!rep.sound()) return 4;
    return rep.pass() ? 0 : 1;
  }

  if (which == "order") {
    SeifertResult sr = seifert_relation(s.st, schedule_of(s.cfg), s.cfg.stencil_radius);
    OrderReport rep = verify_order_representation(g, sr.relation, family,
                                                  all_ordered_pairs(g.n));
    s.write_output("order_report.txt", rep.to_text());
    s.write_manifest({"order_report.txt"}, "cmd=verify_order");
    std::cout << rep.to_text();
    if (rep.forward_failures > 0) return 4;
    return rep.pass() ? 0 : 1;
  }

  if (which == "topology") {
    const Grid& gr = s.st.grid;
    Box box;
    std::array<int, kMaxDim> pc{0, 0, 0};
    for (int a = 0; a < gr.dim; ++a) {
      pc[a] = gr.dims[a] / 2;
      box.lo[a] = std::max(0, pc[a] - 2);
      box.hi[a] = std::min(gr.dims[a] - 1, pc[a] + 2);
    }
    TopologyReport rep = verify_topology_separation(s.st, g, family, gr.index(pc), box);
    s.write_output("topology_report.txt", rep.to_text());
    s.write_manifest({"topology_report.txt"}, "cmd=verify_topology");
    std::cout << rep.to_text();
    return rep.containment ? 0 : 1;
  }

  throw std::runtime_error("unknown verify suite: " + which);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"causal structure and Lorentz-Finsler distance on grids"};
  app.require_subcommand(1);

  Session s;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", s.scenario_path, "scenario file")->required();
    sub->add_option("--out", s.out_dir, "output directory (overrides [run] out_dir)");
    sub->add_option("--threads", s.threads, "parallelism cap");
  };

  auto* validate = app.add_subcommand("scenario-validate", "parse and summarize a scenario");
  add_common(validate);

  auto* dist = app.add_subcommand("distance", "longest-path distances for pairs");
  add_common(dist);
  bool stable = false, allow_inf = false, witness = false;
  dist->add_flag("--stable", stable, "also compute the widening-schedule estimate");
  dist->add_flag("--allow-infinite", allow_inf, "exit 0 even when d is infinite");
  dist->add_flag("--witness", witness, "write witness paths");

  auto* timefn = app.add_subcommand("timefn", "averaging time functions and level sets");
  add_common(timefn);

  auto* verify = app.add_subcommand("verify", "run a verification suite");
  add_common(verify);
  std::string which;
  verify->add_option("which", which, "formula|order|topology|vyv|properties")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 2 : 0;
  }

  try {
    if (validate->parsed()) return cmd_scenario_validate(s);
    if (dist->parsed()) return cmd_distance(s, stable, allow_inf, witness);
    if (timefn->parsed()) return cmd_timefn(s);
    if (verify->parsed()) return cmd_verify(s, which);
  } catch (const ScenarioError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
