// Acceptance suite: nine end-to-end checks, one PASS/FAIL line each.
// Exit code is the number of failed criteria.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "conegrid/conegrid.hpp"

namespace fs = std::filesystem;
using namespace conegrid;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int n, bool pass, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL");
  if (!detail.empty()) std::cout << "  (" << detail << ")";
  std::cout << "\n";
  if (!pass) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Random chronological pairs: slope bounded away from null so the polygonal
// stencil approximation stays inside the tolerance, and a time-separation
// floor so relative error is meaningful.
std::vector<std::array<int, 4>> timelike_pairs(int nt, int nx, int count, int min_dt,
                                               double max_slope, uint32_t seed) {
  std::mt19937 rng(seed);
  std::vector<std::array<int, 4>> out;
  while (static_cast<int>(out.size()) < count) {
    int dt = std::uniform_int_distribution<int>(min_dt, nt - 1)(rng);
    int t0 = std::uniform_int_distribution<int>(0, nt - 1 - dt)(rng);
    int maxdx = static_cast<int>(max_slope * dt);
    int dx = std::uniform_int_distribution<int>(-maxdx, maxdx)(rng);
    int x0 = std::uniform_int_distribution<int>(std::max(0, -dx),
                                                std::min(nx - 1, nx - 1 - dx))(rng);
    out.push_back({t0, x0, t0 + dt, x0 + dx});
  }
  return out;
}

// --- 1: flat-space distance against the analytic chord length ---------------

void criterion1() {
  auto t0 = Clock::now();
  Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 81}, {"nx", 81}});
  CausalGraph g = build_causal_graph(st, 4);
  auto pairs = timelike_pairs(81, 81, 50, 8, 0.75, 11);

  double worst = 0.0;
  int bad = 0;
  for (const auto& pr : pairs) {
    int p = st.grid.index({pr[0], pr[1], 0});
    int q = st.grid.index({pr[2], pr[3], 0});
    double dt = pr[2] - pr[0], dx = pr[3] - pr[1];
    double exact = std::sqrt(dt * dt - dx * dx);
    DistanceResult dr = distance(g, p, q);
    double rel = dr.finite ? std::abs(dr.value - exact) / exact : 1.0;
    worst = std::max(worst, rel);
    if (!dr.finite || rel > 0.05) ++bad;
  }
  double el = seconds_since(t0);
  std::ostringstream d;
  d << "50 pairs, worst relative error " << format_real(worst) << ", " << format_real(el)
    << " s";
  report(1, bad == 0 && el < 30.0, d.str());
}

// --- 2: reverse triangle inequality for F and for d --------------------------

void criterion2() {
  std::mt19937 rng(23);
  int fviol = 0;
  {
    Spacetime st = builtin_spacetime("tilted_cones", {{"nt", 9}, {"nx", 9}, {"omega", 0.08}});
    std::uniform_int_distribution<int> pick(0, st.grid.node_count() - 1);
    for (int i = 0; i < 1000; ++i) {
      int node = pick(rng);
      const ConeSpec& c = st.cone(node);
      const FinslerSpec& f = st.finsler(node);
      Vec y1 = sample_cone_vector(c, rng);
      Vec y2 = sample_cone_vector(c, rng);
      double a = finsler_value(f, c, y1), b = finsler_value(f, c, y2);
      double s = finsler_value(f, c, y1 + y2);
      double scale = std::max(1.0, a + b);
      if (s < a + b - 1e-9 * scale) ++fviol;
    }
  }

  int dviol = 0, checked = 0;
  {
    Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 9}, {"nx", 9}});
    CausalGraph g = build_causal_graph(st, 2);
    std::vector<DistanceField> fields;
    for (int p = 0; p < g.n; ++p) fields.push_back(distance_field(g, p));
    std::uniform_int_distribution<int> pick(0, g.n - 1);
    while (checked < 500) {
      int p = pick(rng);
      auto fut_p = future(g, p);
      if (fut_p.size() < 2) continue;
      int r = fut_p[std::uniform_int_distribution<size_t>(0, fut_p.size() - 1)(rng)];
      auto fut_r = future(g, r);
      if (fut_r.size() < 2) continue;
      int q = fut_r[std::uniform_int_distribution<size_t>(0, fut_r.size() - 1)(rng)];
      double dpq = fields[p].value[q], dpr = fields[p].value[r], drq = fields[r].value[q];
      double scale = std::max(1.0, dpr + drq);
      ++checked;
      if (dpq < dpr + drq - 1e-9 * scale) ++dviol;
    }
  }
  std::ostringstream d;
  d << "F violations " << fviol << "/1000, d violations " << dviol << "/" << checked;
  report(2, fviol == 0 && dviol == 0, d.str());
}

// --- 3: product reachability equals base relation plus fiber budget ----------

void criterion3() {
  auto t0 = Clock::now();
  Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 5}, {"nx", 5}});
  VyvReport rep = verify_vyv(st, 7, 1.0, 2, default_eps_schedule());
  double el = seconds_since(t0);
  std::ostringstream d;
  d << "left-only " << rep.left_only.size() << ", right-only " << rep.right_only.size()
    << ", boundary " << rep.boundary_pairs << ", " << format_real(el) << " s";
  report(3, rep.consistent() && el < 60.0, d.str());
}

// --- 4: distance formula bound, plus unconditional soundness -----------------

void criterion4() {
  Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 9}, {"nx", 9}});
  CausalGraph g = build_causal_graph(st, 2);
  SteepFamily fam = build_steep_family(st, g);

  Relation reach = reachability(g);
  std::vector<std::pair<int, int>> related;
  for (int p = 0; p < g.n; ++p)
    for (int q = 0; q < g.n; ++q)
      if (p != q && reach.related(p, q)) related.push_back({p, q});
  std::mt19937 rng(31);
  std::vector<std::pair<int, int>> pairs;
  std::uniform_int_distribution<size_t> pick(0, related.size() - 1);
  for (int i = 0; i < 50; ++i) pairs.push_back(related[pick(rng)]);

  FormulaTolerance tol;
  tol.rel = 0.05;
  tol.abs = 2 * st.grid.spacing[0] + 1.0;  // fiber quantum 1.0
  FormulaReport rep = verify_distance_formula(st, g, fam, pairs, tol);

  // Soundness must survive a deliberately weak family: coordinate time only.
  SteepFamily weak;
  {
    SteepMember m;
    m.values.assign(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) m.values[i] = st.grid.position(i)[0];
    m.provenance = Provenance::Coordinate;
    m.id = "t";
    weak.members.push_back(std::move(m));
  }
  int weak_unsound = 0;
  for (auto [p, q] : all_ordered_pairs(g.n)) {
    DistanceResult dr = distance(g, p, q);
    if (!dr.finite) continue;
    if (weak.infimum(p, q).first < dr.value - 1e-9) ++weak_unsound;
  }

  std::ostringstream d;
  d << "rich family: sound=" << rep.sound() << " out-of-tol=" << rep.out_of_tol_count
    << "/50; weak family unsound pairs " << weak_unsound;
  report(4, rep.sound() && rep.pass() && weak_unsound == 0, d.str());
}

// --- 5: averaging time functions strictly increase; extraction is steep ------

void criterion5() {
  Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 9}, {"nx", 9}});
  CausalGraph g = build_causal_graph(st, 2);
  ProductSpacetime ps = build_product_graph(st, 9, 1.0, 2, -4.0);
  Measure mu = Measure::uniform(ps.n);
  WideningFamily fam{0.3};
  GridFunction td = tau_down(ps, mu, 8, fam);
  GridFunction tu = tau_up(ps, mu, 8, fam);
  GerochResult ger = geroch_tau(td, tu);

  CausalGraph pg = product_as_graph(ps);
  SteepReport rd = is_steep(td, pg, SteepMode::Temporal);
  SteepReport ru = is_steep(tu, pg, SteepMode::Temporal);
  SteepReport rg = is_steep(ger.tau, pg, SteepMode::Temporal);

  LevelSetResult ls = level_set_graph(ps, ger.tau, 0.0);
  bool all_defined = ls.missing == 0;
  SteepReport rl = is_steep(ls.t, g, SteepMode::FSteep, 1.0);

  std::ostringstream d;
  d << "strict-increase violations down/up/geroch " << rd.violations.size() << "/"
    << ru.violations.size() << "/" << rg.violations.size() << "; extraction margin "
    << format_real(rl.worst_margin) << " (one-quantum slack), missing " << ls.missing;
  report(5,
         rd.steep && ru.steep && rg.steep && ger.excluded == 0 && all_defined && rl.steep,
         d.str());
}

// --- 6: order representation, exhaustive on a 10x10 grid ---------------------

void criterion6() {
  Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 10}, {"nx", 10}});
  CausalGraph g = build_causal_graph(st, 2);
  SteepFamily fam = build_steep_family(st, g);
  SeifertResult sr = seifert_relation(st, default_eps_schedule(), 2);
  OrderReport rep = verify_order_representation(g, sr.relation, fam, all_ordered_pairs(g.n));
  std::ostringstream d;
  d << "forward " << rep.forward_failures << "/" << rep.forward_checked << " failures, reverse "
    << rep.reverse_failures << "/" << rep.reverse_checked << " unresolved ("
    << rep.targeted_resolved << " via targeted members)";
  report(6, rep.forward_failures == 0 && rep.reverse_failures == 0, d.str());
}

// --- 7: causality classification -------------------------------------------

void criterion7() {
  // Non-causal example: wrapped time axis.
  Spacetime per = builtin_spacetime("periodic_time", {{"nt", 5}, {"nx", 5}});
  CausalGraph gp = build_causal_graph(per, 1);
  CausalityResult cr = is_causal(gp);
  bool per_ok = !cr.causal && !cr.witness_cycle.empty();
  bool inf_on_cycle = false;
  if (per_ok) {
    int a = cr.witness_cycle.front();
    DistanceResult dr = distance(gp, a, a);
    inf_on_cycle = !dr.finite;
  }

  // Tilt sweep: causal below the transition, non-causal above, monotone.
  std::vector<double> omegas;
  for (int k = 0; k <= 12; ++k) omegas.push_back(0.25 * k);
  int first_bad = -1;
  bool monotone = true;
  for (size_t i = 0; i < omegas.size(); ++i) {
    Spacetime ts = builtin_spacetime("tilted_cones",
                                     {{"nt", 9}, {"nx", 9}, {"omega", omegas[i]}});
    bool causal = is_causal(build_causal_graph(ts, 2)).causal;
    if (!causal && first_bad < 0) first_bad = static_cast<int>(i);
    if (first_bad >= 0 && causal) monotone = false;
  }
  bool sweep_ok = first_bad > 0 && monotone;

  std::ostringstream d;
  d << "periodic: non-causal=" << (per_ok ? 1 : 0) << " d(p,p)=inf=" << (inf_on_cycle ? 1 : 0);
  if (first_bad >= 0)
    d << "; tilt transition at omega=" << format_real(omegas[first_bad])
      << (monotone ? " (monotone)" : " (NON-monotone)");
  else
    d << "; tilt sweep never lost causality";
  report(7, per_ok && inf_on_cycle && sweep_ok, d.str());
}

// --- 8: widening monotonicity and the stable-distance estimate ---------------

void criterion8() {
  Spacetime st = builtin_spacetime("minkowski2d", {{"nt", 21}, {"nx", 21}});
  CausalGraph g = build_causal_graph(st, 4);
  auto sched = default_eps_schedule();
  auto pairs = timelike_pairs(21, 21, 20, 6, 0.75, 41);

  int mono_viol = 0, est_viol = 0, rel_viol = 0;
  double worst_rel = 0.0;
  for (const auto& pr : pairs) {
    int p = st.grid.index({pr[0], pr[1], 0});
    int q = st.grid.index({pr[2], pr[3], 0});
    double d0 = distance(g, p, q).value;
    StableDistanceResult sd = stable_distance(st, p, q, sched, 4);
    for (size_t i = 0; i + 1 < sd.values.size(); ++i)
      if (sd.values[i] < sd.values[i + 1] - 1e-9) ++mono_viol;  // larger eps, larger d
    if (sd.values.back() < d0 - 1e-9) ++mono_viol;
    if (sd.estimate < d0 - 1e-9) ++est_viol;
    double rel = std::abs(sd.estimate - d0) / std::max(d0, 1e-12);
    worst_rel = std::max(worst_rel, rel);
    if (rel > 0.05) ++rel_viol;
  }
  std::ostringstream d;
  d << "monotonicity violations " << mono_viol << ", estimate-below-d " << est_viol
    << ", worst estimate/d deviation " << format_real(worst_rel);
  report(8, mono_viol == 0 && est_viol == 0 && rel_viol == 0, d.str());
}

// --- 9: byte-identical reruns through the CLI --------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void criterion9() {
  const char* cli = std::getenv("CONEGRID_CLI");
  if (!cli) {
    report(9, false, "CONEGRID_CLI not set");
    return;
  }
  fs::path dir = fs::temp_directory_path() / "conegrid_acceptance";
  fs::create_directories(dir);
  fs::path scn = dir / "det.scn";
  {
    std::ofstream f(scn);
    f << "[grid]\nbuiltin = minkowski2d\nnt = 7\nnx = 7\n\n"
         "[run]\nstencil_radius = 2\nfiber_levels = 5\na_samples = 4\n"
         "pair_count = 4\nseed = 9\n";
  }
  fs::path a = dir / "a", b = dir / "b";
  fs::remove_all(a);
  fs::remove_all(b);
  auto run = [&](const std::string& sub, const fs::path& out) {
    std::string cmd = std::string(cli) + " " + sub + " --scenario " + scn.string() +
                      " --out " + out.string() + " >/dev/null 2>&1";
    return std::system(cmd.c_str());
  };
  bool ok = run("timefn", a / "tf") == 0 && run("timefn", b / "tf") == 0 &&
            run("verify formula", a / "vf") == 0 && run("verify formula", b / "vf") == 0;
  int compared = 0, differing = 0;
  if (ok) {
    for (const auto& ent : fs::recursive_directory_iterator(a)) {
      if (!ent.is_regular_file()) continue;
      fs::path rel = fs::relative(ent.path(), a);
      ++compared;
      if (slurp(ent.path()) != slurp(b / rel)) ++differing;
    }
  }
  std::ostringstream d;
  d << (ok ? "" : "CLI run failed; ") << compared << " files compared, " << differing
    << " differ";
  report(9, ok && compared > 0 && differing == 0, d.str());
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  std::cout << (failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL") << " (" << failures
            << " failed)\n";
  return failures;
}
