#pragma once

// Scenario file parsing. Sections: [grid], [cones], [finsler],
// [identifications], and an optional [run] block for experiment
// parameters. Parse errors carry the line number and field name.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "geometry.hpp"

namespace conegrid {

struct ScenarioError : std::runtime_error {
  int line;
  ScenarioError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct ScenarioConfig {
  // Spacetime: either a builtin name with params, or explicit sections.
  std::string builtin;
  std::map<std::string, double> builtin_params;

  std::array<int, kMaxDim> dims{0, 0, 0};
  std::array<double, kMaxDim> spacing{1.0, 1.0, 1.0};
  std::array<double, kMaxDim> origin{0.0, 0.0, 0.0};
  std::array<bool, kMaxDim> periodic{false, false, false};
  int dim = 0;

  std::string cone_kind;  // "round" | "polyhedral"
  std::vector<double> metric_entries;
  std::vector<double> orientation;
  std::vector<Vec> generators;

  std::string finsler_kind = "lorentzian";  // "lorentzian" | "custom"
  std::vector<std::pair<double, double>> profile;

  // [run]
  int stencil_radius = 2;
  std::vector<double> eps_schedule;  // empty -> default schedule
  int fiber_levels = 9;
  double fiber_spacing = 1.0;
  int a_samples = 8;
  int pair_count = 0;        // sampled pairs when > 0
  long long seed = -1;       // mandatory when pair_count > 0
  std::vector<std::array<int, 2 * kMaxDim>> pairs;  // coordinate pairs
  double tol_rel = 0.05;
  int threads = 1;
  std::string out_dir = ".";

  bool has_builtin() const { return !builtin.empty(); }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

inline double parse_real(const std::string& tok, int line, const std::string& field) {
  size_t pos = 0;
  double v;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ScenarioError(line, "field '" + field + "': not a real number: '" + tok + "'");
  }
  if (pos != tok.size())
    throw ScenarioError(line, "field '" + field + "': trailing characters in '" + tok + "'");
  return v;
}

inline long long parse_int(const std::string& tok, int line, const std::string& field) {
  size_t pos = 0;
  long long v;
  try {
    v = std::stoll(tok, &pos);
  } catch (const std::exception&) {
    throw ScenarioError(line, "field '" + field + "': not an integer: '" + tok + "'");
  }
  if (pos != tok.size())
    throw ScenarioError(line, "field '" + field + "': trailing characters in '" + tok + "'");
  return v;
}

}  // namespace detail

inline ScenarioConfig parse_scenario(std::istream& in) {
  ScenarioConfig cfg;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    size_t b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    size_t e = line.find_last_not_of(" \t\r");
    line = line.substr(b, e - b + 1);

    if (line.front() == '[') {
      if (line.back() != ']') throw ScenarioError(lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      if (section != "grid" && section != "cones" && section != "finsler" &&
          section != "identifications" && section != "run")
        throw ScenarioError(lineno, "unknown section [" + section + "]");
      continue;
    }

    auto eq = line.find('=');
    if (eq == std::string::npos) throw ScenarioError(lineno, "expected 'key = value'");
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      size_t b2 = s.find_first_not_of(" \t");
      size_t e2 = s.find_last_not_of(" \t");
      s = b2 == std::string::npos ? "" : s.substr(b2, e2 - b2 + 1);
    };
    trim(key);
    trim(val);
    if (key.empty()) throw ScenarioError(lineno, "empty key");
    if (val.empty()) throw ScenarioError(lineno, "field '" + key + "': empty value");
    auto toks = detail::split_ws(val);

    if (section.empty()) throw ScenarioError(lineno, "key '" + key + "' outside any section");

    if (section == "grid") {
      if (key == "builtin") {
        cfg.builtin = val;
      } else if (key == "dims" || key == "spacing" || key == "origin") {
        if (toks.size() < 2 || toks.size() > kMaxDim)
          throw ScenarioError(lineno, "field '" + key + "': expected 2 or 3 values");
        if (cfg.dim == 0)
          cfg.dim = static_cast<int>(toks.size());
        else if (static_cast<int>(toks.size()) != cfg.dim)
          throw ScenarioError(lineno, "field '" + key + "': dimension mismatch");
        for (size_t i = 0; i < toks.size(); ++i) {
          if (key == "dims")
            cfg.dims[i] = static_cast<int>(detail::parse_int(toks[i], lineno, key));
          else if (key == "spacing")
            cfg.spacing[i] = detail::parse_real(toks[i], lineno, key);
          else
            cfg.origin[i] = detail::parse_real(toks[i], lineno, key);
        }
      } else if (cfg.builtin.empty()) {
        throw ScenarioError(lineno, "unknown [grid] field '" + key + "'");
      } else {
        cfg.builtin_params[key] = detail::parse_real(toks[0], lineno, key);
      }
    } else if (section == "cones") {
      if (key == "kind") {
        if (val != "round" && val != "polyhedral")
          throw ScenarioError(lineno, "field 'kind': expected round or polyhedral");
        cfg.cone_kind = val;
      } else if (key == "metric") {
        for (auto& t : toks) cfg.metric_entries.push_back(detail::parse_real(t, lineno, key));
      } else if (key == "orientation") {
        for (auto& t : toks) cfg.orientation.push_back(detail::parse_real(t, lineno, key));
      } else if (key == "generator") {
        if (toks.size() < 2 || toks.size() > kMaxDim)
          throw ScenarioError(lineno, "field 'generator': expected 2 or 3 components");
        Vec v;
        v.dim = static_cast<int>(toks.size());
        for (size_t i = 0; i < toks.size(); ++i)
          v[static_cast<int>(i)] = detail::parse_real(toks[i], lineno, key);
        cfg.generators.push_back(v);
      } else {
        throw ScenarioError(lineno, "unknown [cones] field '" + key + "'");
      }
    } else if (section == "finsler") {
      if (key == "kind") {
        if (val != "lorentzian" && val != "custom")
          throw ScenarioError(lineno, "field 'kind': expected lorentzian or custom");
        cfg.finsler_kind = val;
      } else if (key == "profile") {
        if (toks.size() != 2)
          throw ScenarioError(lineno, "field 'profile': expected 'slope value'");
        cfg.profile.push_back({detail::parse_real(toks[0], lineno, key),
                               detail::parse_real(toks[1], lineno, key)});
      } else {
        throw ScenarioError(lineno, "unknown [finsler] field '" + key + "'");
      }
    } else if (section == "identifications") {
      if (key == "periodic_axes") {
        for (auto& t : toks) {
          long long a = detail::parse_int(t, lineno, key);
          if (a < 0 || a >= kMaxDim)
            throw ScenarioError(lineno, "field 'periodic_axes': axis out of range");
          cfg.periodic[a] = true;
        }
      } else {
        throw ScenarioError(lineno, "unknown [identifications] field '" + key + "'");
      }
    } else {  // run
      if (key == "stencil_radius")
        cfg.stencil_radius = static_cast<int>(detail::parse_int(val, lineno, key));
      else if (key == "eps_schedule")
        for (auto& t : toks) cfg.eps_schedule.push_back(detail::parse_real(t, lineno, key));
      else if (key == "fiber_levels")
        cfg.fiber_levels = static_cast<int>(detail::parse_int(val, lineno, key));
      else if (key == "fiber_spacing")
        cfg.fiber_spacing = detail::parse_real(val, lineno, key);
      else if (key == "a_samples")
        cfg.a_samples = static_cast<int>(detail::parse_int(val, lineno, key));
      else if (key == "pair_count")
        cfg.pair_count = static_cast<int>(detail::parse_int(val, lineno, key));
      else if (key == "seed")
        cfg.seed = detail::parse_int(val, lineno, key);
      else if (key == "tol_rel")
        cfg.tol_rel = detail::parse_real(val, lineno, key);
      else if (key == "threads")
        cfg.threads = static_cast<int>(detail::parse_int(val, lineno, key));
      else if (key == "out_dir")
        cfg.out_dir = val;
      else if (key == "pair") {
        if (toks.size() != 4 && toks.size() != 6)
          throw ScenarioError(lineno, "field 'pair': expected 'coords(p) coords(q)'");
        std::array<int, 2 * kMaxDim> pr{0, 0, 0, 0, 0, 0};
        for (size_t i = 0; i < toks.size(); ++i)
          pr[i] = static_cast<int>(detail::parse_int(toks[i], lineno, key));
        if (toks.size() == 4) {  // pad to 3D layout: (t,x) -> slots 0,1 / 3,4
          pr[5] = 0;
          pr[4] = pr[3];
          pr[3] = pr[2];
          pr[2] = 0;
        }
        cfg.pairs.push_back(pr);
      } else {
        throw ScenarioError(lineno, "unknown [run] field '" + key + "'");
      }
    }
  }

  if (!cfg.has_builtin()) {
    if (cfg.dim == 0) throw ScenarioError(lineno, "missing [grid] dims (or builtin)");
    for (int a = 0; a < cfg.dim; ++a)
      if (cfg.dims[a] < 1) throw ScenarioError(lineno, "field 'dims': entries must be >= 1");
    if (cfg.cone_kind.empty())
      throw ScenarioError(lineno, "missing [cones] kind");
    if (cfg.cone_kind == "round" &&
        static_cast<int>(cfg.metric_entries.size()) != cfg.dim * cfg.dim)
      throw ScenarioError(lineno, "field 'metric': expected dim*dim row-major entries");
    if (cfg.cone_kind == "round" && static_cast<int>(cfg.orientation.size()) != cfg.dim)
      throw ScenarioError(lineno, "field 'orientation': expected dim entries");
    if (cfg.cone_kind == "polyhedral" && cfg.generators.empty())
      throw ScenarioError(lineno, "field 'generator': at least one required");
    if (cfg.finsler_kind == "custom" && cfg.profile.size() < 2)
      throw ScenarioError(lineno, "field 'profile': custom kind needs at least 2 rows");
    if (cfg.finsler_kind == "lorentzian" && cfg.cone_kind != "round")
      throw ScenarioError(lineno, "lorentzian finsler requires round cones");
  }
  if (cfg.pair_count > 0 && cfg.seed < 0)
    throw ScenarioError(lineno, "field 'seed': mandatory when pair_count > 0");
  if (cfg.stencil_radius < 1)
    throw ScenarioError(lineno, "field 'stencil_radius': must be >= 1");
  for (size_t i = 1; i < cfg.eps_schedule.size(); ++i)
    if (!(cfg.eps_schedule[i] < cfg.eps_schedule[i - 1]))
      throw ScenarioError(lineno, "field 'eps_schedule': must be strictly decreasing");
  return cfg;
}

inline ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file: " + path);
  return parse_scenario(f);
}

// Materialize the spacetime a config describes.
inline Spacetime scenario_spacetime(const ScenarioConfig& cfg) {
  if (cfg.has_builtin()) return builtin_spacetime(cfg.builtin, cfg.builtin_params);
  Grid grid;
  grid.dim = cfg.dim;
  grid.dims = cfg.dims;
  grid.spacing = cfg.spacing;
  grid.origin = cfg.origin;
  grid.periodic = cfg.periodic;
  grid.validate();

  ConeSpec cone;
  SymMat g;
  if (cfg.cone_kind == "round") {
    g.dim = cfg.dim;
    for (int i = 0; i < cfg.dim; ++i)
      for (int j = 0; j < cfg.dim; ++j) g.at(i, j) = cfg.metric_entries[i * cfg.dim + j];
    Vec orient;
    orient.dim = cfg.dim;
    for (int i = 0; i < cfg.dim; ++i) orient[i] = cfg.orientation[i];
    cone = ConeSpec::round(g, orient);
  } else {
    cone = ConeSpec::polyhedral(cfg.generators);
  }

  FinslerSpec fin;
  if (cfg.finsler_kind == "lorentzian") {
    fin = FinslerSpec::lorentzian(g);
  } else {
    std::vector<double> slopes, values;
    for (auto [s, v] : cfg.profile) {
      slopes.push_back(s);
      values.push_back(v);
    }
    fin = FinslerSpec::custom(std::move(slopes), std::move(values));
  }

  Spacetime st;
  st.grid = grid;
  st.cones.assign(grid.node_count(), cone);
  st.finslers.assign(grid.node_count(), fin);
  st.validate();
  return st;
}

}  // namespace conegrid
