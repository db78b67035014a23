#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "conegrid/scenario.hpp"

using namespace conegrid;

namespace {

ScenarioConfig parse_str(const std::string& s) {
  std::istringstream is(s);
  return parse_scenario(is);
}

}  // namespace

TEST_CASE("builtin scenario with run parameters") {
  ScenarioConfig cfg = parse_str(R"(
# flat space example
[grid]
builtin = minkowski2d
nt = 9
nx = 9

[run]
stencil_radius = 3
eps_schedule = 0.2 0.1 0.05
fiber_levels = 7
pair = 0 0 4 2
seed = 42
pair_count = 5
)");
  CHECK(cfg.builtin == "minkowski2d");
  CHECK(cfg.builtin_params.at("nt") == 9);
  CHECK(cfg.stencil_radius == 3);
  CHECK(cfg.eps_schedule == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(cfg.fiber_levels == 7);
  REQUIRE(cfg.pairs.size() == 1);
  CHECK(cfg.pairs[0][0] == 0);
  CHECK(cfg.pairs[0][3] == 4);
  CHECK(cfg.pairs[0][4] == 2);
  CHECK(cfg.seed == 42);
  Spacetime st = scenario_spacetime(cfg);
  CHECK(st.grid.dims[0] == 9);
}

TEST_CASE("explicit grid with round cones") {
  ScenarioConfig cfg = parse_str(R"(
[grid]
dims = 5 5
spacing = 0.5 0.5
origin = 0 -1

[cones]
kind = round
metric = -1 0 0 1
orientation = 1 0

[finsler]
kind = lorentzian
)");
  Spacetime st = scenario_spacetime(cfg);
  CHECK(st.grid.dim == 2);
  CHECK(st.grid.spacing[0] == 0.5);
  CHECK(st.grid.origin[1] == -1.0);
  CHECK(st.cone(0).contains(Vec(1.0, 0.5)));
  CHECK_FALSE(st.cone(0).contains(Vec(0.0, 1.0)));
}

TEST_CASE("polyhedral cones with a custom profile and identifications") {
  ScenarioConfig cfg = parse_str(R"(
[grid]
dims = 4 6

[cones]
kind = polyhedral
generator = 1 -1
generator = 1 1

[finsler]
kind = custom
profile = -1 0
profile = 0 1
profile = 1 0

[identifications]
periodic_axes = 0
)");
  Spacetime st = scenario_spacetime(cfg);
  CHECK(st.grid.periodic[0]);
  CHECK_FALSE(st.grid.periodic[1]);
  CHECK(st.cone(0).kind == ConeSpec::Kind::Polyhedral);
  CHECK(st.finsler(0).kind == FinslerSpec::Kind::Custom);
}

TEST_CASE("parse errors carry line numbers and field names") {
  auto expect_error = [](const std::string& text, const std::string& needle) {
    try {
      parse_str(text);
      FAIL_CHECK("expected ScenarioError for: " << needle);
    } catch (const ScenarioError& e) {
      INFO(e.what());
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_error("[grid]\ndims = 3 x", "dims");
  expect_error("[grid]\ndims 3 3", "key = value");
  expect_error("[nope]\n", "unknown section");
  expect_error("key = 1\n", "outside any section");
  expect_error("[cones]\nkind = weird\n", "kind");
  expect_error("[grid]\nbuiltin = minkowski2d\n[run]\npair_count = 3\n", "seed");
  expect_error("[grid]\nbuiltin = minkowski2d\n[run]\neps_schedule = 0.1 0.2\n",
               "strictly decreasing");
  expect_error("[grid]\nbuiltin = minkowski2d\n[run]\nstencil_radius = 0\n",
               "stencil_radius");
  expect_error("[grid]\ndims = 4 4\n", "kind");
  expect_error("[identifications]\nperiodic_axes = 5\n", "axis out of range");
  expect_error("[grid]\ndims = 4 4\n[cones]\nkind = round\nmetric = -1 0 0 1\n",
               "orientation");

  // line number points at the offending line
  try {
    parse_str("[grid]\nbuiltin = minkowski2d\nnt = bad\n");
    FAIL_CHECK("expected error");
  } catch (const ScenarioError& e) {
    CHECK(e.line == 3);
  }
}

TEST_CASE("scenario file round trip") {
  ScenarioConfig a = parse_str("[grid]\nbuiltin = minkowski2d\nnt = 5\nnx = 5\n");
  ScenarioConfig b = parse_str("[grid]\nbuiltin = minkowski2d\nnt = 5\nnx = 5\n");
  Spacetime sa = scenario_spacetime(a), sb = scenario_spacetime(b);
  CHECK(sa.grid.node_count() == sb.grid.node_count());
  CHECK_THROWS(parse_scenario_file("/nonexistent/path.scn"));
}

TEST_CASE("defaults are sensible") {
  ScenarioConfig cfg = parse_str("[grid]\nbuiltin = minkowski2d\n");
  CHECK(cfg.stencil_radius == 2);
  CHECK(cfg.fiber_levels == 9);
  CHECK(cfg.fiber_spacing == 1.0);
  CHECK(cfg.a_samples == 8);
  CHECK(cfg.tol_rel == 0.05);
  CHECK(cfg.eps_schedule.empty());  // caller substitutes the default schedule
}
