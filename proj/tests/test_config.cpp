#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hjlab/config.hpp"

using namespace hjlab;

TEST_CASE("toml subset: sections, scalars, arrays, comments") {
  ConfigFile f = parse_toml(
      "top = 1.5\n"
      "[model]\n"
      "kappa = 0.4   # comment\n"
      "name = \"run # one\"\n"
      "flag = true\n"
      "[solver2d]\n"
      "epsilons = [0.4, 0.2, 0.1]\n");
  CHECK(f.number("top", 0) == 1.5);
  CHECK(f.number("model.kappa", 0) == 0.4);
  CHECK(f.str("model.name", "") == "run # one");
  CHECK(f.flag("model.flag", false));
  CHECK(f.array("solver2d.epsilons", {}).size() == 3);
  CHECK(f.number("absent", -7.0) == -7.0);
}

TEST_CASE("toml subset: malformed input is rejected") {
  CHECK_THROWS_AS(parse_toml("[unterminated\n"), config_error);
  CHECK_THROWS_AS(parse_toml("novalue\n"), config_error);
  CHECK_THROWS_AS(parse_toml("x = \"open\n"), config_error);
  CHECK_THROWS_AS(parse_toml("x = [1, 2\n"), config_error);
  CHECK_THROWS_AS(parse_toml("x = 1.5oops\n"), config_error);
  CHECK_THROWS_AS(parse_toml("x = [1, two]\n"), config_error);
}

TEST_CASE("run config: overrides and defaults") {
  RunConfig c = run_config_from(parse_toml(
      "[model]\nlambda = 2.0\n[cost]\nf0 = 0.1\n"
      "[solver2d]\ngrid_n = 101\nsweep_mode = \"jacobi\"\n"));
  CHECK(c.lambda == 2.0);
  CHECK(c.f0 == 0.1);
  CHECK(c.grid_n == 101);
  CHECK(c.sweep_mode == "jacobi");
  CHECK(c.kappa == 0.5);  // untouched default

  CHECK_THROWS_AS(
      run_config_from(parse_toml("[solver2d]\nsweep_mode = \"zigzag\"\n")),
      config_error);
  CHECK_THROWS_AS(
      run_config_from(parse_toml("[graph]\nboundary_d = [1, 2]\n")),
      config_error);
}

TEST_CASE("config hash: stable and sensitive") {
  RunConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.f0 = a.f0 + 1e-6;
  CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("model built from run config") {
  RunConfig c;
  c.f0 = 0.25;
  Model m = make_model(c);
  CHECK(m.cfg.M_bound == doctest::Approx(0.5));
  CHECK(m.cfg.h1 == doctest::Approx(0.6 * m.ham.h_min));
}
