#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "hjlab/model.hpp"

using namespace hjlab;

namespace {
Model default_model(double f0 = 0.0) {
  ModelConfig cfg;
  cfg.cost.f0 = f0;
  return Model::make(HamiltonianSpec::make(), cfg);
}
}  // namespace

TEST_CASE("well potential: exactly quadratic inside the blend radius") {
  HamiltonianSpec spec = HamiltonianSpec::make();
  for (double s : {0.0, 0.1, -0.3, 0.49999, -0.5}) {
    CHECK(spec.well_potential(s) == doctest::Approx(-s * s).epsilon(1e-15));
    CHECK(spec.well_potential_deriv(s) == doctest::Approx(-2 * s).epsilon(1e-15));
  }
  CHECK(spec.well_potential(0.7) ==
        doctest::Approx(-0.49 + 8.0 * std::pow(0.2, 4)));
  CHECK(spec.well_potential(-0.7) == spec.well_potential(0.7));
}

TEST_CASE("well geometry: critical point and depth") {
  HamiltonianSpec spec = HamiltonianSpec::make();
  CHECK(spec.s_star == doctest::Approx(0.88).epsilon(5e-3));
  CHECK(spec.h_min == doctest::Approx(-0.6076).epsilon(1e-3));
  CHECK(spec.well_potential_deriv(spec.s_star) == doctest::Approx(0.0).scale(1).epsilon(1e-10));
}

TEST_CASE("drift is orthogonal to the energy gradient") {
  Model m = default_model();
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  for (int k = 0; k < 200; ++k) {
    Vec2 x{u(rng), u(rng)};
    CHECK(std::abs(m.drift_b(x).dot(m.grad_H(x))) < 1e-13);
  }
}

TEST_CASE("boundary levels and domain membership") {
  Model m = default_model();
  CHECK(m.boundary_level(2) == doctest::Approx(0.6));
  CHECK(m.boundary_level(1) == doctest::Approx(0.6 * m.ham.h_min));
  CHECK(m.boundary_level(3) == m.boundary_level(1));
  CHECK(m.inside_domain({0.0, 0.3}));          // H = 0.09 in (0, h2)
  CHECK(!m.inside_domain({0.0, 1.5}));         // above the outer level
  CHECK(!m.inside_domain({m.ham.s_star, 0.0})); // well bottom, below h1
}

TEST_CASE("bounding box contains the outer level set") {
  Model m = default_model();
  auto bb = m.bounding_box(0.05);
  // the widest loop is {H = h2}
  HamiltonianSpec spec = m.ham;
  double x2max = std::sqrt(m.cfg.h2 - spec.h_min);
  CHECK(bb.x2_max > x2max);
  CHECK(bb.x2_min < -x2max);
  CHECK(bb.x1_max > spec.s_star);
  double r = bb.x1_max;
  CHECK(spec.well_potential(r) > m.cfg.h2);  // box edge is outside
}

TEST_CASE("cost and Lagrangian") {
  Model flat = default_model(0.0);
  CHECK(flat.f({0.3, -0.2}) == 0.0);
  CHECK(flat.G({0.3, -0.2}, {3.0, 4.0}) == doctest::Approx(5.0));

  Model bumpy = default_model(0.4);
  CHECK(bumpy.f(bumpy.cfg.cost.center) == doctest::Approx(2 * 0.4));
  CHECK(bumpy.f({-1.0, -1.0}) == doctest::Approx(0.4));  // outside the bump
  CHECK(bumpy.cfg.M_bound == doctest::Approx(0.8));

  LagrangianValue in = bumpy.lagrangian({0.0, 0.1}, {0.6, 0.8});
  CHECK(in.finite);
  CHECK(in.value == doctest::Approx(bumpy.f({0.0, 0.1})));
  LagrangianValue out = bumpy.lagrangian({0.0, 0.1}, {0.8, 0.8});
  CHECK(!out.finite);
}

TEST_CASE("measured gradient floor is positive") {
  Model m = default_model();
  CHECK(m.measure_c0() > 0.1);
}

TEST_CASE("assumption audit passes for the default model") {
  ValidationReport rep = default_model(0.3).validate_assumptions();
  for (const auto& c : rep.checks) {
    INFO(c.name, ": ", c.detail);
    CHECK(c.pass);
  }
  CHECK(rep.all_pass());
}

TEST_CASE("assumption audit fails without the confining blend") {
  ModelConfig cfg;
  Model degenerate = Model::make(HamiltonianSpec::make(0.5, 0.0), cfg);
  CHECK(!degenerate.validate_assumptions().all_pass());
}
