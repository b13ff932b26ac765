#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "hjlab/level_geometry.hpp"

using namespace hjlab;

namespace {

Model default_model() { return Model::make(HamiltonianSpec::make(), {}); }

// transit time through the quadratic saddle, midpoint to the |x| = s shell
double sigma(double s, double h) {
  return LevelGeometry::saddle_transit_time(s, h);
}

}  // namespace

TEST_CASE("seed points lie on the requested level") {
  Model m = default_model();
  LevelGeometry geom(m);

  Vec2 p2 = geom.seed_point(2, 0.09);
  CHECK(p2.x1 == 0.0);
  CHECK(p2.x2 == doctest::Approx(0.3));

  double h = 0.7 * m.cfg.h1;
  Vec2 p1 = geom.seed_point(1, h);
  CHECK(p1.x2 == 0.0);
  CHECK(p1.x1 < 0.0);
  CHECK(m.H(p1) == doctest::Approx(h).epsilon(1e-12));
  Vec2 p3 = geom.seed_point(3, h);
  CHECK(p3.x1 == doctest::Approx(-p1.x1));

  Vec2 outer = geom.seed_point(2, m.cfg.h2);  // on the outer boundary loop
  CHECK(m.H(outer) == doctest::Approx(m.cfg.h2));

  CHECK_THROWS_AS(geom.seed_point(2, -0.1), level_error);
  CHECK_THROWS_AS(geom.seed_point(1, 0.2), level_error);
  CHECK_THROWS_AS(geom.seed_point(1, 2.0 * m.ham.h_min), level_error);
}

TEST_CASE("traced loops conserve energy and close up") {
  Model m = default_model();
  LevelGeometry geom(m);
  for (auto [branch, h] : std::initializer_list<std::pair<int, double>>{
           {1, -0.3}, {2, 0.4}, {2, 1e-4}, {3, -1e-5}}) {
    LoopSample loop = geom.trace_loop(branch, h);
    CHECK(loop.points.size() == loop.times.size());
    CHECK(loop.period > 0.0);
    double worst = 0.0;
    for (const Vec2& p : loop.points)
      worst = std::max(worst, std::abs(m.H(p) - h));
    CHECK(worst <= 1e-8 * std::max(1.0, std::abs(h)));
    CHECK((loop.points.back() - loop.points.front()).norm() < 1e-5);
    CHECK(loop.times.front() == 0.0);
    CHECK(loop.times.back() == doctest::Approx(loop.period));
  }
}

TEST_CASE("loop refuses levels at the homoclinic floor") {
  LevelGeometry geom(default_model());
  CHECK_THROWS_AS(geom.trace_loop(2, 1e-9), level_error);
}

TEST_CASE("orbit matches the saddle hyperbola inside the quadratic zone") {
  Model m = default_model();
  LevelGeometry geom(m);
  double h = 0.01;
  LoopSample loop = geom.trace_loop(2, h);
  double rt = std::sqrt(h);
  int checked = 0;
  for (std::size_t k = 0; k < loop.points.size(); ++k) {
    double t = loop.times[k];
    Vec2 exact{rt * std::sinh(2.0 * t), rt * std::cosh(2.0 * t)};
    if (exact.norm() > 0.9 * m.ham.kappa) break;
    CHECK((loop.points[k] - exact).norm() < 1e-7);
    ++checked;
  }
  CHECK(checked > 20);
}

TEST_CASE("saddle transit time formula") {
  CHECK(sigma(0.5, 0.25) == doctest::Approx(0.0));
  // s^2 / h = 2
  CHECK(sigma(0.5, 0.125) ==
        doctest::Approx(0.25 * std::log(2.0 + std::sqrt(3.0))));
  CHECK_THROWS_AS(sigma(0.5, 0.3), level_error);
  CHECK_THROWS_AS(sigma(0.5, 0.0), level_error);
  // doubling s adds (1/2) log 2 in the small-h limit
  double h = 1e-8;
  CHECK(sigma(0.4, h) - sigma(0.2, h) ==
        doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-4));
}

TEST_CASE("period differences follow the saddle transit oracle") {
  Model m = default_model();
  LevelGeometry geom(m);
  double kappa = m.ham.kappa;

  // middle-edge loops pass the saddle twice per period
  double ha = 1e-4, hb = 1e-6;
  double dT2 = geom.trace_loop(2, ha).period - geom.trace_loop(2, hb).period;
  CHECK(dT2 ==
        doctest::Approx(4.0 * (sigma(kappa, ha) - sigma(kappa, hb))).epsilon(0.02));

  // well loops pass it once
  double dT1 =
      geom.trace_loop(1, -ha).period - geom.trace_loop(1, -hb).period;
  CHECK(dT1 ==
        doctest::Approx(2.0 * (sigma(kappa, ha) - sigma(kappa, hb))).epsilon(0.02));
}

TEST_CASE("logarithmic period growth with a branch-dependent coefficient") {
  Model m = default_model();
  LevelGeometry geom(m);
  for (int branch : {1, 2, 3}) {
    double coeff = branch == 2 ? 1.0 : 0.5;  // saddle passages / 2
    double sign = branch == 2 ? 1.0 : -1.0;
    std::vector<double> resid;
    for (double mag : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6})
      resid.push_back(geom.trace_loop(branch, sign * mag).period -
                      coeff * std::log(1.0 / mag));
    double K = 0.0;
    for (double r : resid) K += r;
    K /= resid.size();
    for (double r : resid) {
      INFO("branch ", branch, " fitted constant ", K, " residual ", r);
      CHECK(std::abs(r - K) <= 0.15 * std::abs(K));
    }
  }
}

TEST_CASE("loop averages: normalization and arclength consistency") {
  Model m = default_model();
  LevelGeometry geom(m);
  LoopSample loop = geom.trace_loop(2, 0.2);
  CHECK(LevelGeometry::loop_average(loop, [](Vec2) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-12));
  double avg_dh = LevelGeometry::loop_average(
      loop, [&](Vec2 x) { return m.grad_H(x).norm(); });
  CHECK(avg_dh * loop.period == doctest::Approx(loop.length).epsilon(1e-12));

  // polyline arclength agrees with the quadrature value
  double poly = 0.0;
  for (std::size_t k = 0; k + 1 < loop.points.size(); ++k)
    poly += (loop.points[k + 1] - loop.points[k]).norm();
  CHECK(poly == doctest::Approx(loop.length).epsilon(1e-4));
}

TEST_CASE("controlled crossing: descent bound at random starts") {
  Model m = default_model();
  LevelGeometry geom(m);
  double c0 = m.measure_c0();
  const double mu = 0.5;
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ux1(-1.0, 1.0), ux2(0.05, 1.0);
  int tried = 0;
  while (tried < 50) {
    Vec2 x{ux1(rng), ux2(rng)};
    double h = m.H(x);
    if (h <= 1e-3 || h >= m.cfg.h2) continue;
    ++tried;
    CrossingRecord rec = geom.controlled_crossing_time(x, 0.1, mu, -1, 0.0);
    CHECK(rec.elapsed > 0.0);
    CHECK(rec.elapsed <= 2.0 * std::sqrt(h) / (c0 * mu));
  }
}

TEST_CASE("controlled crossing: reversing the control sign returns") {
  Model m = default_model();
  LevelGeometry geom(m);
  Vec2 x{0.1, 0.5};
  double h = m.H(x);
  CrossingRecord down = geom.controlled_crossing_time(x, 0.2, 0.4, -1, 0.5 * h);
  // restart from a point at the reached level and climb back
  CrossingRecord up =
      geom.controlled_crossing_time({0.1, std::sqrt(0.5 * h + 0.01)}, 0.2,
                                    0.4, +1, h);
  CHECK(down.exit_level == doctest::Approx(0.5 * h).epsilon(1e-6));
  CHECK(up.exit_level == doctest::Approx(h).epsilon(1e-6));
}

TEST_CASE("controlled crossing: large epsilon matches pure gradient descent") {
  Model m = default_model();
  LevelGeometry geom(m);
  Vec2 x{0.0, 0.6};
  double target = 0.1;
  const double mu = 0.3;
  CrossingRecord rec = geom.controlled_crossing_time(x, 1e7, mu, -1, target);

  // oracle: dX = -mu DH/|DH| alone; the drift conserves H exactly
  Vec2 y = x;
  double t = 0.0, dt = 1e-5;
  while (m.H(y) > target) {
    auto rhs = [&](Vec2 p) { return m.grad_H(p) * (-mu / m.grad_H(p).norm()); };
    Vec2 k1 = rhs(y), k2 = rhs(y + 0.5 * dt * k1), k3 = rhs(y + 0.5 * dt * k2),
         k4 = rhs(y + dt * k3);
    y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += dt;
  }
  CHECK(rec.elapsed == doctest::Approx(t).epsilon(1e-3));
}

TEST_CASE("free annulus transit: lower bounds") {
  Model m = default_model();
  LevelGeometry geom(m);
  double kappa = m.ham.kappa;
  const double r = 0.12;
  double bound = std::log(kappa / r) - 0.5 * std::log(2.0);

  std::mt19937 rng(13);
  std::uniform_real_distribution<double> ux1(-0.85, 0.85), uh(-0.9, 0.9);
  int tried = 0;
  while (tried < 50) {
    double x1 = ux1(rng);
    double h = uh(rng) * r * r;
    double x2sq = h - m.ham.well_potential(x1);
    if (x2sq <= 0.0) continue;
    Vec2 x{x1, std::sqrt(x2sq)};
    if (x.norm() <= 1.05 * r) continue;
    ++tried;
    CHECK(geom.free_transit_through_annulus(x, r) >= bound);
  }

  // starts exactly on the homoclinic level satisfy the sharper bound
  for (double x1 : {0.3, -0.45, 0.7}) {
    Vec2 x{x1, std::sqrt(-m.ham.well_potential(x1))};
    CHECK(m.H(x) == doctest::Approx(0.0).scale(1).epsilon(1e-14));
    CHECK(geom.free_transit_through_annulus(x, r) >= std::log(kappa / r));
  }

  // near-degenerate annulus (r close to kappa): time is small but positive
  Vec2 x{0.6, std::sqrt(-m.ham.well_potential(0.6))};
  double t = geom.free_transit_through_annulus(x, 0.49);
  CHECK(t > 0.0);
  CHECK(t < 5.0);
}

TEST_CASE("loop arclength inside a small ball stays below 4r") {
  Model m = default_model();
  LevelGeometry geom(m);
  for (int branch : {1, 2}) {
    double sign = branch == 2 ? 1.0 : -1.0;
    for (int a = 0; a < 5; ++a) {
      double mag = std::pow(10.0, -6.0 + a);
      LoopSample loop = geom.trace_loop(branch, sign * mag);
      for (double r : {0.05, 0.1, 0.2, 0.35, 0.45}) {
        double len = 0.0;
        for (std::size_t k = 0; k + 1 < loop.points.size(); ++k)
          if (loop.points[k].norm() < r && loop.points[k + 1].norm() < r)
            len += (loop.points[k + 1] - loop.points[k]).norm();
        CHECK(len <= 4.0 * r);
      }
    }
  }
}

TEST_CASE("periods and lengths are discretely continuous in h") {
  Model m = default_model();
  LevelGeometry geom(m);
  double prev_T = 0.0, prev_L = 0.0;
  bool first = true;
  for (int k = 0; k <= 12; ++k) {
    double h = 0.55 * std::pow(0.5, k);
    LoopSample loop = geom.trace_loop(2, h);
    if (!first) {
      // halving h adds ~log 2 to the period (two saddle passages)
      CHECK(std::abs(loop.period - prev_T) < 0.75);
      CHECK(std::abs(loop.length - prev_L) < 0.75);
    }
    prev_T = loop.period;
    prev_L = loop.length;
    first = false;
  }
}
