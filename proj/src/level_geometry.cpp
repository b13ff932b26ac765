#include "hjlab/level_geometry.hpp"

#include <algorithm>
#include <cmath>

#include "hjlab/ode.hpp"

namespace hjlab {

namespace {

// Classic RK4 step for the free flow, used by the fixed-step resampling
// pass once the period is known.
template <class Field>
Vec2 rk4_step(const Field& rhs, Vec2 y, double dt) {
  Vec2 k1 = rhs(y);
  Vec2 k2 = rhs(y + (0.5 * dt) * k1);
  Vec2 k3 = rhs(y + (0.5 * dt) * k2);
  Vec2 k4 = rhs(y + dt * k3);
  return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class Field>
Vec2 flow_for(const Field& rhs, Vec2 y, double t, int substeps) {
  double dt = t / substeps;
  for (int k = 0; k < substeps; ++k) y = rk4_step(rhs, y, dt);
  return y;
}

}  // namespace

Vec2 LevelGeometry::seed_point(int branch, double h) const {
  const Model& m = model_;
  if (branch == 2) {
    if (h <= 0.0 || h > m.cfg.h2 + 1e-12)
      throw level_error("seed_point: h outside (0, h2] for branch 2");
    return {0.0, std::sqrt(h)};
  }
  if (branch != 1 && branch != 3)
    throw level_error("seed_point: branch must be 1, 2, or 3");
  double hi = m.boundary_level(branch);
  if (h >= 0.0 || h < hi - 1e-12 || h <= m.ham.h_min)
    throw level_error("seed_point: root not bracketed, h outside [h_i, 0)");
  // Inner root of W(s) = h on (0, s_star): W decreases from 0 to h_min.
  double lo = 0.0, up = m.ham.s_star;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + up);
    (m.ham.well_potential(mid) > h ? lo : up) = mid;
  }
  double s = 0.5 * (lo + up);
  return branch == 1 ? Vec2{-s, 0.0} : Vec2{s, 0.0};
}

LoopSample LevelGeometry::trace_loop(int branch, double h) const {
  const Model& m = model_;
  if (std::abs(h) < opt_.h_floor)
    throw level_error("trace_loop: |h| below h_floor, too close to the homoclinic level");
  Vec2 x0 = seed_point(branch, h);
  auto rhs = [&m](Vec2 y) { return m.drift_b(y); };

  // Poincare section through the seed, transversal to the flow.
  Vec2 n = m.drift_b(x0);
  double bn = n.norm();
  if (bn < 1e-12) throw level_error("trace_loop: seed is a critical point");
  n = n * (1.0 / bn);
  auto section = [&](Vec2 y) { return (y - x0).dot(n); };

  // Detection pass: find the first oriented return to the section.
  double t_prev = 0.0, s_prev = 0.0;
  Vec2 y_prev = x0;
  double t_lo = -1.0, t_hi = -1.0;
  Vec2 y_lo;
  bool armed = false;  // set once the section value has gone negative
  integrate_adaptive(
      rhs, x0, opt_.max_time, opt_.rtol, 5e-3, [&](double t, Vec2 y) {
        double s = section(y);
        if (t > 0.0) {
          if (s < 0.0) armed = true;
          if (armed && s_prev < 0.0 && s >= 0.0 && m.drift_b(y).dot(n) > 0.0) {
            t_lo = t_prev;
            t_hi = t;
            y_lo = y_prev;
            return false;
          }
        }
        t_prev = t;
        s_prev = s;
        y_prev = y;
        return true;
      });
  if (t_lo < 0.0)
    throw level_error("trace_loop: period not found within the time budget");

  // Refine the crossing instant by bisection on short integrations
  // from the last pre-crossing state.
  double a = 0.0, b = t_hi - t_lo;
  for (int it = 0; it < 60; ++it) {
    double mid = 0.5 * (a + b);
    double s = section(flow_for(rhs, y_lo, mid, 8));
    (s < 0.0 ? a : b) = mid;
  }
  double period = t_lo + 0.5 * (a + b);

  // Resampling pass: uniform time grid over one period. Uniform-in-time
  // sampling concentrates points in the slow saddle passages, and the
  // trapezoid rule on a periodic integrand converges spectrally.
  int n_steps = std::max(2048, static_cast<int>(period * 400));
  LoopSample loop;
  loop.branch = branch;
  loop.h = h;
  loop.period = period;
  loop.points.reserve(n_steps + 1);
  loop.times.reserve(n_steps + 1);
  double dt = period / n_steps;
  Vec2 y = x0;
  for (int k = 0; k < n_steps; ++k) {
    loop.points.push_back(y);
    loop.times.push_back(k * dt);
    y = rk4_step(rhs, y, dt);
  }
  double closure = (y - x0).norm();
  if (closure > 1e-5)
    throw level_error("trace_loop: loop failed to close");
  loop.points.push_back(x0);
  loop.times.push_back(period);

  loop.length = period * loop_average(
      loop, [&m](Vec2 p) { return m.grad_H(p).norm(); });
  return loop;
}

double LevelGeometry::loop_average(
    const LoopSample& loop, const std::function<double(Vec2)>& integrand) {
  double acc = 0.0;
  double g_prev = integrand(loop.points.front());
  for (std::size_t k = 1; k < loop.points.size(); ++k) {
    double g = integrand(loop.points[k]);
    acc += 0.5 * (g + g_prev) * (loop.times[k] - loop.times[k - 1]);
    g_prev = g;
  }
  return acc / loop.period;
}

double LevelGeometry::saddle_transit_time(double s, double h) {
  double ah = std::abs(h);
  if (ah <= 0.0) throw level_error("saddle_transit_time: h must be nonzero");
  double ratio = s * s / ah;
  if (ratio < 1.0)
    throw level_error("saddle_transit_time: |h| > s^2, loop does not reach radius s");
  return 0.25 * std::log(ratio + std::sqrt(ratio * ratio - 1.0));
}

CrossingRecord LevelGeometry::controlled_crossing_time(
    Vec2 start, double epsilon, double mu, int sign,
    double target_level) const {
  const Model& m = model_;
  double h0 = m.H(start);
  if ((sign > 0 && target_level <= h0) || (sign < 0 && target_level >= h0))
    throw level_error("controlled_crossing_time: target not reachable with this sign");
  auto rhs = [&](Vec2 y) {
    Vec2 g = m.grad_H(y);
    double gn = g.norm();
    if (gn < 1e-10)
      throw level_error("controlled_crossing_time: stalled at a critical point");
    return (1.0 / epsilon) * m.drift_b(y) + (sign * mu / gn) * g;
  };
  double t_prev = 0.0, h_prev = h0;
  double elapsed = -1.0;
  integrate_adaptive(rhs, start, opt_.max_time, 1e-9, 1e-2,
                     [&](double t, Vec2 y) {
                       double hv = m.H(y);
                       bool crossed = sign > 0 ? hv >= target_level
                                               : hv <= target_level;
                       if (crossed && t > 0.0) {
                         // H is monotone along the flow; linear interp.
                         double w = (target_level - h_prev) / (hv - h_prev);
                         elapsed = t_prev + w * (t - t_prev);
                         return false;
                       }
                       t_prev = t;
                       h_prev = hv;
                       return true;
                     });
  if (elapsed < 0.0)
    throw level_error("controlled_crossing_time: level not reached within budget");
  return {start, epsilon, mu, sign, target_level, elapsed};
}

double LevelGeometry::free_transit_through_annulus(Vec2 start, double r) const {
  const Model& m = model_;
  if (start.norm() <= r)
    throw level_error("free_transit_through_annulus: start inside B_r");
  if (std::abs(m.H(start)) >= r * r)
    throw level_error("free_transit_through_annulus: start outside Omega(r^2)");
  auto hit_time = [&](double direction) {
    auto rhs = [&](Vec2 y) { return direction * m.drift_b(y); };
    double t_prev = 0.0, g_prev = start.norm() - r;
    double hit = -1.0;
    integrate_adaptive(rhs, start, opt_.max_time, opt_.rtol, 5e-3,
                       [&](double t, Vec2 y) {
                         double g = y.norm() - r;
                         if (g <= 0.0 && t > 0.0) {
                           double w = (0.0 - g_prev) / (g - g_prev);
                           hit = t_prev + w * (t - t_prev);
                           return false;
                         }
                         t_prev = t;
                         g_prev = g;
                         return true;
                       });
    if (hit < 0.0)
      throw level_error("free_transit_through_annulus: B_r not reached within budget");
    return hit;
  };
  return hit_time(+1.0) + hit_time(-1.0);
}

}  // namespace hjlab
