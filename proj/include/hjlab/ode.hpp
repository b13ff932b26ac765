#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "hjlab/model.hpp"

namespace hjlab {

/// Adaptive Dormand-Prince RK4(5) step for planar fields.
/// Returns the 5th-order solution and an embedded error estimate.
struct DopriStep {
  Vec2 y;
  double err;
};

template <class Field>
DopriStep dopri_step(const Field& rhs, Vec2 y, double dt) {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  Vec2 k1 = rhs(y);
  Vec2 k2 = rhs(y + dt * (a21 * k1));
  Vec2 k3 = rhs(y + dt * (a31 * k1 + a32 * k2));
  Vec2 k4 = rhs(y + dt * (a41 * k1 + a42 * k2 + a43 * k3));
  Vec2 k5 = rhs(y + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
  Vec2 k6 = rhs(y + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
  Vec2 y5 = y + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
  Vec2 k7 = rhs(y5);
  Vec2 ev = dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  return {y5, ev.norm()};
}

/// Integrates y' = rhs(y) with adaptive steps; calls observe(t, y) after
/// every accepted step (and once at t = 0). Stops when observe returns
/// false or t reaches t_max.
template <class Field, class Observer>
void integrate_adaptive(const Field& rhs, Vec2 y0, double t_max, double rtol,
                        double max_step, Observer&& observe) {
  double t = 0.0;
  Vec2 y = y0;
  double dt = std::min(max_step, 1e-3);
  if (!observe(t, y)) return;
  while (t < t_max) {
    dt = std::min({dt, max_step, t_max - t});
    DopriStep s = dopri_step(rhs, y, dt);
    double scale = rtol * std::max(1.0, y.norm());
    if (s.err <= scale || dt <= 1e-14) {
      t += dt;
      y = s.y;
      if (!observe(t, y)) return;
      double grow = s.err > 0 ? 0.9 * std::pow(scale / s.err, 0.2) : 5.0;
      dt *= std::clamp(grow, 0.2, 5.0);
    } else {
      dt *= std::max(0.2, 0.9 * std::pow(scale / s.err, 0.2));
    }
  }
}

}  // namespace hjlab
