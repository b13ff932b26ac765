#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "hjlab/model.hpp"

namespace hjlab {

/// One traced periodic orbit c_i(h) of the Hamiltonian flow.
struct LoopSample {
  int branch = 0;
  double h = 0.0;
  std::vector<Vec2> points;   // ordered along the flow, last == first
  std::vector<double> times;  // matching flow times in [0, period]
  double period = 0.0;
  double length = 0.0;
};

struct CrossingRecord {
  Vec2 start;
  double epsilon = 0.0;
  double mu = 0.0;
  int sign = +1;
  double exit_level = 0.0;
  double elapsed = 0.0;
};

struct TraceOptions {
  double rtol = 1e-10;
  double h_floor = 1e-8;     // refuse loops closer to the homoclinic level
  double max_time = 200.0;   // integration budget per loop
};

class level_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class LevelGeometry {
 public:
  explicit LevelGeometry(const Model& model, TraceOptions opt = {})
      : model_(model), opt_(opt) {}

  /// A point on c_i(h): (0, sqrt(h)) for branch 2, the outer root of
  /// W(x1) = h on the matching side for branches 1 and 3.
  Vec2 seed_point(int branch, double h) const;

  LoopSample trace_loop(int branch, double h) const;

  /// Time average (1/T) int integrand(X(t)) dt over the stored samples.
  static double loop_average(const LoopSample& loop,
                             const std::function<double(Vec2)>& integrand);

  /// Closed-form transit time sigma^s(h) through the quadratic saddle.
  static double saddle_transit_time(double s, double h);

  /// Integrates dX = b/eps + sign * mu DH/|DH| until H crosses target_level.
  CrossingRecord controlled_crossing_time(Vec2 start, double epsilon,
                                          double mu, int sign,
                                          double target_level) const;

  /// Free-flow time between the backward and forward first hits of the
  /// circle |x| = r, for starts in Omega(r^2) outside B_r.
  double free_transit_through_annulus(Vec2 start, double r) const;

  const Model& model() const { return model_; }
  const TraceOptions& options() const { return opt_; }

 private:
  const Model& model_;
  TraceOptions opt_;
};

}  // namespace hjlab
