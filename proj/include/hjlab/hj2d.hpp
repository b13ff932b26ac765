#pragma once

#include <stdexcept>
#include <vector>

#include "hjlab/graph_solver.hpp"
#include "hjlab/level_geometry.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

struct Grid2D {
  Model::BBox bbox{};
  int nx = 0, ny = 0;
  double dx = 0.0, dy = 0.0;

  static Grid2D make(const Model& model, int nx, int ny, double margin = 0.05);

  double x1(int i) const { return bbox.x1_min + i * dx; }
  double x2(int j) const { return bbox.x2_min + j * dy; }
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(j) * nx + i;
  }
  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
};

enum class NodeClass : unsigned char { exterior = 0, interior, boundary };

/// Nodal classification of the masked domain. component is the branch
/// index 1..3 for interior and boundary nodes (0 for exterior); the two
/// wells are separated by flood fill seeded at (-kappa, 0) and (kappa, 0).
struct DomainMask {
  int nx = 0, ny = 0;
  std::vector<NodeClass> cls;
  std::vector<signed char> component;

  NodeClass at(int i, int j) const {
    return cls[static_cast<std::size_t>(j) * nx + i];
  }
  std::size_t count(NodeClass c) const;
};

DomainMask build_mask(const Grid2D& grid, const Model& model);

struct Solution2D {
  double epsilon = 0.0;
  std::vector<double> u;  // full grid; 0 on boundary and exterior nodes
  int iterations = 0;
  double final_update = 0.0;
  double sup_u = 0.0;       // max over iterations of sup |u|
  double dt = 0.0;
};

enum class SweepMode { serial_gs, jacobi_omp };

struct Solve2DOptions {
  double epsilon = 0.1;
  int controls = 16;  // unit directions; the zero control is always added
  double tol = 1e-8;
  int max_iter = 200000;
  SweepMode mode = SweepMode::serial_gs;
  double dt_floor = 1e-7;
  bool lax_friedrichs = false;  // cross-check mode, sensible for eps >= 0.2
};

class hj2d_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class no_convergence : public hj2d_error {
 public:
  using hj2d_error::hj2d_error;
};
class epsilon_too_small : public hj2d_error {
 public:
  using hj2d_error::hj2d_error;
};

/// Fixed point of the semi-Lagrangian dynamic programming update for
/// lambda u - b.Du/eps + |Du| - f = 0 with u = 0 on the boundary band.
Solution2D solve_2d(const Model& model, const Grid2D& grid,
                    const DomainMask& mask, const Solve2DOptions& opt);

/// One Jacobi pass of the update operator. Exposed for the monotonicity
/// tests; solve_2d iterates the same kernel.
std::vector<double> apply_update(const Model& model, const Grid2D& grid,
                                 const DomainMask& mask,
                                 const Solve2DOptions& opt,
                                 const std::vector<double>& u);

struct LoopTrace {
  double mean = 0.0;
  double stdev = 0.0;
};

/// Bilinear samples of u along a traced loop.
LoopTrace loop_trace_values(const Grid2D& grid, const Solution2D& sol,
                            const LoopSample& loop);

struct GraphComparison {
  std::array<double, 3> per_branch{};  // sup |u_eps - u_i o H| per branch
  double overall = 0.0;
};

GraphComparison compare_to_graph(const Model& model, const Grid2D& grid,
                                 const DomainMask& mask, const Solution2D& sol,
                                 const GraphSolution& gsol);

}  // namespace hjlab
