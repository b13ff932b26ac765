#include "hjlab/hj2d.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

namespace hjlab {

namespace {

// Bilinear interpolation on the full nodal array, zero outside the box.
// Boundary and exterior nodes carry 0, so a foot point leaving the
// interior blends toward the boundary datum g = 0 within one cell.
double interp(const Grid2D& g, const std::vector<double>& u, Vec2 p) {
  double s = (p.x1 - g.bbox.x1_min) / g.dx;
  double t = (p.x2 - g.bbox.x2_min) / g.dy;
  if (s < 0.0 || t < 0.0 || s > g.nx - 1 || t > g.ny - 1) return 0.0;
  int i = std::min(static_cast<int>(s), g.nx - 2);
  int j = std::min(static_cast<int>(t), g.ny - 2);
  double a = s - i, b = t - j;
  return (1 - a) * (1 - b) * u[g.idx(i, j)] + a * (1 - b) * u[g.idx(i + 1, j)] +
         (1 - a) * b * u[g.idx(i, j + 1)] + a * b * u[g.idx(i + 1, j + 1)];
}

struct Kernel {
  const Model& model;
  const Grid2D& grid;
  std::vector<Vec2> controls;  // zero control plus unit directions

  Kernel(const Model& m, const Grid2D& g, int n_controls)
      : model(m), grid(g) {
    controls.push_back({0.0, 0.0});
    for (int k = 0; k < n_controls; ++k) {
      double th = 2.0 * M_PI * k / n_controls;
      controls.push_back({std::cos(th), std::sin(th)});
    }
  }

  // Node-local step: the foot point moves at most one cell, but slow nodes
  // take longer steps, which keeps the interpolation smoothing (the scheme's
  // dominant error at small eps) proportional to the local |b|/eps instead
  // of its global maximum.
  double local_dt(Vec2 x, double eps) const {
    return std::min(grid.dx, grid.dy) /
           (model.drift_b(x).norm() / eps + 1.0);
  }

  double sl_update(const std::vector<double>& u, double eps, int i,
                   int j) const {
    Vec2 x{grid.x1(i), grid.x2(j)};
    Vec2 drift = model.drift_b(x) * (1.0 / eps);
    double dt = local_dt(x, eps);
    double discount = std::exp(-model.cfg.lambda * dt);
    double run = dt * model.f(x);
    double best = std::numeric_limits<double>::infinity();
    for (Vec2 a : controls) {
      Vec2 foot = x + dt * (drift + a);
      best = std::min(best, run + discount * interp(grid, u, foot));
    }
    return best;
  }

  // Explicit Lax-Friedrichs step on lambda u - b.Du/eps + |Du| - f = 0,
  // central differences with upwinding dissipation. Cross-check only.
  double lf_update(const std::vector<double>& u, double eps, int i,
                   int j) const {
    Vec2 x{grid.x1(i), grid.x2(j)};
    Vec2 b = model.drift_b(x) * (1.0 / eps);
    double uc = u[grid.idx(i, j)];
    double ul = u[grid.idx(i - 1, j)], ur = u[grid.idx(i + 1, j)];
    double ud = u[grid.idx(i, j - 1)], uu = u[grid.idx(i, j + 1)];
    double px = (ur - ul) / (2.0 * grid.dx);
    double py = (uu - ud) / (2.0 * grid.dy);
    double ax = std::abs(b.x1) + 1.0, ay = std::abs(b.x2) + 1.0;
    double ham = -b.x1 * px - b.x2 * py + std::hypot(px, py) - model.f(x) -
                 0.5 * ax * (ur - 2.0 * uc + ul) / grid.dx -
                 0.5 * ay * (uu - 2.0 * uc + ud) / grid.dy;
    double step = 1.0 / (model.cfg.lambda + ax / grid.dx + ay / grid.dy);
    return uc - step * (model.cfg.lambda * uc + ham);
  }
};

}  // namespace

Grid2D Grid2D::make(const Model& model, int nx, int ny, double margin) {
  if (nx < 4 || ny < 4) throw hj2d_error("grid: need at least 4x4 nodes");
  Grid2D g;
  g.bbox = model.bounding_box(margin);
  g.nx = nx;
  g.ny = ny;
  g.dx = (g.bbox.x1_max - g.bbox.x1_min) / (nx - 1);
  g.dy = (g.bbox.x2_max - g.bbox.x2_min) / (ny - 1);
  return g;
}

std::size_t DomainMask::count(NodeClass c) const {
  std::size_t n = 0;
  for (auto v : cls)
    if (v == c) ++n;
  return n;
}

DomainMask build_mask(const Grid2D& grid, const Model& model) {
  DomainMask mask;
  mask.nx = grid.nx;
  mask.ny = grid.ny;
  mask.cls.assign(grid.size(), NodeClass::exterior);
  mask.component.assign(grid.size(), 0);

  std::vector<double> Hval(grid.size());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      Hval[grid.idx(i, j)] = model.H({grid.x1(i), grid.x2(j)});

  // Flood fill of {H < 0} from the two well centers separates D_1 and D_3.
  std::vector<signed char> well(grid.size(), 0);
  auto fill = [&](Vec2 seed, signed char label) {
    int si = static_cast<int>(std::lround((seed.x1 - grid.bbox.x1_min) / grid.dx));
    int sj = static_cast<int>(std::lround((seed.x2 - grid.bbox.x2_min) / grid.dy));
    std::deque<std::pair<int, int>> queue{{si, sj}};
    if (Hval[grid.idx(si, sj)] >= 0.0)
      throw hj2d_error("mask: well seed landed outside {H < 0}");
    well[grid.idx(si, sj)] = label;
    while (!queue.empty()) {
      auto [i, j] = queue.front();
      queue.pop_front();
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) continue;
        std::size_t id = grid.idx(ii, jj);
        if (well[id] == 0 && Hval[id] < 0.0) {
          well[id] = label;
          queue.emplace_back(ii, jj);
        }
      }
    }
  };
  fill({-model.ham.kappa, 0.0}, 1);
  fill({model.ham.kappa, 0.0}, 3);

  for (std::size_t id = 0; id < grid.size(); ++id) {
    double H = Hval[id];
    if (H >= 0.0 && H < model.cfg.h2) {
      mask.cls[id] = NodeClass::interior;
      mask.component[id] = 2;
    } else if (H < 0.0) {
      double hi = well[id] == 1 ? model.cfg.h1 : model.cfg.h3;
      if (H > hi && well[id] != 0) {
        mask.cls[id] = NodeClass::interior;
        mask.component[id] = well[id];
      }
    }
  }

  // Boundary band: non-interior nodes one cell from the interior, tagged
  // with the neighboring component (the level h_i they realize).
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      std::size_t id = grid.idx(i, j);
      if (mask.cls[id] == NodeClass::interior) continue;
      const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int ii = i + di[k], jj = j + dj[k];
        if (ii < 0 || jj < 0 || ii >= grid.nx || jj >= grid.ny) continue;
        std::size_t nb = grid.idx(ii, jj);
        if (mask.cls[nb] == NodeClass::interior) {
          mask.cls[id] = NodeClass::boundary;
          mask.component[id] = mask.component[nb];
          break;
        }
      }
    }
  return mask;
}

std::vector<double> apply_update(const Model& model, const Grid2D& grid,
                                 const DomainMask& mask,
                                 const Solve2DOptions& opt,
                                 const std::vector<double>& u) {
  Kernel kernel(model, grid, opt.controls);

  std::vector<double> out = u;
#pragma omp parallel for schedule(static)
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (mask.at(i, j) == NodeClass::interior)
        out[grid.idx(i, j)] = opt.lax_friedrichs
                                  ? kernel.lf_update(u, opt.epsilon, i, j)
                                  : kernel.sl_update(u, opt.epsilon, i, j);
  return out;
}

Solution2D solve_2d(const Model& model, const Grid2D& grid,
                    const DomainMask& mask, const Solve2DOptions& opt) {
  if (opt.epsilon <= 0.0) throw hj2d_error("solve: epsilon must be positive");
  if (opt.controls < 8) throw hj2d_error("solve: need at least 8 controls");

  double bmax = 0.0;
  std::vector<std::pair<int, int>> active;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i)
      if (mask.at(i, j) == NodeClass::interior) {
        bmax = std::max(bmax, model.drift_b({grid.x1(i), grid.x2(j)}).norm());
        active.emplace_back(i, j);
      }
  double dt = std::min(grid.dx, grid.dy) / (bmax / opt.epsilon + 1.0);
  if (dt < opt.dt_floor)
    throw epsilon_too_small("solve: time step underflows the floor");
  Kernel kernel(model, grid, opt.controls);

  Solution2D sol;
  sol.epsilon = opt.epsilon;
  sol.dt = dt;
  sol.u.assign(grid.size(), 0.0);

  auto node_value = [&](const std::vector<double>& u, int i, int j) {
    return opt.lax_friedrichs ? kernel.lf_update(u, opt.epsilon, i, j)
                              : kernel.sl_update(u, opt.epsilon, i, j);
  };

  std::vector<double> buf;
  if (opt.mode == SweepMode::jacobi_omp) buf = sol.u;

  for (int iter = 1; iter <= opt.max_iter; ++iter) {
    double max_change = 0.0;
    if (opt.mode == SweepMode::jacobi_omp) {
#pragma omp parallel for schedule(static) reduction(max : max_change)
      for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(active.size());
           ++k) {
        int i = active[k].first, j = active[k].second;
        double v = node_value(sol.u, i, j);
        max_change = std::max(max_change, std::abs(v - sol.u[grid.idx(i, j)]));
        buf[grid.idx(i, j)] = v;
      }
      std::swap(sol.u, buf);
      buf = sol.u;
    } else {
      // Alternating sweep orders so information follows the rotating
      // characteristics within few passes.
      int phase = (iter - 1) % 4;
      auto visit = [&](int i, int j) {
        double v = node_value(sol.u, i, j);
        max_change = std::max(max_change, std::abs(v - sol.u[grid.idx(i, j)]));
        sol.u[grid.idx(i, j)] = v;
      };
      bool fwd_i = phase == 0 || phase == 2;
      bool fwd_j = phase == 0 || phase == 1;
      for (int jj = 0; jj < grid.ny; ++jj) {
        int j = fwd_j ? jj : grid.ny - 1 - jj;
        for (int ii = 0; ii < grid.nx; ++ii) {
          int i = fwd_i ? ii : grid.nx - 1 - ii;
          if (mask.at(i, j) == NodeClass::interior) visit(i, j);
        }
      }
    }
    sol.iterations = iter;
    sol.final_update = max_change;
    for (auto [i, j] : active)
      sol.sup_u = std::max(sol.sup_u, std::abs(sol.u[grid.idx(i, j)]));
    if (max_change < opt.tol) return sol;
  }
  throw no_convergence("solve: fixed point not reached, final update " +
                       std::to_string(sol.final_update));
}

LoopTrace loop_trace_values(const Grid2D& grid, const Solution2D& sol,
                            const LoopSample& loop) {
  std::size_t n = loop.points.size() - 1;  // last point repeats the first
  double mean = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    mean += interp(grid, sol.u, loop.points[k]);
  mean /= n;
  double var = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double d = interp(grid, sol.u, loop.points[k]) - mean;
    var += d * d;
  }
  return {mean, std::sqrt(var / n)};
}

GraphComparison compare_to_graph(const Model& model, const Grid2D& grid,
                                 const DomainMask& mask, const Solution2D& sol,
                                 const GraphSolution& gsol) {
  auto edge_value = [&](const EdgeFunction& e, double h) {
    double hc = std::clamp(h, e.h_nodes.front(), e.h_nodes.back());
    auto it = std::upper_bound(e.h_nodes.begin(), e.h_nodes.end(), hc);
    std::size_t k = std::clamp<std::size_t>((it - e.h_nodes.begin()), 1,
                                            e.h_nodes.size() - 1) - 1;
    double t = (hc - e.h_nodes[k]) / (e.h_nodes[k + 1] - e.h_nodes[k]);
    return e.u_values[k] + t * (e.u_values[k + 1] - e.u_values[k]);
  };

  GraphComparison cmp;
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      if (mask.at(i, j) != NodeClass::interior) continue;
      int branch = mask.component[grid.idx(i, j)];
      double h = model.H({grid.x1(i), grid.x2(j)});
      double err =
          std::abs(sol.u[grid.idx(i, j)] - edge_value(gsol.edges[branch - 1], h));
      cmp.per_branch[branch - 1] = std::max(cmp.per_branch[branch - 1], err);
    }
  cmp.overall = std::max({cmp.per_branch[0], cmp.per_branch[1], cmp.per_branch[2]});
  return cmp;
}

}  // namespace hjlab
