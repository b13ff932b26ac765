// Timing comparison of the two 2-D sweep modes: serial Gauss-Seidel with
// alternating orders versus the OpenMP Jacobi kernel.

#include <chrono>
#include <iostream>

#include "hjlab/hj2d.hpp"
#include "hjlab/config.hpp"

using namespace hjlab;

int main(int argc, char** argv) {
  int n = argc > 1 ? std::atoi(argv[1]) : 151;
  double eps = argc > 2 ? std::atof(argv[2]) : 0.2;

  RunConfig cfg;
  Model model = make_model(cfg);
  Grid2D grid = Grid2D::make(model, n, n);
  DomainMask mask = build_mask(grid, model);

  auto run = [&](SweepMode mode, const char* name) {
    Solve2DOptions opt;
    opt.epsilon = eps;
    opt.tol = 1e-7;
    opt.mode = mode;
    auto t0 = std::chrono::steady_clock::now();
    Solution2D sol = solve_2d(model, grid, mask, opt);
    double secs = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - t0)
                      .count();
    std::cout << name << ": " << secs << " s, " << sol.iterations
              << " iterations, sup|u| = " << sol.sup_u << "\n";
    return sol;
  };

  std::cout << "grid " << n << "x" << n << ", epsilon " << eps << "\n";
  Solution2D a = run(SweepMode::serial_gs, "serial gauss-seidel");
  Solution2D b = run(SweepMode::jacobi_omp, "jacobi (openmp)   ");

  double diff = 0.0;
  for (std::size_t k = 0; k < a.u.size(); ++k)
    diff = std::max(diff, std::abs(a.u[k] - b.u[k]));
  std::cout << "max nodal difference between modes: " << diff << "\n";
  return 0;
}
