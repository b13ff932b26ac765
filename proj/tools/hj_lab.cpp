// Command-line laboratory around the hjlab library: validates the model,
// traces level loops, tabulates the averaged Hamiltonian, solves the
// graph limit problem and the 2-D problem, and runs the epsilon sweep.
//
// Exit codes: 0 success, 2 validation failure, 3 numerical non-convergence.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "hjlab/pipeline.hpp"

using namespace hjlab;
namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 2;
constexpr int kNoConvergence = 3;

void print_report(const ValidationReport& rep) {
  std::cout << rep.to_string();
}

int cmd_validate_model(Pipeline& pipe) {
  ValidationReport rep = pipe.model().validate_assumptions();
  print_report(rep);
  return rep.all_pass() ? kOk : kValidationFailure;
}

int cmd_trace_levels(Pipeline& pipe, const std::string& points_dir) {
  fs::create_directories(pipe.out_dir());
  LevelGeometry geom(pipe.model());
  std::ofstream out(pipe.out_dir() + "/trace_levels.csv");
  out.precision(17);
  out << "# config_hash=" << pipe.hash() << "\n";
  out << "branch,h,period,length\n";
  const RunConfig& cfg = pipe.cfg();
  for (int branch = 1; branch <= 3; ++branch) {
    double outer = pipe.model().boundary_level(branch);
    double sign = branch == 2 ? 1.0 : -1.0;
    for (int k = 0; k < cfg.table_h_count; ++k) {
      double t = static_cast<double>(k) / (cfg.table_h_count - 1);
      double mag = std::abs(outer) *
                   std::pow(cfg.table_h_clamp / std::abs(outer), t);
      LoopSample loop = geom.trace_loop(branch, sign * mag);
      out << branch << "," << loop.h << "," << loop.period << ","
          << loop.length << "\n";
      if (!points_dir.empty()) {
        fs::create_directories(points_dir);
        std::ostringstream name;
        name << points_dir << "/loop_b" << branch << "_h" << loop.h << ".csv";
        std::ofstream pts(name.str());
        pts.precision(17);
        pts << "t,x1,x2\n";
        for (std::size_t j = 0; j < loop.points.size(); ++j)
          pts << loop.times[j] << "," << loop.points[j].x1 << ","
              << loop.points[j].x2 << "\n";
      }
    }
  }
  std::cout << "wrote " << pipe.out_dir() << "/trace_levels.csv\n";
  return kOk;
}

int cmd_build_gbar(Pipeline& pipe) {
  fs::create_directories(pipe.out_dir());
  const auto& tabs = pipe.tables();
  for (int i = 0; i < 3; ++i) {
    std::string base = pipe.out_dir() + "/gbar_edge" + std::to_string(i + 1);
    save_table_csv(tabs[i], base + ".csv", base + ".hdr", pipe.hash());
    std::cout << "edge " << i + 1 << ": " << tabs[i].h_grid.size() << " x "
              << tabs[i].q_grid.size() << " table, c0_measured = "
              << tabs[i].c0_measured << "\n";
  }
  return kOk;
}

int cmd_check_gbar(Pipeline& pipe) {
  bool ok = true;
  for (int i = 0; i < 3; ++i) {
    std::string base = pipe.out_dir() + "/gbar_edge" + std::to_string(i + 1);
    EdgeTable t = load_table_csv(base + ".csv", base + ".hdr");
    ValidationReport rep = check_table_properties(t, pipe.model());
    std::cout << "edge " << i + 1 << ":\n";
    print_report(rep);
    ok = ok && rep.all_pass();
  }
  return ok ? kOk : kValidationFailure;
}

int cmd_solve_graph(Pipeline& pipe) {
  GraphSolution sol = pipe.solve_graph();
  fs::create_directories(pipe.out_dir());
  std::ofstream out(pipe.out_dir() + "/graph_solution.csv");
  out.precision(17);
  out << "# config_hash=" << pipe.hash() << "\n";
  out << "branch,h,u\n";
  for (const auto& e : sol.edges)
    for (std::size_t k = 0; k < e.h_nodes.size(); ++k)
      out << e.branch << "," << e.h_nodes[k] << "," << e.u_values[k] << "\n";
  GraphSolveOptions gopt;
  gopt.n_nodes = pipe.cfg().graph_nodes;
  gopt.lambda = pipe.cfg().lambda;
  std::cout << "d0 = " << sol.d0 << ", residuals =";
  for (int i = 0; i < 3; ++i)
    std::cout << " " << residual(sol.edges[i], pipe.tables()[i], gopt);
  std::cout << "\n";
  return kOk;
}

int cmd_solve_2d(Pipeline& pipe, double epsilon, int grid_n, double tol,
                 int controls, const std::string& mode) {
  Solve2DOptions opt;
  opt.epsilon = epsilon;
  opt.tol = tol;
  opt.controls = controls;
  opt.mode = mode == "jacobi" ? SweepMode::jacobi_omp : SweepMode::serial_gs;
  Grid2D grid = Grid2D::make(pipe.model(), grid_n, grid_n);
  DomainMask mask = build_mask(grid, pipe.model());
  Solution2D sol = solve_2d(pipe.model(), grid, mask, opt);

  fs::create_directories(pipe.out_dir());
  std::ostringstream name;
  name << pipe.out_dir() << "/u2d_eps" << epsilon << ".csv";
  std::ofstream out(name.str());
  out.precision(17);
  out << "# config_hash=" << pipe.hash() << "\n";
  out << "# nx=" << grid.nx << " ny=" << grid.ny << "\n";
  out << "x1,x2,H,u\n";
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) {
      out << grid.x1(i) << "," << grid.x2(j) << ","
          << pipe.model().H({grid.x1(i), grid.x2(j)}) << ",";
      if (mask.at(i, j) != NodeClass::exterior)
        out << sol.u[grid.idx(i, j)];
      else
        out << "nan";
      out << "\n";
    }
  double sup = 0.0;
  for (double v : sol.u) sup = std::max(sup, std::abs(v));
  std::cout << "{\"epsilon\":" << epsilon << ",\"iterations\":"
            << sol.iterations << ",\"final_update\":" << sol.final_update
            << ",\"sup_u\":" << sup << "}\n";
  return kOk;
}

int cmd_converge(Pipeline& pipe) {
  ConvergenceResult res = pipe.converge();
  std::cout << "epsilon  overall  iterations  seconds\n";
  for (const auto& r : res.rows)
    std::cout << r.epsilon << "  " << r.overall << "  " << r.iterations
              << "  " << r.seconds << "\n";
  std::cout << "artifacts under " << pipe.out_dir() << "\n";
  return kOk;
}

int cmd_lemma_suite(Pipeline& pipe) {
  ValidationReport rep = pipe.lemma_suite();
  print_report(rep);
  return rep.all_pass() ? kOk : kValidationFailure;
}

int cmd_emit_plots(Pipeline& pipe) {
  for (const auto& f : pipe.emit_plots())
    std::cout << "wrote " << pipe.out_dir() << "/" << f << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Singular-perturbation Hamilton-Jacobi laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("-c,--config", config_path, "TOML-syntax config file");

  auto* validate = app.add_subcommand("validate-model", "Audit the model assumptions");
  std::string points_dir;
  auto* trace = app.add_subcommand("trace-levels", "Trace level loops, emit periods and lengths");
  trace->add_option("--points-dir", points_dir, "Also dump per-loop point CSVs here");
  auto* build = app.add_subcommand("build-gbar", "Tabulate the averaged Hamiltonians");
  auto* check = app.add_subcommand("check-gbar", "Reload persisted tables and verify their properties");
  auto* graph = app.add_subcommand("solve-graph", "Solve the limit problem on the graph");
  auto* s2d = app.add_subcommand("solve-2d", "Solve the 2-D problem at one epsilon");
  double epsilon = 0.1, tol = 1e-8;
  int grid_n = 0, controls = 0;
  std::string mode;
  s2d->add_option("--epsilon", epsilon, "Perturbation scale")->capture_default_str();
  s2d->add_option("--grid", grid_n, "Grid nodes per side (0: from config)");
  s2d->add_option("--tol", tol, "Fixed-point tolerance")->capture_default_str();
  s2d->add_option("--controls", controls, "Control directions (0: from config)");
  s2d->add_option("--mode", mode, "Sweep mode: serial or jacobi");
  auto* conv = app.add_subcommand("converge", "Full epsilon sweep against the graph solution");
  auto* lemmas = app.add_subcommand("lemma-suite", "Run every lemma-level numerical check");
  auto* plots = app.add_subcommand("emit-plots", "Write the SVG plots for a completed run");

  CLI11_PARSE(app, argc, argv);

  try {
    Pipeline pipe(load_run_config(config_path));
    if (validate->parsed()) return cmd_validate_model(pipe);
    if (trace->parsed()) return cmd_trace_levels(pipe, points_dir);
    if (build->parsed()) return cmd_build_gbar(pipe);
    if (check->parsed()) return cmd_check_gbar(pipe);
    if (graph->parsed()) return cmd_solve_graph(pipe);
    if (s2d->parsed())
      return cmd_solve_2d(pipe, epsilon,
                          grid_n > 0 ? grid_n : pipe.cfg().grid_n, tol,
                          controls > 0 ? controls : pipe.cfg().controls,
                          mode.empty() ? pipe.cfg().sweep_mode : mode);
    if (conv->parsed()) return cmd_converge(pipe);
    if (lemmas->parsed()) return cmd_lemma_suite(pipe);
    if (plots->parsed()) return cmd_emit_plots(pipe);
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const graph_error& e) {
    std::cerr << "graph solve error: " << e.what() << "\n";
    return kValidationFailure;
  } catch (const no_convergence& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const epsilon_too_small& e) {
    std::cerr << "non-convergence: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const level_error& e) {
    std::cerr << "level tracing failed: " << e.what() << "\n";
    return kNoConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoConvergence;
  }
  return kOk;
}
