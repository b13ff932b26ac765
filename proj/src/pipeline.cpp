#include "hjlab/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "hjlab/svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hjlab {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

std::ofstream open_artifact(const std::string& path, const std::string& hash) {
  std::ofstream out(path);
  if (!out) throw pipeline_error("cannot open output file " + path);
  out.precision(17);
  out << "# config_hash=" << hash << "\n";
  return out;
}

}  // namespace

void RunManifest::add_output(const std::string& rel_path) {
  if (std::find(outputs.begin(), outputs.end(), rel_path) == outputs.end())
    outputs.push_back(rel_path);
}

void RunManifest::save(const std::string& path) const {
  json j;
  j["config_hash"] = config_hash;
  j["epsilons"] = epsilons;
  j["grid_n"] = grid_n;
  j["tol_2d"] = tol_2d;
  j["graph_nodes"] = graph_nodes;
  j["dir"] = dir;
  j["outputs"] = outputs;
  json t = json::array();
  for (const auto& s : timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  j["timings"] = t;
  std::ofstream out(path);
  if (!out) throw pipeline_error("cannot write manifest " + path);
  out << j.dump(2) << "\n";
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pipeline_error("missing inputs: manifest not found at " + path);
  json j;
  in >> j;
  RunManifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.epsilons = j.at("epsilons").get<std::vector<double>>();
  m.grid_n = j.at("grid_n").get<int>();
  m.tol_2d = j.at("tol_2d").get<double>();
  m.graph_nodes = j.at("graph_nodes").get<int>();
  m.dir = j.at("dir").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  for (const auto& t : j.at("timings"))
    m.timings.push_back({t.at("stage").get<std::string>(),
                         t.at("seconds").get<double>()});
  return m;
}

std::array<double, 3> probe_levels(const Model& model) {
  return {0.5 * model.boundary_level(1), 0.5 * model.boundary_level(2),
          0.5 * model.boundary_level(3)};
}

Pipeline::Pipeline(RunConfig cfg)
    : cfg_(std::move(cfg)), hash_(config_hash(cfg_)), model_(make_model(cfg_)) {}

std::string Pipeline::out_dir() const { return cfg_.out_dir + "/" + hash_; }

const std::array<EdgeTable, 3>& Pipeline::tables() {
  if (tables_built_) return tables_;
  LevelGeometry geom(model_);
  TableBuildOptions opt;
  opt.h_count = cfg_.table_h_count;
  opt.q_count = cfg_.table_q_count;
  opt.q_max = cfg_.table_q_max;
  opt.h_clamp = cfg_.table_h_clamp;
  for (int i = 0; i < 3; ++i) tables_[i] = build_table(geom, i + 1, opt);
  tables_built_ = true;
  return tables_;
}

GraphSolution Pipeline::solve_graph() {
  GraphSolveOptions opt;
  opt.n_nodes = cfg_.graph_nodes;
  opt.lambda = cfg_.lambda;
  return assemble_solution(tables(), cfg_.boundary_d, opt);
}

ConvergenceResult Pipeline::converge() {
  fs::create_directories(out_dir());
  ConvergenceResult res;
  res.manifest.config_hash = hash_;
  res.manifest.epsilons = cfg_.epsilons;
  res.manifest.grid_n = cfg_.grid_n;
  res.manifest.tol_2d = cfg_.tol_2d;
  res.manifest.graph_nodes = cfg_.graph_nodes;
  res.manifest.dir = out_dir();
  auto stage = [&](const std::string& name, double t0) {
    res.manifest.timings.push_back({name, now_seconds() - t0});
  };

  double t0 = now_seconds();
  const auto& tabs = tables();
  for (int i = 0; i < 3; ++i) {
    std::string base = "gbar_edge" + std::to_string(i + 1);
    save_table_csv(tabs[i], out_dir() + "/" + base + ".csv",
                   out_dir() + "/" + base + ".hdr", hash_);
    res.manifest.add_output(base + ".csv");
    res.manifest.add_output(base + ".hdr");
  }
  stage("tables", t0);

  t0 = now_seconds();
  res.graph = solve_graph();
  {
    auto out = open_artifact(out_dir() + "/graph_solution.csv", hash_);
    out << "branch,h,u\n";
    for (const auto& e : res.graph.edges)
      for (std::size_t k = 0; k < e.h_nodes.size(); ++k)
        out << e.branch << "," << e.h_nodes[k] << "," << e.u_values[k] << "\n";
    res.manifest.add_output("graph_solution.csv");
  }
  stage("graph", t0);

  t0 = now_seconds();
  LevelGeometry geom(model_);
  std::array<double, 3> probes = probe_levels(model_);
  std::array<LoopSample, 3> probe_loops;
  for (int i = 0; i < 3; ++i) probe_loops[i] = geom.trace_loop(i + 1, probes[i]);
  stage("probe-loops", t0);

  Grid2D grid = Grid2D::make(model_, cfg_.grid_n, cfg_.grid_n);
  DomainMask mask = build_mask(grid, model_);
  double M = model_.cfg.M_bound;
  double lam = model_.cfg.lambda;
  // sup |g| = 0, so C = sup |G(., 0)| = sup f = M.
  res.apriori_bound = std::max({M, M / lam, M / (lam * lam)});

  std::vector<double> eps_sorted = cfg_.epsilons;
  std::sort(eps_sorted.rbegin(), eps_sorted.rend());
  for (double eps : eps_sorted) {
    t0 = now_seconds();
    Solve2DOptions sopt;
    sopt.epsilon = eps;
    sopt.tol = cfg_.tol_2d;
    sopt.controls = cfg_.controls;
    sopt.mode = cfg_.sweep_mode == "jacobi" ? SweepMode::jacobi_omp
                                            : SweepMode::serial_gs;
    Solution2D sol;
    try {
      sol = solve_2d(model_, grid, mask, sopt);
    } catch (const hj2d_error& e) {
      throw pipeline_error("stage solve-2d (eps=" + std::to_string(eps) +
                           "): " + e.what());
    }

    ConvergenceRow row;
    row.epsilon = eps;
    GraphComparison cmp = compare_to_graph(model_, grid, mask, sol, res.graph);
    row.sup_err = cmp.per_branch;
    row.overall = cmp.overall;
    for (int i = 0; i < 3; ++i)
      row.loop_std[i] = loop_trace_values(grid, sol, probe_loops[i]).stdev;
    row.iterations = sol.iterations;
    row.sup_u = sol.sup_u;
    row.seconds = now_seconds() - t0;
    res.rows.push_back(row);

    std::ostringstream name;
    name << "u2d_eps" << eps << ".csv";
    auto out = open_artifact(out_dir() + "/" + name.str(), hash_);
    out << "# nx=" << grid.nx << " ny=" << grid.ny << "\n";
    out << "x1,x2,H,u\n";
    for (int j = 0; j < grid.ny; ++j)
      for (int i = 0; i < grid.nx; ++i) {
        double x1 = grid.x1(i), x2 = grid.x2(j);
        bool in = mask.at(i, j) != NodeClass::exterior;
        out << x1 << "," << x2 << "," << model_.H({x1, x2}) << ",";
        if (in)
          out << sol.u[grid.idx(i, j)];
        else
          out << "nan";
        out << "\n";
      }
    res.manifest.add_output(name.str());
    stage("solve-2d eps=" + std::to_string(eps), t0);
  }

  {
    auto out = open_artifact(out_dir() + "/convergence.csv", hash_);
    out << "epsilon,sup_err_1,sup_err_2,sup_err_3,overall,"
           "loop_std_1,loop_std_2,loop_std_3,iterations,seconds\n";
    for (const auto& r : res.rows)
      out << r.epsilon << "," << r.sup_err[0] << "," << r.sup_err[1] << ","
          << r.sup_err[2] << "," << r.overall << "," << r.loop_std[0] << ","
          << r.loop_std[1] << "," << r.loop_std[2] << "," << r.iterations
          << "," << r.seconds << "\n";
    res.manifest.add_output("convergence.csv");
  }
  res.manifest.save(out_dir() + "/manifest.json");
  res.manifest.add_output("manifest.json");
  res.manifest.save(out_dir() + "/manifest.json");
  return res;
}

ValidationReport Pipeline::lemma_suite() {
  ValidationReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };
  LevelGeometry geom(model_);
  std::mt19937 rng(20240817u);

  // (a) logarithmic period growth. Each saddle passage contributes
  // (1/2) log(1/|h|); the middle edge's loops pass the saddle twice.
  for (int branch = 1; branch <= 3; ++branch) {
    double coeff = branch == 2 ? 1.0 : 0.5;
    double sign = branch == 2 ? 1.0 : -1.0;
    std::vector<double> resid;
    for (int k = 0; k < 9; ++k) {
      double mag = std::pow(10.0, -6.0 + 4.0 * k / 8.0);
      LoopSample loop = geom.trace_loop(branch, sign * mag);
      resid.push_back(loop.period - coeff * std::log(1.0 / mag));
    }
    double K = 0.0;
    for (double r : resid) K += r;
    K /= resid.size();
    double worst = 0.0;
    for (double r : resid) worst = std::max(worst, std::abs(r - K));
    std::ostringstream d;
    d << "fitted constant " << K << ", max deviation " << worst;
    add("period growth, branch " + std::to_string(branch),
        worst <= 0.15 * std::abs(K), d.str());
  }

  double c0 = model_.measure_c0();

  {  // (b) controlled descent beats 2 sqrt(h) / (c0 mu) at random starts.
    const double mu = 0.5, eps = 0.1;
    std::uniform_real_distribution<double> ux1(-1.0, 1.0), ux2(0.05, 1.0);
    int violations = 0, tried = 0;
    double worst_ratio = 0.0;
    while (tried < 50) {
      Vec2 x{ux1(rng), ux2(rng)};
      double h = model_.H(x);
      if (h <= 1e-3 || h >= model_.cfg.h2) continue;
      ++tried;
      CrossingRecord rec = geom.controlled_crossing_time(x, eps, mu, -1, 0.0);
      double bound = 2.0 * std::sqrt(h) / (c0 * mu);
      worst_ratio = std::max(worst_ratio, rec.elapsed / bound);
      if (rec.elapsed > bound) ++violations;
    }
    std::ostringstream d;
    d << violations << " violations, worst time/bound ratio " << worst_ratio;
    add("controlled crossing bound", violations == 0, d.str());
  }

  {  // (c) free transit through the annulus takes at least
     //     log(kappa / r) - log(2) / 2.
    const double r = 0.12;
    double bound = std::log(model_.ham.kappa / r) - 0.5 * std::log(2.0);
    std::uniform_real_distribution<double> ux1(-0.85, 0.85), uh(-0.9, 0.9);
    int violations = 0, tried = 0;
    double worst = std::numeric_limits<double>::infinity();
    while (tried < 50) {
      double x1 = ux1(rng);
      double h = uh(rng) * r * r;
      double x2sq = h - model_.ham.well_potential(x1);
      if (x2sq <= 0.0) continue;
      Vec2 x{x1, std::sqrt(x2sq)};
      if (x.norm() <= 1.05 * r) continue;
      ++tried;
      double t = geom.free_transit_through_annulus(x, r);
      worst = std::min(worst, t);
      if (t < bound) ++violations;
    }
    std::ostringstream d;
    d << violations << " violations, min transit " << worst << " vs bound "
      << bound;
    add("annulus transit lower bound", violations == 0, d.str());
  }

  {  // (d) arclength of a loop inside B_r never exceeds 4r.
    int violations = 0;
    double worst_ratio = 0.0;
    for (int branch = 1; branch <= 3; ++branch) {
      double sign = branch == 2 ? 1.0 : -1.0;
      for (int a = 0; a < 10; ++a) {
        double mag = std::pow(10.0, -6.0 + 4.0 * a / 9.0);
        LoopSample loop = geom.trace_loop(branch, sign * mag);
        for (int b = 0; b < 10; ++b) {
          double r = 0.05 + (0.45 - 0.05) * b / 9.0;
          double len = 0.0;
          for (std::size_t k = 0; k + 1 < loop.points.size(); ++k)
            if (loop.points[k].norm() < r && loop.points[k + 1].norm() < r)
              len += (loop.points[k + 1] - loop.points[k]).norm();
          worst_ratio = std::max(worst_ratio, len / (4.0 * r));
          if (len > 4.0 * r) ++violations;
        }
      }
    }
    std::ostringstream d;
    d << violations << " violations, worst length/(4r) ratio " << worst_ratio;
    add("loop arclength inside B_r", violations == 0, d.str());
  }

  {  // (e) min_q Gbar at the innermost level approaches G(0, 0).
    double g00 = model_.G({0.0, 0.0}, {0.0, 0.0});
    bool ok = true;
    std::ostringstream d;
    for (int i = 0; i < 3; ++i) {
      const EdgeTable& t = tables()[i];
      MinOverQ m = min_over_q(t, t.h_clamp());
      d << "branch " << i + 1 << ": " << m.value << " ";
      if (std::abs(m.value - g00) > 0.05) ok = false;
    }
    d << "vs G(0,0) = " << g00;
    add("averaged minimum at the junction", ok, d.str());
  }

  return rep;
}

std::vector<std::string> Pipeline::emit_plots() {
  RunManifest manifest = RunManifest::load(out_dir() + "/manifest.json");
  if (manifest.epsilons.empty())
    throw pipeline_error("missing inputs: epsilon list is empty, nothing to plot");
  if (manifest.epsilons.size() == 1)
    std::cerr << "warning: single epsilon, emitting a degenerate one-point plot\n";

  std::vector<std::string> files;

  {  // error vs epsilon, log-log
    std::ifstream in(out_dir() + "/convergence.csv");
    if (!in)
      throw pipeline_error("missing inputs: convergence.csv not found; run converge first");
    std::string line;
    PlotSeries overall{"overall", {}, {}};
    std::array<PlotSeries, 3> per{PlotSeries{"edge 1", {}, {}},
                                  PlotSeries{"edge 2", {}, {}},
                                  PlotSeries{"edge 3", {}, {}}};
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'e') continue;
      std::istringstream ss(line);
      std::vector<double> cols;
      std::string tok;
      while (std::getline(ss, tok, ',')) cols.push_back(std::stod(tok));
      overall.x.push_back(cols[0]);
      overall.y.push_back(cols[4]);
      for (int i = 0; i < 3; ++i) {
        per[i].x.push_back(cols[0]);
        per[i].y.push_back(cols[1 + i]);
      }
    }
    PlotOptions opt;
    opt.title = "sup error vs epsilon";
    opt.x_label = "epsilon";
    opt.y_label = "sup |u_eps - u o H|";
    opt.log_x = true;
    opt.log_y = true;
    write_line_plot(out_dir() + "/plot_error_vs_eps.svg",
                    {overall, per[0], per[1], per[2]}, opt);
    files.push_back("plot_error_vs_eps.svg");
  }

  {  // periods vs log(1/|h|)
    std::vector<PlotSeries> series;
    for (int i = 0; i < 3; ++i) {
      const EdgeTable& t = tables()[i];
      PlotSeries s{"edge " + std::to_string(i + 1), {}, {}};
      for (std::size_t k = 0; k < t.h_grid.size(); ++k) {
        s.x.push_back(std::log(1.0 / std::abs(t.h_grid[k])));
        s.y.push_back(t.periods[k]);
      }
      series.push_back(std::move(s));
    }
    PlotOptions opt;
    opt.title = "loop periods";
    opt.x_label = "log(1/|h|)";
    opt.y_label = "T_i(h)";
    write_line_plot(out_dir() + "/plot_periods.svg", series, opt);
    files.push_back("plot_periods.svg");
  }

  {  // Gbar q-profiles near the junction and at the outer level
    std::vector<PlotSeries> series;
    for (int i = 0; i < 3; ++i) {
      const EdgeTable& t = tables()[i];
      for (bool inner : {true, false}) {
        double h = inner ? t.h_clamp() : t.h_outer();
        std::ostringstream lbl;
        lbl << "edge " << i + 1 << (inner ? " inner" : " outer");
        PlotSeries s{lbl.str(), {}, {}};
        for (double q : t.q_grid) {
          s.x.push_back(q);
          s.y.push_back(eval_gbar(t, h, q));
        }
        series.push_back(std::move(s));
      }
    }
    PlotOptions opt;
    opt.title = "averaged Hamiltonian profiles";
    opt.x_label = "q";
    opt.y_label = "Gbar_i(h, q)";
    write_line_plot(out_dir() + "/plot_gbar_profiles.svg", series, opt);
    files.push_back("plot_gbar_profiles.svg");
  }

  {  // heatmap of the smallest-epsilon solution with loop overlays
    double eps = *std::min_element(manifest.epsilons.begin(),
                                   manifest.epsilons.end());
    std::ostringstream name;
    name << "u2d_eps" << eps << ".csv";
    std::ifstream in(out_dir() + "/" + name.str());
    if (!in)
      throw pipeline_error("missing inputs: " + name.str() + " not found");
    std::string line;
    int nx = 0, ny = 0;
    std::vector<double> u;
    while (std::getline(in, line)) {
      if (line.rfind("# nx=", 0) == 0) {
        std::sscanf(line.c_str(), "# nx=%d ny=%d", &nx, &ny);
        continue;
      }
      if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
      auto last = line.rfind(',');
      std::string tok = line.substr(last + 1);
      u.push_back(tok == "nan" ? std::numeric_limits<double>::quiet_NaN()
                               : std::stod(tok));
    }
    if (nx <= 0 || u.size() != static_cast<std::size_t>(nx) * ny)
      throw pipeline_error("missing inputs: corrupt nodal CSV " + name.str());

    LevelGeometry geom(model_);
    std::vector<std::vector<Vec2>> overlays;
    for (int i = 0; i < 3; ++i)
      overlays.push_back(geom.trace_loop(i + 1, probe_levels(model_)[i]).points);
    std::ostringstream title;
    title << "u at epsilon = " << eps;
    write_heatmap(out_dir() + "/plot_u2d.svg", nx, ny, u,
                  model_.bounding_box(), overlays, title.str());
    files.push_back("plot_u2d.svg");
  }

  for (const auto& f : files) manifest.add_output(f);
  manifest.save(out_dir() + "/manifest.json");
  return files;
}

}  // namespace hjlab
