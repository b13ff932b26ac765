#include "hjlab/averaged.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hjlab {

namespace {

std::size_t lower_index(const std::vector<double>& grid, double v) {
  auto it = std::upper_bound(grid.begin(), grid.end(), v);
  std::size_t i = it - grid.begin();
  if (i == 0) return 0;
  if (i >= grid.size()) return grid.size() - 2;
  return i - 1;
}

double interp_log_h(const std::vector<double>& h_grid,
                    const std::vector<double>& vals, double h) {
  double hc = std::clamp(h, h_grid.front(), h_grid.back());
  std::size_t i = lower_index(h_grid, hc);
  double a = std::log(std::abs(h_grid[i]));
  double b = std::log(std::abs(h_grid[i + 1]));
  double t = (b == a) ? 0.0 : (std::log(std::abs(hc)) - a) / (b - a);
  return vals[i] + t * (vals[i + 1] - vals[i]);
}

}  // namespace

double EdgeTable::h_clamp() const {
  return branch == 2 ? h_grid.front() : h_grid.back();
}

double EdgeTable::h_outer() const {
  return branch == 2 ? h_grid.back() : h_grid.front();
}

double EdgeTable::period_at(double h) const {
  return interp_log_h(h_grid, periods, h);
}

double EdgeTable::length_at(double h) const {
  return interp_log_h(h_grid, lengths, h);
}

EdgeTable build_table(const LevelGeometry& geom, int branch,
                      TableBuildOptions opt) {
  const Model& m = geom.model();
  if (opt.h_count < 2 || opt.q_count < 2)
    throw table_error("build_table: h_count and q_count must be >= 2");

  double h_i = m.boundary_level(branch);
  double sign = branch == 2 ? 1.0 : -1.0;
  double mag_outer = std::abs(h_i);
  double mag_clamp = opt.h_clamp;
  if (mag_clamp >= mag_outer)
    throw table_error("build_table: h_clamp not below the boundary level");

  EdgeTable table;
  table.branch = branch;
  table.M_used = m.cfg.M_bound;
  table.nu = m.cfg.nu;

  // Geometric spacing in |h| toward the junction.
  std::vector<double> mags(opt.h_count);
  double ratio = std::pow(mag_clamp / mag_outer, 1.0 / (opt.h_count - 1));
  for (int k = 0; k < opt.h_count; ++k)
    mags[k] = mag_outer * std::pow(ratio, k);
  mags.back() = mag_clamp;
  table.h_grid.resize(opt.h_count);
  for (int k = 0; k < opt.h_count; ++k) {
    double h = sign * mags[k];
    table.h_grid[branch == 2 ? opt.h_count - 1 - k : k] = h;
  }

  // Loops first: they fix c0_measured, which the default q_max needs.
  table.periods.assign(opt.h_count, 0.0);
  table.lengths.assign(opt.h_count, 0.0);
  std::vector<LoopSample> loops(opt.h_count);
  std::string failure;
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (int k = 0; k < opt.h_count; ++k) {
    try {
      LoopSample loop = geom.trace_loop(branch, table.h_grid[k]);
      if (opt.seed_phase != 0.0) {
        // Rotate the sampled orbit by a fraction of the period; the
        // averages must not care where the seed sits on the loop.
        std::size_t n = loop.points.size() - 1;
        std::size_t shift = static_cast<std::size_t>(opt.seed_phase * n) % n;
        std::vector<Vec2> pts(loop.points.size());
        for (std::size_t j = 0; j < n; ++j) pts[j] = loop.points[(j + shift) % n];
        pts[n] = pts[0];
        loop.points = std::move(pts);
      }
      table.periods[k] = loop.period;
      table.lengths[k] = loop.length;
      loops[k] = std::move(loop);
    } catch (const std::exception& e) {
#pragma omp critical
      failure = e.what();
    }
  }
  if (!failure.empty()) throw table_error("build_table: " + failure);

  table.c0_measured = std::numeric_limits<double>::infinity();
  for (int k = 0; k < opt.h_count; ++k)
    table.c0_measured =
        std::min(table.c0_measured, table.lengths[k] / table.periods[k]);

  double q_max = opt.q_max > 0.0
                     ? opt.q_max
                     : 10.0 * (table.M_used + 1.0) / (table.nu * table.c0_measured);
  int q_count = opt.q_count | 1;  // odd: q = 0 is a grid node
  table.q_grid.resize(q_count);
  for (int k = 0; k < q_count; ++k)
    table.q_grid[k] = -q_max + 2.0 * q_max * k / (q_count - 1);
  table.q_grid[q_count / 2] = 0.0;

  table.values.assign(static_cast<std::size_t>(opt.h_count) * q_count, 0.0);
#pragma omp parallel for schedule(dynamic) if (opt.parallel)
  for (int k = 0; k < opt.h_count; ++k) {
    for (int j = 0; j < q_count; ++j) {
      double q = table.q_grid[j];
      table.value_at(k, j) = LevelGeometry::loop_average(
          loops[k], [&](Vec2 x) { return m.G(x, q * m.grad_H(x)); });
    }
  }
  return table;
}

double eval_gbar(const EdgeTable& table, double h, double q) {
  if (std::abs(q) > table.q_max() + 1e-12)
    throw table_error("eval_gbar: |q| beyond q_max, extrapolation refused");
  double qc = std::clamp(q, table.q_grid.front(), table.q_grid.back());
  double hc = std::clamp(h, table.h_grid.front(), table.h_grid.back());
  std::size_t ih = lower_index(table.h_grid, hc);
  std::size_t iq = lower_index(table.q_grid, qc);
  double th = (hc - table.h_grid[ih]) /
              (table.h_grid[ih + 1] - table.h_grid[ih]);
  double tq = (qc - table.q_grid[iq]) /
              (table.q_grid[iq + 1] - table.q_grid[iq]);
  double v00 = table.value_at(ih, iq), v01 = table.value_at(ih, iq + 1);
  double v10 = table.value_at(ih + 1, iq), v11 = table.value_at(ih + 1, iq + 1);
  return (1 - th) * ((1 - tq) * v00 + tq * v01) +
         th * ((1 - tq) * v10 + tq * v11);
}

double eval_gbar_extended(const EdgeTable& table, double h, double q) {
  double qm = table.q_max();
  if (std::abs(q) <= qm) return eval_gbar(table, h, q);
  double edge = std::copysign(qm, q);
  return eval_gbar(table, h, edge) +
         table.nu * table.c0_measured * (std::abs(q) - qm);
}

MinOverQ min_over_q(const EdgeTable& table, double h) {
  double a = table.q_grid.front(), b = table.q_grid.back();
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval_gbar(table, h, c), fd = eval_gbar(table, h, d);
  while (b - a > 1e-11 * std::max(1.0, table.q_max())) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval_gbar(table, h, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval_gbar(table, h, d);
    }
  }
  double qstar = 0.5 * (a + b);
  double val = eval_gbar(table, h, qstar);
  double dq = table.q_grid[1] - table.q_grid[0];
  if (std::abs(qstar) > table.q_max() - dq)
    throw table_error("min_over_q: minimizer at the q range boundary, q_max too small");
  return {val, qstar};
}

ValidationReport check_table_properties(const EdgeTable& table,
                                        const Model& model) {
  ValidationReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };
  std::size_t nh = table.h_grid.size(), nq = table.q_grid.size();

  {
    double worst = 0.0;
    std::size_t wi = 0, wj = 0;
    for (std::size_t i = 0; i < nh; ++i)
      for (std::size_t j = 1; j + 1 < nq; ++j) {
        // grid is uniform in q, so the midpoint test is nodal
        double defect = table.value_at(i, j) -
                        0.5 * (table.value_at(i, j - 1) + table.value_at(i, j + 1));
        if (defect > worst) {
          worst = defect;
          wi = i;
          wj = j;
        }
      }
    std::ostringstream d;
    d << "max defect " << worst << " at h = " << table.h_grid[wi]
      << ", q = " << table.q_grid[wj];
    add("rowwise convexity in q", worst <= 1e-8, d.str());
  }

  {
    double worst = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nh; ++i)
      for (std::size_t j = 0; j < nq; ++j) {
        double slack = table.value_at(i, j) -
                       (table.nu * table.c0_measured * std::abs(table.q_grid[j]) -
                        table.M_used);
        worst = std::min(worst, slack);
      }
    std::ostringstream d;
    d << "min slack of Gbar >= nu c0 |q| - M: " << worst;
    add("coercivity inequality", worst >= -1e-9, d.str());
  }

  {
    // Joint limit toward (0, 0) along the grid.
    double g00 = model.G({0.0, 0.0}, {0.0, 0.0});
    std::size_t i0 = table.branch == 2 ? 0 : nh - 1;
    double v = eval_gbar(table, table.h_grid[i0], 0.0);
    std::ostringstream d;
    d << "Gbar(h_clamp, 0) = " << v << ", G(0,0) = " << g00;
    add("junction limit Gbar -> G(0,0)", std::abs(v - g00) <= 0.05, d.str());
  }

  {
    // Discrete continuity in h away from the junction: neighbor jumps
    // must shrink relative to the coarse scale of the table.
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < nh; ++i)
      for (std::size_t j = 0; j < nq; ++j)
        worst = std::max(
            worst, std::abs(table.value_at(i + 1, j) - table.value_at(i, j)));
    double scale = std::abs(eval_gbar(table, table.h_outer(), table.q_max()));
    std::ostringstream d;
    d << "max neighbor jump " << worst << " vs scale " << scale;
    add("continuity in h", worst <= 0.35 * std::max(1.0, scale), d.str());
  }

  return rep;
}

void save_table_csv(const EdgeTable& table, const std::string& csv_path,
                    const std::string& header_path,
                    const std::string& config_hash) {
  std::ofstream hdr(header_path);
  if (!hdr) throw table_error("save_table_csv: cannot open " + header_path);
  hdr.precision(17);
  hdr << "# config_hash=" << config_hash << "\n";
  hdr << "branch=" << table.branch << "\n";
  hdr << "c0_measured=" << table.c0_measured << "\n";
  hdr << "M_used=" << table.M_used << "\n";
  hdr << "nu=" << table.nu << "\n";
  hdr << "h_count=" << table.h_grid.size() << "\n";
  hdr << "q_count=" << table.q_grid.size() << "\n";
  for (std::size_t i = 0; i < table.h_grid.size(); ++i)
    hdr << "row," << table.h_grid[i] << "," << table.periods[i] << ","
        << table.lengths[i] << "\n";

  std::ofstream csv(csv_path);
  if (!csv) throw table_error("save_table_csv: cannot open " + csv_path);
  csv.precision(17);
  csv << "# config_hash=" << config_hash << "\n";
  csv << "branch,h,q,value\n";
  for (std::size_t i = 0; i < table.h_grid.size(); ++i)
    for (std::size_t j = 0; j < table.q_grid.size(); ++j)
      csv << table.branch << "," << table.h_grid[i] << "," << table.q_grid[j]
          << "," << table.value_at(i, j) << "\n";
}

EdgeTable load_table_csv(const std::string& csv_path,
                         const std::string& header_path) {
  EdgeTable table;
  std::ifstream hdr(header_path);
  if (!hdr) throw table_error("load_table_csv: cannot open " + header_path);
  std::string line;
  std::size_t nh = 0, nq = 0;
  while (std::getline(hdr, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("row,", 0) == 0) {
      std::istringstream ss(line.substr(4));
      double h, T, L;
      char comma;
      ss >> h >> comma >> T >> comma >> L;
      table.h_grid.push_back(h);
      table.periods.push_back(T);
      table.lengths.push_back(L);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = line.substr(0, eq);
    double val = std::stod(line.substr(eq + 1));
    if (key == "branch") table.branch = static_cast<int>(val);
    else if (key == "c0_measured") table.c0_measured = val;
    else if (key == "M_used") table.M_used = val;
    else if (key == "nu") table.nu = val;
    else if (key == "h_count") nh = static_cast<std::size_t>(val);
    else if (key == "q_count") nq = static_cast<std::size_t>(val);
  }
  if (table.h_grid.size() != nh)
    throw table_error("load_table_csv: header row count mismatch");

  std::ifstream csv(csv_path);
  if (!csv) throw table_error("load_table_csv: cannot open " + csv_path);
  std::vector<double> qs;
  std::vector<double> vals;
  while (std::getline(csv, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'b') continue;
    std::istringstream ss(line);
    std::string tok;
    double row[4];
    for (int k = 0; k < 4; ++k) {
      std::getline(ss, tok, ',');
      row[k] = std::stod(tok);
    }
    if (qs.size() < nq) qs.push_back(row[2]);
    vals.push_back(row[3]);
  }
  table.q_grid = std::move(qs);
  table.values = std::move(vals);
  if (table.values.size() != nh * nq)
    throw table_error("load_table_csv: value count mismatch");
  return table;
}

}  // namespace hjlab
