#include "hjlab/graph_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

namespace hjlab {

namespace {

// One edge's discretization: the q-profile of Gbar_i(h, .) interpolated
// in h at every node, so the Godunov flux works on the same piecewise
// linear convex function the table defines.
struct EdgeStencil {
  std::vector<double> h_nodes;             // ascending
  std::vector<double> q_grid;              // shared with the table
  std::vector<std::vector<double>> rows;   // rows[j][k] = Gbar(h_j, q_k)
  std::vector<double> qstar;               // nodal argmin of the q profile
  double tail_slope = 0.0;                 // nu * c0_measured
  double lf_alpha = 0.0;                   // max profile slope, for LF
  double M = 0.0;

  double ham(std::size_t j, double p) const {
    const auto& row = rows[j];
    if (p <= q_grid.front())
      return row.front() + tail_slope * (q_grid.front() - p);
    if (p >= q_grid.back())
      return row.back() + tail_slope * (p - q_grid.back());
    auto it = std::upper_bound(q_grid.begin(), q_grid.end(), p);
    std::size_t k = (it - q_grid.begin()) - 1;
    double t = (p - q_grid[k]) / (q_grid[k + 1] - q_grid[k]);
    return row[k] + t * (row[k + 1] - row[k]);
  }

  // Godunov for a convex profile: minimize over [pm, pp] when ordered,
  // otherwise the larger endpoint value.
  double godunov(std::size_t j, double pm, double pp) const {
    if (pm <= pp) return ham(j, std::clamp(qstar[j], pm, pp));
    return std::max(ham(j, pm), ham(j, pp));
  }

  double lax_friedrichs(std::size_t j, double pm, double pp) const {
    return ham(j, 0.5 * (pm + pp)) - 0.5 * lf_alpha * (pp - pm);
  }

  double flux(std::size_t j, double pm, double pp, Scheme s) const {
    return s == Scheme::godunov ? godunov(j, pm, pp)
                                : lax_friedrichs(j, pm, pp);
  }

  // One-sided endpoint fluxes: minimal subsolution constraint over the
  // slopes unrestricted on the missing side.
  double flux_left(std::size_t j, double pp) const {
    return ham(j, std::min(qstar[j], pp));
  }
  double flux_right(std::size_t j, double pm) const {
    return ham(j, std::max(qstar[j], pm));
  }
};

EdgeStencil make_stencil(const EdgeTable& table, int n_nodes) {
  if (n_nodes < 3) throw graph_error("solve: need at least 3 nodes");
  EdgeStencil st;
  st.q_grid = table.q_grid;
  st.tail_slope = table.nu * table.c0_measured;
  st.M = table.M_used;

  double sign = table.branch == 2 ? 1.0 : -1.0;
  double mag_lo = std::abs(table.h_clamp());
  double mag_hi = std::abs(table.h_outer());
  double ratio = std::pow(mag_hi / mag_lo, 1.0 / (n_nodes - 1));
  st.h_nodes.resize(n_nodes);
  for (int j = 0; j < n_nodes; ++j) {
    double mag = mag_lo * std::pow(ratio, j);
    st.h_nodes[table.branch == 2 ? j : n_nodes - 1 - j] = sign * mag;
  }

  std::size_t nq = table.q_grid.size();
  st.rows.assign(n_nodes, std::vector<double>(nq));
  st.qstar.resize(n_nodes);
  for (int j = 0; j < n_nodes; ++j) {
    std::size_t best = 0;
    for (std::size_t k = 0; k < nq; ++k) {
      st.rows[j][k] = eval_gbar(table, st.h_nodes[j], table.q_grid[k]);
      if (st.rows[j][k] < st.rows[j][best]) best = k;
    }
    st.qstar[j] = table.q_grid[best];
    for (std::size_t k = 0; k + 1 < nq; ++k)
      st.lf_alpha = std::max(st.lf_alpha,
                             std::abs(st.rows[j][k + 1] - st.rows[j][k]) /
                                 (table.q_grid[k + 1] - table.q_grid[k]));
  }
  st.lf_alpha = std::max(st.lf_alpha, st.tail_slope);
  return st;
}

// Scalar monotone nodal equation lambda u + flux(u) = 0; flux is
// nondecreasing in u, so bisection after bracket expansion.
template <class F>
double solve_node(double lambda, const F& fu, double guess, double bound) {
  double lo = std::min(guess, -bound), hi = std::max(guess, bound);
  for (int k = 0; k < 64 && lambda * lo + fu(lo) > 0.0; ++k)
    lo = 2.0 * lo - hi;
  for (int k = 0; k < 64 && lambda * hi + fu(hi) < 0.0; ++k)
    hi = 2.0 * hi - lo;
  for (int k = 0; k < 100; ++k) {
    double mid = 0.5 * (lo + hi);
    if (lambda * mid + fu(mid) <= 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15 * std::max(1.0, std::abs(lo))) break;
  }
  return 0.5 * (lo + hi);
}

EdgeFunction sweep_solve(const EdgeTable& table,
                         std::optional<double> d_outer,
                         std::optional<double> d_junction,
                         const GraphSolveOptions& opt) {
  EdgeStencil st = make_stencil(table, opt.n_nodes);
  std::size_t n = st.h_nodes.size();
  std::size_t j_junc = table.branch == 2 ? 0 : n - 1;
  std::size_t j_outer = table.branch == 2 ? n - 1 : 0;

  double bound = (st.M + 1.0) / opt.lambda + 1.0;
  for (auto d : {d_outer, d_junction})
    if (d) bound = std::max(bound, std::abs(*d) + 1.0);
  // Default start is the flat supersolution: the sweeps then descend
  // monotonically to the fixed point. Starting below works too (the
  // fixed point is the same) but rises one cell-Lipschitz increment per
  // sweep, so tests exercising it use coarse grids.
  double init = std::isnan(opt.init_value) ? bound : opt.init_value;
  std::vector<double> u(n, init);

  auto update_at = [&](std::size_t j) {
    double unew;
    if (j == 0) {
      double dh = st.h_nodes[1] - st.h_nodes[0];
      unew = solve_node(
          opt.lambda,
          [&](double v) { return st.flux_left(0, (u[1] - v) / dh); }, u[0],
          bound);
    } else if (j == n - 1) {
      double dh = st.h_nodes[n - 1] - st.h_nodes[n - 2];
      unew = solve_node(
          opt.lambda,
          [&](double v) { return st.flux_right(j, (v - u[n - 2]) / dh); },
          u[j], bound);
    } else {
      double dhm = st.h_nodes[j] - st.h_nodes[j - 1];
      double dhp = st.h_nodes[j + 1] - st.h_nodes[j];
      unew = solve_node(
          opt.lambda,
          [&](double v) {
            return st.flux(j, (v - u[j - 1]) / dhm, (u[j + 1] - v) / dhp,
                           opt.scheme);
          },
          u[j], bound);
    }
    if (j == j_outer && d_outer) unew = std::min(unew, *d_outer);
    if (j == j_junc && d_junction) unew = std::min(unew, *d_junction);
    double change = std::abs(unew - u[j]);
    u[j] = unew;
    return change;
  };

  bool converged = false;
  for (int sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    double max_change = 0.0;
    std::size_t arg_change = 0;
    auto track = [&](std::size_t j) {
      double c = update_at(j);
      if (c > max_change) {
        max_change = c;
        arg_change = j;
      }
    };
    if (sweep % 2 == 0) {
      for (std::size_t j = 0; j < n; ++j) track(j);
    } else {
      for (std::size_t j = n; j-- > 0;) track(j);
    }
    if (std::getenv("HJLAB_DEBUG_SWEEPS") && sweep % 100 == 0)
      std::fprintf(stderr,
                   "sweep %d change %.3e at %zu (h=%.3e) u0 %.6f umid %.6f\n",
                   sweep, max_change, arg_change, st.h_nodes[arg_change], u[0],
                   u[n / 2]);
    if (max_change < opt.sweep_tol) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw graph_error("solve: Gauss-Seidel sweeps did not converge");

  const double attain_tol = 1e-7;
  if (d_outer && u[j_outer] < *d_outer - attain_tol)
    throw anchor_inadmissible(
        "outer datum not attained: d outside the admissible interval");
  if (d_junction && u[j_junc] < *d_junction - attain_tol)
    throw anchor_inadmissible(
        "junction datum not attained: d outside the admissible interval");

  EdgeFunction edge;
  edge.branch = table.branch;
  edge.h_nodes = std::move(st.h_nodes);
  edge.u_values = std::move(u);
  edge.anchor = d_outer ? Anchor::outer : Anchor::junction;
  edge.anchor_value = d_outer ? *d_outer : d_junction.value_or(0.0);
  return edge;
}

}  // namespace

EdgeFunction solve_max_subsolution(const EdgeTable& table, Anchor anchor,
                                   double d, GraphSolveOptions opt) {
  if (anchor == Anchor::outer)
    return sweep_solve(table, d, std::nullopt, opt);
  return sweep_solve(table, std::nullopt, d, opt);
}

EdgeFunction solve_edge(const EdgeTable& table, std::optional<double> d_outer,
                        std::optional<double> d_junction,
                        GraphSolveOptions opt) {
  return sweep_solve(table, d_outer, d_junction, opt);
}

GraphSolution assemble_solution(const std::array<EdgeTable, 3>& tables,
                                const std::array<double, 3>& d,
                                GraphSolveOptions opt) {
  std::array<EdgeFunction, 3> rho;
  for (int i = 0; i < 3; ++i) {
    try {
      rho[i] = solve_max_subsolution(tables[i], Anchor::outer, d[i], opt);
    } catch (const anchor_inadmissible&) {
      throw graph_error("inadmissible data: clause 1, boundary datum d_" +
                        std::to_string(i + 1) +
                        " outside the admissible interval");
    }
  }
  double d0 = junction_value(
      {rho[0].at_junction(), rho[1].at_junction(), rho[2].at_junction()});

  GraphSolution sol;
  sol.d0 = d0;
  sol.d = d;
  for (int i = 0; i < 3; ++i) {
    EdgeFunction nu;
    try {
      nu = solve_max_subsolution(tables[i], Anchor::junction, d0, opt);
    } catch (const anchor_inadmissible&) {
      throw graph_error(
          "inadmissible data: clause 1, junction value outside the "
          "admissible interval on edge " +
          std::to_string(i + 1));
    }
    if (nu.at_outer() < d[i] - 1e-7)
      throw graph_error(
          "inadmissible data: clause 3, junction-anchored envelope drops "
          "below d_" +
          std::to_string(i + 1) + " at the outer boundary");
    // min(rho, nu) realized as the doubly anchored maximal subsolution,
    // so the residual meets the sweep tolerance everywhere.
    sol.edges[i] = sweep_solve(tables[i], d[i], d0, opt);
  }

  for (int i = 0; i < 3; ++i) {
    if (std::abs(sol.edges[i].at_junction() - d0) > 1e-6)
      throw graph_error("assembled edges disagree at the junction");
    if (std::abs(sol.edges[i].at_outer() - d[i]) > 1e-6)
      throw graph_error("assembled edge misses its boundary datum");
  }
  return sol;
}

ValidationReport check_admissibility(const std::array<EdgeTable, 3>& tables,
                                     double d0, const std::array<double, 3>& d,
                                     GraphSolveOptions opt) {
  ValidationReport rep;
  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  std::array<double, 3> rho0{};
  bool clause1 = true;
  std::string c1_detail;
  for (int i = 0; i < 3; ++i) {
    try {
      EdgeFunction rho = solve_max_subsolution(tables[i], Anchor::outer, d[i], opt);
      rho0[i] = rho.at_junction();
    } catch (const anchor_inadmissible&) {
      clause1 = false;
      rho0[i] = std::numeric_limits<double>::quiet_NaN();
      c1_detail += "d_" + std::to_string(i + 1) + " not attainable; ";
    }
    try {
      solve_max_subsolution(tables[i], Anchor::junction, d0, opt);
    } catch (const anchor_inadmissible&) {
      clause1 = false;
      c1_detail += "d_0 not attainable on edge " + std::to_string(i + 1) + "; ";
    }
  }
  add("clause 1: data in the admissible intervals", clause1,
      clause1 ? "all anchors attained" : c1_detail);

  if (clause1) {
    double m = junction_value(rho0);
    std::ostringstream ss;
    ss << "min_i rho_i(0) = " << m << " vs d_0 = " << d0;
    add("clause 2: min_i rho_i(0) >= d_0", m >= d0 - 1e-7, ss.str());

    bool clause3 = true;
    std::string c3_detail;
    for (int i = 0; i < 3; ++i) {
      EdgeFunction nu = solve_max_subsolution(tables[i], Anchor::junction, d0, opt);
      if (nu.at_outer() < d[i] - 1e-7) {
        clause3 = false;
        c3_detail += "nu_" + std::to_string(i + 1) + "(h_i) = " +
                     std::to_string(nu.at_outer()) + " < d_i = " +
                     std::to_string(d[i]) + "; ";
      }
    }
    add("clause 3: nu_i(h_i) >= d_i", clause3,
        clause3 ? "all edges" : c3_detail);
  }
  return rep;
}

double residual(const EdgeFunction& edge, const EdgeTable& table,
                GraphSolveOptions opt) {
  if (edge.branch != table.branch)
    throw graph_error("residual: edge and table branches differ");
  EdgeStencil st = make_stencil(table, static_cast<int>(edge.h_nodes.size()));
  std::size_t n = edge.h_nodes.size();
  double worst = 0.0;
  for (std::size_t j = 1; j + 1 < n; ++j) {
    double pm = (edge.u_values[j] - edge.u_values[j - 1]) /
                (edge.h_nodes[j] - edge.h_nodes[j - 1]);
    double pp = (edge.u_values[j + 1] - edge.u_values[j]) /
                (edge.h_nodes[j + 1] - edge.h_nodes[j]);
    double r = opt.lambda * edge.u_values[j] + st.flux(j, pm, pp, opt.scheme);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

double gronwall_constant(const EdgeTable& table, double lambda) {
  // Trapezoid rule for int lambda T/(nu L) d|h| over the table rows.
  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < table.h_grid.size(); ++k) {
    double a = lambda * table.periods[k] / (table.nu * table.lengths[k]);
    double b = lambda * table.periods[k + 1] / (table.nu * table.lengths[k + 1]);
    integral += 0.5 * (a + b) * std::abs(table.h_grid[k + 1] - table.h_grid[k]);
  }
  double c1 = std::exp(integral);
  return c1 + 2.0 * c1 * table.M_used / lambda;
}

}  // namespace hjlab
