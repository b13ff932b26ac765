#pragma once

#include <array>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "hjlab/averaged.hpp"

namespace hjlab {

enum class Anchor { outer, junction };
enum class Scheme { godunov, lax_friedrichs };

/// Discrete solution of lambda u + Gbar_i(h, u') = 0 on one edge.
/// h_nodes ascend; the junction sits at h ~ 0 (first node on branch 2,
/// last node on branches 1 and 3).
struct EdgeFunction {
  int branch = 0;
  std::vector<double> h_nodes;
  std::vector<double> u_values;
  Anchor anchor = Anchor::outer;
  double anchor_value = 0.0;

  std::size_t junction_index() const {
    return branch == 2 ? 0 : h_nodes.size() - 1;
  }
  std::size_t outer_index() const {
    return branch == 2 ? h_nodes.size() - 1 : 0;
  }
  double at_junction() const { return u_values[junction_index()]; }
  double at_outer() const { return u_values[outer_index()]; }
};

struct GraphSolution {
  std::array<EdgeFunction, 3> edges;
  double d0 = 0.0;
  std::array<double, 3> d{};
};

struct GraphSolveOptions {
  int n_nodes = 161;
  double lambda = 1.0;
  double sweep_tol = 1e-10;
  int max_sweeps = 200000;
  Scheme scheme = Scheme::godunov;
  // NaN: start from the flat a-priori supersolution (fast descent).
  double init_value = std::numeric_limits<double>::quiet_NaN();
};

class graph_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dirichlet datum not attained after convergence: d lies outside the
/// admissible interval I of the anchored endpoint.
class anchor_inadmissible : public graph_error {
 public:
  using graph_error::graph_error;
};

/// Maximal subsolution with u(anchor) = d, by monotone Godunov sweeps.
/// The unanchored endpoint gets the one-sided state-constraint update.
EdgeFunction solve_max_subsolution(const EdgeTable& table, Anchor anchor,
                                   double d, GraphSolveOptions opt = {});

/// Maximal subsolution with Dirichlet data at both ends (either may be
/// absent). Equals the pointwise min of the two singly-anchored
/// envelopes; solved directly so the residual meets the sweep tolerance.
EdgeFunction solve_edge(const EdgeTable& table,
                        std::optional<double> d_outer,
                        std::optional<double> d_junction,
                        GraphSolveOptions opt = {});

inline double junction_value(const std::array<double, 3>& rho_at_0) {
  return std::min({rho_at_0[0], rho_at_0[1], rho_at_0[2]});
}

/// Envelope solutions rho_i^{d_i}, junction value d0 = min_i rho_i(0),
/// then u_i = rho_i^{d_i} /\ nu_i^{d0}. Throws graph_error with the
/// failed admissibility clause when the data are inadmissible.
GraphSolution assemble_solution(const std::array<EdgeTable, 3>& tables,
                                const std::array<double, 3>& d,
                                GraphSolveOptions opt = {});

/// The three admissibility clauses, each with a numerical witness:
/// (1) each d_i and d0 attainable at its endpoint, (2) min_i rho_i(0) >= d0,
/// (3) nu_i^{d0}(h_i) >= d_i.
ValidationReport check_admissibility(const std::array<EdgeTable, 3>& tables,
                                     double d0, const std::array<double, 3>& d,
                                     GraphSolveOptions opt = {});

/// Max over interior nodes of |lambda u + flux(Du)| with the scheme's
/// own numerical Hamiltonian.
double residual(const EdgeFunction& edge, const EdgeTable& table,
                GraphSolveOptions opt = {});

/// Gronwall-type a priori constant: C1 + 2 C1 M / lambda with
/// C1 = exp of the integral of lambda T/(nu L) over the edge.
double gronwall_constant(const EdgeTable& table, double lambda);

}  // namespace hjlab
