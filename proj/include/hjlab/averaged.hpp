#pragma once

#include <string>
#include <vector>

#include "hjlab/level_geometry.hpp"
#include "hjlab/model.hpp"

namespace hjlab {

/// Tabulated averaged Hamiltonian Gbar_i(h, q) on one graph edge:
/// the time average of G(X(t), q DH(X(t))) over the loop c_i(h).
struct EdgeTable {
  int branch = 0;
  std::vector<double> h_grid;   // ascending, clamped away from 0
  std::vector<double> q_grid;   // symmetric about 0, ascending
  std::vector<double> values;   // row-major [h][q]
  std::vector<double> periods;  // T_i(h) per h row
  std::vector<double> lengths;  // L_i(h) per h row
  double c0_measured = 0.0;     // min_h L_i(h)/T_i(h): averaged-gradient floor
  double M_used = 0.0;
  double nu = 1.0;

  double value_at(std::size_t ih, std::size_t iq) const {
    return values[ih * q_grid.size() + iq];
  }
  double& value_at(std::size_t ih, std::size_t iq) {
    return values[ih * q_grid.size() + iq];
  }
  double q_max() const { return q_grid.back(); }
  double h_clamp() const;  // grid endpoint nearest the junction
  double h_outer() const;  // grid endpoint at the edge boundary level

  /// T_i and L_i interpolated at h (linear in log|h|, where T varies slowly).
  double period_at(double h) const;
  double length_at(double h) const;
};

struct TableBuildOptions {
  int h_count = 40;
  int q_count = 41;        // rounded up to odd so that q = 0 is a node
  double q_max = 0.0;      // 0: use 10 (M+1)/(nu c0) after the build
  double h_clamp = 1e-6;   // geometric grid endpoint near the junction
  double seed_phase = 0.0; // fraction of a period to advance each seed by
  bool parallel = true;    // OpenMP over h rows
};

class table_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

EdgeTable build_table(const LevelGeometry& geom, int branch,
                      TableBuildOptions opt = {});

/// Bilinear interpolation; h clamped to the grid range, |q| beyond
/// q_max refused.
double eval_gbar(const EdgeTable& table, double h, double q);

/// As eval_gbar but extends beyond q_max with the coercive linear tail
/// of slope nu * c0_measured. Used by the graph solver's sweeps.
double eval_gbar_extended(const EdgeTable& table, double h, double q);

struct MinOverQ {
  double value;
  double argmin;
};

/// Minimizes the interpolated convex q-profile at level h by golden section.
MinOverQ min_over_q(const EdgeTable& table, double h);

ValidationReport check_table_properties(const EdgeTable& table,
                                        const Model& model);

void save_table_csv(const EdgeTable& table, const std::string& csv_path,
                    const std::string& header_path,
                    const std::string& config_hash);
EdgeTable load_table_csv(const std::string& csv_path,
                         const std::string& header_path);

}  // namespace hjlab
