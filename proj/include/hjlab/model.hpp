#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

namespace hjlab {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  Vec2 operator+(Vec2 o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(Vec2 o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
  double dot(Vec2 o) const { return x1 * o.x1 + x2 * o.x2; }
  double norm() const { return std::hypot(x1, x2); }
};

inline Vec2 operator*(double s, Vec2 v) { return v * s; }

/// The double-well Hamiltonian H(x) = x2^2 + W(x1), exactly quadratic
/// (x2^2 - x1^2) inside the ball of radius kappa, with a C^3 quartic
/// blend W(s) = -s^2 + blend_c (|s|-kappa)^4 outside it.
struct HamiltonianSpec {
  double kappa = 0.5;
  double blend_c = 8.0;

  // Derived: well location s_star > kappa with W'(s_star) = 0, and the
  // common well depth h_min = W(s_star) < 0.
  double s_star = 0.0;
  double h_min = 0.0;

  static HamiltonianSpec make(double kappa = 0.5, double blend_c = 8.0);

  double well_potential(double s) const;        // W(s)
  double well_potential_deriv(double s) const;  // W'(s)
};

/// Running cost f(x) = f0 * (1 + cosine bump centered at `center`).
/// f0 = 0 gives the analytic regression case f == 0.
struct CostParams {
  double f0 = 0.0;
  Vec2 center{0.35, 0.3};
  double radius = 0.25;
};

struct ModelConfig {
  double lambda = 1.0;
  double h1 = 0.0;  // set from spec in Model::make when left at 0
  double h2 = 0.6;
  double h3 = 0.0;
  CostParams cost;
  double nu = 1.0;      // coercivity slope of G = |p| - f
  double M_bound = 0.0; // sup f, filled in by Model::make
};

struct LagrangianValue {
  bool finite = true;
  double value = 0.0;
};

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string detail;
};

struct ValidationReport {
  std::vector<CheckResult> checks;
  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
  std::string to_string() const;
};

/// Bundles the Hamiltonian and the control data (G, L, f). All methods are
/// pure functions of the immutable members and safe to call concurrently.
class Model {
 public:
  HamiltonianSpec ham;
  ModelConfig cfg;

  static Model make(HamiltonianSpec ham, ModelConfig cfg);

  double H(Vec2 x) const {
    return x.x2 * x.x2 + ham.well_potential(x.x1);
  }
  Vec2 grad_H(Vec2 x) const {
    return {ham.well_potential_deriv(x.x1), 2.0 * x.x2};
  }
  // b = (H_{x2}, -H_{x1}); b . DH == 0 identically.
  Vec2 drift_b(Vec2 x) const {
    return {2.0 * x.x2, -ham.well_potential_deriv(x.x1)};
  }

  double f(Vec2 x) const;
  double G(Vec2 x, Vec2 p) const { return p.norm() - f(x); }
  LagrangianValue lagrangian(Vec2 x, Vec2 xi) const;

  /// Energy of the outer boundary of edge i (1-based).
  double boundary_level(int branch) const;

  /// Axis-aligned box strictly containing the closed domain.
  struct BBox {
    double x1_min, x1_max, x2_min, x2_max;
  };
  BBox bounding_box(double margin = 0.05) const;

  /// Measured constant c0 with |DH(x)| >= c0 |H(x)|^{1/2} on a dense
  /// sample of the closed domain.
  double measure_c0(int sample_density = 400) const;

  /// Numerical audit of (H1)-(H3) and the structural properties of G.
  ValidationReport validate_assumptions(int sample_density = 200) const;

  bool inside_domain(Vec2 x) const;
};

}  // namespace hjlab
