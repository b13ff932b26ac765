#include "hjlab/model.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hjlab {

double HamiltonianSpec::well_potential(double s) const {
  double a = std::abs(s);
  double w = -s * s;
  if (a > kappa) {
    double d = a - kappa;
    w += blend_c * d * d * d * d;
  }
  return w;
}

double HamiltonianSpec::well_potential_deriv(double s) const {
  double a = std::abs(s);
  double w = -2.0 * s;
  if (a > kappa) {
    double d = a - kappa;
    w += 4.0 * blend_c * d * d * d * (s > 0 ? 1.0 : -1.0);
  }
  return w;
}

HamiltonianSpec HamiltonianSpec::make(double kappa, double blend_c) {
  if (kappa <= 0.0) throw std::invalid_argument("kappa must be positive");
  HamiltonianSpec spec;
  spec.kappa = kappa;
  spec.blend_c = blend_c;
  if (blend_c <= 0.0) {
    // Degenerate (non-coercive) spec; kept constructible so that
    // validate_assumptions can report the (H1) failure.
    spec.s_star = kappa;
    spec.h_min = 0.0;
    return spec;
  }

  // W'(s) = -2s + 4c(s-kappa)^3 on (kappa, inf): strictly negative at
  // s = kappa+, grows like s^3, so it has a unique root there. Bisection.
  auto dW = [&](double s) { return spec.well_potential_deriv(s); };
  double lo = kappa, hi = kappa + 1.0;
  while (dW(hi) < 0.0) hi += 1.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (dW(mid) < 0.0 ? lo : hi) = mid;
  }
  spec.s_star = 0.5 * (lo + hi);
  spec.h_min = spec.well_potential(spec.s_star);
  return spec;
}

Model Model::make(HamiltonianSpec ham, ModelConfig cfg) {
  Model m;
  m.ham = ham;
  // Defaults tied to the well depth: outer levels at 60% depth.
  if (cfg.h1 == 0.0) cfg.h1 = 0.6 * ham.h_min;
  if (cfg.h3 == 0.0) cfg.h3 = 0.6 * ham.h_min;
  if (cfg.M_bound == 0.0) cfg.M_bound = 2.0 * cfg.cost.f0;
  m.cfg = cfg;
  return m;
}

double Model::f(Vec2 x) const {
  const CostParams& c = cfg.cost;
  if (c.f0 == 0.0) return 0.0;
  double r = (x - c.center).norm();
  double bump = 0.0;
  if (r < c.radius)
    bump = 0.5 * (1.0 + std::cos(M_PI * r / c.radius));
  return c.f0 * (1.0 + bump);
}

LagrangianValue Model::lagrangian(Vec2 x, Vec2 xi) const {
  // For G = |p| - f: sup_p { -xi.p - |p| + f } = f if |xi| <= 1, else +inf.
  if (xi.norm() <= cfg.nu) return {true, f(x)};
  return {false, 0.0};
}

double Model::boundary_level(int branch) const {
  switch (branch) {
    case 1: return cfg.h1;
    case 2: return cfg.h2;
    case 3: return cfg.h3;
  }
  throw std::invalid_argument("branch must be 1, 2, or 3");
}

Model::BBox Model::bounding_box(double margin) const {
  // Outer boundary is {H = h2}. x1 extent: W(x1) = h2; x2 extent:
  // x2^2 = h2 - h_min at the well bottoms.
  double lo = ham.s_star, hi = ham.s_star + 1.0;
  for (int it = 0; it < 64 && ham.well_potential(hi) < cfg.h2; ++it) hi += 1.0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    (ham.well_potential(mid) < cfg.h2 ? lo : hi) = mid;
  }
  double x1m = hi;
  double x2m = std::sqrt(cfg.h2 - ham.h_min);
  return {-x1m - margin, x1m + margin, -x2m - margin, x2m + margin};
}

bool Model::inside_domain(Vec2 x) const {
  double h = H(x);
  if (h >= 0.0) return h < cfg.h2;
  // {H < 0} splits along x1 = 0 (W is even); left component is D_1.
  return x.x1 < 0.0 ? h > cfg.h1 : h > cfg.h3;
}

double Model::measure_c0(int sample_density) const {
  BBox box = bounding_box();
  double c0 = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= sample_density; ++i) {
    for (int j = 0; j <= sample_density; ++j) {
      Vec2 x{box.x1_min + (box.x1_max - box.x1_min) * i / sample_density,
             box.x2_min + (box.x2_max - box.x2_min) * j / sample_density};
      if (!inside_domain(x)) continue;
      if (x.norm() < 1e-9) continue;
      double h = std::abs(H(x));
      if (h < 1e-14) continue;
      c0 = std::min(c0, grad_H(x).norm() / std::sqrt(h));
    }
  }
  return c0;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name;
    if (!c.detail.empty()) os << "  (" << c.detail << ")";
    os << "\n";
  }
  os << (all_pass() ? "all assumptions hold" : "VALIDATION FAILED") << "\n";
  return os.str();
}

ValidationReport Model::validate_assumptions(int sample_density) const {
  ValidationReport rep;
  std::mt19937_64 rng(20240817);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  BBox box = bounding_box();

  auto add = [&](std::string name, bool pass, std::string detail) {
    rep.checks.push_back({std::move(name), pass, std::move(detail)});
  };

  // (H3): exact quadratic on B_kappa.
  {
    double worst = 0.0;
    for (int k = 0; k < sample_density; ++k) {
      double r = ham.kappa * std::abs(unit(rng));
      double th = M_PI * unit(rng);
      Vec2 x{r * std::cos(th), r * std::sin(th)};
      worst = std::max(worst, std::abs(H(x) - (x.x2 * x.x2 - x.x1 * x.x1)));
    }
    std::ostringstream d;
    d << "max |H - (x2^2 - x1^2)| on B_kappa = " << worst;
    add("quadratic saddle form on B_kappa", worst <= 1e-14, d.str());
  }

  // (H2): exactly three critical points. The gradient factors per axis:
  // DH = (W'(x1), 2 x2), so critical points are (roots of W', 0).
  {
    bool ok = ham.s_star > ham.kappa && ham.h_min < 0.0;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < sample_density * 4; ++k) {
      Vec2 x{box.x1_min + (box.x1_max - box.x1_min) * (unit(rng) + 1) / 2,
             box.x2_min + (box.x2_max - box.x2_min) * (unit(rng) + 1) / 2};
      double dz1 = (x - Vec2{-ham.s_star, 0.0}).norm();
      double dz2 = x.norm();
      double dz3 = (x - Vec2{ham.s_star, 0.0}).norm();
      if (std::min({dz1, dz2, dz3}) < 1e-2) continue;
      worst = std::min(worst, grad_H(x).norm());
    }
    ok = ok && worst > 0.0;
    std::ostringstream d;
    d << "s_star = " << ham.s_star << ", min |DH| away from {z1,0,z3} = " << worst;
    add("three critical points, |DH| > 0 elsewhere", ok, d.str());
  }

  // (H1): coercivity along rays at the validation radius.
  {
    double R = std::max(box.x1_max, box.x2_max) * 1.5;
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    for (int k = 0; k < sample_density; ++k) {
      double th = M_PI * unit(rng);
      Vec2 dir{std::cos(th), std::sin(th)};
      double hR = H(dir * R);
      for (double scale : {1.5, 2.5, 4.0}) {
        double diff = H(dir * (R * scale)) - hR;
        worst = std::min(worst, diff);
        ok = ok && diff >= 0.0;
      }
      ok = ok && hR > cfg.h2;
    }
    std::ostringstream d;
    d << "min radial increment beyond R = " << worst;
    add("coercivity of H", ok, d.str());
  }

  // B_kappa must sit inside the domain.
  {
    bool ok = true;
    for (int k = 0; k < sample_density; ++k) {
      double th = M_PI * unit(rng);
      Vec2 x{ham.kappa * std::cos(th), ham.kappa * std::sin(th)};
      ok = ok && inside_domain(x);
    }
    add("B_kappa inside domain", ok, "");
  }

  // Level ordering h_min < h1, h3 < 0 < h2.
  {
    bool ok = ham.h_min < cfg.h1 && cfg.h1 < 0.0 && ham.h_min < cfg.h3 &&
              cfg.h3 < 0.0 && cfg.h2 > 0.0;
    std::ostringstream d;
    d << "h_min = " << ham.h_min << ", h1 = " << cfg.h1 << ", h2 = " << cfg.h2
      << ", h3 = " << cfg.h3;
    add("boundary level ordering", ok, d.str());
  }

  // f >= 0 and M_bound dominates f on a sample.
  {
    bool ok = true;
    double fmax = 0.0;
    for (int k = 0; k < sample_density * 4; ++k) {
      Vec2 x{box.x1_min + (box.x1_max - box.x1_min) * (unit(rng) + 1) / 2,
             box.x2_min + (box.x2_max - box.x2_min) * (unit(rng) + 1) / 2};
      double fx = f(x);
      ok = ok && fx >= 0.0;
      fmax = std::max(fmax, fx);
    }
    ok = ok && fmax <= cfg.M_bound + 1e-12;
    std::ostringstream d;
    d << "max sampled f = " << fmax << ", M = " << cfg.M_bound;
    add("running cost nonnegative and bounded by M", ok, d.str());
  }

  // b . DH == 0 (analytic identity, sampled).
  {
    double worst = 0.0;
    for (int k = 0; k < sample_density * 4; ++k) {
      Vec2 x{box.x1_min + (box.x1_max - box.x1_min) * (unit(rng) + 1) / 2,
             box.x2_min + (box.x2_max - box.x2_min) * (unit(rng) + 1) / 2};
      worst = std::max(worst, std::abs(drift_b(x).dot(grad_H(x))));
    }
    std::ostringstream d;
    d << "max |b.DH| = " << worst;
    add("Hamiltonian orthogonality b.DH = 0", worst <= 1e-12, d.str());
  }

  // Midpoint convexity of G(x, .) on random covector pairs.
  {
    double worst = 0.0;
    for (int k = 0; k < sample_density * 4; ++k) {
      Vec2 x{unit(rng), unit(rng)};
      Vec2 p{3.0 * unit(rng), 3.0 * unit(rng)};
      Vec2 q{3.0 * unit(rng), 3.0 * unit(rng)};
      double mid = G(x, (p + q) * 0.5);
      double avg = 0.5 * (G(x, p) + G(x, q));
      worst = std::max(worst, mid - avg);
    }
    std::ostringstream d;
    d << "max midpoint-convexity defect = " << worst;
    add("G(x,.) convex", worst <= 1e-12, d.str());
  }

  // |DH| >= c0 |H|^{1/2} with a positive measured c0.
  {
    double c0 = measure_c0(sample_density);
    std::ostringstream d;
    d << "measured c0 = " << c0;
    add("gradient lower bound |DH| >= c0 |H|^{1/2}", c0 > 0.0, d.str());
  }

  return rep;
}

}  // namespace hjlab
