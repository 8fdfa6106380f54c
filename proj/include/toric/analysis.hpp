#pragma once

#include <vector>

#include "toric/solver.hpp"
#include "toric/source.hpp"

namespace toric {

// Ricci tensor split into the Killing block R_ij and the orbit block
// R_ab; both vanish on a solution.
struct CurvatureSample {
  Mat2 ricci_killing = Mat2::Zero();
  Mat2 ricci_orbit = Mat2::Zero();
  WeylPoint at;
  bool step_clamped = false;  // requested step exceeded rho/4

  double max_abs() const {
    return std::max(ricci_killing.cwiseAbs().maxCoeff(),
                    ricci_orbit.cwiseAbs().maxCoeff());
  }
};

// Curvature by Richardson-extrapolated central differences of the
// source fields. Needs nu (the orbit metric is e^{2 nu} delta), so the
// source must provide it. The step is shrunk to rho/4 near the axis;
// throws std::domain_error if that underflows.
CurvatureSample ricci_residual(const GramSource& src, const WeylPoint& p,
                               double h = 5e-3);

// Node-based variant on grid fields; nu must be computed. Valid for
// 1 <= i <= nr-3 and 2 <= j <= ntheta-3.
CurvatureSample ricci_residual(const FieldState& fs, int i, int j);

// Axis regularity constant per rod: c = lim e^nu sqrt(h) with h the
// squared circumference factor of the degenerating circle. 1 means no
// conical singularity.
struct ConicalEntry {
  int rod = 0;
  double c = 0.0;
  bool regular = false;
};

struct ConicalReport {
  std::vector<ConicalEntry> entries;

  const ConicalEntry& rod(int k) const { return entries.at(k); }
};

// Extrapolates e^nu sqrt(h) to the axis from rho in {base, 2 base,
// 4 base} at each rod's midpoint (quadratic in rho^2). Uses the
// attached closed-form source when present, otherwise interpolated
// grid fields; nu must be available either way.
ConicalReport conical_defects(const FieldState& fs, double tol = 1e-3);

// One-sided slopes of h(z) at the two corners of a finite rod against
// the value +-2/beta_hat forced by smoothness across the corner.
struct CornerReport {
  double slope_lo = 0.0;   // h'(z_{A-1}^+)
  double slope_hi = 0.0;   // -h'(z_A^-)
  double target = 0.0;     // 2/beta_hat
  bool pass = false;
};

CornerReport corner_smoothness(const FieldState& fs, int rod,
                               double rel_tol = 1e-3);

// Bolt area by quadrature of the induced metric against the rod-length
// value beta * l.
struct BoltGeometry {
  double area = 0.0;       // 2 pi beta_hat int e^nu sqrt(h) dz
  double area_rod = 0.0;   // beta * l
  std::vector<double> c_samples;
};

BoltGeometry bolt_geometry(const FieldState& fs, int rod, int samples = 65);

}  // namespace toric
