#pragma once

#include <vector>

#include "toric/report.hpp"
#include "toric/solver.hpp"

namespace toric {

// Far-field invariants from the leading asymptotics V = 1 - 2m/r,
// omega = 2 j sin^2(theta) / r, least squares over the outer band.
struct AsymptoticFit {
  double m = 0.0;
  double j = 0.0;
  double v_misfit = 0.0;      // rms of the V fit residual
  double omega_misfit = 0.0;  // rms of the omega fit residual
  bool truncation_warning = false;
};

AsymptoticFit fit_asymptotics(const FieldState& fs);

// Potential differences Y(z_A) - Y(z_{A-1}) across each finite rod,
// in the (psi, chi) basis, by quadrature along rho = eps lines at
// three eps levels, eliminating the linear corner-window and
// quadratic interior offsets of the off-axis path.
struct YPotentialTrace {
  std::vector<Mat2> corner_differences;  // one per finite rod
  double path_defect = 0.0;  // largest |Y(eps) - Y(2 eps)| entry seen
};

// eps <= 0 picks a default: 2.5e-4 for closed-form sources, a few
// theta-cells off the axis for pure grid states.
YPotentialTrace compute_Y(const FieldState& fs, double eps = 0.0);

// Charges of the 2-cycle over finite rod A from the matrix relation
// [[Q_psi, Q_chi], [0, 0]] = 2 pi det(L_A) L_A dY_A. The second row is
// a consistency check; beyond tol it throws std::runtime_error.
struct ChargePair {
  double q_psi = 0.0;
  double q_chi = 0.0;
  double kernel_defect = 0.0;  // largest second-row entry
};

ChargePair charges(const YPotentialTrace& trace, const RodStructure& rs,
                   int rod, double tol = 1e-3);

// Ernst potential W integrated from dW = -(V^2/rho) *d(omega), seeded
// with the fitted -2 j cos(theta)/r^2 on the outer arc.
Field ernst_potential(const FieldState& fs);

// End-to-end assembly: fit m, j, per-rod lengths, areas, charges,
// conical constants, identity residuals and the action. Computes nu
// first when absent.
InvariantsReport field_invariants(FieldState& fs);

}  // namespace toric
