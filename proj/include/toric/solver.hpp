#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "toric/grid.hpp"
#include "toric/rods.hpp"
#include "toric/source.hpp"
#include "toric/types.hpp"

namespace toric {

struct SolverOptions {
  double tol = 1e-9;      // L-inf defect of the discrete system
  int max_iters = 200000;
  // Red-black over-relaxation factor; <= 0 picks a near-optimal one
  // for the grid.
  double relax = 0.0;
  int fit_interval = 100; // sweeps between far-field refits
  double perturb = 0.0;   // relative amplitude of initial-data noise
  unsigned seed = 1u;     // noise stream for perturb
  int threads = 0;        // 0: TORIC_THREADS env or hardware count
};

// Nodal state of the reduced system on a polar grid.  u = log g_tt
// and omega = g_tp / g_tt determine the Killing Gram matrix with
// det = rho^2 built in.  On axis nodes of a static rod (where g_tt
// vanishes quadratically) u holds -inf; interior nodes are finite.
struct FieldState {
  PolarGrid grid;
  RodStructure rs;
  Field u, omega, nu;
  bool has_nu = false;
  int sweeps = 0;
  double residual_norm = 0.0;
  std::vector<double> history;  // defect after each sweep
  double m_fit = 0.0, j_fit = 0.0;
  // Closed-form origin of the samples, when there is one; enables
  // high-order quadrature seeding.  Non-owning.
  const GramSource* source = nullptr;

  double V(int i, int j) const { return std::exp(u(i, j)); }
};

struct SolveError : std::runtime_error {
  std::vector<double> history;
  SolveError(const std::string& what, std::vector<double> h)
      : std::runtime_error(what), history(std::move(h)) {}
};

// Fields of a closed-form source restricted to the grid.
FieldState sample_state(const GramSource& src, const PolarGrid& grid);

// Relaxes the reduced equations to the harmonic map with the given
// rod structure.  Initial data is the model map unless an explicit
// source is supplied.  Axis rows carry rod-dependent conditions: even
// reflection on orbit-axis rods, Dirichlet twist on rotating bolts,
// and a subtracted log template on static bolts.
FieldState solve_harmonic_map(const RodStructure& rs, const PolarGrid& grid,
                              SolverOptions opts = {},
                              const GramSource* initial = nullptr);

// Conformal exponent by inward line quadrature of its exact gradient,
// seeded on the outer arc from the source closed form when available,
// else from the fitted mass.  Stores nu into fs.
void compute_nu(FieldState& fs);

// L-inf norm over interior nodes of the divergence of rho J, the
// quantity the harmonic map equation sets to zero.
double residual(const FieldState& fs);

// J = g^{-1} dg of the (tau, phi) Gram matrix at node (i, j) by
// second-order differences; valid for 0 <= i <= nr-2 and interior j.
void weyl_jacobians(const FieldState& fs, int i, int j, Mat2& j_rho,
                    Mat2& j_z);

struct MazurReport {
  Field tr_psi;       // relative distance density Tr(g~ g^-1) - 2
  double sup = 0.0;   // over interior nodes
  double outer_arc = 0.0;  // integral of rho d_n Tr Psi over the arc
  double bulk = 0.0;       // integral of rho Tr(N^T N), positive
  double min_density = 0.0;  // most negative nodal bulk density seen
};

// Pointwise and integrated Mazur comparison of two states on one
// grid.  Throws if the rod structures differ.
MazurReport mazur_distance(const FieldState& a, const FieldState& b);

struct FarFieldFit {
  double m = 0.0;
  double j = 0.0;
};

// Mass and angular momentum from the far-field fall-off of (V, omega)
// fitted with subleading nuisance terms over the outer half band.
FarFieldFit fit_far_field(const FieldState& fs);

// Largest circulation of the nu gradient 1-form around grid
// plaquettes with r >= r_min (default rmax/4); zero for integrable
// data.
double loop_closure_defect(const FieldState& fs, double r_min = 0.0);

}  // namespace toric
