#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "toric/types.hpp"

namespace toric {

// Integer direction in the (psi, chi) lattice basis.  Kept coprime and
// sign-normalized: first nonzero component positive.
struct RodVector {
  int v1 = 0;
  int v2 = 0;

  bool operator==(const RodVector&) const = default;
};

RodVector sign_normalize(RodVector v);
bool coprime(RodVector v);
int det2i(RodVector a, RodVector b);  // a1*b2 - a2*b1

// Axis data of an AF toric instanton: turning points z_1 < ... < z_N split the
// axis into N+1 rods, rod k carrying the direction that degenerates there.
// beta is the period of the psi circle, omega the twist of the chi circle
// against it.  beta_hat() * omega is only defined modulo 1; we store it as
// given and never reduce.
struct RodStructure {
  double beta = 2 * pi;
  double omega = 0.0;
  std::vector<double> turning_points;
  std::vector<RodVector> rod_vectors;

  double beta_hat() const { return beta / (2 * pi); }
  int corners() const { return static_cast<int>(turning_points.size()); }
  int rods() const { return static_cast<int>(rod_vectors.size()); }

  // Finite rods have index 1 .. corners()-1 in this 0-based scheme.
  bool finite_rod(int k) const { return k > 0 && k < corners(); }
  double rod_length(int k) const;  // +inf on the two outer rods
  std::pair<double, double> rod_interval(int k) const;
  int rod_at(double z) const;  // index of the rod whose closure contains z

  double max_abs_corner() const;
  double mean_finite_length() const;
};

bool admissible(const RodStructure& rs);
// Human-readable reasons when not admissible; empty vector means admissible.
std::vector<std::string> admissibility_failures(const RodStructure& rs);

// AF structures start and end with a chi rod (0,1).
bool asymptotically_flat(const RodStructure& rs);

// epsilon at corner k (0-based, k = 0 .. N-1): det(v_k, v_{k+1}).
int corner_epsilon(const RodStructure& rs, int k);

struct CanonicalizeResult {
  RodStructure rs;
  int shift = 0;  // applied as v2 -> v2 + shift*v1, beta_hat*omega -> beta_hat*omega - shift
};

// Fix the unipotent basis freedom so the first rod with v1 != 0 becomes (1,0).
CanonicalizeResult canonicalize(const RodStructure& rs);

// mu^{+-} built from the distance to a turning point:
//   mu_plus  = sqrt(rho^2 + (z-za)^2) - (z-za)
//   mu_minus = sqrt(rho^2 + (z-za)^2) + (z-za)
// so mu_plus*mu_minus = rho^2 and mu_plus+mu_minus = 2*dist.
double mu_plus(WeylPoint p, double za);
double mu_minus(WeylPoint p, double za);

// Change of basis from (tau, phi) to (psi, chi):  gt = L g L^T.
Mat2 af_basis(double beta_hat, double omega);
Mat2 to_psichi(const Mat2& g_tauphi, double beta_hat, double omega);
Mat2 to_tauphi(const Mat2& g_psichi, double beta_hat, double omega);

// Smallest integer completion u of v with |det(u,v)| = 1; ties by (u1,u2) order.
RodVector canonical_completion(RodVector v);
// Rows (u; v) as a 2x2 matrix for the rod k of rs.
Eigen::Matrix2i adapted_basis(const RodStructure& rs, int k);

struct RodFileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace toric
