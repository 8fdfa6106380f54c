#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "toric/rods.hpp"

namespace toric {

// Per-rod geometric data. Entries that a given pipeline does not
// measure stay NaN; finite rods are the only ones carrying charges
// and areas.
struct RodInvariants {
  RodVector vector{0, 1};
  double z_lo = -std::numeric_limits<double>::infinity();
  double z_hi = std::numeric_limits<double>::infinity();
  double length = std::numeric_limits<double>::infinity();
  double area = std::numeric_limits<double>::quiet_NaN();
  double q_psi = std::numeric_limits<double>::quiet_NaN();
  double q_chi = std::numeric_limits<double>::quiet_NaN();
  double conical = std::numeric_limits<double>::quiet_NaN();

  bool finite() const { return std::isfinite(z_lo) && std::isfinite(z_hi); }
};

struct InvariantsReport {
  double beta = 2.0 * pi;
  double omega = 0.0;  // angular velocity entering the periodic basis
  double m = std::numeric_limits<double>::quiet_NaN();
  double j = std::numeric_limits<double>::quiet_NaN();
  std::vector<RodInvariants> rods;
  double action = std::numeric_limits<double>::quiet_NaN();
  double action_bolt_sum = std::numeric_limits<double>::quiet_NaN();
  std::map<std::string, double> residuals;

  double beta_hat() const { return beta / (2.0 * pi); }
};

// Residuals of the charge identities. Requires m, j and per-finite-rod
// (area, q_psi, q_chi) to be populated. Keys:
//   "angular-momentum"  j + (1/16pi) sum Q_chi v^1
//   "smarr"             (m - 2*Omega*j) - (1/2beta) sum (A - Q_chi v^2 / 2)
//   "komar-mass"        (m - 2*Omega*j) - (1/4beta) sum Q_psi v^1
//   "mass-formula"      m - (1/2beta) sum (A - Q_chi (v^2 + Omega bhat v^1)/2)
//   "rod-flux-<k>"      Q_{v_k} - 2 beta l_k, one per finite rod
std::map<std::string, double> identity_residuals(const InvariantsReport& rep);

// I = beta*m/2 and its bolt-sum rewriting; also stores both into rep.
struct ActionPair {
  double action;
  double bolt_sum;
};
ActionPair euclidean_action(InvariantsReport& rep);

}  // namespace toric
