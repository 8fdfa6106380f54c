#pragma once

#include <stdexcept>

#include "toric/rods.hpp"
#include "toric/types.hpp"

namespace toric {

// A torus-symmetric metric presented over the Weyl half-plane.
// gram() is the Killing Gram matrix in the 2pi-periodic (psi, chi)
// basis, so det gram = bhat^2 rho^2 for any admissible source.
class GramSource {
 public:
  virtual ~GramSource() = default;

  virtual const RodStructure& rods() const = 0;
  virtual Mat2 gram(const WeylPoint& p) const = 0;

  // Conformal exponent, where the source knows it in closed form.
  virtual bool has_nu() const { return false; }
  virtual double nu(const WeylPoint&) const {
    throw std::logic_error("source carries no conformal factor");
  }
};

// Scalars of the (tau, phi) block: g_tt = V, g_tp = V*omega,
// g_pp = rho^2/V + V*omega^2.
struct FieldSample {
  double V;
  double omega;
};

FieldSample block_fields(const GramSource& src, const WeylPoint& p);

// Gram matrix in the (tau, phi) basis built from the block scalars.
Mat2 tauphi_gram(double V, double omega, double rho);

}  // namespace toric
