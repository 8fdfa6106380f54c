#pragma once

#include <array>
#include <vector>

#include "toric/report.hpp"
#include "toric/rods.hpp"
#include "toric/source.hpp"
#include "toric/types.hpp"

namespace toric {

enum class KillingBasis { TauPhi, PsiChi };

// One metric evaluation: Gram matrix in the declared basis, the
// conformal exponent nu, and the Weyl image of the chart point.
struct MetricSample {
  Mat2 gram = Mat2::Zero();
  KillingBasis basis = KillingBasis::TauPhi;
  double nu = 0.0;
  WeylPoint weyl{};
};

// ---------------------------------------------------------------- flat

MetricSample flat_gram(const WeylPoint& p);

// ---------------------------------------------------------------- Kerr

struct KerrParams {
  double mu = 1.0;    // mass scale, > 0
  double alpha = 0.0; // rotation, >= 0

  double r_plus() const { return mu + std::sqrt(mu * mu + alpha * alpha); }
  double Omega() const;
  double beta() const;
};

// Chart (r, theta), r > r_plus, 0 < theta < pi. Gram in (tau, phi).
MetricSample kerr_eval(const KerrParams& par, double r, double theta);

// Potentials Y_ij in the (psi, chi) basis, indexed [psi chi][psi chi].
Mat2 kerr_Y(const KerrParams& par, double r, double theta);

// Inverse chart. False when p lies on the closure of the bolt rod.
bool kerr_chart(const KerrParams& par, const WeylPoint& p, double& r,
                double& theta);

RodStructure kerr_rods(const KerrParams& par);
InvariantsReport kerr_invariants(const KerrParams& par);

class KerrSource final : public GramSource {
 public:
  explicit KerrSource(const KerrParams& par)
      : par_(par), rs_(kerr_rods(par)) {}

  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override;
  bool has_nu() const override { return true; }
  double nu(const WeylPoint& p) const override;

  const KerrParams& params() const { return par_; }

 private:
  KerrParams par_;
  RodStructure rs_;
};

// ------------------------------------------------------------- Chen-Teo

struct ChenTeoParams {
  double kappa = 1.0;  // scale, > 0
  double xi = 0.6;     // shape, in (1/2, 1/sqrt 2)
};

// Constants derived from (kappa, xi). Construction throws
// std::domain_error outside the parameter range.
struct ChenTeoConsts {
  double kappa;                // scale carried through from the params
  double p;                    // cubic shape parameter -2 xi^2
  std::array<double, 4> a;     // cubic coefficients a0..a3 (a4 = 0)
  double x1, x2, x3;           // roots, x1 < x2 < x3 < 0
  double b, c;                 // frame change constants
  double s;                    // sqrt(1 - v^2) normalization
  double beta, Omega;          // periodic basis data
  double z1, z2, z3;           // turning points, increasing
  double m, j;                 // asymptotic invariants
};

ChenTeoConsts chenteo_consts(const ChenTeoParams& par);

// Native chart (x, y), x1 < y < x2 < x < x3. Gram in (tau, phi).
MetricSample chenteo_eval(const ChenTeoParams& par, double x, double y);

WeylPoint chenteo_weyl(const ChenTeoParams& par, double x, double y);

// Numerical inversion of the (x, y) -> (rho, z) chart; false if the
// Newton iteration leaves the coordinate rectangle.
bool chenteo_chart(const ChenTeoParams& par, const WeylPoint& p, double& x,
                   double& y);

RodStructure chenteo_rods(const ChenTeoParams& par);
InvariantsReport chenteo_invariants(const ChenTeoParams& par);

class ChenTeoSource final : public GramSource {
 public:
  explicit ChenTeoSource(const ChenTeoParams& par);

  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override;
  bool has_nu() const override { return true; }
  double nu(const WeylPoint& p) const override;

  const ChenTeoParams& params() const { return par_; }
  const ChenTeoConsts& consts() const { return cc_; }

 private:
  ChenTeoParams par_;
  ChenTeoConsts cc_;
  RodStructure rs_;
};

// ---------------------------------------------- static Weyl solutions

struct WeylStaticParams {
  // Disjoint finite intervals [z_lo, z_hi] on which the tau circle
  // degenerates; everything else on the axis is a phi rod.
  std::vector<std::array<double, 2>> tau_rods;
  double beta = 8.0 * pi;
};

// Superposed line-segment potentials; omega = 0, nu by quadrature.
MetricSample multischwarzschild_eval(const WeylStaticParams& par,
                                     const WeylPoint& p);

RodStructure multischwarzschild_rods(const WeylStaticParams& par);

// Conical constant on the phi rod between tau rods `gap` and `gap+1`,
// in closed form (cross-ratio product over rod endpoints).
double multischwarzschild_strut(const WeylStaticParams& par, std::size_t gap);

// log of the one-rod harmonic potential (R1 + R2 - l)/(R1 + R2 + l)
// for the segment [z_lo, z_hi], and its (d/drho, d/dz).  Harmonic for
// the axisymmetric 3D Laplacian away from the segment; -inf on it.
double rod_log_potential(const WeylPoint& p, double z_lo, double z_hi);
Vec2 rod_log_potential_grad(const WeylPoint& p, double z_lo, double z_hi);

class WeylStaticSource final : public GramSource {
 public:
  explicit WeylStaticSource(const WeylStaticParams& par)
      : par_(par), rs_(multischwarzschild_rods(par)) {}

  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override;
  bool has_nu() const override { return true; }
  double nu(const WeylPoint& p) const override;

  const WeylStaticParams& params() const { return par_; }

 private:
  WeylStaticParams par_;
  RodStructure rs_;
};

}  // namespace toric
