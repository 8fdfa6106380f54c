#pragma once

#include <vector>

#include "toric/grid.hpp"
#include "toric/source.hpp"

namespace toric {

// Multi-center harmonic data H = 1 + sum bhat / R_A on R^3, with dual
// potential chi solving rho dH = -*dchi. Both are closed-form sums;
// chi is normalized to vanish at z = 0 on the axis for symmetric
// center sets (chi0 = -bhat sum sign(-z_A)).
struct GibbonsHawkingData {
  std::vector<double> centers;
  double beta_hat = 1.0;
  double chi0 = 0.0;
};

GibbonsHawkingData halfflat_build(std::vector<double> centers,
                                  double beta_hat);

double gh_H(const GibbonsHawkingData& ghd, const WeylPoint& p);
Vec2 gh_H_grad(const GibbonsHawkingData& ghd, const WeylPoint& p);
double gh_chi(const GibbonsHawkingData& ghd, const WeylPoint& p);
Vec2 gh_chi_grad(const GibbonsHawkingData& ghd, const WeylPoint& p);

// Gram source of the associated half-flat metric: V = 1/H, omega =
// chi, nu = (1/2) log H. The rod intervals are the gaps between
// centers; the integer labels are placeholders since the lattice
// normalisation is exactly what fails to be AF here.
class GibbonsHawkingSource final : public GramSource {
 public:
  explicit GibbonsHawkingSource(GibbonsHawkingData ghd);

  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override;
  bool has_nu() const override { return true; }
  double nu(const WeylPoint& p) const override;

  const GibbonsHawkingData& data() const { return ghd_; }

 private:
  GibbonsHawkingData ghd_;
  RodStructure rs_;
};

// Asymptotic obstruction: the 1/r tail of H carries mass N bhat / 2,
// while the axis limits of chi at the two ends differ by 2 N bhat, so
// no choice of torus frame decays like an AF Gram matrix unless N = 0.
struct HalfFlatReport {
  double fitted_m = 0.0;
  double chi_jump = 0.0;  // chi(z -> +inf) - chi(z -> -inf) on the axis
  bool af = false;
};

HalfFlatReport halfflat_obstruction(const GibbonsHawkingData& ghd);

}  // namespace toric
