#pragma once

#include <array>
#include <vector>

#include "toric/exact.hpp"
#include "toric/rods.hpp"
#include "toric/source.hpp"
#include "toric/types.hpp"

namespace toric {

// Partition of the half-plane used by the piecewise model metric: a
// transition subinterval per rod, the strip corner regions between
// them, and a far radius beyond which the metric is blended to flat.
struct RegionDecomposition {
  double rho0 = 0.0;
  double R = 0.0;
  // One closed [lo, hi] per rod, strictly inside it, away from every
  // turning point.  Finite rods use their middle third; the two
  // semi-infinite rods use an interval one mean-rod-length away from
  // their corner.
  std::vector<std::array<double, 2>> transitions;
};

struct ModelMapOptions {
  double rho0 = 0.0;  // 0 = half the shortest finite rod
  double R = 0.0;     // 0 = 4 (max |z_A| + max rod length)
  // Replaces the C^2 transition profiles by C^0 linear ramps.  Only
  // for regression tests: the tension blows up near the axis.
  bool kinked_profiles = false;
};

// Piecewise explicit metric exhibiting a given admissible rod
// structure: exact rod-adapted forms over each corner, profiled
// transitions along each rod, flat near infinity.  Gram matrices are
// in the 2pi-periodic (psi, chi) basis, det = bhat^2 rho^2 exactly.
class ModelMap final : public GramSource {
 public:
  ModelMap(RodStructure rs, ModelMapOptions opts = {});

  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override;

  const RegionDecomposition& regions() const { return regions_; }
  const ModelMapOptions& options() const { return opts_; }

  // Transition profile on rod k at height z: interpolation parameter
  // s in [0,1] and its first two z-derivatives.  s runs 0 -> 1 with
  // increasing z across the transition and is constant outside it.
  void profile(int k, double z, double& s, double& ds, double& d2s) const;

 private:
  Mat2 strip_gram(double rho, double z) const;

  RodStructure rs_;
  ModelMapOptions opts_;
  RegionDecomposition regions_;
  std::vector<int> eps_;  // det(v_k, v_{k+1}) per corner, +-1
};

ModelMap build_model(const RodStructure& rs, ModelMapOptions opts = {});

// Gram sample of the model metric; carries no conformal factor.
MetricSample eval_model(const ModelMap& mm, const WeylPoint& p);

// Tension field of a torus-symmetric map, tau = div(g^{-1} grad g)
// over R^3, by central differences: multiplicative steps in rho (the
// flat-cone rho^2 then carries no truncation error into the axis
// limit) and plain steps capped at rho/4 in z.  Double rounding in
// the Gram entries still limits reliable evaluation to rho >~ 1e-2;
// tension_boundedness_probe evaluates the model in quad precision
// instead.
struct TensionResult {
  Mat2 tau;
  double norm2;  // (1/2) Tr tau^2
};
TensionResult tension(const GramSource& src, const WeylPoint& p,
                      double h = 1e-3);

// Sup of |tau| over a rod's transition interval at shrinking heights
// rho = 1e-2, 1e-3, 1e-4.  Bounded tension shows up as level ratios
// staying below 2.
struct TensionProbe {
  int rod = -1;
  std::array<double, 3> sup{};
  std::array<double, 2> ratio{};
  bool pass = false;
};
TensionProbe tension_boundedness_probe(const ModelMap& mm, int rod);

// Angle between the near-axis kernel direction of the Gram matrix
// (eigenvector of the smallest eigenvalue at (rho, z)) and the rod
// vector over z.
double kernel_angle(const GramSource& src, double z, double rho = 1e-6);

}  // namespace toric
