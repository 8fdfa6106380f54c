#pragma once

#include <Eigen/Dense>

#include "toric/types.hpp"

namespace toric {

// Half-disk {rho >= 0, r <= rmax} in polar coordinates.  Radial nodes
// are staggered off the origin so no node sits at r = 0; angular nodes
// include both halves of the axis (theta = 0 is the z > 0 half).
struct PolarGrid {
  int nr = 400;
  int ntheta = 400;
  double rmax = 40.0;

  double dr() const { return rmax / nr; }
  double dtheta() const { return pi / (ntheta - 1); }
  double r(int i) const { return (i + 0.5) * dr(); }
  double theta(int j) const { return j * dtheta(); }
  WeylPoint point(int i, int j) const { return from_polar(r(i), theta(j)); }

  Eigen::Index nodes() const {
    return static_cast<Eigen::Index>(nr) * ntheta;
  }
};

// Node-indexed scalar field, nr rows by ntheta columns.
using Field = Eigen::ArrayXXd;

inline Field zero_field(const PolarGrid& g) {
  return Field::Zero(g.nr, g.ntheta);
}

template <class F>
Field sample_field(const PolarGrid& g, F&& f) {
  Field out(g.nr, g.ntheta);
  for (int j = 0; j < g.ntheta; ++j)
    for (int i = 0; i < g.nr; ++i) out(i, j) = f(g.point(i, j));
  return out;
}

// Gradient of a nodal field in Weyl components (d/drho, d/dz) by
// second-order differences; one-sided at the outer ring, pass-through
// at the inner ring, one-sided at the axis rows.
void weyl_gradient(const PolarGrid& g, const Field& f, Field& f_rho,
                   Field& f_z);

// Bilinear interpolation in (r, theta); clamps to the covered annulus
// and steps the stencil inward off any non-finite node (axis limits
// can be -inf on static rods).
double sample_bilinear(const PolarGrid& g, const Field& f, double r,
                       double theta);

}  // namespace toric
