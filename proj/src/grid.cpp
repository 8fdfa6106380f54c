#include "toric/grid.hpp"

namespace toric {

void weyl_gradient(const PolarGrid& g, const Field& f, Field& f_rho,
                   Field& f_z) {
  const int nr = g.nr, nt = g.ntheta;
  const double hr = g.dr(), ht = g.dtheta();
  f_rho.resize(nr, nt);
  f_z.resize(nr, nt);
  for (int j = 0; j < nt; ++j) {
    const double th = g.theta(j);
    const double s = std::sin(th), c = std::cos(th);
    for (int i = 0; i < nr; ++i) {
      double fr;
      if (i == 0) {
        // The node at (r0, pi - theta) is the same physical point as
        // (-r0, theta), so the first ring differences straight through
        // the origin.
        fr = (f(1, j) - f(0, nt - 1 - j)) / (2.0 * hr);
      } else if (i == nr - 1) {
        fr = (3.0 * f(i, j) - 4.0 * f(i - 1, j) + f(i - 2, j)) / (2.0 * hr);
      } else {
        fr = (f(i + 1, j) - f(i - 1, j)) / (2.0 * hr);
      }
      double ft;
      if (j == 0) {
        ft = (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2)) / (2.0 * ht);
      } else if (j == nt - 1) {
        ft = (3.0 * f(i, j) - 4.0 * f(i, j - 1) + f(i, j - 2)) / (2.0 * ht);
      } else {
        ft = (f(i, j + 1) - f(i, j - 1)) / (2.0 * ht);
      }
      const double r = g.r(i);
      f_rho(i, j) = s * fr + c / r * ft;
      f_z(i, j) = c * fr - s / r * ft;
    }
  }
}

double sample_bilinear(const PolarGrid& g, const Field& f, double r,
                       double theta) {
  const int nr = g.nr, nt = g.ntheta;
  const double hr = g.dr(), ht = g.dtheta();
  // Cell indices; fractional coordinates may leave [0, 1] at the
  // clamped edges, which extrapolates linearly.
  int i = static_cast<int>(std::floor(r / hr - 0.5));
  i = std::max(0, std::min(i, nr - 2));
  int j = static_cast<int>(std::floor(theta / ht));
  j = std::max(0, std::min(j, nt - 2));
  const auto finite_cell = [&](int ii, int jj) {
    return std::isfinite(f(ii, jj)) && std::isfinite(f(ii + 1, jj)) &&
           std::isfinite(f(ii, jj + 1)) && std::isfinite(f(ii + 1, jj + 1));
  };
  if (!finite_cell(i, j)) {
    if (j == 0 && finite_cell(i, 1))
      j = 1;
    else if (j == nt - 2 && finite_cell(i, nt - 3))
      j = nt - 3;
    else if (i + 1 <= nr - 2 && finite_cell(i + 1, j))
      i += 1;
  }
  const double x = r / hr - 0.5 - i;
  const double y = theta / ht - j;
  return (1.0 - x) * (1.0 - y) * f(i, j) + x * (1.0 - y) * f(i + 1, j) +
         (1.0 - x) * y * f(i, j + 1) + x * y * f(i + 1, j + 1);
}

}  // namespace toric
