#include "toric/halfflat.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace toric {

namespace {

double radius(const WeylPoint& p, double za) {
  const double dz = p.z - za;
  return std::sqrt(p.rho * p.rho + dz * dz);
}

}  // namespace

GibbonsHawkingData halfflat_build(std::vector<double> centers,
                                  double beta_hat) {
  if (beta_hat <= 0) throw std::invalid_argument("beta_hat must be positive");
  std::sort(centers.begin(), centers.end());
  for (std::size_t i = 1; i < centers.size(); ++i)
    if (centers[i] - centers[i - 1] <= 0)
      throw std::invalid_argument("coincident centers");
  GibbonsHawkingData ghd;
  ghd.beta_hat = beta_hat;
  ghd.centers = std::move(centers);
  double s = 0.0;
  for (double za : ghd.centers) s += (za < 0) ? 1.0 : (za > 0 ? -1.0 : 0.0);
  ghd.chi0 = -beta_hat * s;
  return ghd;
}

double gh_H(const GibbonsHawkingData& ghd, const WeylPoint& p) {
  double h = 1.0;
  for (double za : ghd.centers) h += ghd.beta_hat / radius(p, za);
  return h;
}

Vec2 gh_H_grad(const GibbonsHawkingData& ghd, const WeylPoint& p) {
  Vec2 g = Vec2::Zero();
  for (double za : ghd.centers) {
    const double R = radius(p, za);
    const double c = ghd.beta_hat / (R * R * R);
    g[0] -= c * p.rho;
    g[1] -= c * (p.z - za);
  }
  return g;
}

double gh_chi(const GibbonsHawkingData& ghd, const WeylPoint& p) {
  double chi = ghd.chi0;
  for (double za : ghd.centers)
    chi += ghd.beta_hat * (p.z - za) / radius(p, za);
  return chi;
}

Vec2 gh_chi_grad(const GibbonsHawkingData& ghd, const WeylPoint& p) {
  Vec2 g = Vec2::Zero();
  for (double za : ghd.centers) {
    const double R = radius(p, za);
    const double c = ghd.beta_hat / (R * R * R);
    g[0] -= c * p.rho * (p.z - za);
    g[1] += c * p.rho * p.rho;
  }
  return g;
}

GibbonsHawkingSource::GibbonsHawkingSource(GibbonsHawkingData ghd)
    : ghd_(std::move(ghd)) {
  rs_.beta = 2 * pi * ghd_.beta_hat;
  rs_.omega = 0.0;
  rs_.turning_points = ghd_.centers;
  const int n = static_cast<int>(ghd_.centers.size()) + 1;
  for (int k = 0; k < n; ++k)
    rs_.rod_vectors.push_back(k % 2 == 0 ? RodVector{0, 1} : RodVector{1, 0});
}

Mat2 GibbonsHawkingSource::gram(const WeylPoint& p) const {
  const double H = gh_H(ghd_, p);
  return to_psichi(tauphi_gram(1.0 / H, gh_chi(ghd_, p), p.rho),
                   ghd_.beta_hat, 0.0);
}

double GibbonsHawkingSource::nu(const WeylPoint& p) const {
  return 0.5 * std::log(gh_H(ghd_, p));
}

HalfFlatReport halfflat_obstruction(const GibbonsHawkingData& ghd) {
  HalfFlatReport rep;

  double span = 1.0;
  for (double za : ghd.centers) span = std::max(span, std::abs(za));

  // Tail fit of V = 1/H against 1 - 2m/r - b/r^2 over spheres well
  // outside the centers.  The 1/r^2 term absorbs the expansion of 1/H,
  // leaving m clean to the cubic order of the largest sampled 1/r.
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (double r : {1e3 * span, 2e3 * span, 4e3 * span}) {
    for (int j = 1; j < 16; ++j) {
      const double th = pi * j / 16.0;
      const WeylPoint p{r * std::sin(th), r * std::cos(th)};
      const double y = 1.0 - 1.0 / gh_H(ghd, p);
      const double f1 = 2.0 / r, f2 = 1.0 / (r * r), w = 1.0 / r;
      a11 += w * f1 * f1;
      a12 += w * f1 * f2;
      a22 += w * f2 * f2;
      b1 += w * f1 * y;
      b2 += w * f2 * y;
    }
  }
  const double det = a11 * a22 - a12 * a12;
  rep.fitted_m = det != 0 ? (b1 * a22 - b2 * a12) / det : 0.0;

  const double z_top = 100.0 * span;
  rep.chi_jump = gh_chi(ghd, WeylPoint{0.0, z_top}) -
                 gh_chi(ghd, WeylPoint{0.0, -z_top});

  rep.af = std::abs(rep.chi_jump) < 1e-6 && std::abs(rep.fitted_m) < 1e-6;
  return rep;
}

}  // namespace toric
