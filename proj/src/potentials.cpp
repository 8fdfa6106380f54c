#include <cmath>
#include <stdexcept>

#include "toric/invariants.hpp"

namespace toric {

namespace {

struct PathScalars {
  double u, omega;
};

PathScalars scalars_at(const FieldState& fs, double rho, double z) {
  if (fs.source) {
    const FieldSample s = block_fields(*fs.source, WeylPoint{rho, z});
    return {std::log(s.V), s.omega};
  }
  const WeylPoint p{rho, z};
  return {sample_bilinear(fs.grid, fs.u, p.r(), p.theta()),
          sample_bilinear(fs.grid, fs.omega, p.r(), p.theta())};
}

// z-rate of Y along the line rho = eps, in the (psi, chi) basis:
// dY = -eta *(bhat rho J) picks up + eta bhat rho J_rho on the dz leg.
Mat2 y_rate(const FieldState& fs, const Mat2& co_t, double z, double eps) {
  const PathScalars mid = scalars_at(fs, eps, z);
  const PathScalars lo = scalars_at(fs, 0.5 * eps, z);
  const PathScalars hi = scalars_at(fs, 1.5 * eps, z);
  const double u_r = (hi.u - lo.u) / eps;
  const double om_r = (hi.omega - lo.omega) / eps;

  const double V = std::exp(mid.u);
  const double om = mid.omega;
  const double s_r = V * V * om_r / (eps * eps);

  Mat2 j_rho;
  j_rho(0, 0) = u_r - om * s_r;
  j_rho(1, 0) = s_r;
  j_rho(0, 1) = 2.0 * om * u_r - om * om * s_r - 2.0 * om / eps + om_r;
  j_rho(1, 1) = om * s_r + 2.0 / eps - u_r;

  const Mat2 j_pc = co_t * j_rho * co_t.inverse();
  Mat2 eta;
  eta << 0, 1, -1, 0;
  return fs.rs.beta_hat() * eps * (eta * j_pc);
}

// The twist FD divides machine noise by eps^2, so the path cannot sit
// arbitrarily close to the axis; 2.5e-4 keeps the noise floor around
// 1e-10 while the three-level elimination handles the offset.
double default_eps(const FieldState& fs) {
  if (fs.source) return 2.5e-4;
  const PolarGrid& g = fs.grid;
  const double zs = 1.0 + fs.rs.max_abs_corner();
  return 3.0 * std::max(g.dr(), g.dtheta() * zs);
}

}  // namespace

YPotentialTrace compute_Y(const FieldState& fs, double eps) {
  const RodStructure& rs = fs.rs;
  if (rs.corners() < 1) return {};
  if (eps <= 0) eps = default_eps(fs);

  // co_t = L^{-T}: conjugation taking the (tau, phi) current to the
  // (psi, chi) one.
  const Mat2 co_t =
      af_basis(rs.beta_hat(), rs.omega).transpose().inverse().eval();

  // Grid-backed states feed piecewise-linear samples to the
  // quadrature, whose own error dominates; no point in tight
  // tolerances there.
  const double qtol0 = fs.source ? 1e-10 : 1e-6;
  const int qdepth = fs.source ? 20 : 12;

  YPotentialTrace out;
  for (int k = 1; k < rs.corners(); ++k) {
    const auto [lo, hi] = rs.rod_interval(k);
    const double qtol = qtol0 * (1.0 + (hi - lo));
    Mat2 lvl[3];
    for (int l = 0; l < 3; ++l) {
      const double e = eps * (1 << l);
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          lvl[l](a, b) = integrate(
              [&](double z) { return y_rate(fs, co_t, z, e)(a, b); }, lo, hi,
              qtol, qdepth);
    }
    out.path_defect = std::max(
        out.path_defect, (lvl[0] - lvl[1]).cwiseAbs().maxCoeff());
    // The offset of the rho = eps line is even in eps away from the
    // corners but linear through the corner windows; three levels
    // remove both.
    out.corner_differences.push_back(
        (8.0 * lvl[0] - 6.0 * lvl[1] + lvl[2]) / 3.0);
  }
  return out;
}

Field ernst_potential(const FieldState& fs) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  const double hr = g.dr(), ht = g.dtheta();
  const AsymptoticFit fit = fit_asymptotics(fs);

  Field W = zero_field(g);
  const double rout = g.r(nr - 1);
  for (int j = 0; j < nt; ++j)
    W(nr - 1, j) = -2.0 * fit.j * std::cos(g.theta(j)) / (rout * rout);

  // W_r = V^2 omega_theta / (r^2 sin theta) integrated inward per ray.
  const auto w_r = [&](int i, int j) {
    const double V = fs.V(i, j);
    const double om_t = (fs.omega(i, j + 1) - fs.omega(i, j - 1)) / (2.0 * ht);
    return V * V * om_t / (g.r(i) * g.r(i) * std::sin(g.theta(j)));
  };
  for (int i = nr - 2; i >= 0; --i)
    for (int j = 1; j < nt - 1; ++j)
      W(i, j) = W(i + 1, j) - 0.5 * (w_r(i, j) + w_r(i + 1, j)) * hr;
  for (int i = 0; i < nr - 1; ++i) {
    W(i, 0) = (4.0 * W(i, 1) - W(i, 2)) / 3.0;
    W(i, nt - 1) = (4.0 * W(i, nt - 2) - W(i, nt - 3)) / 3.0;
  }
  return W;
}

}  // namespace toric
