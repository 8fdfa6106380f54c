#include "toric/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace toric {

namespace {

Mat2 source_jacobian(const GramSource& src, const WeylPoint& p, double s,
                     bool radial) {
  const WeylPoint pp{p.rho + (radial ? s : 0.0), p.z + (radial ? 0.0 : s)};
  const WeylPoint pm{p.rho - (radial ? s : 0.0), p.z - (radial ? 0.0 : s)};
  const Mat2 dg = (src.gram(pp) - src.gram(pm)) / (2.0 * s);
  return Mat2(src.gram(p).inverse() * dg);
}

// Both Ricci blocks with every derivative at a single step s; the
// caller combines two step sizes into one Richardson pass.
CurvatureSample blocks_at_step(const GramSource& src, const WeylPoint& p,
                               double s) {
  CurvatureSample out;
  out.at = p;
  const double rho = p.rho, z = p.z;

  // Killing block: divergence of rho J in the flat orbit chart.
  const auto rho_jac = [&](double drho, double dz, bool radial) {
    const WeylPoint q{rho + drho, z + dz};
    return Mat2(q.rho * source_jacobian(src, q, s, radial));
  };
  Mat2 div = (rho_jac(s, 0.0, true) - rho_jac(-s, 0.0, true) +
              rho_jac(0.0, s, false) - rho_jac(0.0, -s, false)) /
             (2.0 * s);
  const double nu_c = src.nu(p);
  out.ricci_killing =
      -std::exp(-2.0 * nu_c) / (2.0 * rho) * (src.gram(p) * div);

  // Orbit block from the conformal factor and Tr(J_a J_b).
  const double nu_e = src.nu({rho + s, z}), nu_w = src.nu({rho - s, z});
  const double nu_n = src.nu({rho, z + s}), nu_s = src.nu({rho, z - s});
  const double nu_rho = (nu_e - nu_w) / (2.0 * s);
  const double nu_z = (nu_n - nu_s) / (2.0 * s);
  const double lap = (nu_e + nu_w + nu_n + nu_s - 4.0 * nu_c) / (s * s);

  const Mat2 j_rho = source_jacobian(src, p, s, true);
  const Mat2 j_z = source_jacobian(src, p, s, false);
  out.ricci_orbit(0, 0) = -lap + 1.0 / (rho * rho) + nu_rho / rho -
                          0.25 * (j_rho * j_rho).trace();
  out.ricci_orbit(0, 1) = nu_z / rho - 0.25 * (j_rho * j_z).trace();
  out.ricci_orbit(1, 0) = out.ricci_orbit(0, 1);
  out.ricci_orbit(1, 1) =
      -lap - nu_rho / rho - 0.25 * (j_z * j_z).trace();
  return out;
}

}  // namespace

CurvatureSample ricci_residual(const GramSource& src, const WeylPoint& p,
                               double h) {
  if (!(p.rho > 0.0))
    throw std::domain_error("curvature sample needs rho > 0");
  if (!src.has_nu())
    throw std::logic_error("curvature sample needs a source with nu");
  // Two nested differences reach 2h from the center.
  const double s = std::min(h, p.rho / 4.0);
  if (s < 1e-12)
    throw std::domain_error("curvature step underflow near the axis");
  const CurvatureSample coarse = blocks_at_step(src, p, s);
  const CurvatureSample fine = blocks_at_step(src, p, s / 2.0);
  CurvatureSample out;
  out.at = p;
  out.step_clamped = s < h;
  out.ricci_killing =
      (4.0 * fine.ricci_killing - coarse.ricci_killing) / 3.0;
  out.ricci_orbit = (4.0 * fine.ricci_orbit - coarse.ricci_orbit) / 3.0;
  return out;
}

CurvatureSample ricci_residual(const FieldState& fs, int i, int j) {
  const PolarGrid& g = fs.grid;
  const int nr = g.nr, nt = g.ntheta;
  if (i < 1 || i > nr - 3 || j < 2 || j > nt - 3)
    throw std::out_of_range("curvature node outside the interior stencil");
  if (!fs.has_nu)
    throw std::logic_error("curvature node needs nu computed");

  const double hr = g.dr(), ht = g.dtheta();
  const double ri = g.r(i), th = g.theta(j);
  const double s = std::sin(th), c = std::cos(th);
  const double rho = ri * s;

  CurvatureSample out;
  out.at = g.point(i, j);

  const auto rho_jac = [&](int di, int dj, bool radial) {
    Mat2 jr, jz;
    weyl_jacobians(fs, i + di, j + dj, jr, jz);
    const double rr = g.r(i + di) * std::sin(g.theta(j + dj));
    return Mat2(rr * (radial ? jr : jz));
  };
  const Mat2 dx_dr = (rho_jac(1, 0, true) - rho_jac(-1, 0, true)) / (2.0 * hr);
  const Mat2 dx_dt = (rho_jac(0, 1, true) - rho_jac(0, -1, true)) / (2.0 * ht);
  const Mat2 dy_dr =
      (rho_jac(1, 0, false) - rho_jac(-1, 0, false)) / (2.0 * hr);
  const Mat2 dy_dt =
      (rho_jac(0, 1, false) - rho_jac(0, -1, false)) / (2.0 * ht);
  const Mat2 div =
      s * dx_dr + c / ri * dx_dt + c * dy_dr - s / ri * dy_dt;

  const double V = fs.V(i, j), om = fs.omega(i, j);
  const Mat2 gm = tauphi_gram(V, om, rho);
  const double nu_c = fs.nu(i, j);
  out.ricci_killing = -std::exp(-2.0 * nu_c) / (2.0 * rho) * (gm * div);

  const double nu_r = (fs.nu(i + 1, j) - fs.nu(i - 1, j)) / (2.0 * hr);
  const double nu_t = (fs.nu(i, j + 1) - fs.nu(i, j - 1)) / (2.0 * ht);
  const double nu_rr =
      (fs.nu(i + 1, j) - 2.0 * nu_c + fs.nu(i - 1, j)) / (hr * hr);
  const double nu_tt =
      (fs.nu(i, j + 1) - 2.0 * nu_c + fs.nu(i, j - 1)) / (ht * ht);
  const double lap = nu_rr + nu_r / ri + nu_tt / (ri * ri);
  const double nu_rho = s * nu_r + c / ri * nu_t;
  const double nu_z = c * nu_r - s / ri * nu_t;

  Mat2 j_rho, j_z;
  weyl_jacobians(fs, i, j, j_rho, j_z);
  out.ricci_orbit(0, 0) = -lap + 1.0 / (rho * rho) + nu_rho / rho -
                          0.25 * (j_rho * j_rho).trace();
  out.ricci_orbit(0, 1) = nu_z / rho - 0.25 * (j_rho * j_z).trace();
  out.ricci_orbit(1, 0) = out.ricci_orbit(0, 1);
  out.ricci_orbit(1, 1) = -lap - nu_rho / rho - 0.25 * (j_z * j_z).trace();
  return out;
}

}  // namespace toric
