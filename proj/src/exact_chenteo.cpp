#include <cmath>
#include <stdexcept>

#include "toric/exact.hpp"

namespace toric {

namespace {

double poly(const std::array<double, 4>& a, double u) {
  return a[0] + u * (a[1] + u * (a[2] + u * a[3]));
}

double dpoly(const std::array<double, 4>& a, double u) {
  return a[1] + u * (2.0 * a[2] + u * 3.0 * a[3]);
}

struct ChartPoint {
  double rho, z;
  double rho_x, rho_y, z_x, z_y;
};

// rho, z and their analytic (x, y) partials.
ChartPoint weyl_chart(const ChenTeoConsts& cc, double x, double y) {
  const double X = poly(cc.a, x), Y = poly(cc.a, y);
  const double Xp = dpoly(cc.a, x), Yp = dpoly(cc.a, y);
  const double d = x - y, d2 = d * d, d3 = d2 * d;
  const double q = std::sqrt(-X * Y);
  const double cs = cc.c * cc.s;  // negative

  ChartPoint out;
  out.rho = -cs * q / d2;
  out.rho_x = -cs * (-Xp * Y / (2.0 * q * d2) - 2.0 * q / d3);
  out.rho_y = -cs * (-X * Yp / (2.0 * q * d2) + 2.0 * q / d3);

  const double N =
      2.0 * (cc.a[0] + cc.a[2] * x * y) + (x + y) * (cc.a[1] + cc.a[3] * x * y);
  const double Nx = 2.0 * cc.a[2] * y + (cc.a[1] + cc.a[3] * x * y) +
                    (x + y) * cc.a[3] * y;
  const double Ny = 2.0 * cc.a[2] * x + (cc.a[1] + cc.a[3] * x * y) +
                    (x + y) * cc.a[3] * x;
  out.z = cs * N / (2.0 * d2);
  out.z_x = cs * (Nx / (2.0 * d2) - N / d3);
  out.z_y = cs * (Ny / (2.0 * d2) + N / d3);
  return out;
}

double H_of(const ChenTeoConsts& cc, double x, double y) {
  const double nu = cc.p;
  return (nu * x + y) * ((nu * x - y) * (cc.a[1] - cc.a[3] * x * y) -
                         2.0 * (1.0 - nu) * cc.a[0]);
}

double F_of(const ChenTeoConsts& cc, double x, double y) {
  return y * y * poly(cc.a, x) - x * x * poly(cc.a, y);
}

double G_of(const ChenTeoConsts& cc, double x, double y) {
  const double nu = cc.p;
  const double X = poly(cc.a, x), Y = poly(cc.a, y);
  return (nu * nu * cc.a[0] + 2.0 * nu * cc.a[3] * y * y * y) * X +
         (cc.a[0] - 2.0 * nu * cc.a[0] - 2.0 * nu * cc.a[1] * x) * Y;
}

}  // namespace

ChenTeoConsts chenteo_consts(const ChenTeoParams& par) {
  const double xi = par.xi, k = par.kappa;
  if (!(k > 0.0)) throw std::domain_error("chenteo: require kappa > 0");
  if (!(xi > 0.5) || !(xi < 1.0 / std::sqrt(2.0)))
    throw std::domain_error("chenteo: require 1/2 < xi < 1/sqrt(2)");

  ChenTeoConsts cc;
  cc.kappa = k;
  cc.p = -2.0 * xi * xi;
  const double xi2 = xi * xi, xi3 = xi2 * xi, xi4 = xi2 * xi2;
  cc.a[0] = 4.0 * (1.0 - xi) * (2.0 * xi - 1.0) *
            (1.0 - 2.0 * xi + 2.0 * xi2) * xi4;
  cc.a[1] = -xi * (1.0 - 4.0 * xi + 10.0 * xi2 - 20.0 * xi3 + 20.0 * xi4 -
                   16.0 * xi4 * xi + 8.0 * xi4 * xi2);
  cc.a[2] = -1.0 + 3.0 * xi - 2.0 * xi2 + 6.0 * xi3 - 4.0 * xi4;
  cc.a[3] = 1.0;
  cc.x1 = -4.0 * xi3 * (1.0 - xi);
  cc.x2 = -xi * (1.0 - 2.0 * xi + 2.0 * xi2);
  cc.x3 = 1.0 - 2.0 * xi;

  const double sk = std::sqrt(k);
  const double u = 1.0 - 2.0 * xi + 2.0 * xi2;  // positive on the range
  const double w = 1.0 - 2.0 * xi2;
  cc.b = -8.0 * sk * xi3 *
         (8.0 * xi4 * xi - 16.0 * xi4 + 12.0 * xi3 - 8.0 * xi2 + 4.0 * xi -
          1.0) /
         ((1.0 - xi) * (2.0 * xi - 1.0) * w * w);
  cc.c = -2.0 * sk * u / ((1.0 - xi) * (2.0 * xi - 1.0) * w * w);
  // Normalization fixed by g_tt -> 1 at infinity.
  cc.s = std::sqrt(H_of(cc, cc.x2, cc.x2) / (cc.x2 * cc.x2 * dpoly(cc.a, cc.x2)));

  cc.beta = 16.0 * pi * sk * xi4 / (std::sqrt(1.0 - 4.0 * xi4) * u * u);
  cc.Omega = (1.0 - xi) * (1.0 - xi) * std::sqrt(1.0 - 4.0 * xi4) /
             (2.0 * sk * xi2);
  cc.m = sk * (1.0 + 2.0 * xi2) * (1.0 + 2.0 * xi2) /
         (2.0 * std::sqrt(1.0 - 4.0 * xi4));
  cc.j = -k * xi2 * (1.0 - xi + 2.0 * xi2) / ((1.0 - xi) * (2.0 * xi - 1.0));

  cc.z1 = weyl_chart(cc, cc.x2, cc.x1).z;
  cc.z2 = weyl_chart(cc, cc.x3, cc.x1).z;
  cc.z3 = weyl_chart(cc, cc.x3, cc.x2).z;
  return cc;
}

WeylPoint chenteo_weyl(const ChenTeoParams& par, double x, double y) {
  const ChenTeoConsts cc = chenteo_consts(par);
  const ChartPoint cp = weyl_chart(cc, x, y);
  return {cp.rho, cp.z};
}

namespace {

MetricSample eval_at(const ChenTeoConsts& cc, double x, double y) {
  const double d = x - y;
  const double F = F_of(cc, x, y), H = H_of(cc, x, y), G = G_of(cc, x, y);
  const double X = poly(cc.a, x), Y = poly(cc.a, y);

  const double gtt_bar = F / (d * H);
  const double gtp_bar = G / (d * H);
  const double gpp_bar = G * G / (d * H * F) - H * X * Y / (d * d * d * F);

  const double s = cc.s, b = cc.b, c = cc.c;
  MetricSample out;
  out.basis = KillingBasis::TauPhi;
  out.gram(0, 0) = s * s * gtt_bar;
  out.gram(0, 1) = out.gram(1, 0) = s * (b * gtt_bar + c * gtp_bar);
  out.gram(1, 1) =
      b * b * gtt_bar + 2.0 * b * c * gtp_bar + c * c * gpp_bar;

  const ChartPoint cp = weyl_chart(cc, x, y);
  const double conf = cc.kappa * H / (d * d * d * X);
  out.nu = 0.5 * std::log(conf / (cp.rho_x * cp.rho_x + cp.z_x * cp.z_x));
  out.weyl = {cp.rho, cp.z};
  return out;
}

bool newton_chart(const ChenTeoConsts& cc, const WeylPoint& target, double& x,
                  double& y) {
  const double scale = std::max(std::abs(cc.z1), std::abs(cc.z3));
  const double wx = cc.x3 - cc.x2, wy = cc.x2 - cc.x1;

  // Seed: asymptotic chart when far out, coarse scan otherwise.
  const double r = std::hypot(target.rho, target.z);
  if (r > 8.0 * scale) {
    const double th = std::atan2(target.rho, target.z);
    const double ch = std::cos(0.5 * th), sh = std::sin(0.5 * th);
    const double lead = -cc.x2 * cc.s * std::sqrt(cc.kappa);
    x = cc.x2 + lead * ch * ch / r;
    y = cc.x2 - lead * sh * sh / r;
  } else {
    double best = std::numeric_limits<double>::infinity();
    const int n = 48;
    for (int i = 0; i < n; ++i)
      for (int jj = 0; jj < n; ++jj) {
        const double xt = cc.x2 + wx * (i + 0.5) / n;
        const double yt = cc.x1 + wy * (jj + 0.5) / n;
        const ChartPoint cp = weyl_chart(cc, xt, yt);
        const double miss = std::hypot(cp.rho - target.rho, cp.z - target.z);
        if (miss < best) {
          best = miss;
          x = xt;
          y = yt;
        }
      }
  }

  const double tol = 1e-13 * std::max(scale, r);
  for (int it = 0; it < 200; ++it) {
    const ChartPoint cp = weyl_chart(cc, x, y);
    const double fr = cp.rho - target.rho, fz = cp.z - target.z;
    if (std::hypot(fr, fz) < tol) return true;
    const double det = cp.rho_x * cp.z_y - cp.rho_y * cp.z_x;
    if (det == 0.0) return false;
    double dx = -(cp.z_y * fr - cp.rho_y * fz) / det;
    double dy = -(-cp.z_x * fr + cp.rho_x * fz) / det;
    // Keep the iterate strictly inside the coordinate rectangle.
    double lim = 1.0;
    if (x + dx >= cc.x3) lim = std::min(lim, 0.9 * (cc.x3 - x) / dx);
    if (x + dx <= cc.x2) lim = std::min(lim, 0.9 * (cc.x2 - x) / dx);
    if (y + dy >= cc.x2) lim = std::min(lim, 0.9 * (cc.x2 - y) / dy);
    if (y + dy <= cc.x1) lim = std::min(lim, 0.9 * (cc.x1 - y) / dy);
    x += lim * dx;
    y += lim * dy;
  }
  return false;
}

}  // namespace

MetricSample chenteo_eval(const ChenTeoParams& par, double x, double y) {
  const ChenTeoConsts cc = chenteo_consts(par);
  if (!(cc.x1 < y && y < cc.x2 && cc.x2 < x && x < cc.x3))
    throw std::domain_error("chenteo: chart point outside rectangle");
  return eval_at(cc, x, y);
}

bool chenteo_chart(const ChenTeoParams& par, const WeylPoint& p, double& x,
                   double& y) {
  const ChenTeoConsts cc = chenteo_consts(par);
  return newton_chart(cc, p, x, y);
}

RodStructure chenteo_rods(const ChenTeoParams& par) {
  const ChenTeoConsts cc = chenteo_consts(par);
  RodStructure rs;
  rs.beta = cc.beta;
  rs.omega = cc.Omega;
  rs.turning_points = {cc.z1, cc.z2, cc.z3};
  rs.rod_vectors = {{0, 1}, {1, 0}, {1, -1}, {0, 1}};
  return rs;
}

InvariantsReport chenteo_invariants(const ChenTeoParams& par) {
  const ChenTeoConsts cc = chenteo_consts(par);
  const double k = par.kappa, xi = par.xi;
  const double xi2 = xi * xi, xi4 = xi2 * xi2;
  const double u = 1.0 - 2.0 * xi + 2.0 * xi2;
  const double w = 1.0 - 2.0 * xi2;

  InvariantsReport rep;
  rep.beta = cc.beta;
  rep.omega = cc.Omega;
  rep.m = cc.m;
  rep.j = cc.j;

  RodInvariants lo, c2, c3, hi;
  lo.vector = {0, 1};
  lo.z_hi = cc.z1;
  lo.conical = 1.0;
  c2.vector = {1, 0};
  c2.z_lo = cc.z1;
  c2.z_hi = cc.z2;
  c2.length = cc.z2 - cc.z1;
  c2.area = cc.beta * c2.length;
  c2.q_psi = 32.0 * pi * k * xi4 / ((2.0 * xi - 1.0) * w * u);
  c2.q_chi = 16.0 * pi * k * xi2 / ((2.0 * xi - 1.0) * w);
  c2.conical = 1.0;
  c3.vector = {1, -1};
  c3.z_lo = cc.z2;
  c3.z_hi = cc.z3;
  c3.length = cc.z3 - cc.z2;
  c3.area = cc.beta * c3.length;
  c3.q_psi = 64.0 * pi * k * xi4 * xi2 / (w * u);
  c3.q_chi = -32.0 * pi * k * xi4 * xi / ((1.0 - xi) * w);
  c3.conical = 1.0;
  hi.vector = {0, 1};
  hi.z_lo = cc.z3;
  hi.conical = 1.0;
  rep.rods = {lo, c2, c3, hi};

  rep.residuals = identity_residuals(rep);
  euclidean_action(rep);
  return rep;
}

ChenTeoSource::ChenTeoSource(const ChenTeoParams& par)
    : par_(par), cc_(chenteo_consts(par)), rs_(chenteo_rods(par)) {}

Mat2 ChenTeoSource::gram(const WeylPoint& p) const {
  double x, y;
  if (!newton_chart(cc_, p, x, y))
    throw std::domain_error("chenteo: chart inversion failed");
  const MetricSample s = eval_at(cc_, x, y);
  return to_psichi(s.gram, rs_.beta_hat(), rs_.omega);
}

double ChenTeoSource::nu(const WeylPoint& p) const {
  double x, y;
  if (!newton_chart(cc_, p, x, y))
    throw std::domain_error("chenteo: chart inversion failed");
  return eval_at(cc_, x, y).nu;
}

}  // namespace toric
