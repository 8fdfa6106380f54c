#include <cmath>
#include <stdexcept>

#include "toric/exact.hpp"

namespace toric {

namespace {

void check_params(const KerrParams& par) {
  if (!(par.mu > 0.0) || !(par.alpha >= 0.0))
    throw std::domain_error("kerr: require mu > 0, alpha >= 0");
}

double f_of(const KerrParams& par, double r) {
  return r * r - 2.0 * par.mu * r - par.alpha * par.alpha;
}

}  // namespace

double KerrParams::Omega() const {
  const double rp = r_plus();
  return alpha / (rp * rp - alpha * alpha);
}

double KerrParams::beta() const {
  const double rp = r_plus();
  return 4.0 * pi * rp * (rp * rp - alpha * alpha) / (rp * rp + alpha * alpha);
}

MetricSample kerr_eval(const KerrParams& par, double r, double theta) {
  check_params(par);
  const double rp = par.r_plus();
  if (!(r > rp)) throw std::domain_error("kerr: chart requires r > r_plus");

  const double a = par.alpha;
  const double f = f_of(par, r);
  const double st = std::sin(theta), ct = std::cos(theta);
  const double st2 = st * st;
  const double Sg = r * r - a * a * ct * ct;

  MetricSample out;
  out.basis = KillingBasis::TauPhi;
  out.gram(0, 0) = (f + a * a * st2) / Sg;
  out.gram(0, 1) = out.gram(1, 0) = -2.0 * par.mu * r * a * st2 / Sg;
  out.gram(1, 1) =
      st2 * (f * a * a * st2 + std::pow(r * r - a * a, 2)) / Sg;
  // Orbit block Sigma (dr^2/f + dtheta^2) is conformal to drho^2+dz^2.
  const double rm = r - par.mu;
  out.nu = 0.5 * std::log(Sg / (f * ct * ct + rm * rm * st2));
  out.weyl = {std::sqrt(f) * st, rm * ct};
  return out;
}

Mat2 kerr_Y(const KerrParams& par, double r, double theta) {
  check_params(par);
  const double a = par.alpha;
  const double rp = par.r_plus();
  const double rp2 = rp * rp, a2 = a * a, r2 = r * r;
  const double ct = std::cos(theta), c2t = std::cos(2.0 * theta);
  const double sh = std::sin(0.5 * theta);
  const double sh2 = sh * sh;
  const double Sg = r2 - a2 * ct * ct;
  const double d = rp2 - a2;  // 2 mu r_plus

  Mat2 Y;
  Y(1, 1) = 4.0 * a * d * (2.0 * r2 + (r2 + a2) * ct) * sh2 * sh2 / (rp * Sg);
  Y(1, 0) = -2.0 * d *
            (2.0 * a2 * (r2 - rp2) * ct + a2 * (r2 + a2) * c2t + a2 * a2 -
             2.0 * r2 * rp2 - a2 * r2) *
            sh2 / ((rp2 + a2) * Sg);
  Y(0, 0) = 2.0 * a * rp * std::pow(r - rp, 2) * d *
            (4.0 * r * rp + 2.0 * rp2 + a2 + a2 * c2t) * ct /
            (std::pow(rp2 + a2, 2) * Sg);
  Y(0, 1) = (r - rp) * d *
            (4.0 * r2 * rp - a2 * r - 3.0 * a2 * rp + (r - rp) * a2 * c2t) *
            ct / ((rp2 + a2) * Sg);
  return Y;
}

bool kerr_chart(const KerrParams& par, const WeylPoint& p, double& r,
                double& theta) {
  check_params(par);
  const double sig = std::sqrt(par.mu * par.mu + par.alpha * par.alpha);
  const double Rp = std::hypot(p.rho, p.z - sig);
  const double Rm = std::hypot(p.rho, p.z + sig);
  r = par.mu + 0.5 * (Rp + Rm);
  double ct = (Rm - Rp) / (2.0 * sig);
  ct = std::clamp(ct, -1.0, 1.0);
  theta = std::acos(ct);
  return r > par.r_plus();
}

RodStructure kerr_rods(const KerrParams& par) {
  check_params(par);
  const double sig = std::sqrt(par.mu * par.mu + par.alpha * par.alpha);
  RodStructure rs;
  rs.beta = par.beta();
  rs.omega = par.Omega();
  rs.turning_points = {-sig, sig};
  rs.rod_vectors = {{0, 1}, {1, 0}, {0, 1}};
  return rs;
}

InvariantsReport kerr_invariants(const KerrParams& par) {
  check_params(par);
  const double rp = par.r_plus();
  const double sig = std::sqrt(par.mu * par.mu + par.alpha * par.alpha);
  const double beta = par.beta();
  const double ell = (rp * rp + par.alpha * par.alpha) / rp;  // = 2 sig

  InvariantsReport rep;
  rep.beta = beta;
  rep.omega = par.Omega();
  rep.m = par.mu;
  rep.j = -par.alpha * par.mu;

  RodInvariants lo, bolt, hi;
  lo.vector = {0, 1};
  lo.z_hi = -sig;
  lo.conical = 1.0;
  bolt.vector = {1, 0};
  bolt.z_lo = -sig;
  bolt.z_hi = sig;
  bolt.length = ell;
  bolt.area = beta * ell;
  bolt.q_psi = 2.0 * beta * (rp * rp + par.alpha * par.alpha) / rp;
  bolt.q_chi = 2.0 * beta * par.alpha * (rp * rp + par.alpha * par.alpha) /
               (rp * rp);
  bolt.conical = 1.0;
  hi.vector = {0, 1};
  hi.z_lo = sig;
  hi.conical = 1.0;
  rep.rods = {lo, bolt, hi};

  rep.residuals = identity_residuals(rep);
  euclidean_action(rep);
  return rep;
}

Mat2 KerrSource::gram(const WeylPoint& p) const {
  double r, theta;
  if (!kerr_chart(par_, p, r, theta))
    throw std::domain_error("kerr: point on the bolt closure");
  const MetricSample s = kerr_eval(par_, r, theta);
  return to_psichi(s.gram, rs_.beta_hat(), rs_.omega);
}

double KerrSource::nu(const WeylPoint& p) const {
  double r, theta;
  if (!kerr_chart(par_, p, r, theta))
    throw std::domain_error("kerr: point on the bolt closure");
  return kerr_eval(par_, r, theta).nu;
}

}  // namespace toric
