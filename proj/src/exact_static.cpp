#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "toric/exact.hpp"

namespace toric {

Mat2 tauphi_gram(double V, double omega, double rho) {
  Mat2 g;
  g(0, 0) = V;
  g(0, 1) = g(1, 0) = V * omega;
  g(1, 1) = rho * rho / V + V * omega * omega;
  return g;
}

FieldSample block_fields(const GramSource& src, const WeylPoint& p) {
  const RodStructure& rs = src.rods();
  const Mat2 g = to_tauphi(src.gram(p), rs.beta_hat(), rs.omega);
  return {g(0, 0), g(0, 1) / g(0, 0)};
}

MetricSample flat_gram(const WeylPoint& p) {
  MetricSample out;
  out.basis = KillingBasis::TauPhi;
  out.gram(0, 0) = 1.0;
  out.gram(1, 1) = p.rho * p.rho;
  out.nu = 0.0;
  out.weyl = p;
  return out;
}

namespace {

struct Rod {
  double a, b;
  double len() const { return b - a; }
};

std::vector<Rod> sorted_rods(const WeylStaticParams& par) {
  std::vector<Rod> rods;
  rods.reserve(par.tau_rods.size());
  for (const auto& iv : par.tau_rods) {
    if (!(iv[0] < iv[1]))
      throw std::domain_error("static: degenerate tau rod");
    rods.push_back({iv[0], iv[1]});
  }
  std::sort(rods.begin(), rods.end(),
            [](const Rod& l, const Rod& r) { return l.a < r.a; });
  for (std::size_t k = 1; k < rods.size(); ++k)
    if (!(rods[k - 1].b < rods[k].a))
      throw std::domain_error("static: tau rods overlap");
  return rods;
}

// log V = 2U and its gradient for one rod's segment potential.
struct Segment {
  double twoU, twoU_rho, twoU_z;
};

Segment segment_potential(const Rod& rod, const WeylPoint& p) {
  const double Ra = std::hypot(p.rho, p.z - rod.a);
  const double Rb = std::hypot(p.rho, p.z - rod.b);
  const double S = Ra + Rb;
  const double l = rod.len();
  Segment seg;
  seg.twoU = std::log((S - l) / (S + l));
  // d(2U)/dS = 2l / (S^2 - l^2)
  const double dS = 2.0 * l / (S * S - l * l);
  seg.twoU_rho = dS * (p.rho / Ra + p.rho / Rb);
  seg.twoU_z = dS * ((p.z - rod.a) / Ra + (p.z - rod.b) / Rb);
  return seg;
}

struct Potential {
  double u, u_rho, u_z;  // u = log V
};

Potential total_potential(const std::vector<Rod>& rods, const WeylPoint& p) {
  Potential pot{0.0, 0.0, 0.0};
  for (const Rod& rod : rods) {
    const Segment seg = segment_potential(rod, p);
    pot.u += seg.twoU;
    pot.u_rho += seg.twoU_rho;
    pot.u_z += seg.twoU_z;
  }
  return pot;
}

// Exact gradient of nu for a static field: with U = u/2,
// nu_rho = rho (U_rho^2 - U_z^2) - U_rho, nu_z = 2 rho U_rho U_z - U_z.
Vec2 nu_gradient(const std::vector<Rod>& rods, const WeylPoint& p) {
  const Potential pot = total_potential(rods, p);
  const double Ur = 0.5 * pot.u_rho, Uz = 0.5 * pot.u_z;
  return {p.rho * (Ur * Ur - Uz * Uz) - Ur, 2.0 * p.rho * Ur * Uz - Uz};
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
  const double left = (m - a) / 6.0 * (fa + 4.0 * fl + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * fr + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) < 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, fl, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, fr, fb, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

// nu by quadrature along the radial ray out to r_far, seeded with the
// leading m/r falloff there.
double nu_by_quadrature(const std::vector<Rod>& rods, const WeylPoint& p) {
  if (rods.empty()) return 0.0;
  double scale = 1.0, mass = 0.0;
  for (const Rod& rod : rods) {
    scale = std::max({scale, std::abs(rod.a), std::abs(rod.b)});
    mass += 0.5 * rod.len();
  }
  const double r0 = std::max(p.r(), 1e-14 * scale);
  const double r_far = 1e8 * scale;
  const double th = p.theta();
  const double st = std::sin(th), ct = std::cos(th);
  auto dnu_dlogr = [&](double t) {
    const double r = std::exp(t);
    const Vec2 grad = nu_gradient(rods, {r * st, r * ct});
    return (grad[0] * st + grad[1] * ct) * r;
  };
  const double integral =
      adaptive_simpson(dnu_dlogr, std::log(r0), std::log(r_far), 1e-13);
  return mass / r_far - integral;
}

}  // namespace

MetricSample multischwarzschild_eval(const WeylStaticParams& par,
                                     const WeylPoint& p) {
  const std::vector<Rod> rods = sorted_rods(par);
  const Potential pot = total_potential(rods, p);
  const double V = std::exp(pot.u);
  MetricSample out;
  out.basis = KillingBasis::TauPhi;
  out.gram = tauphi_gram(V, 0.0, p.rho);
  out.nu = nu_by_quadrature(rods, p);
  out.weyl = p;
  return out;
}

RodStructure multischwarzschild_rods(const WeylStaticParams& par) {
  const std::vector<Rod> rods = sorted_rods(par);
  RodStructure rs;
  rs.beta = par.beta;
  rs.omega = 0.0;
  rs.rod_vectors.push_back({0, 1});
  for (const Rod& rod : rods) {
    rs.turning_points.push_back(rod.a);
    rs.turning_points.push_back(rod.b);
    rs.rod_vectors.push_back({1, 0});
    rs.rod_vectors.push_back({0, 1});
  }
  return rs;
}

double multischwarzschild_strut(const WeylStaticParams& par, std::size_t gap) {
  const std::vector<Rod> rods = sorted_rods(par);
  if (gap + 1 >= rods.size())
    throw std::out_of_range("static: gap index past last interior rod");
  double c = 1.0;
  for (std::size_t i = 0; i <= gap; ++i)
    for (std::size_t j = gap + 1; j < rods.size(); ++j) {
      const Rod &A = rods[i], &B = rods[j];
      c *= (A.b - B.a) * (A.a - B.b) / ((A.a - B.a) * (A.b - B.b));
    }
  return c;
}

double rod_log_potential(const WeylPoint& p, double z_lo, double z_hi) {
  return segment_potential(Rod{z_lo, z_hi}, p).twoU;
}

Vec2 rod_log_potential_grad(const WeylPoint& p, double z_lo, double z_hi) {
  const Segment seg = segment_potential(Rod{z_lo, z_hi}, p);
  return {seg.twoU_rho, seg.twoU_z};
}

Mat2 WeylStaticSource::gram(const WeylPoint& p) const {
  const Potential pot = total_potential(sorted_rods(par_), p);
  const Mat2 g = tauphi_gram(std::exp(pot.u), 0.0, p.rho);
  return to_psichi(g, rs_.beta_hat(), rs_.omega);
}

double WeylStaticSource::nu(const WeylPoint& p) const {
  return nu_by_quadrature(sorted_rods(par_), p);
}

}  // namespace toric
