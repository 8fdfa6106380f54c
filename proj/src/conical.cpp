#include "toric/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace toric {

namespace {

struct PointEval {
  double V = 1.0;
  double omega = 0.0;
  double nu = 0.0;
};

PointEval eval_point(const FieldState& fs, const WeylPoint& p,
                     bool need_nu) {
  PointEval out;
  if (fs.source) {
    const FieldSample s = block_fields(*fs.source, p);
    out.V = s.V;
    out.omega = s.omega;
    if (need_nu) {
      if (fs.source->has_nu())
        out.nu = fs.source->nu(p);
      else if (fs.has_nu)
        out.nu = sample_bilinear(fs.grid, fs.nu, p.r(), p.theta());
      else
        throw std::logic_error("axis diagnostics need nu");
    }
    return out;
  }
  const double r = p.r(), th = p.theta();
  out.V = std::exp(sample_bilinear(fs.grid, fs.u, r, th));
  out.omega = sample_bilinear(fs.grid, fs.omega, r, th);
  if (need_nu) {
    if (!fs.has_nu) throw std::logic_error("axis diagnostics need nu");
    out.nu = sample_bilinear(fs.grid, fs.nu, r, th);
  }
  return out;
}

// Squared-circumference factor h = rho^2 / |v_A|^2 of the rod's
// degenerating circle.
double h_value(const FieldState& fs, int rod, const WeylPoint& p) {
  const PointEval e = eval_point(fs, p, false);
  const Mat2 gp = to_psichi(tauphi_gram(e.V, e.omega, p.rho),
                            fs.rs.beta_hat(), fs.rs.omega);
  const RodVector v = fs.rs.rod_vectors.at(rod);
  const Eigen::Vector2d vv(v.v1, v.v2);
  return p.rho * p.rho / vv.dot(gp * vv);
}

// Quadratic-in-rho^2 extrapolation from rho = base, 2 base, 4 base.
template <class F>
double axis_limit(const F& f, double base) {
  const double f1 = f(base), f2 = f(2.0 * base), f3 = f(4.0 * base);
  return (64.0 * f1 - 20.0 * f2 + f3) / 45.0;
}

double sample_base(const FieldState& fs, double z) {
  if (fs.source) return 1e-3 * (1.0 + std::abs(z));
  const PolarGrid& g = fs.grid;
  return 2.0 * std::max(g.dr(), g.dtheta() * std::max(1.0, std::abs(z)));
}

double conical_at(const FieldState& fs, int rod, double z) {
  const double base = sample_base(fs, z);
  return axis_limit(
      [&](double rho) {
        const WeylPoint p{rho, z};
        const double h = h_value(fs, rod, p);
        return std::exp(eval_point(fs, p, true).nu) * std::sqrt(h);
      },
      base);
}

double h_limit(const FieldState& fs, int rod, double z, double base) {
  return axis_limit(
      [&](double rho) { return h_value(fs, rod, WeylPoint{rho, z}); }, base);
}

}  // namespace

ConicalReport conical_defects(const FieldState& fs, double tol) {
  ConicalReport rep;
  const RodStructure& rs = fs.rs;
  const double span = std::max(1.0, rs.mean_finite_length());
  for (int k = 0; k < rs.rods(); ++k) {
    const auto [lo, hi] = rs.rod_interval(k);
    double z;
    if (rs.finite_rod(k)) {
      z = 0.5 * (lo + hi);
      const double base = sample_base(fs, z);
      if (hi - lo < 8.0 * base)
        throw std::runtime_error("rod too thin to sample off-axis");
    } else if (std::isfinite(hi)) {
      z = hi - span;  // bottom rod
    } else if (std::isfinite(lo)) {
      z = lo + span;  // top rod
    } else {
      z = 0.0;  // single-rod structure
    }
    ConicalEntry e;
    e.rod = k;
    e.c = conical_at(fs, k, z);
    e.regular = std::abs(e.c - 1.0) < tol;
    rep.entries.push_back(e);
  }
  return rep;
}

CornerReport corner_smoothness(const FieldState& fs, int rod,
                               double rel_tol) {
  const RodStructure& rs = fs.rs;
  if (!rs.finite_rod(rod))
    throw std::invalid_argument("corner slopes need a finite rod");
  const auto [lo, hi] = rs.rod_interval(rod);
  const double len = hi - lo;

  // One-sided slope with the corner value pinned to h = 0, then one
  // Richardson pass; the quadratic term cancels already at one step.
  const auto slope = [&](double corner, double sgn) {
    const auto probe = [&](double d) {
      const double b1 = std::min(sample_base(fs, corner), d / 10.0);
      const double b2 = std::min(sample_base(fs, corner), d / 5.0);
      const double h1 = h_limit(fs, rod, corner + sgn * d, b1);
      const double h2 = h_limit(fs, rod, corner + sgn * 2.0 * d, b2);
      return sgn * (4.0 * h1 - h2) / (2.0 * d);
    };
    const double d = len / 20.0;
    return (4.0 * probe(d / 2.0) - probe(d)) / 3.0;
  };

  CornerReport rep;
  rep.slope_lo = slope(lo, 1.0);
  rep.slope_hi = -slope(hi, -1.0);
  rep.target = 2.0 / rs.beta_hat();
  rep.pass = std::abs(rep.slope_lo - rep.target) <= rel_tol * rep.target &&
             std::abs(rep.slope_hi - rep.target) <= rel_tol * rep.target;
  return rep;
}

BoltGeometry bolt_geometry(const FieldState& fs, int rod, int samples) {
  const RodStructure& rs = fs.rs;
  if (!rs.finite_rod(rod))
    throw std::invalid_argument("bolt geometry needs a finite rod");
  const auto [lo, hi] = rs.rod_interval(rod);
  const double len = hi - lo;

  BoltGeometry out;
  out.area_rod = rs.beta * len;
  // Midpoint panels: corner verticals are not smooth in rho^2, so the
  // quadrature never touches the rod endpoints.
  const double dz = len / samples;
  double acc = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double c = conical_at(fs, rod, lo + (k + 0.5) * dz);
    out.c_samples.push_back(c);
    acc += c * dz;
  }
  out.area = 2.0 * pi * rs.beta_hat() * acc;
  return out;
}

}  // namespace toric
