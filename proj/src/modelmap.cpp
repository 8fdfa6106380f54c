#include "toric/modelmap.hpp"

#include <quadmath.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace toric {

namespace {

// Symmetric power A^t of an SPD 2x2 matrix.
Mat2 spd_pow(const Mat2& a, double t) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(a);
  Vec2 lam = es.eigenvalues();
  Mat2 q = es.eigenvectors();
  return q * Vec2(std::pow(lam[0], t), std::pow(lam[1], t)).asDiagonal() *
         q.transpose();
}

// Determinant-preserving geodesic between SPD matrices of equal
// determinant: g1^(1/2) (g1^(-1/2) g2 g1^(-1/2))^t g1^(1/2).
Mat2 spd_geodesic(const Mat2& g1, const Mat2& g2, double t) {
  Mat2 rt = spd_pow(g1, 0.5);
  Mat2 irt = spd_pow(g1, -0.5);
  Mat2 mid = spd_pow((irt * g2 * irt.transpose()).eval(), t);
  return rt * mid * rt.transpose();
}

std::vector<int> corner_eps(const RodStructure& rs) {
  const int n = static_cast<int>(rs.turning_points.size());
  std::vector<int> eps(n);
  for (int c = 0; c < n; ++c) {
    const auto& a = rs.rod_vectors[c];
    const auto& b = rs.rod_vectors[c + 1];
    eps[c] = a.v1 * b.v2 - a.v2 * b.v1;
  }
  return eps;
}

// Scalar shims so the strip metric can be evaluated in quad precision.
// The near-axis tension probe needs it: in double, the rho^2 cone
// factor limits any difference quotient to noise ~eps/(rho^2 h^2),
// which is O(1) at rho = 1e-4.
inline double pow_(double a, double b) { return std::pow(a, b); }
inline double sqrt_(double a) { return std::sqrt(a); }
inline __float128 pow_(__float128 a, __float128 b) { return powq(a, b); }
inline __float128 sqrt_(__float128 a) { return sqrtq(a); }

template <class S>
struct Sym2 {
  S a00, a01, a11;
};

// m diag(d0, d1) m^T, assembled exactly symmetric.  Columns of m are
// (m00, m10) and (m01, m11).
template <class S>
Sym2<S> mdmt(S m00, S m01, S m10, S m11, S d0, S d1) {
  return {d0 * m00 * m00 + d1 * m01 * m01,
          d0 * m00 * m10 + d1 * m01 * m11,
          d0 * m10 * m10 + d1 * m11 * m11};
}

// Rod potentials relative to a corner, with the cancellation-stable
// branch on the side where the naive subtraction loses digits.
template <class S>
S mu_plus_t(S rho, S dz) {
  const S d = sqrt_(rho * rho + dz * dz);
  if (dz > S(0)) return rho * rho / (d + dz);
  return d - dz;
}

template <class S>
S mu_minus_t(S rho, S dz) {
  const S d = sqrt_(rho * rho + dz * dz);
  if (dz < S(0)) return rho * rho / (d - dz);
  return d + dz;
}

// Single source of truth for the piecewise strip metric; gram() and
// the quad-precision tension probe share it.  Matches ModelMap's
// region layout: flat outside the outer transitions, rod-adapted
// corner forms between transitions, profiled interpolation inside.
template <class S>
Sym2<S> strip_eval(const RodStructure& rs, const std::vector<int>& eps,
                   const std::vector<std::array<double, 2>>& tr, bool kinked,
                   S rho, S z) {
  const S bh = S(rs.beta_hat());
  const S om = S(rs.omega);
  const int n = static_cast<int>(rs.turning_points.size());
  const auto flat = [&] {
    // L diag(1, rho^2) L^T with L = [[bh, bh om], [0, 1]].
    return mdmt<S>(bh, bh * om, S(0), S(1), S(1), rho * rho);
  };
  if (n == 0) return flat();
  if (z <= S(tr.front()[0]) || z >= S(tr.back()[1])) return flat();

  // Transition along rod k, or failing that the corner strip between
  // two neighbouring transitions.
  int k = -1;
  for (int i = 0; i <= n; ++i)
    if (z >= S(tr[i][0]) && z <= S(tr[i][1])) {
      k = i;
      break;
    }

  const auto mup = [&](int c) {
    return mu_plus_t(rho, z - S(rs.turning_points[c]));
  };
  const auto mum = [&](int c) {
    return mu_minus_t(rho, z - S(rs.turning_points[c]));
  };
  const auto& rv = rs.rod_vectors;

  if (k < 0) {
    // Corner strip: find the turning point between the bracketing
    // transitions.
    int c = 0;
    while (c < n - 1 && z > S(tr[c + 1][0])) ++c;
    return mdmt<S>(bh * S(rv[c].v2), S(eps[c] * rv[c + 1].v2),
                   -bh * S(rv[c].v1), S(-eps[c] * rv[c + 1].v1), mup(c),
                   mum(c));
  }

  const S w = S(tr[k][1]) - S(tr[k][0]);
  const S x = (z - S(tr[k][0])) / w;
  const S s = kinked ? std::clamp(x, S(0), S(1)) : smoothstep5(x);

  if (k == 0) {
    // First transition: flat on the left, corner-0 form on the right.
    const S lam = s;
    const S b = bh * om + (S(eps[0] * rv[1].v2) - bh * om) * s;
    return mdmt<S>(bh, b, S(0), S(1), pow_(mup(0), lam),
                   pow_(rho * rho, S(1) - lam) * pow_(mum(0), lam));
  }
  if (k == n) {
    // Last transition: corner-(n-1) form on the left, flat beyond.
    const S lam = S(1) - s;
    const S a = S(1) + (bh - S(1)) * s;
    const S b0 = S(-eps[n - 1]) * bh * S(rv[n - 1].v2);
    const S b = b0 + (bh * om - b0) * s;
    return mdmt<S>(a, b, S(0), bh / a, pow_(mum(n - 1), lam),
                   pow_(rho * rho, S(1) - lam) * pow_(mup(n - 1), lam));
  }

  // Interior transition between corners k-1 and k.  The mixing matrix
  // keeps determinant bhat for every profile value.
  const S lam = S(1) - s;
  const S gam = S(1) + (bh - S(1)) * s;
  const S a1 = bh / gam *
               (S(-eps[k - 1] * rv[k - 1].v1) * lam +
                S(eps[k] * rv[k + 1].v1) * (S(1) - lam));
  const S a2 = bh / gam *
               (S(-eps[k - 1] * rv[k - 1].v2) * lam +
                S(eps[k] * rv[k + 1].v2) * (S(1) - lam));
  return mdmt<S>(gam * S(rv[k].v2), a2, -gam * S(rv[k].v1), -a1,
                 pow_(mum(k - 1), lam) * pow_(mup(k), S(1) - lam),
                 pow_(mup(k - 1), lam) * pow_(mum(k), S(1) - lam));
}

}  // namespace

ModelMap::ModelMap(RodStructure rs, ModelMapOptions opts)
    : rs_(std::move(rs)), opts_(opts) {
  auto fails = admissibility_failures(rs_);
  if (!fails.empty()) {
    std::ostringstream msg;
    msg << "rod structure not admissible:";
    for (const auto& f : fails) msg << " " << f << ";";
    throw std::invalid_argument(msg.str());
  }
  // The end-transition forms and the far blend assume chi-axis ends.
  if (!asymptotically_flat(rs_))
    throw std::invalid_argument(
        "model map needs asymptotically flat ends: both semi-infinite rods "
        "must carry (0, 1)");
  eps_ = corner_eps(rs_);
  const int n = static_cast<int>(rs_.turning_points.size());

  // Mean finite rod length sets the scale of the two semi-infinite
  // transitions; structures without finite rods fall back to 1.
  double mean_len = 1.0, min_len = 1.0, max_len = 1.0;
  if (n >= 2) {
    mean_len = rs_.mean_finite_length();
    min_len = max_len = rs_.rod_length(1);
    for (int k = 1; k < n; ++k) {
      min_len = std::min(min_len, rs_.rod_length(k));
      max_len = std::max(max_len, rs_.rod_length(k));
    }
  }

  regions_.rho0 = opts_.rho0 > 0 ? opts_.rho0 : 0.5 * min_len;
  regions_.R =
      opts_.R > 0 ? opts_.R : 4.0 * (rs_.max_abs_corner() + max_len);
  if (regions_.R <= 0) regions_.R = 1.0;  // no corners: flat everywhere

  regions_.transitions.clear();
  if (n > 0) {
    regions_.transitions.resize(n + 1);
    regions_.transitions[0] = {rs_.turning_points.front() - 2.0 * mean_len,
                               rs_.turning_points.front() - mean_len};
    regions_.transitions[n] = {rs_.turning_points.back() + mean_len,
                               rs_.turning_points.back() + 2.0 * mean_len};
    for (int k = 1; k < n; ++k) {
      const double lo = rs_.turning_points[k - 1];
      const double len = rs_.rod_length(k);
      regions_.transitions[k] = {lo + len / 3.0, lo + 2.0 * len / 3.0};
    }
  }
}

void ModelMap::profile(int k, double z, double& s, double& ds,
                       double& d2s) const {
  const auto& t = regions_.transitions.at(k);
  const double w = t[1] - t[0];
  const double x = (z - t[0]) / w;
  if (x <= 0.0) {
    s = ds = d2s = 0.0;
  } else if (x >= 1.0) {
    s = 1.0;
    ds = d2s = 0.0;
  } else if (opts_.kinked_profiles) {
    s = x;
    ds = 1.0 / w;
    d2s = 0.0;
  } else {
    s = smoothstep5(x);
    ds = smoothstep5_d1(x) / w;
    d2s = smoothstep5_d2(x) / (w * w);
  }
}

Mat2 ModelMap::strip_gram(double rho, double z) const {
  const auto g = strip_eval<double>(rs_, eps_, regions_.transitions,
                                    opts_.kinked_profiles, rho, z);
  Mat2 out;
  out << g.a00, g.a01, g.a01, g.a11;
  return out;
}

Mat2 ModelMap::gram(const WeylPoint& p) const {
  if (p.rho < 0)
    throw std::domain_error("model map evaluated at negative rho");
  Mat2 g1 = strip_gram(p.rho, p.z);
  const int n = static_cast<int>(rs_.turning_points.size());
  if (n == 0) return g1;
  const auto& tr = regions_.transitions;
  if (p.z <= tr.front()[0] || p.z >= tr.back()[1]) return g1;

  const double r = p.r();
  if (r <= regions_.R) return g1;
  const double t = smoothstep5((r - regions_.R) / regions_.R);

  Mat2 l = af_basis(rs_.beta_hat(), rs_.omega);
  Mat2 d = Mat2::Zero();
  d(0, 0) = 1.0;
  d(1, 1) = p.rho * p.rho;
  Mat2 g2 = l * d * l.transpose();
  if (t >= 1.0) return g2;
  Mat2 g = spd_geodesic(g1, g2, t);
  g(0, 1) = g(1, 0) = 0.5 * (g(0, 1) + g(1, 0));
  return g;
}

ModelMap build_model(const RodStructure& rs, ModelMapOptions opts) {
  return ModelMap(rs, opts);
}

MetricSample eval_model(const ModelMap& mm, const WeylPoint& p) {
  MetricSample out;
  out.gram = mm.gram(p);
  out.basis = KillingBasis::PsiChi;
  out.nu = std::numeric_limits<double>::quiet_NaN();
  out.weyl = p;
  return out;
}

namespace {

// g^{-1} d_sigma g at q, sigma = log rho, by central differences.
// Multiplicative radial steps keep the stencil inside the half plane
// and are exact on the flat cone, so the cone's rho^2 carries no
// truncation error into the axis limit.
Mat2 u_sigma(const GramSource& src, const WeylPoint& q, double hs) {
  Mat2 dg = (src.gram(WeylPoint{q.rho * std::exp(hs), q.z}) -
             src.gram(WeylPoint{q.rho * std::exp(-hs), q.z})) /
            (2.0 * hs);
  return src.gram(q).inverse() * dg;
}

Mat2 u_z(const GramSource& src, const WeylPoint& q, double hz) {
  Mat2 dg = (src.gram(WeylPoint{q.rho, q.z + hz}) -
             src.gram(WeylPoint{q.rho, q.z - hz})) /
            (2.0 * hz);
  return src.gram(q).inverse() * dg;
}

}  // namespace

TensionResult tension(const GramSource& src, const WeylPoint& p, double h) {
  if (!(p.rho > 0))
    throw std::domain_error("tension needs rho > 0");
  const double hs = 0.1;
  const double hz = std::min(h, p.rho / 4.0);
  if (hz < 1e-12) {
    std::ostringstream msg;
    msg << "tension step underflow at rho=" << p.rho;
    throw std::domain_error(msg.str());
  }
  // (1/rho) d_rho (rho u_rho) = (1/rho^2) d_sigma u_sigma.
  Mat2 rad = (u_sigma(src, WeylPoint{p.rho * std::exp(hs), p.z}, hs) -
              u_sigma(src, WeylPoint{p.rho * std::exp(-hs), p.z}, hs)) /
             (2.0 * hs) / (p.rho * p.rho);
  Mat2 zpart = (u_z(src, WeylPoint{p.rho, p.z + hz}, hz) -
                u_z(src, WeylPoint{p.rho, p.z - hz}, hz)) /
               (2.0 * hz);
  TensionResult out;
  out.tau = rad + zpart;
  out.norm2 = 0.5 * (out.tau * out.tau).trace();
  return out;
}

namespace {

using quad = __float128;

struct QMat2 {
  quad m00, m01, m10, m11;
};

QMat2 operator+(const QMat2& a, const QMat2& b) {
  return {a.m00 + b.m00, a.m01 + b.m01, a.m10 + b.m10, a.m11 + b.m11};
}

QMat2 operator-(const QMat2& a, const QMat2& b) {
  return {a.m00 - b.m00, a.m01 - b.m01, a.m10 - b.m10, a.m11 - b.m11};
}

QMat2 operator*(quad s, const QMat2& a) {
  return {s * a.m00, s * a.m01, s * a.m10, s * a.m11};
}

// g^{-1} h for symmetric g.
QMat2 solve_sym(const Sym2<quad>& g, const Sym2<quad>& h) {
  const quad det = g.a00 * g.a11 - g.a01 * g.a01;
  return {(g.a11 * h.a00 - g.a01 * h.a01) / det,
          (g.a11 * h.a01 - g.a01 * h.a11) / det,
          (g.a00 * h.a01 - g.a01 * h.a00) / det,
          (g.a00 * h.a11 - g.a01 * h.a01) / det};
}

Sym2<quad> operator-(const Sym2<quad>& a, const Sym2<quad>& b) {
  return {a.a00 - b.a00, a.a01 - b.a01, a.a11 - b.a11};
}

struct QuadStrip {
  const RodStructure& rs;
  std::vector<int> eps;
  const std::vector<std::array<double, 2>>& tr;
  bool kinked;

  Sym2<quad> g(quad rho, quad z) const {
    return strip_eval<quad>(rs, eps, tr, kinked, rho, z);
  }
  QMat2 u_sigma(quad rho, quad z, quad hs) const {
    const Sym2<quad> dg =
        g(rho * expq(hs), z) - g(rho * expq(-hs), z);
    return solve_sym(g(rho, z), {dg.a00 / (2 * hs), dg.a01 / (2 * hs),
                                 dg.a11 / (2 * hs)});
  }
  QMat2 u_z(quad rho, quad z, quad hz) const {
    const Sym2<quad> dg = g(rho, z + hz) - g(rho, z - hz);
    return solve_sym(g(rho, z), {dg.a00 / (2 * hz), dg.a01 / (2 * hz),
                                 dg.a11 / (2 * hz)});
  }
  quad tau_norm(quad rho, quad z) const {
    const quad hs = quad(0.1);
    const quad hz = rho / 4;
    const QMat2 rad = (1 / (2 * hs * rho * rho)) *
                      (u_sigma(rho * expq(hs), z, hs) -
                       u_sigma(rho * expq(-hs), z, hs));
    const QMat2 zp =
        (1 / (2 * hz)) * (u_z(rho, z + hz, hz) - u_z(rho, z - hz, hz));
    const QMat2 t = rad + zp;
    const quad tr2 =
        t.m00 * t.m00 + t.m11 * t.m11 + 2 * t.m01 * t.m10;
    const quad n2 = tr2 / 2;
    return n2 > 0 ? sqrtq(n2) : quad(0);
  }
};

}  // namespace

TensionProbe tension_boundedness_probe(const ModelMap& mm, int rod) {
  const auto& t = mm.regions().transitions.at(rod);

  // Probe points stay well inside the far radius, so the strip metric
  // is the full model there.  Quad precision: at rho = 1e-4 a double
  // evaluation leaves only rounding noise in the difference quotients.
  // The z step shrinks with rho, so a C^0 profile kink shows up as
  // levels growing like 1/rho while a C^2 profile stays put.
  const QuadStrip qs{mm.rods(), corner_eps(mm.rods()),
                     mm.regions().transitions,
                     mm.options().kinked_profiles};

  TensionProbe probe;
  probe.rod = rod;
  const std::array<double, 3> levels{1e-2, 1e-3, 1e-4};
  const int nz = 33;
  for (int l = 0; l < 3; ++l) {
    double sup = 0.0;
    for (int i = 0; i < nz; ++i) {
      const double z = t[0] + (t[1] - t[0]) * i / (nz - 1);
      sup = std::max(
          sup, static_cast<double>(qs.tau_norm(quad(levels[l]), quad(z))));
    }
    probe.sup[l] = sup;
  }
  probe.ratio[0] = probe.sup[1] / probe.sup[0];
  probe.ratio[1] = probe.sup[2] / probe.sup[1];
  probe.pass = probe.ratio[0] < 2.0 && probe.ratio[1] < 2.0;
  return probe;
}

double kernel_angle(const GramSource& src, double z, double rho) {
  const auto& rs = src.rods();
  const RodVector v = rs.rod_vectors.at(rs.rod_at(z));
  Eigen::SelfAdjointEigenSolver<Mat2> es(src.gram(WeylPoint{rho, z}));
  Vec2 kv = es.eigenvectors().col(0);  // smallest eigenvalue first
  Vec2 vv(static_cast<double>(v.v1), static_cast<double>(v.v2));
  vv.normalize();
  const double c = std::min(std::abs(kv.dot(vv)), 1.0);
  return std::acos(c);
}

}  // namespace toric
