#include "toric/rods.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace toric {

double extrapolate_to_zero(std::span<const double> x, std::span<const double> f) {
  // Lagrange evaluation at 0.
  const int n = static_cast<int>(x.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double li = 1.0;
    for (int k = 0; k < n; ++k)
      if (k != i) li *= -x[k] / (x[i] - x[k]);
    acc += f[i] * li;
  }
  return acc;
}

RodVector sign_normalize(RodVector v) {
  if (v.v1 < 0 || (v.v1 == 0 && v.v2 < 0)) return {-v.v1, -v.v2};
  return v;
}

bool coprime(RodVector v) {
  if (v.v1 == 0 && v.v2 == 0) return false;
  return std::gcd(std::abs(v.v1), std::abs(v.v2)) == 1;
}

int det2i(RodVector a, RodVector b) { return a.v1 * b.v2 - a.v2 * b.v1; }

double RodStructure::rod_length(int k) const {
  if (!finite_rod(k)) return std::numeric_limits<double>::infinity();
  return turning_points[k] - turning_points[k - 1];
}

std::pair<double, double> RodStructure::rod_interval(int k) const {
  const double lo = (k == 0) ? -std::numeric_limits<double>::infinity() : turning_points[k - 1];
  const double hi = (k == corners()) ? std::numeric_limits<double>::infinity() : turning_points[k];
  return {lo, hi};
}

int RodStructure::rod_at(double z) const {
  int k = 0;
  while (k < corners() && z > turning_points[k]) ++k;
  return k;
}

double RodStructure::max_abs_corner() const {
  double m = 0.0;
  for (double z : turning_points) m = std::max(m, std::abs(z));
  return m;
}

double RodStructure::mean_finite_length() const {
  if (corners() < 2) return 0.0;
  double s = 0.0;
  for (int k = 1; k < corners(); ++k) s += rod_length(k);
  return s / (corners() - 1);
}

std::vector<std::string> admissibility_failures(const RodStructure& rs) {
  std::vector<std::string> out;
  if (!(rs.beta > 0)) out.push_back("beta must be positive");
  if (rs.rods() != rs.corners() + 1)
    out.push_back("need exactly one more rod vector than turning points");
  for (size_t i = 0; i + 1 < rs.turning_points.size(); ++i)
    if (!(rs.turning_points[i] < rs.turning_points[i + 1])) {
      out.push_back("turning points must be strictly increasing");
      break;
    }
  for (const auto& v : rs.rod_vectors) {
    if (!coprime(v)) {
      out.push_back("rod vectors must be nonzero and coprime");
      break;
    }
  }
  for (const auto& v : rs.rod_vectors) {
    if (sign_normalize(v) != v) {
      out.push_back("rod vectors must have first nonzero component positive");
      break;
    }
  }
  for (int k = 0; k + 1 < rs.rods(); ++k) {
    if (std::abs(det2i(rs.rod_vectors[k], rs.rod_vectors[k + 1])) != 1) {
      out.push_back("adjacent rod vectors must span the lattice (|det| = 1)");
      break;
    }
  }
  return out;
}

bool admissible(const RodStructure& rs) { return admissibility_failures(rs).empty(); }

bool asymptotically_flat(const RodStructure& rs) {
  if (!admissible(rs) || rs.rods() < 1) return false;
  const RodVector chi{0, 1};
  return rs.rod_vectors.front() == chi && rs.rod_vectors.back() == chi;
}

int corner_epsilon(const RodStructure& rs, int k) {
  return det2i(rs.rod_vectors.at(k), rs.rod_vectors.at(k + 1));
}

CanonicalizeResult canonicalize(const RodStructure& rs) {
  CanonicalizeResult res{rs, 0};
  for (const auto& v : rs.rod_vectors) {
    if (v.v1 != 0) {
      // Adjacent to a (0,1) rod this always has v1 = 1; otherwise the nearest
      // multiple is the best we can do.
      res.shift = -static_cast<int>(std::llround(double(v.v2) / v.v1));
      break;
    }
  }
  for (auto& v : res.rs.rod_vectors)
    v = sign_normalize({v.v1, v.v2 + res.shift * v.v1});
  res.rs.omega = rs.omega - res.shift / rs.beta_hat();
  return res;
}

double mu_plus(WeylPoint p, double za) {
  const double d = std::hypot(p.rho, p.z - za);
  // Subtraction cancels when z >> za; use rho^2 / mu_minus instead.
  if (p.z - za > 0) return p.rho * p.rho / (d + (p.z - za));
  return d - (p.z - za);
}

double mu_minus(WeylPoint p, double za) {
  const double d = std::hypot(p.rho, p.z - za);
  if (p.z - za < 0) return p.rho * p.rho / (d - (p.z - za));
  return d + (p.z - za);
}

Mat2 af_basis(double beta_hat, double omega) {
  Mat2 L;
  L << beta_hat, omega * beta_hat, 0, 1;
  return L;
}

Mat2 to_psichi(const Mat2& g, double beta_hat, double omega) {
  const Mat2 L = af_basis(beta_hat, omega);
  return L * g * L.transpose();
}

Mat2 to_tauphi(const Mat2& g, double beta_hat, double omega) {
  const Mat2 L = af_basis(beta_hat, omega);
  const Mat2 Li = L.inverse();
  return Li * g * Li.transpose();
}

RodVector canonical_completion(RodVector v) {
  // Solve u1*v2 - u2*v1 = +-1, minimizing |u|^2, ties by lexicographic order.
  long best_norm = std::numeric_limits<long>::max();
  RodVector best{0, 0};
  // Particular solution via extended Euclid on (v2, -v1).
  auto ext = [](int a, int b) {
    long x0 = 1, y0 = 0, x1 = 0, y1 = 1;
    long aa = a, bb = b;
    while (bb != 0) {
      const long q = aa / bb;
      std::tie(aa, bb) = std::make_pair(bb, aa - q * bb);
      std::tie(x0, x1) = std::make_pair(x1, x0 - q * x1);
      std::tie(y0, y1) = std::make_pair(y1, y0 - q * y1);
    }
    return std::make_tuple(aa, x0, y0);  // aa = gcd (sign of a), a*x0 + b*y0 = aa
  };
  auto [g, x, y] = ext(v.v2, -v.v1);
  if (g == 0) return best;  // invalid input
  // u0 = (x, y) satisfies u1*v2 - u2*v1 = g with g = +-1 for coprime v.
  const long sg = (g > 0) ? 1 : -1;
  const double vv = double(v.v1) * v.v1 + double(v.v2) * v.v2;
  for (int sign : {+1, -1}) {
    const long u1p = sign * sg * x, u2p = sign * sg * y;
    const double tstar = -(double(u1p) * v.v1 + double(u2p) * v.v2) / vv;
    for (long t = std::lround(tstar) - 2; t <= std::lround(tstar) + 2; ++t) {
      const long u1 = u1p + t * v.v1, u2 = u2p + t * v.v2;
      const long n = u1 * u1 + u2 * u2;
      if (n < best_norm ||
          (n == best_norm && std::make_pair(u1, u2) < std::make_pair(long(best.v1), long(best.v2)))) {
        best_norm = n;
        best = {static_cast<int>(u1), static_cast<int>(u2)};
      }
    }
  }
  return best;
}

Eigen::Matrix2i adapted_basis(const RodStructure& rs, int k) {
  const RodVector v = rs.rod_vectors.at(k);
  const RodVector u = canonical_completion(v);
  Eigen::Matrix2i L;
  L << u.v1, u.v2, v.v1, v.v2;
  return L;
}

}  // namespace toric
