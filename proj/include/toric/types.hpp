#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace toric {

using Mat2 = Eigen::Matrix2d;
using Vec2 = Eigen::Vector2d;

inline constexpr double pi = std::numbers::pi_v<double>;

// Point of the orbit-space half plane, rho >= 0.
struct WeylPoint {
  double rho = 0.0;
  double z = 0.0;

  double r() const { return std::hypot(rho, z); }
  double theta() const { return std::atan2(rho, z); }  // in [0, pi], theta=0 is z>0 axis
};

inline WeylPoint from_polar(double r, double theta) {
  return {r * std::sin(theta), r * std::cos(theta)};
}

// Quintic step on [0,1]: value 0 -> 1, first and second derivative vanish at both ends.
template <typename T>
T smoothstep5(T t) {
  if (t <= T(0)) return T(0);
  if (t >= T(1)) return T(1);
  return t * t * t * (T(10) + t * (T(-15) + T(6) * t));
}

template <typename T>
T smoothstep5_d1(T t) {
  if (t <= T(0) || t >= T(1)) return T(0);
  return T(30) * t * t * (T(1) - t) * (T(1) - t);
}

template <typename T>
T smoothstep5_d2(T t) {
  if (t <= T(0) || t >= T(1)) return T(0);
  return T(60) * t * (T(1) - t) * (T(1) - T(2) * t);
}

// Polynomial extrapolation of f(x) to x = 0 given samples at positive abscissae.
double extrapolate_to_zero(std::span<const double> x, std::span<const double> f);

namespace detail {
template <typename F>
double adsimp(const F& f, double a, double b, double fa, double fm, double fb,
              double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double fl = f(0.5 * (a + m)), fr = f(0.5 * (m + b));
  const double left = (m - a) / 6 * (fa + 4 * fl + fm);
  const double right = (b - m) / 6 * (fm + 4 * fr + fb);
  const double err = left + right - whole;
  if (depth <= 0 || std::abs(err) <= 15 * tol)
    return left + right + err / 15;
  return adsimp(f, a, m, fa, fl, fm, left, tol / 2, depth - 1) +
         adsimp(f, m, b, fm, fr, fb, right, tol / 2, depth - 1);
}
}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b].
template <typename F>
double integrate(F&& f, double a, double b, double tol, int depth = 48) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6 * (fa + 4 * fm + fb);
  return detail::adsimp(f, a, b, fa, fm, fb, whole, tol, depth);
}

// Central differences with one Richardson pass, for f: R -> R.
template <typename F>
double diff1(F&& f, double x, double h) {
  const double d2 = (f(x + h) - f(x - h)) / (2 * h);
  const double d1 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4 * d1 - d2) / 3;
}

template <typename F>
double diff2(F&& f, double x, double h) {
  const double c = f(x);
  const double d2 = (f(x + h) - 2 * c + f(x - h)) / (h * h);
  const double d1 = (f(x + h / 2) - 2 * c + f(x - h / 2)) / (h * h / 4);
  return (4 * d1 - d2) / 3;
}

}  // namespace toric
