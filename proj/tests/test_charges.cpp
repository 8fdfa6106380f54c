#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "toric/exact.hpp"
#include "toric/invariants.hpp"
#include "toric/solver.hpp"

using namespace toric;

namespace {

PolarGrid small_grid(double rmax = 16.0) {
  PolarGrid g;
  g.nr = 64;
  g.ntheta = 65;
  g.rmax = rmax;
  return g;
}

// Corner differences of the closed-form Kerr potentials across the
// bolt; the psi row vanishes identically there.
Mat2 kerr_closed_dy(const KerrParams& par) {
  const double rp = par.r_plus();
  return kerr_Y(par, rp, 0.0) - kerr_Y(par, rp, pi);
}

// Same source shifted along the axis; charges must not move.
class ShiftedSource final : public GramSource {
 public:
  ShiftedSource(const GramSource& base, double dz) : base_(base), dz_(dz) {
    rs_ = base.rods();
    for (double& z : rs_.turning_points) z += dz;
  }
  const RodStructure& rods() const override { return rs_; }
  Mat2 gram(const WeylPoint& p) const override {
    return base_.gram({p.rho, p.z - dz_});
  }
  bool has_nu() const override { return base_.has_nu(); }
  double nu(const WeylPoint& p) const override {
    return base_.nu({p.rho, p.z - dz_});
  }

 private:
  const GramSource& base_;
  RodStructure rs_;
  double dz_;
};

}  // namespace

TEST_CASE("numerical potentials match the closed form") {
  const KerrParams par{1.0, 0.5};
  const KerrSource src(par);
  FieldState fs = sample_state(src, small_grid());
  const YPotentialTrace tr = compute_Y(fs);
  REQUIRE(tr.corner_differences.size() == 1);

  const Mat2 want = kerr_closed_dy(par);
  const double err = (tr.corner_differences[0] - want).cwiseAbs().maxCoeff();
  CAPTURE(tr.path_defect);
  CHECK(err < 1e-6);

  const ChargePair cp = charges(tr, fs.rs, 1);
  const double ell = 2.0 * std::hypot(par.mu, par.alpha);
  CHECK(cp.q_psi ==
        doctest::Approx(2.0 * par.beta() * ell).epsilon(1e-6));
  CHECK(cp.q_chi ==
        doctest::Approx(16.0 * pi * par.alpha * par.mu).epsilon(1e-5));
  CHECK(cp.kernel_defect < 1e-5 * cp.q_psi);
}

TEST_CASE("charges are invariant under the completion freedom") {
  const KerrParams par{1.0, 0.5};
  const RodStructure rs = kerr_rods(par);
  const Mat2 dy = kerr_closed_dy(par);
  const Eigen::Matrix2i L0 = adapted_basis(rs, 1);

  Eigen::Vector2d q0;
  bool have = false;
  for (int n = -2; n <= 2; ++n) {
    Mat2 L;
    L << L0(0, 0) + n * L0(1, 0), L0(0, 1) + n * L0(1, 1),
        L0(1, 0), L0(1, 1);
    const Mat2 q = 2.0 * pi * L.determinant() * (L * dy);
    if (!have) {
      q0 = q.row(0);
      have = true;
    } else {
      CHECK((Eigen::Vector2d(q.row(0)) - q0).cwiseAbs().maxCoeff() <
            1e-10 * q0.cwiseAbs().maxCoeff());
    }
    // The kernel row is exact for the closed-form trace.
    CHECK(std::abs(q(1, 0)) < 1e-12 * std::abs(q0[0]));
    CHECK(std::abs(q(1, 1)) < 1e-12 * std::abs(q0[0]));
  }
}

TEST_CASE("charges are invariant under axis translations") {
  const KerrParams par{1.0, 0.5};
  const KerrSource base(par);
  FieldState f0 = sample_state(base, small_grid());
  const ChargePair c0 = charges(compute_Y(f0), f0.rs, 1);

  const ShiftedSource moved(base, 0.37);
  FieldState f1 = sample_state(moved, small_grid());
  const ChargePair c1 = charges(compute_Y(f1), f1.rs, 1);

  const double scale = std::abs(c0.q_psi);
  CHECK(std::abs(c1.q_psi - c0.q_psi) < 1e-10 * scale);
  CHECK(std::abs(c1.q_chi - c0.q_chi) < 1e-10 * scale);
}

TEST_CASE("kernel defect guard") {
  const KerrParams par{1.0, 0.5};
  const RodStructure rs = kerr_rods(par);
  YPotentialTrace tr;
  Mat2 dy = kerr_closed_dy(par);
  dy(0, 0) += 0.1;  // contaminate the kernel row
  tr.corner_differences = {dy};
  CHECK_THROWS_AS(charges(tr, rs, 1, 1e-6), std::runtime_error);
}

TEST_CASE("identity residuals of the closed-form reports") {
  for (double alpha : {0.0, 0.25, 0.5, 0.8}) {
    const InvariantsReport rep = kerr_invariants(KerrParams{1.0, alpha});
    for (const auto& [key, val] : rep.residuals) {
      CAPTURE(alpha);
      CAPTURE(key);
      CHECK(std::abs(val) < 1e-12);
    }
  }
  for (double xi : {0.55, 0.6, 0.65}) {
    const InvariantsReport rep = chenteo_invariants(ChenTeoParams{1.0, xi});
    REQUIRE(rep.residuals.size() >= 6);
    for (const auto& [key, val] : rep.residuals) {
      CAPTURE(xi);
      CAPTURE(key);
      CHECK(std::abs(val) < 1e-12);
    }
  }
}

TEST_CASE("euclidean action") {
  SUBCASE("schwarzschild") {
    InvariantsReport rep = kerr_invariants(KerrParams{1.0, 0.0});
    const ActionPair ap = euclidean_action(rep);
    CHECK(ap.action == doctest::Approx(4.0 * pi).epsilon(1e-13));
    CHECK(ap.bolt_sum == doctest::Approx(4.0 * pi).epsilon(1e-13));
  }
  SUBCASE("kerr matches its bolt rewriting") {
    const InvariantsReport rep = kerr_invariants(KerrParams{1.0, 0.5});
    CHECK(rep.action ==
          doctest::Approx(0.5 * rep.beta * rep.m).epsilon(1e-13));
    CHECK(std::abs(rep.action - rep.action_bolt_sum) <
          1e-10 * std::abs(rep.action));
  }
  SUBCASE("chen-teo matches its bolt rewriting") {
    const InvariantsReport rep = chenteo_invariants(ChenTeoParams{1.0, 0.6});
    CHECK(std::abs(rep.action - rep.action_bolt_sum) <
          1e-10 * std::abs(rep.action));
  }
}

TEST_CASE("asymptotic fits") {
  const KerrParams par{1.0, 0.4};
  const KerrSource src(par);

  SUBCASE("wide band recovers m and j") {
    FieldState fs = sample_state(src, small_grid(30.0));
    const AsymptoticFit fit = fit_asymptotics(fs);
    CHECK(fit.m == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(fit.j == doctest::Approx(-0.4).epsilon(1e-3));
    CHECK_FALSE(fit.truncation_warning);
  }

  SUBCASE("short domain trips the truncation warning") {
    FieldState fs = sample_state(src, small_grid(6.0));
    const AsymptoticFit fit = fit_asymptotics(fs);
    CHECK(fit.truncation_warning);
  }
}

TEST_CASE("ernst potential") {
  SUBCASE("static fields have none") {
    const KerrSource src(KerrParams{1.0, 0.0});
    FieldState fs = sample_state(src, small_grid());
    const Field w = ernst_potential(fs);
    CHECK(w.abs().maxCoeff() < 1e-12);
  }

  SUBCASE("rotating far field carries the dipole") {
    const KerrParams par{1.0, 0.4};
    const KerrSource src(par);
    FieldState fs = sample_state(src, small_grid(30.0));
    const Field w = ernst_potential(fs);
    REQUIRE(w.rows() == fs.grid.nr);
    const int i = fs.grid.nr - 1;
    const double r = fs.grid.r(i);
    for (int j : {10, 25, 40, 55}) {
      const double want =
          -2.0 * (-par.alpha * par.mu) * std::cos(fs.grid.theta(j)) / (r * r);
      CHECK(w(i, j) == doctest::Approx(want).epsilon(5e-2));
    }
  }
}

TEST_CASE("full invariants pipeline on a sampled source") {
  const KerrParams par{1.0, 0.5};
  const KerrSource src(par);
  FieldState fs = sample_state(src, small_grid());
  const InvariantsReport rep = field_invariants(fs);

  CHECK(rep.m == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(rep.j == doctest::Approx(-0.5).epsilon(1e-3));
  REQUIRE(rep.rods.size() == 3);
  const double ell = 2.0 * std::hypot(par.mu, par.alpha);
  CHECK(rep.rods[1].length == doctest::Approx(ell).epsilon(1e-13));
  CHECK(rep.rods[1].area == doctest::Approx(rep.beta * ell).epsilon(1e-4));
  CHECK(rep.rods[1].q_psi ==
        doctest::Approx(2.0 * rep.beta * ell).epsilon(1e-5));
  CHECK(rep.rods[1].conical == doctest::Approx(1.0).epsilon(1e-5));

  // Residuals are limited by the fitted m, j.
  CHECK(std::abs(rep.residuals.at("angular-momentum")) < 1e-2);
  CHECK(std::abs(rep.residuals.at("komar-mass")) < 1e-2);
  CHECK(std::abs(rep.residuals.at("smarr")) < 1e-2);
  CHECK(std::abs(rep.residuals.at("rod-flux-1")) < 1e-2);
}
