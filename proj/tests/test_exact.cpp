#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "toric/exact.hpp"

using namespace toric;

TEST_CASE("flat metric") {
  const MetricSample s = flat_gram(WeylPoint{0.7, -0.3});
  CHECK(s.basis == KillingBasis::TauPhi);
  CHECK(s.gram(0, 0) == doctest::Approx(1.0));
  CHECK(s.gram(0, 1) == doctest::Approx(0.0));
  CHECK(s.gram(1, 1) == doctest::Approx(0.49));
  CHECK(s.nu == doctest::Approx(0.0));
}

TEST_CASE("kerr closed form") {
  const KerrParams par{1.0, 0.5};
  const double sig = std::sqrt(par.mu * par.mu + par.alpha * par.alpha);
  const double rp = par.mu + sig;

  SUBCASE("periodic data") {
    CHECK(par.r_plus() == doctest::Approx(rp).epsilon(1e-15));
    CHECK(par.Omega() ==
          doctest::Approx(par.alpha / (rp * rp - par.alpha * par.alpha)));
    CHECK(par.beta() ==
          doctest::Approx(4 * pi * rp * (rp * rp - par.alpha * par.alpha) /
                          (rp * rp + par.alpha * par.alpha)));
  }

  SUBCASE("gram determinant is rho^2") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int n = 0; n < 50; ++n) {
      const double r = rp + 0.05 + 8.0 * ur(rng);
      const double th = pi * (0.02 + 0.96 * ur(rng));
      const MetricSample s = kerr_eval(par, r, th);
      CHECK(s.gram.determinant() ==
            doctest::Approx(std::pow(s.weyl.rho, 2)).epsilon(1e-11));
    }
  }

  SUBCASE("chart inversion round-trips") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int n = 0; n < 50; ++n) {
      const double r = rp + 0.05 + 8.0 * ur(rng);
      const double th = pi * (0.02 + 0.96 * ur(rng));
      const MetricSample s = kerr_eval(par, r, th);
      double rb, thb;
      REQUIRE(kerr_chart(par, s.weyl, rb, thb));
      CHECK(rb == doctest::Approx(r).epsilon(1e-10));
      CHECK(thb == doctest::Approx(th).epsilon(1e-10));
    }
    double rb, thb;
    // Axis points off the bolt invert (theta hits 0); the bolt rod
    // itself does not.
    CHECK(kerr_chart(par, WeylPoint{0.0, 2 * sig}, rb, thb));
    CHECK(thb == doctest::Approx(0.0));
    CHECK_FALSE(kerr_chart(par, WeylPoint{0.0, 0.5 * sig}, rb, thb));
    CHECK_FALSE(kerr_chart(par, WeylPoint{0.0, 0.0}, rb, thb));
  }

  SUBCASE("rod structure and invariants") {
    const RodStructure rs = kerr_rods(par);
    REQUIRE(rs.rods() == 3);
    CHECK(rs.rod_vectors[0] == RodVector{0, 1});
    CHECK(rs.rod_vectors[1] == RodVector{1, 0});
    CHECK(rs.rod_vectors[2] == RodVector{0, 1});
    CHECK(rs.turning_points[0] == doctest::Approx(-sig));
    CHECK(rs.turning_points[1] == doctest::Approx(sig));
    CHECK(rs.beta == doctest::Approx(par.beta()));

    const InvariantsReport rep = kerr_invariants(par);
    CHECK(rep.m == doctest::Approx(par.mu).epsilon(1e-14));
    CHECK(rep.j == doctest::Approx(-par.alpha * par.mu).epsilon(1e-14));
    const double ell = 2.0 * sig;
    CHECK(rep.rods[1].length == doctest::Approx(ell).epsilon(1e-14));
    CHECK(rep.rods[1].area == doctest::Approx(rep.beta * ell).epsilon(1e-13));
    CHECK(rep.rods[1].q_psi ==
          doctest::Approx(2.0 * rep.beta * ell).epsilon(1e-12));
    CHECK(rep.rods[1].q_chi ==
          doctest::Approx(16.0 * pi * par.alpha * par.mu).epsilon(1e-12));
  }

  SUBCASE("static limit charge") {
    const InvariantsReport rep = kerr_invariants(KerrParams{1.0, 0.0});
    CHECK(rep.rods[1].q_psi == doctest::Approx(32.0 * pi).epsilon(1e-13));
    CHECK(rep.rods[1].q_chi == doctest::Approx(0.0));
  }

  SUBCASE("potential difference matrix") {
    const double eps = 1e-7;
    const Mat2 dy = kerr_Y(par, rp + eps, eps) - kerr_Y(par, rp + eps, pi - eps);
    const double fac = -(par.beta() / (2 * pi)) * 2.0 *
                       (rp * rp + par.alpha * par.alpha) / rp;
    CHECK(dy(0, 0) == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(dy(0, 1) == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(dy(1, 0) == doctest::Approx(fac).epsilon(1e-8));
    CHECK(dy(1, 1) == doctest::Approx(fac * par.alpha / rp).epsilon(1e-8));
  }
}

TEST_CASE("chen-teo closed form") {
  const ChenTeoParams par{1.0, 0.6};
  const ChenTeoConsts cc = chenteo_consts(par);

  SUBCASE("constants") {
    CHECK(cc.p == doctest::Approx(-0.72).epsilon(1e-15));
    CHECK(cc.x1 == doctest::Approx(-0.3456).epsilon(1e-12));
    CHECK(cc.x2 == doctest::Approx(-0.312).epsilon(1e-12));
    CHECK(cc.x3 == doctest::Approx(-0.2).epsilon(1e-12));
    // sqrt(1 - 4 xi^4), up to cancellation noise in the cubic route.
    CHECK(cc.s == doctest::Approx(std::sqrt(1.0 - 4.0 * std::pow(0.6, 4)))
                      .epsilon(1e-11));
    CHECK(cc.z1 < cc.z2);
    CHECK(cc.z2 < cc.z3);
    CHECK(cc.beta > 0);
  }

  SUBCASE("asymptotic invariants, frozen") {
    CHECK(cc.m == doctest::Approx(2.1314917646702605).epsilon(1e-12));
    CHECK(cc.j == doctest::Approx(-5.04).epsilon(1e-12));
  }

  SUBCASE("parameter domain") {
    CHECK_THROWS_AS(chenteo_consts(ChenTeoParams{1.0, 0.49}),
                    std::domain_error);
    CHECK_THROWS_AS(chenteo_consts(ChenTeoParams{1.0, 0.72}),
                    std::domain_error);
    CHECK_THROWS_AS(chenteo_consts(ChenTeoParams{-1.0, 0.6}),
                    std::domain_error);
  }

  SUBCASE("scale covariance") {
    // kappa carries dimension length^2: lengths scale by sqrt(kappa).
    const double lam = std::sqrt(2.0);
    const ChenTeoConsts c2 = chenteo_consts(ChenTeoParams{2.0, 0.6});
    CHECK(c2.m == doctest::Approx(lam * cc.m).epsilon(1e-12));
    CHECK(c2.j == doctest::Approx(lam * lam * cc.j).epsilon(1e-12));
    CHECK(c2.beta == doctest::Approx(lam * cc.beta).epsilon(1e-12));
    CHECK(c2.z3 == doctest::Approx(lam * cc.z3).epsilon(1e-12));
  }

  SUBCASE("gram determinant is rho^2") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int n = 0; n < 40; ++n) {
      const double x = cc.x2 + (cc.x3 - cc.x2) * (0.05 + 0.9 * ur(rng));
      const double y = cc.x1 + (cc.x2 - cc.x1) * (0.05 + 0.9 * ur(rng));
      const MetricSample s = chenteo_eval(par, x, y);
      CHECK(s.gram.determinant() ==
            doctest::Approx(std::pow(s.weyl.rho, 2)).epsilon(1e-9));
    }
  }

  SUBCASE("chart inversion round-trips") {
    std::mt19937 rng(10);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    for (int n = 0; n < 25; ++n) {
      const double x = cc.x2 + (cc.x3 - cc.x2) * (0.1 + 0.8 * ur(rng));
      const double y = cc.x1 + (cc.x2 - cc.x1) * (0.1 + 0.8 * ur(rng));
      const WeylPoint p = chenteo_weyl(par, x, y);
      double xb, yb;
      REQUIRE(chenteo_chart(par, p, xb, yb));
      CHECK(xb == doctest::Approx(x).epsilon(1e-8));
      CHECK(yb == doctest::Approx(y).epsilon(1e-8));
    }
  }

  SUBCASE("rod structure and charge oracle") {
    const RodStructure rs = chenteo_rods(par);
    REQUIRE(rs.rods() == 4);
    CHECK(rs.rod_vectors[0] == RodVector{0, 1});
    CHECK(rs.rod_vectors[1] == RodVector{1, 0});
    CHECK(rs.rod_vectors[2] == RodVector{1, -1});
    CHECK(rs.rod_vectors[3] == RodVector{0, 1});

    const InvariantsReport rep = chenteo_invariants(par);
    CHECK(rep.m == doctest::Approx(cc.m).epsilon(1e-13));
    CHECK(rep.j == doctest::Approx(cc.j).epsilon(1e-13));
    // 720/7, from the closed-form corner differences.
    CHECK(rep.rods[1].q_chi / pi ==
          doctest::Approx(102.85714285714286).epsilon(1e-9));
  }
}

TEST_CASE("superposed static rods") {
  SUBCASE("single rod is schwarzschild") {
    WeylStaticParams par;
    par.tau_rods = {{-1.0, 1.0}};
    par.beta = 8.0 * pi;
    const MetricSample s = multischwarzschild_eval(par, WeylPoint{0.0, 3.0});
    CHECK(s.gram(0, 0) == doctest::Approx(0.5).epsilon(1e-12));  // 1 - 2/4
    CHECK(s.gram(0, 1) == doctest::Approx(0.0));
    // Outer axis: e^{2 nu} = 1 / V.
    CHECK(s.nu == doctest::Approx(-0.5 * std::log(0.5)).epsilon(1e-9));
  }

  SUBCASE("three equal bolts, strut value 45/64") {
    WeylStaticParams par;
    par.tau_rods = {{-5.0, -3.0}, {-1.0, 1.0}, {3.0, 5.0}};
    CHECK(multischwarzschild_strut(par, 0) ==
          doctest::Approx(45.0 / 64.0).epsilon(1e-12));
    CHECK(multischwarzschild_strut(par, 1) ==
          doctest::Approx(45.0 / 64.0).epsilon(1e-12));
  }

  SUBCASE("rod structure alternates") {
    WeylStaticParams par;
    par.tau_rods = {{-3.0, -1.0}, {1.0, 3.0}};
    const RodStructure rs = multischwarzschild_rods(par);
    REQUIRE(rs.rods() == 5);
    CHECK(rs.rod_vectors[0] == RodVector{0, 1});
    CHECK(rs.rod_vectors[1] == RodVector{1, 0});
    CHECK(rs.rod_vectors[2] == RodVector{0, 1});
    CHECK(rs.rod_vectors[3] == RodVector{1, 0});
    CHECK(rs.rod_vectors[4] == RodVector{0, 1});
  }

  SUBCASE("log potential gradient is consistent") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> ur(-4.0, 4.0);
    for (int n = 0; n < 40; ++n) {
      const WeylPoint p{0.3 + std::abs(ur(rng)), ur(rng)};
      const Vec2 g = rod_log_potential_grad(p, -1.0, 1.0);
      const double h = 1e-5;
      const double dr =
          (rod_log_potential({p.rho + h, p.z}, -1, 1) -
           rod_log_potential({p.rho - h, p.z}, -1, 1)) /
          (2 * h);
      const double dz =
          (rod_log_potential({p.rho, p.z + h}, -1, 1) -
           rod_log_potential({p.rho, p.z - h}, -1, 1)) /
          (2 * h);
      CHECK(g[0] == doctest::Approx(dr).epsilon(1e-6));
      CHECK(g[1] == doctest::Approx(dz).epsilon(1e-6));
    }
  }

  SUBCASE("on-rod potential diverges") {
    CHECK(rod_log_potential(WeylPoint{0.0, 0.0}, -1.0, 1.0) ==
          -std::numeric_limits<double>::infinity());
  }
}
