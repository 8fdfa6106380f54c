#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "toric/exact.hpp"
#include "toric/solver.hpp"

using namespace toric;

namespace {

RodStructure flat_rods() {
  RodStructure rs;
  rs.beta = 2 * pi;
  rs.rod_vectors = {{0, 1}};
  return rs;
}

// Max |a - b| over nodes with r <= rcut, skipping the axis rows where
// the static limits are -inf.
double interior_sup(const FieldState& fs, const Field& a, const Field& b,
                    double rcut) {
  double sup = 0.0;
  for (int j = 1; j + 1 < fs.grid.ntheta; ++j)
    for (int i = 0; i < fs.grid.nr && fs.grid.r(i) <= rcut; ++i)
      sup = std::max(sup, std::abs(a(i, j) - b(i, j)));
  return sup;
}

}  // namespace

TEST_CASE("flat structure relaxes to the trivial state") {
  PolarGrid g;
  g.nr = 48;
  g.ntheta = 49;
  g.rmax = 10.0;
  const FieldState fs = solve_harmonic_map(flat_rods(), g);
  CHECK(fs.u.abs().maxCoeff() < 1e-10);
  CHECK(fs.omega.abs().maxCoeff() < 1e-10);
  CHECK(std::abs(fs.m_fit) < 1e-8);
  CHECK(std::abs(fs.j_fit) < 1e-8);
}

TEST_CASE("guards") {
  PolarGrid g;
  g.nr = 64;
  g.ntheta = 65;
  g.rmax = 16.0;

  SUBCASE("inadmissible structure") {
    RodStructure rs = kerr_rods(KerrParams{1.0, 0.0});
    rs.rod_vectors[1] = {2, 2};
    CHECK_THROWS_AS(solve_harmonic_map(rs, g), std::invalid_argument);
  }
  SUBCASE("ends must be chi rods") {
    RodStructure rs = kerr_rods(KerrParams{1.0, 0.0});
    rs.rod_vectors[2] = {1, 2};
    CHECK_THROWS_AS(solve_harmonic_map(rs, g), std::invalid_argument);
  }
  SUBCASE("outer radius must clear the rods") {
    PolarGrid small = g;
    small.rmax = 1.5;
    CHECK_THROWS_AS(solve_harmonic_map(kerr_rods(KerrParams{1.0, 0.0}), small),
                    std::invalid_argument);
  }
  SUBCASE("finite rods need axis resolution") {
    PolarGrid coarse = g;
    coarse.nr = 24;  // dr = 2/3, rod length 2
    CHECK_THROWS_AS(solve_harmonic_map(kerr_rods(KerrParams{1.0, 0.0}), coarse),
                    std::invalid_argument);
  }
  SUBCASE("iteration cap raises SolveError") {
    SolverOptions opts;
    opts.max_iters = 5;
    opts.tol = 1e-13;
    try {
      solve_harmonic_map(kerr_rods(KerrParams{1.0, 0.0}), g, opts);
      FAIL("expected SolveError");
    } catch (const SolveError& e) {
      CHECK(e.history.size() == 5);
    }
  }
}

TEST_CASE("sampled source states") {
  const KerrSource src(KerrParams{1.0, 0.4});
  PolarGrid g;
  g.nr = 64;
  g.ntheta = 65;
  g.rmax = 16.0;
  const FieldState fs = sample_state(src, g);

  SUBCASE("fields match the closed form") {
    CHECK(fs.source == &src);
    CHECK_FALSE(fs.has_nu);
    for (int i : {3, 17, 40})
      for (int j : {9, 32, 55}) {
        const WeylPoint p = g.point(i, j);
        const Mat2 gt = to_tauphi(src.gram(p), fs.rs.beta_hat(), fs.rs.omega);
        CHECK(fs.u(i, j) == doctest::Approx(std::log(gt(0, 0))).epsilon(1e-12));
        CHECK(fs.omega(i, j) ==
              doctest::Approx(gt(0, 1) / gt(0, 0)).epsilon(1e-10));
      }
  }

  SUBCASE("discrete residual is small on the closed form") {
    CHECK(residual(fs) < 2e-2);
  }

  SUBCASE("far-field fit recovers mass and spin") {
    const FarFieldFit fit = fit_far_field(fs);
    CHECK(fit.m == doctest::Approx(1.0).epsilon(2e-3));
    CHECK(fit.j == doctest::Approx(-0.4).epsilon(2e-3));
  }

  SUBCASE("conformal factor by quadrature") {
    FieldState work = fs;
    compute_nu(work);
    REQUIRE(work.has_nu);
    const Field nu_exact = sample_field(g, [&](const WeylPoint& p) {
      return src.nu(p);
    });
    CHECK(interior_sup(work, work.nu, nu_exact, 8.0) < 2e-2);
    CHECK(loop_closure_defect(work) < 1e-4);
  }

  SUBCASE("mazur distance of a state to itself vanishes") {
    const MazurReport rep = mazur_distance(fs, fs);
    CHECK(rep.sup == 0.0);
    CHECK(rep.bulk == 0.0);
  }

  SUBCASE("mazur rejects mismatched structures") {
    const KerrSource other(KerrParams{1.0, 0.1});
    const FieldState fo = sample_state(other, g);
    CHECK_THROWS_AS(mazur_distance(fs, fo), std::invalid_argument);
  }
}

TEST_CASE("schwarzschild solve against the closed form") {
  const KerrParams par{1.0, 0.0};
  const KerrSource src(par);
  PolarGrid g;
  g.nr = 128;
  g.ntheta = 129;
  g.rmax = 16.0;

  const FieldState fs = solve_harmonic_map(kerr_rods(par), g);
  const FieldState ex = sample_state(src, g);

  // Convergence record.
  CHECK(fs.sweeps > 0);
  CHECK(fs.history.back() < 1e-9);
  CHECK(fs.history.back() < fs.history.front());

  // Static problems stay static.
  CHECK(fs.omega.abs().maxCoeff() == 0.0);

  // V = e^u away from the axis rows; compare where V is order one.
  double sup = 0.0;
  for (int j = 1; j + 1 < g.ntheta; ++j)
    for (int i = 0; i < g.nr && g.r(i) <= 8.0; ++i)
      sup = std::max(sup,
                     std::abs(std::exp(fs.u(i, j)) - std::exp(ex.u(i, j))));
  CHECK(sup < 1e-2);
  CHECK(fs.m_fit == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(std::abs(fs.j_fit) < 1e-8);

  const MazurReport rep = mazur_distance(fs, ex);
  CHECK(rep.sup < 5e-3);
  CHECK(rep.bulk >= 0.0);
}

TEST_CASE("kerr solve against the closed form") {
  const KerrParams par{1.0, 0.3};
  const KerrSource src(par);
  PolarGrid g;
  g.nr = 128;
  g.ntheta = 129;
  g.rmax = 16.0;

  const FieldState fs = solve_harmonic_map(kerr_rods(par), g);
  const FieldState ex = sample_state(src, g);

  double sup_v = 0.0, sup_w = 0.0;
  for (int j = 1; j + 1 < g.ntheta; ++j)
    for (int i = 0; i < g.nr && g.r(i) <= 8.0; ++i) {
      sup_v = std::max(sup_v,
                       std::abs(std::exp(fs.u(i, j)) - std::exp(ex.u(i, j))));
      sup_w = std::max(sup_w, std::abs(fs.omega(i, j) - ex.omega(i, j)));
    }
  CHECK(sup_v < 1e-2);
  CHECK(sup_w < 2e-2);
  CHECK(fs.m_fit == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(fs.j_fit == doctest::Approx(-0.3).epsilon(2e-2));

  // The solved state's residual sits at the discrete floor.
  CHECK(residual(fs) <= residual(ex) * 1.5 + 1e-6);

  // Perturbed initial data lands on the same fixed point.
  SolverOptions opts;
  opts.perturb = 0.05;
  opts.seed = 7;
  const FieldState fp = solve_harmonic_map(kerr_rods(par), g, opts, &src);
  const MazurReport mz = mazur_distance(fp, fs);
  CHECK(mz.sup < 1e-6);
}
