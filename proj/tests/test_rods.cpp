#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "toric/rods.hpp"

using namespace toric;

TEST_CASE("vector normalization and coprimality") {
  CHECK(sign_normalize({-1, 2}) == RodVector{1, -2});
  CHECK(sign_normalize({0, -3}) == RodVector{0, 3});
  CHECK(sign_normalize({2, -5}) == RodVector{2, -5});
  CHECK(coprime({0, 1}));
  CHECK(coprime({3, -7}));
  CHECK_FALSE(coprime({2, 4}));
  CHECK_FALSE(coprime({0, 0}));
  CHECK(det2i({1, 0}, {0, 1}) == 1);
  CHECK(det2i({1, -1}, {0, 1}) == 1);
}

TEST_CASE("canonical completion is unimodular and norm-minimal") {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> d(-9, 9);
  int tested = 0;
  while (tested < 200) {
    RodVector v{d(rng), d(rng)};
    if (!coprime(v)) continue;
    ++tested;
    const RodVector u = canonical_completion(v);
    REQUIRE(std::abs(det2i(u, v)) == 1);
    const long un = long(u.v1) * u.v1 + long(u.v2) * u.v2;
    for (int a = -12; a <= 12; ++a)
      for (int b = -12; b <= 12; ++b)
        if (std::abs(det2i({a, b}, v)) == 1)
          CHECK(long(a) * a + long(b) * b >= un);
  }
  // Deterministic tie-break, smallest lexicographic pair.
  CHECK(canonical_completion({0, 1}) == RodVector{-1, 0});
  CHECK(canonical_completion({0, 1}) == canonical_completion({0, 1}));
}

TEST_CASE("adapted basis rows are (completion; rod vector)") {
  RodStructure rs;
  rs.turning_points = {-1.0, 0.2, 1.0};
  rs.rod_vectors = {{0, 1}, {1, 0}, {1, -1}, {0, 1}};
  for (int k = 0; k < rs.rods(); ++k) {
    const Eigen::Matrix2i L = adapted_basis(rs, k);
    CHECK(L(1, 0) == rs.rod_vectors[k].v1);
    CHECK(L(1, 1) == rs.rod_vectors[k].v2);
    CHECK(std::abs(L.determinant()) == 1);
  }
  CHECK(corner_epsilon(rs, 0) == -1);
  CHECK(corner_epsilon(rs, 1) == -1);
  CHECK(corner_epsilon(rs, 2) == 1);
}

TEST_CASE("intervals, lookup and lengths") {
  RodStructure rs;
  rs.turning_points = {-1.0, 1.0};
  rs.rod_vectors = {{0, 1}, {1, 0}, {0, 1}};
  CHECK(rs.rods() == 3);
  CHECK(rs.corners() == 2);
  CHECK_FALSE(rs.finite_rod(0));
  CHECK(rs.finite_rod(1));
  CHECK_FALSE(rs.finite_rod(2));
  CHECK(rs.rod_interval(0).first == -std::numeric_limits<double>::infinity());
  CHECK(rs.rod_interval(1) == std::pair{-1.0, 1.0});
  CHECK(rs.rod_interval(2).second == std::numeric_limits<double>::infinity());
  CHECK(rs.rod_at(-5.0) == 0);
  CHECK(rs.rod_at(0.0) == 1);
  CHECK(rs.rod_at(5.0) == 2);
  CHECK(rs.rod_length(1) == 2.0);
  CHECK(std::isinf(rs.rod_length(0)));
  CHECK(rs.mean_finite_length() == 2.0);
  CHECK(rs.max_abs_corner() == 1.0);
}

TEST_CASE("admissibility failures name every violation") {
  RodStructure good;
  good.turning_points = {-1.0, 1.0};
  good.rod_vectors = {{0, 1}, {1, 0}, {0, 1}};
  CHECK(admissible(good));
  CHECK(asymptotically_flat(good));

  RodStructure rs = good;
  rs.beta = 0.0;
  CHECK_FALSE(admissible(rs));

  rs = good;
  rs.turning_points = {1.0, 1.0};
  CHECK_FALSE(admissibility_failures(rs).empty());

  rs = good;
  rs.rod_vectors[1] = {2, 4};
  CHECK_FALSE(admissible(rs));

  rs = good;
  rs.rod_vectors[1] = {0, -1};  // not sign-normalized
  CHECK_FALSE(admissible(rs));

  rs = good;
  rs.rod_vectors[1] = {2, 1};  // coprime but not unimodular next to (0,1)
  CHECK_FALSE(admissible(rs));

  rs = good;
  rs.rod_vectors.pop_back();
  CHECK_FALSE(admissible(rs));

  rs = good;
  rs.rod_vectors = {{1, 0}, {0, 1}, {1, 0}};
  CHECK(admissible(rs));
  CHECK_FALSE(asymptotically_flat(rs));
}

TEST_CASE("canonicalize fixes the unipotent frame") {
  RodStructure rs;
  rs.beta = 4 * pi;  // beta_hat = 2
  rs.omega = 0.25;
  rs.turning_points = {-1.0, 1.0};
  rs.rod_vectors = {{0, 1}, {1, 3}, {0, 1}};
  const CanonicalizeResult res = canonicalize(rs);
  CHECK(res.shift == -3);
  CHECK(res.rs.rod_vectors[1] == RodVector{1, 0});
  CHECK(res.rs.omega == doctest::Approx(0.25 + 3.0 / 2.0));
  // A second pass is the identity.
  const CanonicalizeResult again = canonicalize(res.rs);
  CHECK(again.shift == 0);
  CHECK(again.rs.rod_vectors == res.rs.rod_vectors);
}

TEST_CASE("rod distance factors") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> ur(-5.0, 5.0);
  for (int n = 0; n < 100; ++n) {
    const WeylPoint p{std::abs(ur(rng)) + 1e-12, ur(rng)};
    const double za = ur(rng);
    const double mp = mu_plus(p, za), mm = mu_minus(p, za);
    const double d = std::hypot(p.rho, p.z - za);
    CHECK(mp > 0);
    CHECK(mp * mm == doctest::Approx(p.rho * p.rho).epsilon(1e-13));
    CHECK(mp + mm == doctest::Approx(2 * d).epsilon(1e-13));
  }
  // No cancellation far up the axis.
  const WeylPoint far{1e-8, 1e8};
  CHECK(mu_plus(far, 0.0) == doctest::Approx(0.5e-24).epsilon(1e-10));
}

TEST_CASE("periodic basis change round-trips") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ur(-1.0, 1.0);
  for (int n = 0; n < 50; ++n) {
    Mat2 a;
    a << 1.0 + std::abs(ur(rng)), ur(rng), 0.0, 1.0 + std::abs(ur(rng));
    const Mat2 g = a * a.transpose();
    const double bh = 0.5 + std::abs(ur(rng));
    const double om = ur(rng);
    const Mat2 gp = to_psichi(g, bh, om);
    CHECK(gp.determinant() ==
          doctest::Approx(bh * bh * g.determinant()).epsilon(1e-12));
    const Mat2 back = to_tauphi(gp, bh, om);
    CHECK((back - g).cwiseAbs().maxCoeff() < 1e-12);
  }
}
