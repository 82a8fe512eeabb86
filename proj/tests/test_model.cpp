#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "helpers.hpp"
#include "sporadic/model.hpp"

using namespace sporadic;
using namespace sporadic::testing;

TEST_CASE("validate_plant accepts the oscillator benchmark") {
  CHECK(validate_plant(oscillator_plant()).empty());
}

TEST_CASE("validate_plant flags a C dimension mismatch") {
  PlantModel p = oscillator_plant();
  p.C = MatrixXd::Zero(1, 3);
  const auto bad = validate_plant(p);
  REQUIRE_FALSE(bad.empty());
  CHECK(bad.front().find("C") != std::string::npos);
}

TEST_CASE("validate_plant flags a nonpositive Lipschitz constant") {
  PlantModel p = manipulator_plant();
  p.lipschitz_ell = 0.0;
  const auto bad = validate_plant(p);
  REQUIRE_FALSE(bad.empty());
  CHECK(bad.front().find("lipschitz_ell") != std::string::npos);
}

TEST_CASE("error matrices match the closed-loop blocks on the oscillator") {
  const auto em = assemble_error_matrices(oscillator_plant(), oscillator_gains_legacy());
  MatrixXd F_expected(3, 3);
  F_expected << -0.3648, 1, 0.3648, -3.5345, 0, -0.4655, 0, 1, 0;
  CHECK((em.F - F_expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero gains leave F = [[A, 0],[CA, 0]]") {
  const PlantModel p = oscillator_plant();
  ObserverGains g;
  g.L = MatrixXd::Zero(2, 1);
  g.H = MatrixXd::Zero(1, 1);
  const auto em = assemble_error_matrices(p, g);
  MatrixXd F_expected(3, 3);
  F_expected.setZero();
  F_expected.topLeftCorner(2, 2) = p.A;
  F_expected.bottomLeftCorner(1, 2) = p.C * p.A;
  CHECK((em.F - F_expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("jump matrices have the stated structure") {
  const auto em = assemble_error_matrices(oscillator_plant(), oscillator_gains_legacy());
  MatrixXd G_expected(3, 3);
  G_expected << 1, 0, 0, 0, 1, 0, 0, 0, 0;
  CHECK(em.Gjump == G_expected);
  MatrixXd N_expected(3, 1);
  N_expected << 0, 0, -1;
  CHECK(em.Njump == N_expected);
  CHECK((em.Gjump * em.Gjump - em.Gjump).cwiseAbs().maxCoeff() == 0.0);  // idempotent
}

TEST_CASE("gain dimension mismatch throws") {
  ObserverGains g;
  g.L = MatrixXd::Zero(3, 1);
  g.H = MatrixXd::Zero(1, 1);
  CHECK_THROWS_AS(assemble_error_matrices(oscillator_plant(), g), std::invalid_argument);
}

TEST_CASE("F factorization reconstructs F on the oscillator") {
  const PlantModel p = oscillator_plant();
  const auto g = oscillator_gains_legacy();
  const auto [Fl, Fr] = factorize_F(p, g);
  const auto em = assemble_error_matrices(p, g);
  CHECK((Fl * Fr - em.F).cwiseAbs().maxCoeff() <= 1e-13);
  CHECK(Fl.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("F factorization holds for random plants and gains") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index nz = 1 + rng() % 5, ny = 1 + rng() % 3;
    const PlantModel p = random_plant(rng, nz, ny);
    const ObserverGains g = random_gains(rng, p);
    const auto [Fl, Fr] = factorize_F(p, g);
    const auto em = assemble_error_matrices(p, g);
    const double tol = 1e-12 * (1.0 + em.F.norm());
    CHECK((Fl * Fr - em.F).cwiseAbs().maxCoeff() <= tol);
    CHECK(Fl.determinant() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("zero-gain factorization has F_r = [[A,0],[0,0]]") {
  const PlantModel p = oscillator_plant();
  ObserverGains g;
  g.L = MatrixXd::Zero(2, 1);
  g.H = MatrixXd::Zero(1, 1);
  const auto [Fl, Fr] = factorize_F(p, g);
  MatrixXd expected = MatrixXd::Zero(3, 3);
  expected.topLeftCorner(2, 2) = p.A;
  CHECK((Fr - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mismatch function vanishes at zero error and obeys the Lipschitz bound") {
  const PlantModel p = manipulator_plant();
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const VectorXd z = random_matrix(rng, 4, 1);
    const VectorXd eps = random_matrix(rng, 4, 1);
    CHECK(zeta_mismatch(p, z, VectorXd::Zero(4)).norm() == 0.0);
    const double lhs = zeta_mismatch(p, z, eps).norm();
    // ell = 3.3 is the benchmark's stated constant; the sine slope bound uses 3.33.
    CHECK(lhs <= 3.33 * (p.S * eps).norm() + 1e-12);
  }
}
