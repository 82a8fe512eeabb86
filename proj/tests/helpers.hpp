#pragma once

#include <random>

#include "sporadic/model.hpp"

namespace sporadic::testing {

// Harmonic oscillator benchmark (linear, single output).
inline PlantModel oscillator_plant() {
  MatrixXd A(2, 2), C(1, 2), N(2, 1);
  A << 0, 1, -4, 0;
  C << 1, 0;
  N << 1, 0;
  return PlantModel::linear(A, C, N, MatrixXd::Identity(2, 2));
}

inline ObserverGains oscillator_gains_legacy() {
  ObserverGains g;
  g.L = MatrixXd(2, 1);
  g.L << 0.3648, -0.4655;
  g.H = MatrixXd(1, 1);
  g.H << -0.3648;
  return g;
}

inline ObserverGains oscillator_gains_tuned() {
  ObserverGains g;
  g.L = MatrixXd(2, 1);
  g.L << 2.067, -3.0;
  g.H = MatrixXd(1, 1);
  g.H << -1.384;
  return g;
}

// Path-following robot benchmark (linear, two outputs).
inline PlantModel robot_plant() {
  MatrixXd A(3, 3), C(2, 3), N(3, 1), Cp(1, 3);
  A << 0, 0, 1, 0, -0.01, 0, 0, 1, 0;
  C << 1, 0, 0, 0, 0, 1;
  N << 0, 1, 0;
  Cp << 0, 1, 0;
  return PlantModel::linear(A, C, N, Cp);
}

// Flexible-link manipulator benchmark (Lipschitz nonlinear, two outputs).
inline PlantModel manipulator_plant() {
  PlantModel p;
  p.A.resize(4, 4);
  p.A << 0, 1, 0, 0, -48.6, -1.25, 48.6, 0, 0, 0, 0, 1, 19.5, 0, -19.5, 0;
  p.B.resize(4, 1);
  p.B << 0, 0, 0, -1;
  p.S.resize(1, 4);
  p.S << 0, 0, 1, 0;
  p.N.resize(4, 1);
  p.N << 0, 2, 0, 0;
  p.C.resize(2, 4);
  p.C << 1, 0, 0, 0, 0, 1, 0, 0;
  p.Cp.resize(2, 4);
  p.Cp << 0, 0, 1, 0, 0, 0, 0, 1;
  p.lipschitz_ell = 3.3;
  p.psi = [](const VectorXd& v) { return (3.33 * v.array().sin()).matrix().eval(); };
  return p;
}

inline ObserverGains manipulator_predictor_gains() {
  ObserverGains g;
  g.L.resize(4, 2);
  g.L << 9.328, 1, -48.78, 22.11, -0.0524, 3.199, 19.41, -0.9032;
  const PlantModel p = manipulator_plant();
  g.H = -p.C * g.L;
  return g;
}

inline MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c,
                              double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  MatrixXd M(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) M(i, j) = d(rng);
  return M;
}

inline MatrixXd random_spd(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  MatrixXd M = random_matrix(rng, n, n, scale);
  return (M * M.transpose() + 0.1 * scale * scale * MatrixXd::Identity(n, n)).eval();
}

inline PlantModel random_plant(std::mt19937_64& rng, Eigen::Index nz, Eigen::Index ny,
                               Eigen::Index nw = 1, Eigen::Index ns = 1, bool linear = false) {
  PlantModel p;
  p.A = random_matrix(rng, nz, nz);
  p.C = random_matrix(rng, ny, nz);
  p.N = random_matrix(rng, nz, nw);
  p.Cp = random_matrix(rng, 1, nz);
  if (linear) {
    p.B = MatrixXd::Zero(nz, 1);
    p.S = MatrixXd::Zero(1, nz);
    p.lipschitz_ell = 1.0;
    p.psi = [](const VectorXd& v) { return VectorXd::Zero(v.size()).eval(); };
  } else {
    p.B = random_matrix(rng, nz, ns);
    p.S = random_matrix(rng, ns, nz);
    p.lipschitz_ell = 0.5;
    p.psi = [](const VectorXd& v) { return (0.5 * v.array().sin()).matrix().eval(); };
  }
  return p;
}

inline ObserverGains random_gains(std::mt19937_64& rng, const PlantModel& p) {
  ObserverGains g;
  g.L = random_matrix(rng, p.nz(), p.ny());
  g.H = random_matrix(rng, p.ny(), p.ny());
  return g;
}

}  // namespace sporadic::testing
