#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace sporadic {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Lipschitz plant  zdot = A z + B psi(S z) + N w,  y = C z + eta,
/// with performance output y_p = Cp (z - zhat).
struct PlantModel {
  MatrixXd A;   // n_z x n_z
  MatrixXd B;   // n_z x n_s, zero for linear plants
  MatrixXd S;   // n_q x n_z
  MatrixXd N;   // n_z x n_w
  MatrixXd C;   // n_y x n_z
  MatrixXd Cp;  // n_yp x n_z
  double lipschitz_ell = 1.0;
  // Used only by the simulator; certificates depend on psi through (B, S, ell) alone.
  std::function<VectorXd(const VectorXd&)> psi;

  Eigen::Index nz() const { return A.rows(); }
  Eigen::Index ny() const { return C.rows(); }
  Eigen::Index nw() const { return N.cols(); }
  Eigen::Index ns() const { return B.cols(); }
  Eigen::Index nq() const { return S.rows(); }
  Eigen::Index nyp() const { return Cp.rows(); }

  bool is_linear() const { return B.size() == 0 || B.isZero(0.0); }

  /// Linear plant: B = 0 (n_z x 1), S = 0 (1 x n_z), psi identically zero.
  static PlantModel linear(MatrixXd A, MatrixXd C, MatrixXd N, MatrixXd Cp);
};

enum class DesignMethod { PropPred, PropX80, PropX8X6, ZOH, Manual };

std::string to_string(DesignMethod m);
DesignMethod method_from_string(const std::string& s);

struct ObserverGains {
  MatrixXd L;  // n_z x n_y
  MatrixXd H;  // n_y x n_y
  DesignMethod method = DesignMethod::Manual;
};

/// Aperiodic sampling constraint: gaps between samples lie in [T1, T2].
struct SamplingSpec {
  double T1 = 0.0;
  double T2 = 0.0;
};

/// Closed-loop error-system matrices
///   (eps, tt)' = F (eps, tt) + Q zeta + T w   between samples,
///   (eps, tt)+ = G (eps, tt) + N_jump eta     at samples.
struct ErrorSystemMatrices {
  MatrixXd F;      // (n_z+n_y) x (n_z+n_y)
  MatrixXd Q;      // (n_z+n_y) x n_s
  MatrixXd Tmat;   // (n_z+n_y) x n_w
  MatrixXd Gjump;  // (n_z+n_y) x (n_z+n_y)
  MatrixXd Njump;  // (n_z+n_y) x n_y
};

/// Empty iff all dimension/positivity invariants hold; entries name the offending field.
std::vector<std::string> validate_plant(const PlantModel& plant);

/// Throws std::invalid_argument on dimension mismatch.
ErrorSystemMatrices assemble_error_matrices(const PlantModel& plant, const ObserverGains& gains);

/// F = F_l * F_r with F_l = [[I,0],[C,I]] unit lower-triangular (always nonsingular),
/// F_r = [[A-LC, L],[-HC, H]].
std::pair<MatrixXd, MatrixXd> factorize_F(const PlantModel& plant, const ObserverGains& gains);

/// zeta(z, eps) = psi(S z) - psi(S (z - eps)); vanishes at eps = 0.
VectorXd zeta_mismatch(const PlantModel& plant, const VectorXd& z, const VectorXd& eps);

MatrixXd he(const MatrixXd& M);  // M + M^T

}  // namespace sporadic
