#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sporadic/model.hpp"

namespace sporadic {

struct VarId {
  std::size_t index = 0;
  std::string label;
};

/// constant + sum_k x_k * terms[k], all symmetric and square of the same dimension.
struct AffineSymMatrix {
  Eigen::Index dim = 0;
  MatrixXd constant;
  std::vector<std::pair<std::size_t, MatrixXd>> terms;  // (variable index, coefficient)

  MatrixXd eval(const VectorXd& x) const;
};

/// Named matrix-valued decision block; symmetric blocks alias upper-triangle scalars.
struct MatrixVar {
  std::string name;
  Eigen::Index rows = 0, cols = 0;
  bool symmetric = false;
  std::vector<std::size_t> idx;  // row-major map entry -> scalar variable index

  MatrixXd value(const VectorXd& x) const;
};

struct LmiMetadata {
  std::string method;
  double delta = 0.0;
  double T2 = 0.0;
  double lambda_t = 0.0;
};

/// Affine semidefinite feasibility/minimization problem: every constraint is
/// required negative semidefinite; psd_variables are required positive definite
/// (enforced internally as -P + eps_pd I <= 0).
struct LmiProblem {
  std::vector<VarId> variables;
  std::vector<AffineSymMatrix> constraints;
  std::vector<MatrixVar> matrix_vars;          // named blocks (P1, P2, J, X, ...)
  std::vector<std::string> psd_variables;      // names of blocks constrained positive definite
  std::optional<VectorXd> objective;           // minimize objective.dot(x)
  LmiMetadata metadata;

  std::size_t num_vars() const { return variables.size(); }
  const MatrixVar& block(const std::string& name) const;
  bool has_block(const std::string& name) const;
  MatrixXd block_value(const std::string& name, const VectorXd& x) const;
};

/// Registers scalar/matrix decision variables and turns affine matrix formulas
/// into AffineSymMatrix constraints by probing unit assignments.
class LmiBuilder {
 public:
  explicit LmiBuilder(LmiMetadata meta) : meta_(std::move(meta)) {}

  std::size_t scalar(const std::string& label);
  const MatrixVar& sym(const std::string& name, Eigen::Index n);
  const MatrixVar& full(const std::string& name, Eigen::Index r, Eigen::Index c);

  /// fn must be affine in x and return a symmetric matrix; constrained fn(x) <= -eps I
  /// with eps = eps_scale * (1 + max|constant|).
  void require_neg_semidef(const std::function<MatrixXd(const VectorXd&)>& fn, double eps_scale);
  void require_pos_def(const std::string& block_name);  // P >= eps_pd I
  void require_nonneg(std::size_t var);                 // x_k >= 0

  LmiProblem finish(std::optional<VectorXd> objective = std::nullopt);

  std::size_t num_vars() const { return labels_.size(); }

 private:
  LmiMetadata meta_;
  std::vector<std::string> labels_;
  std::vector<MatrixVar> matrix_vars_;
  std::vector<std::string> psd_;
  std::vector<AffineSymMatrix> constraints_;
};

/// Lyapunov/performance certificate for the sampled-data error system:
/// V = eps' P1 eps + e^{delta tau} tt' P2 tt with decay lambda_t and L2 gain gamma.
struct Certificate {
  MatrixXd P1;       // n_z x n_z, positive definite
  MatrixXd P2;       // n_y x n_y, positive definite
  double delta = 0.0;
  double chi = 0.0;  // 0 only for linear plants
  double lambda_t = 0.0;
  double gamma = 0.0;
  double T2 = 0.0;
};

// Strictness margins; interior-point solvers need an explicit shift.
inline constexpr double kEpsNonstrictScale = 1e-9;
inline constexpr double kEpsStrictScale = 1e-7;
inline constexpr double kEpsPd = 1e-8;

/// Numeric M(tau). Block order (eps, tt, w, zeta); for linear plants the zeta
/// row/column is omitted and chi is ignored. Throws if tau is outside [0, T2].
MatrixXd eval_M(const PlantModel& plant, const ObserverGains& gains, const Certificate& cert,
                double tau);

/// lambda1 = (e^{d tau} - e^{d T2})/(1 - e^{d T2}), lambda2 = 1 - lambda1; both in [0,1],
/// and M(tau) = lambda1 M(0) + lambda2 M(T2).
std::pair<double, double> convex_decomposition(double delta, double T2, double tau);

/// M(0) <= 0, M(T2) <= 0 with gains fixed; decision variables P1, P2, chi
/// (nonlinear plants), and mu = gamma^2 unless fixed_gamma is given.
/// Minimizes mu when free.
LmiProblem build_verification_problem(const PlantModel& plant, const ObserverGains& gains,
                                      double lambda_t, double delta, double T2,
                                      std::optional<double> fixed_gamma = std::nullopt);

/// One of the four synthesis relaxations; decision variables per method.
/// PropX80 refuses delta <= 2 lambda_t (structurally infeasible).
/// zoh_nonsingular adds X^T + X > 0 for the ZOH method (on by default).
LmiProblem build_design_problem(const PlantModel& plant, DesignMethod method, double lambda_t,
                                double delta, double T2,
                                std::optional<double> fixed_gamma = std::nullopt,
                                std::optional<double> gain_norm_cap = std::nullopt,
                                bool zoh_nonsingular = true);

/// Pre-flight existence diagnostic: strict LMI in (P1, J, chi, mu_hat).
LmiProblem build_existence_problem(const PlantModel& plant);

enum class CorollaryVariant { NoGamma, NoLambda };

/// Relaxed verification with gains fixed. NoGamma drops the disturbance
/// row/column of M (takes lambda_t); NoLambda sets lambda_t = 0 (takes gamma).
LmiProblem build_corollary_problem(const PlantModel& plant, const ObserverGains& gains,
                                   CorollaryVariant variant, double lambda_t_or_gamma,
                                   double delta, double T2);

/// Scalar-variable census of the gamma-given design problems (chi included, mu not).
std::size_t count_scalar_variables(DesignMethod method, Eigen::Index nz, Eigen::Index ny);

/// Hinf norm of Cp (sI - (A - LC + lambda_t I))^{-1} N via Hamiltonian bisection,
/// relative tolerance 1e-6; +infinity when the shifted matrix is not Hurwitz.
/// Lower-bounds every feasible gamma.
double hinf_necessary(const PlantModel& plant, const MatrixXd& L, double lambda_t);

// ---- shared block assembly (also used by the projection round-trip check) ----

/// Full slack-variable partition of the projection-lemma conditions.
struct SlackBlocks {
  MatrixXd X1, X2, X3, X4;  // n_z x n_z, n_z x n_y, n_z x n_z, n_z x n_y
  MatrixXd X5, X6, X7, X8;  // n_y x n_z, n_y x n_y, n_y x n_z, n_y x n_y
};

/// The projection-lemma constraint matrix at tau = 0 (at_T2 = false) or tau = T2,
/// assembled from gains, Lyapunov data and one slack partition.
MatrixXd projection_constraint(const PlantModel& plant, const ObserverGains& gains,
                               const SlackBlocks& slack, const MatrixXd& P1, const MatrixXd& P2,
                               double chi, double lambda_t, double gamma2, double delta, double T2,
                               bool at_T2);

}  // namespace sporadic
