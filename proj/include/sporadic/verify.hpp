#pragma once

#include "sporadic/hybrid.hpp"
#include "sporadic/sdp.hpp"

namespace sporadic {

/// Explicit constants realizing the eISS bound
///   |phi(t,j)|_A <= max(kappa e^{-lambda(t+j)} |phi(0,0)|_A, noise_gain ||u||_inf).
struct IssConstants {
  double rho1 = 0.0;        // min(lambda_min P1, lambda_min P2)
  double rho2 = 0.0;        // max(lambda_max P1, lambda_max P2 e^{delta T2})
  double lambda = 0.0;      // lambda_t T1 / (1 + T1), the interval's right endpoint
  double omega = 0.0;       // = lambda
  double kappa = 0.0;       // 2 sqrt(rho2/rho1) e^omega
  double noise_gain = 0.0;  // 2 max(gamma/sqrt(2 lt rho1), sqrt(omega2 e^{4 lt T1}/(e^{2 lt T1}-1)))
};

struct VerificationReport {
  double eig_at_0 = 0.0;
  double eig_at_T2 = 0.0;
  double grid_max_eig = 0.0;     // over a 100-point tau grid
  double hinf_lower_bound = 0.0;
  double tolerance = 0.0;        // 1e-7 * (1 + matrix scale)
  bool pass = false;
  double eig_margin = 0.0;       // tolerance - worst eigenvalue
  double gamma_margin = 0.0;     // gamma - hinf_lower_bound
};

/// Eigenvalue certification of the two endpoint conditions plus a tau-grid
/// cross-check and the Hinf necessary condition.
VerificationReport verify_certificate(const PlantModel& plant, const ObserverGains& gains,
                                      const Certificate& cert);

IssConstants iss_constants(const Certificate& cert, double T1);

struct BoundCheck {
  bool pass = false;
  double worst_margin = 0.0;  // min over samples of (bound - value)
};

/// Definition-style eISS bound at every recorded sample.
BoundCheck check_iss_bound(const HybridArc& arc, const IssConstants& constants,
                           double input_sup_norm);

struct DissipationCheck {
  double max_violation = 0.0;  // max over samples of dV/dt - rhs - slack
  double slack = 0.0;          // worst slack actually allowed
};

/// Finite-difference check of dV/dt <= -2 lt V - |Cp eps|^2 + gamma^2 |w|^2 on
/// flow samples (central differences inside, one-sided at interval ends);
/// slack 1e-4 * scale * h absorbs discretization error.
DissipationCheck check_flow_dissipation(const HybridArc& arc, const PlantModel& plant,
                                        const ObserverGains& gains, const Certificate& cert);

/// Trapezoidal sqrt(int |y_p|^2) / sqrt(int |w|^2) from a zero-initial-error
/// simulation. Throws on zero-energy input.
double estimate_l2_gain(const PlantModel& plant, const ObserverGains& gains,
                        const SamplingSpec& sampling, const std::function<VectorXd(double)>& w,
                        double horizon_t, std::uint64_t jitter_seed = 1);

/// Domain inequalities at every sample point: -lt t <= omega - lambda (t+j),
/// j <= t/T1 + 1, and the jump-sum bound
/// sum_i e^{-2 lt (t - t_i)} <= e^{4 lt T1}/(e^{2 lt T1} - 1) (brute force).
bool domain_bounds_check(const HybridTimeDomain& domain, double lambda_t, double T1, double lambda,
                         double omega);

/// A-posteriori decay rate beta/(2 rho2) for lambda_t = 0 certificates,
/// beta = -max over a 100-point tau grid of lambda_max(M(tau)). Throws when
/// beta <= 0.
double cor2_decay_rate(const PlantModel& plant, const ObserverGains& gains,
                       const Certificate& cert_no_lambda);

/// Reconstructs the full slack matrices of the method's substitution pattern,
/// confirms the projection inequalities hold at the solution, recovers the
/// gains and confirms strict negativity of M at both endpoints.
bool projection_roundtrip(const PlantModel& plant, const LmiProblem& design_problem,
                          const SdpSolution& solution, DesignMethod method, double lambda_t,
                          double delta, double T2);

/// Two-term max of Definition-style truncated sup norms over sampled hybrid
/// signals: flow samples contribute the first term, jump-adjacent samples the
/// second.
double hybrid_sup_norm(const std::vector<ArcSample>& samples,
                       const std::function<double(const ArcSample&)>& magnitude);

}  // namespace sporadic
