#pragma once

#include "sporadic/sdp.hpp"

namespace sporadic {

VectorXd log_grid(double lo, double hi, int n);
VectorXd lin_grid(double lo, double hi, int n);

struct DesignRequest {
  PlantModel plant;
  DesignMethod method = DesignMethod::PropPred;
  double lambda_t = 0.0;
  double T1 = 0.0;
  double T2 = 0.0;
  VectorXd delta_grid = log_grid(1e-2, 1e3, 50);
  std::optional<double> fixed_gamma;
  std::optional<double> gain_norm_cap;
  SolverOptions solver;
};

struct DesignResult {
  ObserverGains gains;
  Certificate certificate;
  SdpSolution solution;
  double delta_selected = 0.0;
};

struct TradeoffPoint {
  double T2 = 0.0;
  double gamma = 0.0;
  DesignResult result;
};

struct TradeoffCurve {
  std::vector<TradeoffPoint> points;       // T2 strictly ascending
  std::vector<double> infeasible_T2;       // omitted grid points
};

struct AllInfeasible : std::runtime_error {
  explicit AllInfeasible(double best_slack)
      : std::runtime_error("no delta grid point is feasible"), best_slack(best_slack) {}
  double best_slack;
};

struct InfeasibleAtLowerBound : std::runtime_error {
  InfeasibleAtLowerBound() : std::runtime_error("T2 range lower bound is infeasible") {}
};

struct IllConditionedRecovery : std::runtime_error {
  explicit IllConditionedRecovery(double cond)
      : std::runtime_error("gain recovery matrix is ill conditioned"), condition(cond) {}
  double condition;
};

/// Gains from a feasible design solution: PropPred L = P1^{-1} J,
/// H = P2^{-1} Y' - C L; PropX80/PropX8X6 L = X^{-T} J, H = U^{-T} W;
/// ZOH L = X^{-T} J, H = 0. Throws IllConditionedRecovery when the
/// recovering matrix has condition estimate above 1e12.
ObserverGains recover_gains(DesignMethod method, const LmiProblem& problem,
                            const SdpSolution& solution, const PlantModel& plant);

Certificate certificate_from_solution(const LmiProblem& problem, const SdpSolution& solution,
                                      std::optional<double> fixed_gamma);

/// Minimize gamma over the delta grid; returns the best feasible grid point
/// (ties toward smaller gamma, then smaller delta). Throws AllInfeasible.
DesignResult design_min_gamma(const DesignRequest& request);

/// Largest T2 in [lo, hi] for which the design (or, with fixed gains, the
/// verification conditions) stays feasible; bisection terminates when the
/// bracket width drops below 1e-4 * hi. fixed_gains switches to verification
/// mode. Throws InfeasibleAtLowerBound.
std::pair<double, DesignResult> maximize_T2(const DesignRequest& request, double lo, double hi,
                                            std::optional<ObserverGains> fixed_gains = std::nullopt);

/// One design_min_gamma per T2 grid point; infeasible points omitted.
TradeoffCurve pareto_sweep(const DesignRequest& request, const VectorXd& T2_grid);

struct RefineResult {
  double T2 = 0.0;
  double gamma = 0.0;
  Certificate certificate;
  double delta_selected = 0.0;
};

/// Verification re-solve over a (delta, T2) grid with gains fixed: returns the
/// largest feasible T2 and, at that T2, the smallest gamma found.
RefineResult two_stage_refine(const PlantModel& plant, const ObserverGains& gains,
                              const VectorXd& delta_grid, const VectorXd& T2_grid,
                              double lambda_t, const SolverOptions& solver = {});

std::string tradeoff_csv(const TradeoffCurve& curve, DesignMethod method);

}  // namespace sporadic
