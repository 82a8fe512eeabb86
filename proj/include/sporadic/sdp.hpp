#pragma once

#include "sporadic/lmi.hpp"

namespace sporadic {

struct SolverOptions {
  int max_iterations = 200;        // Newton iterations per phase
  double tolerance = 1e-9;         // duality/step tolerance
  double barrier_reduction = 0.2;  // outer barrier parameter factor, in (0,1)
  bool scaling = true;             // per-constraint normalization
};

enum class SolveStatus { Feasible, Infeasible, NumericalFailure };

std::string to_string(SolveStatus s);

struct SdpSolution {
  SolveStatus status = SolveStatus::NumericalFailure;
  VectorXd point;                          // VarId-indexed assignment
  std::optional<double> objective_value;
  double max_constraint_eig = 0.0;         // worst residual at the returned point
  int iterations = 0;
  double phase1_slack = 0.0;               // best achieved slack level t* (scaled units)
  std::vector<double> slack_history;       // running slack bound per phase-1 iterate
};

/// Dense phase-1/phase-2 log-det barrier path-following. Feasibility problems
/// return a centered strictly feasible point; objective problems minimize the
/// linear objective along the central path.
SdpSolution solve(const LmiProblem& problem, const SolverOptions& options = {});

/// Per-constraint max eigenvalues at a point; the independent check used by
/// all acceptance tests (separate eigenvalue path from the solver).
VectorXd residual(const LmiProblem& problem, const VectorXd& point);

}  // namespace sporadic
