#include "sporadic/design.hpp"

#include <algorithm>
#include <cmath>

#include "sporadic/verify.hpp"

namespace sporadic {

VectorXd log_grid(double lo, double hi, int n) {
  if (!(lo > 0.0) || !(hi >= lo) || n < 1) throw std::invalid_argument("bad log grid");
  VectorXd g(n);
  if (n == 1) {
    g(0) = lo;
    return g;
  }
  const double a = std::log(lo), b = std::log(hi);
  for (int i = 0; i < n; ++i) g(i) = std::exp(a + (b - a) * i / (n - 1));
  return g;
}

VectorXd lin_grid(double lo, double hi, int n) {
  if (!(hi >= lo) || n < 1) throw std::invalid_argument("bad linear grid");
  VectorXd g(n);
  if (n == 1) {
    g(0) = lo;
    return g;
  }
  for (int i = 0; i < n; ++i) g(i) = lo + (hi - lo) * i / (n - 1);
  return g;
}

namespace {

std::optional<std::size_t> find_scalar(const LmiProblem& p, const std::string& label) {
  for (const auto& v : p.variables)
    if (v.label == label) return v.index;
  return std::nullopt;
}

// exp(delta*T2) beyond this is numerically useless even with scaling.
bool delta_usable(double delta, double T2) { return delta * T2 <= 250.0; }

double condition_estimate(const MatrixXd& M) {
  Eigen::JacobiSVD<MatrixXd> svd(M);
  const auto& s = svd.singularValues();
  if (s(s.size() - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / (s(s.size() - 1));
}

// Cheap post-condition on a candidate certificate: eigenvalue check of M at
// the endpoints and on a tau grid.
bool endpoint_check(const PlantModel& plant, const ObserverGains& gains, const Certificate& cert) {
  for (double tau : {0.0, cert.T2}) {
    const MatrixXd M = eval_M(plant, gains, cert, tau);
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
    const double tol = 1e-7 * (1.0 + M.cwiseAbs().maxCoeff());
    if (es.eigenvalues().maxCoeff() > tol) return false;
  }
  return true;
}

}  // namespace

ObserverGains recover_gains(DesignMethod method, const LmiProblem& problem,
                            const SdpSolution& solution, const PlantModel& plant) {
  if (solution.status != SolveStatus::Feasible)
    throw std::invalid_argument("gain recovery needs a feasible solution");
  const VectorXd& x = solution.point;
  ObserverGains g;
  g.method = method;
  switch (method) {
    case DesignMethod::PropPred: {
      const MatrixXd P1 = problem.block_value("P1", x);
      const MatrixXd P2 = problem.block_value("P2", x);
      const MatrixXd J = problem.block_value("J", x);
      const MatrixXd Y = problem.block_value("Y", x);
      const double cond = std::max(condition_estimate(P1), condition_estimate(P2));
      if (cond > 1e12) throw IllConditionedRecovery(cond);
      g.L = P1.ldlt().solve(J);
      g.H = P2.ldlt().solve(Y.transpose()) - plant.C * g.L;
      break;
    }
    case DesignMethod::PropX80:
    case DesignMethod::PropX8X6: {
      const MatrixXd X = problem.block_value("X", x);
      const MatrixXd U = problem.block_value("U", x);
      const double cond = std::max(condition_estimate(X), condition_estimate(U));
      if (cond > 1e12) throw IllConditionedRecovery(cond);
      g.L = X.transpose().partialPivLu().solve(problem.block_value("J", x));
      g.H = U.transpose().partialPivLu().solve(problem.block_value("W", x));
      break;
    }
    case DesignMethod::ZOH: {
      const MatrixXd X = problem.block_value("X", x);
      const double cond = condition_estimate(X);
      if (cond > 1e12) throw IllConditionedRecovery(cond);
      g.L = X.transpose().partialPivLu().solve(problem.block_value("J", x));
      g.H = MatrixXd::Zero(plant.ny(), plant.ny());
      break;
    }
    case DesignMethod::Manual:
      throw std::invalid_argument("no recovery for manual gains");
  }
  return g;
}

Certificate certificate_from_solution(const LmiProblem& problem, const SdpSolution& solution,
                                      std::optional<double> fixed_gamma) {
  Certificate cert;
  cert.P1 = problem.block_value("P1", solution.point);
  cert.P2 = problem.block_value("P2", solution.point);
  cert.delta = problem.metadata.delta;
  cert.T2 = problem.metadata.T2;
  cert.lambda_t = problem.metadata.lambda_t;
  if (auto chi = find_scalar(problem, "chi"))
    cert.chi = solution.point(static_cast<Eigen::Index>(*chi));
  if (fixed_gamma)
    cert.gamma = *fixed_gamma;
  else if (auto mu = find_scalar(problem, "mu"))
    cert.gamma = std::sqrt(std::max(0.0, solution.point(static_cast<Eigen::Index>(*mu))));
  return cert;
}

DesignResult design_min_gamma(const DesignRequest& req) {
  if (req.delta_grid.size() == 0) throw std::invalid_argument("empty delta grid");
  if (!std::is_sorted(req.delta_grid.data(), req.delta_grid.data() + req.delta_grid.size()))
    throw std::invalid_argument("delta grid must be ascending");
  if (!(req.T1 <= req.T2)) throw std::invalid_argument("need T1 <= T2");
  std::vector<DesignResult> candidates;
  double best_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < req.delta_grid.size(); ++i) {
    const double delta = req.delta_grid(i);
    if (!delta_usable(delta, req.T2)) continue;
    if (req.method == DesignMethod::PropX80 && delta <= 2.0 * req.lambda_t) continue;
    LmiProblem prob;
    SdpSolution s;
    try {
      prob = build_design_problem(req.plant, req.method, req.lambda_t, delta, req.T2,
                                  req.fixed_gamma, req.gain_norm_cap);
      s = solve(prob, req.solver);
    } catch (const std::exception&) {
      continue;
    }
    if (s.status != SolveStatus::Feasible) {
      best_slack = std::min(best_slack, s.phase1_slack);
      continue;
    }
    DesignResult r;
    try {
      r.gains = recover_gains(req.method, prob, s, req.plant);
    } catch (const IllConditionedRecovery&) {
      continue;
    }
    r.certificate = certificate_from_solution(prob, s, req.fixed_gamma);
    r.solution = s;
    r.delta_selected = delta;
    if (!endpoint_check(req.plant, r.gains, r.certificate)) continue;
    candidates.push_back(std::move(r));
  }
  // Smallest gamma first (ties toward smaller delta by scan order); the
  // returned result must survive the full independent verification.
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const DesignResult& a, const DesignResult& b) {
                     return a.certificate.gamma < b.certificate.gamma;
                   });
  for (auto& cand : candidates) {
    const VerificationReport rep = verify_certificate(req.plant, cand.gains, cand.certificate);
    if (rep.pass) return std::move(cand);
  }
  throw AllInfeasible(best_slack);
}

namespace {

// Feasibility of a single (T2) with early exit on the first feasible delta;
// all grid points are probed before declaring infeasible.
bool feasible_at(const DesignRequest& req, double T2, const std::optional<ObserverGains>& gains) {
  for (Eigen::Index i = 0; i < req.delta_grid.size(); ++i) {
    const double delta = req.delta_grid(i);
    if (!delta_usable(delta, T2)) continue;
    if (!gains && req.method == DesignMethod::PropX80 && delta <= 2.0 * req.lambda_t) continue;
    try {
      LmiProblem prob =
          gains ? build_verification_problem(req.plant, *gains, req.lambda_t, delta, T2,
                                             req.fixed_gamma)
                : build_design_problem(req.plant, req.method, req.lambda_t, delta, T2,
                                       req.fixed_gamma, req.gain_norm_cap);
      prob.objective.reset();  // feasibility query only
      if (solve(prob, req.solver).status == SolveStatus::Feasible) return true;
    } catch (const std::exception&) {
      continue;
    }
  }
  return false;
}

DesignResult result_at(const DesignRequest& req, double T2,
                       const std::optional<ObserverGains>& gains) {
  if (!gains) {
    DesignRequest r = req;
    r.T2 = T2;
    return design_min_gamma(r);
  }
  // Verification mode: smallest gamma over the delta grid at fixed gains.
  std::optional<DesignResult> best;
  double best_slack = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < req.delta_grid.size(); ++i) {
    const double delta = req.delta_grid(i);
    if (!delta_usable(delta, T2)) continue;
    LmiProblem prob =
        build_verification_problem(req.plant, *gains, req.lambda_t, delta, T2, req.fixed_gamma);
    SdpSolution s = solve(prob, req.solver);
    if (s.status != SolveStatus::Feasible) {
      best_slack = std::min(best_slack, s.phase1_slack);
      continue;
    }
    DesignResult r;
    r.gains = *gains;
    r.certificate = certificate_from_solution(prob, s, req.fixed_gamma);
    r.solution = s;
    r.delta_selected = delta;
    if (!endpoint_check(req.plant, r.gains, r.certificate)) continue;
    if (!best || r.certificate.gamma < best->certificate.gamma) best = std::move(r);
  }
  if (!best) throw AllInfeasible(best_slack);
  return *best;
}

}  // namespace

std::pair<double, DesignResult> maximize_T2(const DesignRequest& req, double lo, double hi,
                                            std::optional<ObserverGains> fixed_gains) {
  if (!(0.0 < lo && lo <= hi)) throw std::invalid_argument("need 0 < lo <= hi");
  if (!feasible_at(req, lo, fixed_gains)) throw InfeasibleAtLowerBound();
  if (lo == hi || feasible_at(req, hi, fixed_gains))
    return {hi, result_at(req, hi, fixed_gains)};
  double a = lo, b = hi;  // a feasible, b infeasible
  while (b - a > 1e-4 * hi) {
    const double mid = 0.5 * (a + b);
    (feasible_at(req, mid, fixed_gains) ? a : b) = mid;
  }
  return {a, result_at(req, a, fixed_gains)};
}

TradeoffCurve pareto_sweep(const DesignRequest& req, const VectorXd& T2_grid) {
  if (T2_grid.size() == 0) throw std::invalid_argument("empty T2 grid");
  TradeoffCurve curve;
  for (Eigen::Index i = 0; i < T2_grid.size(); ++i) {
    DesignRequest r = req;
    r.T2 = T2_grid(i);
    try {
      DesignResult res = design_min_gamma(r);
      curve.points.push_back({T2_grid(i), res.certificate.gamma, std::move(res)});
    } catch (const AllInfeasible&) {
      curve.infeasible_T2.push_back(T2_grid(i));
    }
  }
  std::sort(curve.points.begin(), curve.points.end(),
            [](const TradeoffPoint& a, const TradeoffPoint& b) { return a.T2 < b.T2; });
  return curve;
}

RefineResult two_stage_refine(const PlantModel& plant, const ObserverGains& gains,
                              const VectorXd& delta_grid, const VectorXd& T2_grid,
                              double lambda_t, const SolverOptions& solver) {
  if (delta_grid.size() == 0 || T2_grid.size() == 0)
    throw std::invalid_argument("empty refinement grid");
  std::vector<double> T2s(T2_grid.data(), T2_grid.data() + T2_grid.size());
  std::sort(T2s.begin(), T2s.end());
  double best_slack = std::numeric_limits<double>::infinity();
  // Largest feasible T2 wins; scan from the top and stop at the first hit.
  for (auto it = T2s.rbegin(); it != T2s.rend(); ++it) {
    const double T2 = *it;
    std::optional<RefineResult> best;
    for (Eigen::Index i = 0; i < delta_grid.size(); ++i) {
      const double delta = delta_grid(i);
      if (!delta_usable(delta, T2)) continue;
      LmiProblem prob = build_verification_problem(plant, gains, lambda_t, delta, T2);
      SdpSolution s = solve(prob, solver);
      if (s.status != SolveStatus::Feasible) {
        best_slack = std::min(best_slack, s.phase1_slack);
        continue;
      }
      Certificate cert = certificate_from_solution(prob, s, std::nullopt);
      if (!endpoint_check(plant, gains, cert)) continue;
      if (!best || cert.gamma < best->gamma)
        best = RefineResult{T2, cert.gamma, std::move(cert), delta};
    }
    if (best) return *best;
  }
  throw AllInfeasible(best_slack);
}

std::string tradeoff_csv(const TradeoffCurve& curve, DesignMethod method) {
  std::string out = "T2,gamma,delta,method\n";
  char buf[128];
  for (const auto& pt : curve.points) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%s\n", pt.T2, pt.gamma,
                  pt.result.delta_selected, to_string(method).c_str());
    out += buf;
  }
  return out;
}

}  // namespace sporadic
