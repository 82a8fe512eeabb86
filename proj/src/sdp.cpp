#include "sporadic/sdp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sporadic {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "Feasible";
    case SolveStatus::Infeasible: return "Infeasible";
    case SolveStatus::NumericalFailure: return "NumericalFailure";
  }
  return "unknown";
}

namespace {

constexpr double kBox = 1e8;  // soft variable bound, regularizes conic directions

struct Block {
  MatrixXd constant;
  std::vector<std::pair<Eigen::Index, MatrixXd>> terms;

  MatrixXd value(const VectorXd& x) const {
    MatrixXd M = constant;
    for (const auto& [k, coef] : terms) M.noalias() += x(k) * coef;
    return M;
  }
};

// Internal working problem: blocks G_j(x) <= 0; the slack variable of phase 1
// is appended as the last coordinate with coefficient -I on every block.
struct Work {
  std::vector<Block> blocks;
  Eigen::Index nvars = 0;

  // S_j = -(G_j(x)); all must stay positive definite.
  bool slacks(const VectorXd& x, std::vector<Eigen::LLT<MatrixXd>>& llt) const {
    llt.clear();
    llt.reserve(blocks.size());
    for (const auto& b : blocks) {
      llt.emplace_back((-b.value(x)).eval());
      if (llt.back().info() != Eigen::Success) return false;
    }
    return true;
  }
};

double barrier_value(const Work& w, const VectorXd& x, bool& ok) {
  double f = 0.0;
  ok = true;
  for (const auto& b : w.blocks) {
    Eigen::LLT<MatrixXd> llt((-b.value(x)).eval());
    if (llt.info() != Eigen::Success) {
      ok = false;
      return 0.0;
    }
    const auto& L = llt.matrixLLT();
    for (Eigen::Index i = 0; i < L.rows(); ++i) f -= 2.0 * std::log(L(i, i));
  }
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (std::abs(x(k)) >= kBox) {
      ok = false;
      return 0.0;
    }
    f -= std::log(kBox - x(k)) + std::log(kBox + x(k));
  }
  return f;
}

struct CenterResult {
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
};

// Damped Newton on f(x) = tb*c'x + barrier(x) from a strictly feasible x.
// early_stop, when set, aborts as soon as the predicate holds at an iterate.
CenterResult center(const Work& w, const VectorXd& c, double tb, VectorXd& x, int max_iters,
                    const std::function<bool(const VectorXd&)>& early_stop = nullptr) {
  CenterResult res;
  const Eigen::Index n = w.nvars;
  std::vector<Eigen::LLT<MatrixXd>> llt;
  std::vector<MatrixXd> W;  // whitened coefficient matrices of the current block

  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    if (early_stop && early_stop(x)) {
      res.converged = true;
      return res;
    }
    if (!w.slacks(x, llt)) {
      res.stalled = true;  // should not happen from a feasible iterate
      return res;
    }
    VectorXd g = tb * c;
    MatrixXd H = MatrixXd::Zero(n, n);
    for (std::size_t j = 0; j < w.blocks.size(); ++j) {
      const auto& blk = w.blocks[j];
      const auto& L = llt[j].matrixL();
      W.assign(blk.terms.size(), MatrixXd());
      for (std::size_t a = 0; a < blk.terms.size(); ++a) {
        MatrixXd T = blk.terms[a].second;
        L.solveInPlace(T);                       // L^{-1} A
        MatrixXd Tt = T.transpose();
        L.solveInPlace(Tt);                      // L^{-1} A L^{-T}
        W[a] = Tt.transpose();
        g(blk.terms[a].first) += W[a].trace();   // tr(S^{-1} A)
      }
      for (std::size_t a = 0; a < blk.terms.size(); ++a)
        for (std::size_t bb = a; bb < blk.terms.size(); ++bb) {
          const double h = (W[a].array() * W[bb].array()).sum();
          H(blk.terms[a].first, blk.terms[bb].first) += h;
          if (a != bb) H(blk.terms[bb].first, blk.terms[a].first) += h;
        }
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      const double dm = kBox - x(k), dp = kBox + x(k);
      g(k) += 1.0 / dm - 1.0 / dp;
      H(k, k) += 1.0 / (dm * dm) + 1.0 / (dp * dp);
    }

    // Jacobi-preconditioned Newton solve; the Hessian mixes the scales of
    // Lyapunov entries, slack matrices and mu = gamma^2 badly.
    VectorXd d = H.diagonal().cwiseMax(1e-300).cwiseSqrt();
    MatrixXd Hs = d.cwiseInverse().asDiagonal() * H * d.cwiseInverse().asDiagonal();
    const VectorXd gs = g.cwiseQuotient(d);
    VectorXd step;
    double reg = 0.0;
    for (int attempt = 0;; ++attempt) {
      Eigen::LDLT<MatrixXd> ldlt(Hs + reg * MatrixXd::Identity(n, n));
      step = ldlt.solve(-gs).cwiseQuotient(d);
      if (ldlt.info() == Eigen::Success && step.allFinite() && -g.dot(step) >= 0.0) break;
      reg = (reg == 0.0) ? 1e-13 : reg * 100.0;
      if (attempt > 10) {
        res.stalled = true;
        return res;
      }
    }

    const double decrement = -g.dot(step);  // = step' H step
    if (decrement / 2.0 <= 1e-10) {
      res.converged = true;
      return res;
    }

    bool ok = false;
    const double f0 = barrier_value(w, x, ok) + tb * c.dot(x);
    double alpha = 1.0;
    VectorXd xn;
    for (;;) {
      xn = x + alpha * step;
      bool okn = false;
      const double fn = barrier_value(w, xn, okn) + tb * c.dot(xn);
      if (okn && fn <= f0 - 0.25 * alpha * decrement) break;
      alpha *= 0.5;
      if (alpha < 1e-13) {
        res.stalled = true;
        return res;
      }
    }
    x = xn;
  }
  return res;
}

double total_block_dim(const Work& w) {
  double m = 2.0 * static_cast<double>(w.nvars);  // box terms
  for (const auto& b : w.blocks) m += static_cast<double>(b.constant.rows());
  return m;
}

}  // namespace

VectorXd residual(const LmiProblem& p, const VectorXd& x) {
  if (x.size() != static_cast<Eigen::Index>(p.num_vars()))
    throw std::invalid_argument("point does not cover all variables");
  VectorXd r(static_cast<Eigen::Index>(p.constraints.size()));
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(p.constraints[j].eval(x),
                                               Eigen::EigenvaluesOnly);
    r(static_cast<Eigen::Index>(j)) = es.eigenvalues().maxCoeff();
  }
  return r;
}

SdpSolution solve(const LmiProblem& p, const SolverOptions& opt) {
  if (p.constraints.empty()) throw std::invalid_argument("problem has no constraints");
  const Eigen::Index n = static_cast<Eigen::Index>(p.num_vars());
  for (const auto& c : p.constraints)
    for (const auto& [k, coef] : c.terms)
      if (k >= p.num_vars()) throw std::invalid_argument("constraint references unknown VarId");

  SdpSolution sol;
  sol.point = VectorXd::Zero(n);

  // Scaled working copy; the exp(delta T2) factors span orders of magnitude.
  Work w;
  w.nvars = n + 1;  // phase-1 slack appended
  std::vector<double> scale(p.constraints.size(), 1.0);
  w.blocks.reserve(p.constraints.size());
  for (std::size_t j = 0; j < p.constraints.size(); ++j) {
    const auto& c = p.constraints[j];
    if (opt.scaling) scale[j] = std::max(1.0, c.constant.cwiseAbs().maxCoeff());
    Block b;
    b.constant = c.constant / scale[j];
    for (const auto& [k, coef] : c.terms)
      b.terms.emplace_back(static_cast<Eigen::Index>(k), coef / scale[j]);
    b.terms.emplace_back(n, -MatrixXd::Identity(c.dim, c.dim));  // G - t I
    w.blocks.push_back(std::move(b));
  }

  // ---- phase 1: minimize t subject to G_j(x) <= t I ----
  double t0 = 0.0;
  for (const auto& b : w.blocks) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(b.constant, Eigen::EigenvaluesOnly);
    t0 = std::max(t0, es.eigenvalues().maxCoeff());
  }
  t0 += 1.0;
  VectorXd xt = VectorXd::Zero(n + 1);
  xt(n) = t0;
  VectorXd ct = VectorXd::Zero(n + 1);
  ct(n) = 1.0;

  const double m1 = total_block_dim(w);
  double tb = 1.0;
  int used = 0;
  bool strictly_feasible = false;
  bool phase1_converged = false;
  double best_t = xt(n);
  // Once t is pushed well below zero the point is strictly feasible; no need
  // to drive the phase-1 objective to its infimum.
  auto track = [&](const VectorXd& v) {
    best_t = std::min(best_t, v(n));
    sol.slack_history.push_back(best_t);
    return v(n) <= -1e-6;
  };
  while (used < opt.max_iterations) {
    auto r = center(w, ct, tb, xt, opt.max_iterations - used, track);
    used += std::max(1, r.iterations);
    if (xt(n) <= -1e-6) {
      strictly_feasible = true;
      break;
    }
    if (r.stalled) break;
    if (m1 / tb <= std::max(opt.tolerance, 1e-12) * (1.0 + std::abs(xt(n)))) {
      phase1_converged = true;
      break;
    }
    tb /= opt.barrier_reduction;
  }
  sol.iterations = used;
  sol.phase1_slack = best_t;

  if (!strictly_feasible && xt(n) >= 0.0) {
    // A stall far from convergence certifies nothing.
    sol.status = phase1_converged ? SolveStatus::Infeasible : SolveStatus::NumericalFailure;
    sol.point = xt.head(n);
    sol.max_constraint_eig = residual(p, sol.point).maxCoeff();
    return sol;
  }
  // xt(n) < 0: possibly thin, but a genuine interior point; proceed with it.

  // Drop the slack coordinate; S_j strictly positive at xt.
  Work w2;
  w2.nvars = n;
  for (auto& b : w.blocks) {
    b.terms.pop_back();
    w2.blocks.push_back(std::move(b));
  }
  VectorXd x = xt.head(n);
  const double m2 = total_block_dim(w2);

  if (!p.objective) {
    // Feasibility problem: analytic centering improves downstream margins.
    auto r = center(w2, VectorXd::Zero(n), 0.0, x, std::min(60, opt.max_iterations));
    sol.iterations += r.iterations;
    sol.point = x;
    const VectorXd res = residual(p, x);
    sol.max_constraint_eig = res.maxCoeff();
    sol.status = res.maxCoeff() < 0.0 ? SolveStatus::Feasible : SolveStatus::NumericalFailure;
    return sol;
  }

  // ---- phase 2: path-following on the true objective ----
  const VectorXd c = *p.objective;
  double tb2 = 1.0 / std::max(1.0, std::abs(c.dot(x)));
  int used2 = 0;
  while (used2 < opt.max_iterations) {
    auto r = center(w2, c, tb2, x, opt.max_iterations - used2);
    used2 += std::max(1, r.iterations);
    if (m2 / tb2 <= std::max(opt.tolerance, 1e-12) * (1.0 + std::abs(c.dot(x)))) break;
    if (r.stalled) break;  // return the best point reached along the path
    tb2 /= opt.barrier_reduction;
  }
  sol.iterations += used2;
  sol.point = x;
  sol.objective_value = c.dot(x);
  const VectorXd res = residual(p, x);
  sol.max_constraint_eig = res.maxCoeff();
  sol.status = res.maxCoeff() < 0.0 ? SolveStatus::Feasible : SolveStatus::NumericalFailure;
  return sol;
}

}  // namespace sporadic
