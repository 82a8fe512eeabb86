#include "sporadic/verify.hpp"

#include <cmath>

namespace sporadic {

namespace {

double max_eig(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eig(const MatrixXd& M) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace

VerificationReport verify_certificate(const PlantModel& plant, const ObserverGains& gains,
                                      const Certificate& cert) {
  VerificationReport rep;
  double scale = 0.0;
  const MatrixXd M0 = eval_M(plant, gains, cert, 0.0);
  const MatrixXd MT = eval_M(plant, gains, cert, cert.T2);
  rep.eig_at_0 = max_eig(M0);
  rep.eig_at_T2 = max_eig(MT);
  scale = std::max(M0.cwiseAbs().maxCoeff(), MT.cwiseAbs().maxCoeff());
  rep.grid_max_eig = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double tau = cert.T2 * i / 99.0;
    rep.grid_max_eig = std::max(rep.grid_max_eig, max_eig(eval_M(plant, gains, cert, tau)));
  }
  rep.hinf_lower_bound = hinf_necessary(plant, gains.L, cert.lambda_t);
  rep.tolerance = 1e-7 * (1.0 + scale);
  const double worst = std::max({rep.eig_at_0, rep.eig_at_T2, rep.grid_max_eig});
  rep.eig_margin = rep.tolerance - worst;
  rep.gamma_margin = cert.gamma - rep.hinf_lower_bound;
  rep.pass = worst <= rep.tolerance && cert.gamma * (1.0 + 1e-9) >= rep.hinf_lower_bound &&
             min_eig(cert.P1) > 0.0 && min_eig(cert.P2) > 0.0;
  return rep;
}

IssConstants iss_constants(const Certificate& cert, double T1) {
  if (!(T1 > 0.0)) throw std::invalid_argument("T1 must be positive");
  IssConstants k;
  k.rho1 = std::min(min_eig(cert.P1), min_eig(cert.P2));
  const double omega2 = max_eig(cert.P2) * std::exp(cert.delta * cert.T2);
  k.rho2 = std::max(max_eig(cert.P1), omega2);
  k.lambda = cert.lambda_t * T1 / (1.0 + T1);
  k.omega = k.lambda;
  k.kappa = 2.0 * std::sqrt(k.rho2 / k.rho1) * std::exp(k.omega);
  const double lt = cert.lambda_t;
  const double w_term = cert.gamma / std::sqrt(2.0 * lt * k.rho1);
  const double eta_term =
      std::sqrt(omega2 * std::exp(4.0 * lt * T1) / std::expm1(2.0 * lt * T1));
  k.noise_gain = 2.0 * std::max(w_term, eta_term);
  return k;
}

BoundCheck check_iss_bound(const HybridArc& arc, const IssConstants& c, double input_sup_norm) {
  BoundCheck out;
  if (arc.samples.empty()) return out;
  const double d0 = distance_to_A(arc.samples.front().state);
  out.worst_margin = std::numeric_limits<double>::infinity();
  out.pass = true;
  for (const auto& s : arc.samples) {
    const double bound = std::max(c.kappa * std::exp(-c.lambda * (s.t + s.j)) * d0,
                                  c.noise_gain * input_sup_norm);
    const double dist = distance_to_A(s.state);
    const double slack = 1e-9 * (1.0 + d0) + 1e-12;  // roundoff allowance
    out.worst_margin = std::min(out.worst_margin, bound + slack - dist);
    if (dist > bound + slack) out.pass = false;
  }
  return out;
}

DissipationCheck check_flow_dissipation(const HybridArc& arc, const PlantModel& plant,
                                        const ObserverGains& gains, const Certificate& cert) {
  DissipationCheck out;
  out.max_violation = -std::numeric_limits<double>::infinity();
  const double g2 = cert.gamma * cert.gamma;
  // Group consecutive flow samples by interval index.
  std::vector<std::size_t> run;
  auto flush = [&](const std::vector<std::size_t>& idx) {
    if (idx.size() < 2) return;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const std::size_t lo = (a == 0) ? 0 : a - 1;
      const std::size_t hi = (a + 1 == idx.size()) ? a : a + 1;
      if (lo == hi) continue;
      const auto& s_lo = arc.samples[idx[lo]];
      const auto& s_hi = arc.samples[idx[hi]];
      const auto& s = arc.samples[idx[a]];
      const double dt = s_hi.t - s_lo.t;
      if (dt <= 0.0) continue;
      const double dVdt =
          (eval_V(cert, s_hi.state) - eval_V(cert, s_lo.state)) / dt;
      // |w| over the stencil; robust against w discontinuities inside a step.
      double wmag = s.w.norm();
      wmag = std::max({wmag, s_lo.w.norm(), s_hi.w.norm()});
      const double V = eval_V(cert, s.state);
      const double yp2 = (plant.Cp * s.state.eps).squaredNorm();
      const double rhs = -2.0 * cert.lambda_t * V - yp2 + g2 * wmag * wmag;
      const double h = dt / (hi - lo);
      const double scale = 1.0 + std::abs(V) + yp2 + g2 * wmag * wmag;
      const double slack = 1e-4 * scale * h;
      out.slack = std::max(out.slack, slack);
      out.max_violation = std::max(out.max_violation, dVdt - rhs - slack);
    }
  };
  for (std::size_t i = 0; i < arc.samples.size(); ++i) {
    if (arc.samples[i].side == SampleSide::Flow)
      run.push_back(i);
    else if (arc.samples[i].side == SampleSide::PreJump) {
      run.push_back(i);
      flush(run);
      run.clear();
    } else {  // PostJump starts a new interval
      flush(run);
      run.clear();
      run.push_back(i);
    }
  }
  flush(run);
  (void)gains;
  return out;
}

double estimate_l2_gain(const PlantModel& plant, const ObserverGains& gains,
                        const SamplingSpec& sampling, const std::function<VectorXd(double)>& w,
                        double horizon_t, std::uint64_t jitter_seed) {
  SignalSpec sig;
  sig.w = w;
  sig.eta = [ny = plant.ny()](double, int) { return VectorXd::Zero(ny).eval(); };
  HybridState init;
  init.z = VectorXd::Zero(plant.nz());
  init.eps = VectorXd::Zero(plant.nz());
  init.theta_tilde = VectorXd::Zero(plant.ny());
  init.tau = sampling.T2;
  auto jit = JitterSequence::uniform(sampling.T1, sampling.T2, jitter_seed);
  const HybridArc arc = simulate(plant, gains, init, sig, std::move(jit), {horizon_t});

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i + 1 < arc.samples.size(); ++i) {
    const auto& a = arc.samples[i];
    const auto& b = arc.samples[i + 1];
    const double dt = b.t - a.t;
    if (dt <= 0.0) continue;  // jump instants carry no measure
    const double ya = (plant.Cp * a.state.eps).squaredNorm();
    const double yb = (plant.Cp * b.state.eps).squaredNorm();
    num += 0.5 * dt * (ya + yb);
    den += 0.5 * dt * (a.w.squaredNorm() + b.w.squaredNorm());
  }
  if (den <= 0.0) throw std::invalid_argument("zero-energy disturbance input");
  return std::sqrt(num) / std::sqrt(den);
}

bool domain_bounds_check(const HybridTimeDomain& domain, double lambda_t, double T1, double lambda,
                         double omega) {
  std::vector<double> jump_times;
  for (std::size_t i = 1; i < domain.intervals.size(); ++i)
    jump_times.push_back(domain.intervals[i].t_start);
  const double sum_bound = std::exp(4.0 * lambda_t * T1) / std::expm1(2.0 * lambda_t * T1);
  const double tol = 1e-9;
  for (const auto& iv : domain.intervals) {
    for (double t : {iv.t_start, iv.t_end, 0.5 * (iv.t_start + iv.t_end)}) {
      const double j = iv.j;
      if (-lambda_t * t > omega - lambda * (t + j) + tol) return false;
      if (j > t / T1 + 1.0 + tol) return false;
      double sum = 0.0;
      for (int i = 0; i < iv.j; ++i) sum += std::exp(-2.0 * lambda_t * (t - jump_times[i]));
      if (sum > sum_bound + tol) return false;
    }
  }
  return true;
}

double cor2_decay_rate(const PlantModel& plant, const ObserverGains& gains,
                       const Certificate& cert) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 100; ++i) {
    const double tau = cert.T2 * i / 99.0;
    worst = std::max(worst, max_eig(eval_M(plant, gains, cert, tau)));
  }
  const double beta = -worst;
  if (!(beta > 0.0)) throw std::runtime_error("certificate is not strictly feasible (beta <= 0)");
  const double rho2 =
      std::max(max_eig(cert.P1), max_eig(cert.P2) * std::exp(cert.delta * cert.T2));
  return beta / (2.0 * rho2);
}

bool projection_roundtrip(const PlantModel& plant, const LmiProblem& prob,
                          const SdpSolution& sol, DesignMethod method, double lambda_t,
                          double delta, double T2) {
  if (sol.status != SolveStatus::Feasible) return false;
  const Eigen::Index nz = plant.nz(), ny = plant.ny();
  const VectorXd& x = sol.point;
  const MatrixXd P1 = prob.block_value("P1", x);
  const MatrixXd P2 = prob.block_value("P2", x);
  double chi = 0.0;
  for (const auto& v : prob.variables)
    if (v.label == "chi") chi = x(static_cast<Eigen::Index>(v.index));
  double gamma2 = 0.0;
  bool have_mu = false;
  for (const auto& v : prob.variables)
    if (v.label == "mu") {
      gamma2 = x(static_cast<Eigen::Index>(v.index));
      have_mu = true;
    }
  if (!have_mu) return false;

  const MatrixXd Zyz = MatrixXd::Zero(ny, nz);
  const MatrixXd Zzy = MatrixXd::Zero(nz, ny);
  const MatrixXd Zyy = MatrixXd::Zero(ny, ny);
  ObserverGains g;
  g.method = method;
  SlackBlocks X, Y;
  switch (method) {
    case DesignMethod::PropX80:
    case DesignMethod::PropX8X6: {
      const MatrixXd Xm = prob.block_value("X", x);
      const MatrixXd U = prob.block_value("U", x);
      const MatrixXd W = prob.block_value("W", x);
      const MatrixXd J = prob.block_value("J", x);
      g.L = Xm.transpose().partialPivLu().solve(J);
      g.H = U.transpose().partialPivLu().solve(W);
      X = {Xm, Zzy, Xm, Zzy, Zyz, U, Zyz, method == DesignMethod::PropX8X6 ? U : Zyy};
      Y = X;
      break;
    }
    case DesignMethod::ZOH: {
      const MatrixXd Xm = prob.block_value("X", x);
      const MatrixXd J = prob.block_value("J", x);
      g.L = Xm.transpose().partialPivLu().solve(J);
      g.H = Zyy;
      X = {Xm, Zzy, Xm, Zzy, prob.block_value("X5", x), prob.block_value("X6", x),
           prob.block_value("X7", x), prob.block_value("X8", x)};
      Y = {Xm, Zzy, Xm, Zzy, prob.block_value("Y5", x), prob.block_value("Y6", x),
           prob.block_value("Y7", x), prob.block_value("Y8", x)};
      break;
    }
    default:
      return false;  // slack reconstruction applies to the projection-based designs
  }

  const MatrixXd G0 =
      projection_constraint(plant, g, X, P1, P2, chi, lambda_t, gamma2, delta, T2, false);
  const MatrixXd GT =
      projection_constraint(plant, g, Y, P1, P2, chi, lambda_t, gamma2, delta, T2, true);
  const double tol0 = 1e-7 * (1.0 + G0.cwiseAbs().maxCoeff());
  const double tolT = 1e-7 * (1.0 + GT.cwiseAbs().maxCoeff());
  if (max_eig(G0) > tol0 || max_eig(GT) > tolT) return false;

  Certificate cert;
  cert.P1 = P1;
  cert.P2 = P2;
  cert.chi = chi;
  cert.lambda_t = lambda_t;
  cert.gamma = std::sqrt(std::max(0.0, gamma2));
  cert.delta = delta;
  cert.T2 = T2;
  for (double tau : {0.0, T2}) {
    const MatrixXd M = eval_M(plant, g, cert, tau);
    if (max_eig(M) > 1e-7 * (1.0 + M.cwiseAbs().maxCoeff())) return false;
  }
  return true;
}

double hybrid_sup_norm(const std::vector<ArcSample>& samples,
                       const std::function<double(const ArcSample&)>& magnitude) {
  double flow_sup = 0.0, jump_sup = 0.0;
  for (const auto& s : samples) {
    const double m = magnitude(s);
    if (s.side == SampleSide::PreJump)
      jump_sup = std::max(jump_sup, m);  // (t,j) with (t,j+1) in the domain
    else
      flow_sup = std::max(flow_sup, m);
  }
  return std::max(flow_sup, jump_sup);
}

}  // namespace sporadic
