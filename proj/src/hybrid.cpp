#include "sporadic/hybrid.hpp"

#include <cmath>

namespace sporadic {

SignalSpec SignalSpec::zero(Eigen::Index nw, Eigen::Index ny) {
  SignalSpec s;
  s.w = [nw](double) { return VectorXd::Zero(nw).eval(); };
  s.eta = [ny](double, int) { return VectorXd::Zero(ny).eval(); };
  return s;
}

JitterSequence JitterSequence::deterministic(double T1, double T2) {
  JitterSequence s;
  s.kind = JitterKind::Deterministic;
  s.T1 = T1;
  s.T2 = T2;
  return s;
}

JitterSequence JitterSequence::uniform(double T1, double T2, std::uint64_t seed) {
  JitterSequence s;
  s.kind = JitterKind::UniformRandom;
  s.T1 = T1;
  s.T2 = T2;
  s.seed = seed;
  s.rng.seed(seed);
  return s;
}

JitterSequence JitterSequence::constant(double T1, double T2, double value) {
  if (value < T1 || value > T2)
    throw std::invalid_argument("constant jitter value outside [T1, T2]");
  JitterSequence s;
  s.kind = JitterKind::Constant;
  s.T1 = T1;
  s.T2 = T2;
  s.constant_value = value;
  return s;
}

double next_reset(JitterSequence& seq, double jump_time) {
  if (!(seq.T1 > 0.0) || !(seq.T1 <= seq.T2)) throw std::invalid_argument("need 0 < T1 <= T2");
  switch (seq.kind) {
    case JitterKind::Deterministic:
      return 0.5 * (seq.T2 - seq.T1) * std::sin(10.0 * jump_time) + 0.5 * (seq.T2 + seq.T1);
    case JitterKind::UniformRandom: {
      std::uniform_real_distribution<double> d(seq.T1, seq.T2);
      return d(seq.rng);
    }
    case JitterKind::Constant:
      return seq.constant_value;
  }
  throw std::logic_error("unreachable");
}

namespace {

// One RK4 step of x' = f(t, x).
VectorXd rk4_step(const std::function<VectorXd(double, const VectorXd&)>& f, double t,
                  const VectorXd& x, double h) {
  const VectorXd k1 = f(t, x);
  const VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const VectorXd k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Shared flow/jump engine over a flat state vector. tau is scheduled exactly:
// each flow interval has length equal to the current timer value.
struct Engine {
  std::function<VectorXd(double, const VectorXd&)> rhs;
  std::function<VectorXd(double, int, const VectorXd&)> jump;  // (t, j, x) -> x+
  std::function<void(double, int, SampleSide, const VectorXd&, double)> record;
  double h_max = 0.0;

  void run(VectorXd x, double tau, JitterSequence& jitter, const Horizon& hz) {
    double t = 0.0;
    int j = 0;
    record(t, j, SampleSide::Flow, x, tau);
    while (t < hz.max_t && j < hz.max_jumps) {
      const double t_jump = t + tau;  // exact: tau' = -1
      const double t_end = std::min(t_jump, hz.max_t);
      const double span = t_end - t;
      if (span > 0.0) {
        const int nsteps = std::max(1, static_cast<int>(std::ceil(span / h_max)));
        const double h = span / nsteps;
        const double t_base = t;
        for (int i = 1; i <= nsteps; ++i) {
          x = rk4_step(rhs, t, x, h);
          t = (i == nsteps) ? t_end : t_base + i * h;
          if (!x.allFinite()) throw SimulationBlowup(t, j);
          record(t, j, SampleSide::Flow, x, tau - (t - t_base));
        }
      } else {
        t = t_end;
      }
      if (t_jump > hz.max_t) break;  // horizon reached mid-interval
      record(t, j, SampleSide::PreJump, x, 0.0);
      x = jump(t, j, x);
      tau = next_reset(jitter, t);
      ++j;
      record(t, j, SampleSide::PostJump, x, tau);
    }
  }
};

}  // namespace

HybridArc simulate(const PlantModel& plant, const ObserverGains& gains, const HybridState& init,
                   const SignalSpec& signals, JitterSequence jitter, const Horizon& horizon) {
  if (auto bad = validate_plant(plant); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  const Eigen::Index nz = plant.nz(), ny = plant.ny();
  if (init.z.size() != nz || init.eps.size() != nz || init.theta_tilde.size() != ny)
    throw std::invalid_argument("initial state dimensions do not match plant");
  if (init.tau < 0.0 || init.tau > jitter.T2)
    throw std::invalid_argument("initial tau outside [0, T2]");
  const ErrorSystemMatrices em = assemble_error_matrices(plant, gains);
  const bool lin = plant.is_linear();

  HybridArc arc;
  auto unpack = [nz, ny](const VectorXd& x) {
    HybridState s;
    s.z = x.head(nz);
    s.eps = x.segment(nz, nz);
    s.theta_tilde = x.tail(ny);
    return s;
  };

  Engine eng;
  eng.h_max = jitter.T1 / 50.0;
  eng.rhs = [&](double t, const VectorXd& x) {
    const VectorXd w = signals.w(t);
    VectorXd dx(2 * nz + ny);
    const auto z = x.head(nz);
    const auto ey = x.segment(nz, nz + ny);
    dx.head(nz) = plant.A * z + plant.N * w;
    if (!lin) dx.head(nz) += plant.B * plant.psi(plant.S * z);
    dx.tail(nz + ny) = em.F * ey + em.Tmat * w;
    if (!lin) dx.tail(nz + ny) += em.Q * zeta_mismatch(plant, z, x.segment(nz, nz));
    return dx;
  };
  eng.jump = [&](double t, int j, const VectorXd& x) {
    const VectorXd eta = signals.eta(t, j);
    VectorXd xn = x;
    xn.tail(nz + ny) = em.Gjump * x.tail(nz + ny) + em.Njump * eta;
    HybridState pre = unpack(x), post = unpack(xn);
    pre.tau = 0.0;
    arc.jumps.push_back({j + 1, t, std::move(pre), std::move(post), eta});
    return xn;
  };
  eng.record = [&](double t, int j, SampleSide side, const VectorXd& x, double tau) {
    HybridState s = unpack(x);
    s.tau = tau;
    if (side == SampleSide::PostJump && !arc.jumps.empty()) arc.jumps.back().post.tau = tau;
    arc.samples.push_back({t, j, side, std::move(s), signals.w(t)});
  };

  VectorXd x0(2 * nz + ny);
  x0 << init.z, init.eps, init.theta_tilde;
  eng.run(std::move(x0), init.tau, jitter, horizon);

  // Hybrid time domain from the recorded jump times.
  double t_prev = 0.0;
  int j = 0;
  for (const auto& jr : arc.jumps) {
    arc.domain.intervals.push_back({t_prev, jr.t, j});
    t_prev = jr.t;
    ++j;
  }
  const double t_last = arc.samples.empty() ? 0.0 : arc.samples.back().t;
  arc.domain.intervals.push_back({t_prev, t_last, j});
  return arc;
}

ObserverArc simulate_observer_coordinates(const PlantModel& plant, const ObserverGains& gains,
                                          const VectorXd& z0, const VectorXd& zhat0,
                                          const VectorXd& theta0, double tau0,
                                          const SignalSpec& signals, JitterSequence jitter,
                                          const Horizon& horizon) {
  if (auto bad = validate_plant(plant); !bad.empty())
    throw std::invalid_argument("invalid plant: " + bad.front());
  const Eigen::Index nz = plant.nz(), ny = plant.ny();
  if (z0.size() != nz || zhat0.size() != nz || theta0.size() != ny)
    throw std::invalid_argument("initial state dimensions do not match plant");
  const bool lin = plant.is_linear();

  ObserverArc arc;
  Engine eng;
  eng.h_max = jitter.T1 / 50.0;
  eng.rhs = [&](double t, const VectorXd& x) {
    const VectorXd w = signals.w(t);
    const auto z = x.head(nz);
    const auto zhat = x.segment(nz, nz);
    const auto theta = x.tail(ny);
    VectorXd dx(2 * nz + ny);
    dx.head(nz) = plant.A * z + plant.N * w;
    dx.segment(nz, nz) = plant.A * zhat + gains.L * theta;
    if (!lin) {
      dx.head(nz) += plant.B * plant.psi(plant.S * z);
      dx.segment(nz, nz) += plant.B * plant.psi(plant.S * zhat);
    }
    dx.tail(ny) = gains.H * theta;
    return dx;
  };
  eng.jump = [&](double t, int j, const VectorXd& x) {
    const VectorXd eta = signals.eta(t, j);
    VectorXd xn = x;
    const VectorXd y = plant.C * x.head(nz) + eta;
    xn.tail(ny) = y - plant.C * x.segment(nz, nz);
    return xn;
  };
  eng.record = [&](double t, int j, SampleSide side, const VectorXd& x, double tau) {
    arc.samples.push_back({t, j, side, x.head(nz), x.segment(nz, nz), x.tail(ny), tau});
  };

  VectorXd x0(2 * nz + ny);
  x0 << z0, zhat0, theta0;
  eng.run(std::move(x0), tau0, jitter, horizon);
  return arc;
}

double distance_to_A(const HybridState& s) {
  return std::sqrt(s.eps.squaredNorm() + s.theta_tilde.squaredNorm());
}

double eval_V(const Certificate& cert, const HybridState& s) {
  const double v1 = s.eps.dot(cert.P1 * s.eps);
  const double v2 = std::exp(cert.delta * s.tau) * s.theta_tilde.dot(cert.P2 * s.theta_tilde);
  return v1 + v2;
}

}  // namespace sporadic
