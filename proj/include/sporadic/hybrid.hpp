#pragma once

#include <random>

#include "sporadic/lmi.hpp"

namespace sporadic {

struct HybridState {
  VectorXd z;
  VectorXd eps;
  VectorXd theta_tilde;
  double tau = 0.0;
};

enum class SampleSide { Flow, PreJump, PostJump };

struct ArcSample {
  double t = 0.0;
  int j = 0;
  SampleSide side = SampleSide::Flow;
  HybridState state;
  VectorXd w;  // disturbance value at the sample time
};

struct HybridInterval {
  double t_start = 0.0;
  double t_end = 0.0;
  int j = 0;
};

struct HybridTimeDomain {
  std::vector<HybridInterval> intervals;
};

struct JumpRecord {
  int j = 0;       // jump counter after the jump
  double t = 0.0;  // jump time
  HybridState pre, post;
  VectorXd eta;
};

struct HybridArc {
  HybridTimeDomain domain;
  std::vector<ArcSample> samples;
  std::vector<JumpRecord> jumps;
};

struct SignalSpec {
  std::function<VectorXd(double)> w;               // continuous time -> R^{n_w}
  std::function<VectorXd(double, int)> eta;        // (jump time, jump index) -> R^{n_y}
  static SignalSpec zero(Eigen::Index nw, Eigen::Index ny);
};

enum class JitterKind { Deterministic, UniformRandom, Constant };

/// Post-jump timer values in [T1, T2]. Deterministic follows
/// ((T2-T1)/2) sin(10 t_j) + (T2+T1)/2; UniformRandom draws from a seeded
/// generator (identical sequence for identical seeds); Constant returns a
/// fixed value.
struct JitterSequence {
  JitterKind kind = JitterKind::Constant;
  double T1 = 0.0, T2 = 0.0;
  double constant_value = 0.0;
  std::uint64_t seed = 0;
  std::mt19937_64 rng;

  static JitterSequence deterministic(double T1, double T2);
  static JitterSequence uniform(double T1, double T2, std::uint64_t seed);
  static JitterSequence constant(double T1, double T2, double value);
};

double next_reset(JitterSequence& seq, double jump_time);

struct Horizon {
  double max_t = 0.0;
  int max_jumps = std::numeric_limits<int>::max();
};

struct SimulationBlowup : std::runtime_error {
  SimulationBlowup(double t, int j)
      : std::runtime_error("nonfinite state at hybrid time (" + std::to_string(t) + ", " +
                           std::to_string(j) + ")"),
        t(t),
        j(j) {}
  double t;
  int j;
};

/// Closed-loop error-system simulation: fixed-step RK4 with h = min(remaining
/// tau, T1/50); each flow interval lands exactly on its jump time (tau' = -1,
/// so jump times are exact sums, no root-finding). Jumps reset theta_tilde and
/// draw tau+ from the jitter sequence.
HybridArc simulate(const PlantModel& plant, const ObserverGains& gains, const HybridState& init,
                   const SignalSpec& signals, JitterSequence jitter, const Horizon& horizon);

struct ObserverSample {
  double t = 0.0;
  int j = 0;
  SampleSide side = SampleSide::Flow;
  VectorXd z, zhat, theta;
  double tau = 0.0;
};

struct ObserverArc {
  std::vector<ObserverSample> samples;
};

/// Integrates plant and observer in their own coordinates (theta' = H theta
/// between jumps, theta+ = y - C zhat at jumps). The induced (z - zhat,
/// C eps - theta) trajectory matches simulate() up to roundoff.
ObserverArc simulate_observer_coordinates(const PlantModel& plant, const ObserverGains& gains,
                                          const VectorXd& z0, const VectorXd& zhat0,
                                          const VectorXd& theta0, double tau0,
                                          const SignalSpec& signals, JitterSequence jitter,
                                          const Horizon& horizon);

/// |x|_A = |(eps, theta_tilde)|.
double distance_to_A(const HybridState& state);

/// V = eps' P1 eps + e^{delta tau} tt' P2 tt.
double eval_V(const Certificate& cert, const HybridState& state);

}  // namespace sporadic
