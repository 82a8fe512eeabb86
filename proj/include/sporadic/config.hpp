#pragma once

#include "sporadic/io.hpp"

namespace sporadic {

struct WSignalConfig {
  std::string kind = "zero";  // zero | piecewise_constant | sine
  std::vector<double> times;  // piecewise_constant breakpoints (ascending)
  std::vector<double> values; // value on [times[i], times[i+1]); scalar channel 0
  double amplitude = 0.0;     // sine
  double omega = 0.0;         // sine angular frequency
  double t_end = std::numeric_limits<double>::infinity();  // sine switch-off time

  std::function<VectorXd(double)> build(Eigen::Index nw) const;
};

struct SimulateConfig {
  VectorXd z0, eps0, theta_tilde0;
  double tau0 = 0.0;
  WSignalConfig w;
  std::string jitter_kind = "deterministic";  // deterministic | uniform | constant
  std::uint64_t seed = 1;
  double jitter_value = 0.0;  // constant kind
  double horizon_t = 10.0;
  int horizon_jumps = std::numeric_limits<int>::max();

  JitterSequence build_jitter(const SamplingSpec& s) const;
};

struct DesignConfig {
  DesignMethod method = DesignMethod::PropPred;
  double lambda_t = 0.0;
  std::optional<double> fixed_gamma;
  std::optional<double> gain_norm_cap;
  VectorXd delta_grid = log_grid(1e-2, 1e3, 50);
  std::optional<ObserverGains> gains;  // manual gains for verify/simulate
};

struct ScenarioConfig {
  PlantModel plant;
  SamplingSpec sampling;
  std::optional<std::pair<double, double>> T2_range;  // sweep/bisection range
  DesignConfig design;
  std::optional<SimulateConfig> simulate;
  std::string output_dir = ".";
};

/// Parses and validates a scenario; unknown keys are rejected.
ScenarioConfig parse_scenario(const json& j);
ScenarioConfig load_scenario(const std::string& path);

VectorXd parse_grid_spec(const std::string& spec);  // "lo,hi,n,log|lin"

}  // namespace sporadic
