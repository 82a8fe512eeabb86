#include "sporadic/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace sporadic {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key))
      throw std::invalid_argument("unknown key \"" + key + "\" in " + where);
}

VectorXd vector_from_json(const json& j) {
  VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

std::function<VectorXd(const VectorXd&)> build_psi(const std::string& kind, double amplitude) {
  if (kind == "zero")
    return [](const VectorXd& v) { return VectorXd::Zero(v.size()).eval(); };
  if (kind == "sin")
    return [amplitude](const VectorXd& v) {
      return (amplitude * v.array().sin()).matrix().eval();
    };
  throw std::invalid_argument("unknown nonlinearity selector: " + kind);
}

VectorXd delta_grid_from_json(const json& j) {
  reject_unknown(j, {"lo", "hi", "n", "spacing"}, "design.delta_grid");
  const double lo = j.at("lo").get<double>();
  const double hi = j.at("hi").get<double>();
  const int n = j.at("n").get<int>();
  const std::string spacing = j.value("spacing", "log");
  if (spacing == "log") return log_grid(lo, hi, n);
  if (spacing == "lin") return lin_grid(lo, hi, n);
  throw std::invalid_argument("delta_grid.spacing must be log or lin");
}

}  // namespace

std::function<VectorXd(double)> WSignalConfig::build(Eigen::Index nw) const {
  if (kind == "zero")
    return [nw](double) { return VectorXd::Zero(nw).eval(); };
  if (kind == "piecewise_constant") {
    auto times_c = times;
    auto values_c = values;
    return [nw, times_c, values_c](double t) {
      VectorXd w = VectorXd::Zero(nw);
      for (std::size_t i = 0; i < times_c.size(); ++i) {
        const double t_next =
            (i + 1 < times_c.size()) ? times_c[i + 1] : std::numeric_limits<double>::infinity();
        if (t >= times_c[i] && t < t_next) {
          w(0) = values_c[i];
          break;
        }
      }
      return w;
    };
  }
  if (kind == "sine") {
    const double a = amplitude, om = omega, te = t_end;
    return [nw, a, om, te](double t) {
      VectorXd w = VectorXd::Zero(nw);
      if (t <= te) w(0) = a * std::sin(om * t);
      return w;
    };
  }
  throw std::invalid_argument("unknown w signal kind: " + kind);
}

JitterSequence SimulateConfig::build_jitter(const SamplingSpec& s) const {
  if (jitter_kind == "deterministic") return JitterSequence::deterministic(s.T1, s.T2);
  if (jitter_kind == "uniform") return JitterSequence::uniform(s.T1, s.T2, seed);
  if (jitter_kind == "constant") return JitterSequence::constant(s.T1, s.T2, jitter_value);
  throw std::invalid_argument("unknown jitter kind: " + jitter_kind);
}

ScenarioConfig parse_scenario(const json& j) {
  reject_unknown(j, {"plant", "sampling", "design", "simulate", "output"}, "scenario");
  ScenarioConfig cfg;

  const json& pj = j.at("plant");
  reject_unknown(pj, {"A", "B", "S", "N", "C", "Cp", "lipschitz_ell", "psi"}, "plant");
  cfg.plant.A = matrix_from_json(pj.at("A"));
  cfg.plant.C = matrix_from_json(pj.at("C"));
  cfg.plant.N = matrix_from_json(pj.at("N"));
  cfg.plant.Cp = pj.contains("Cp") ? matrix_from_json(pj.at("Cp"))
                                   : MatrixXd::Identity(cfg.plant.A.rows(), cfg.plant.A.rows());
  if (pj.contains("B")) {
    cfg.plant.B = matrix_from_json(pj.at("B"));
    cfg.plant.S = matrix_from_json(pj.at("S"));
  } else {
    cfg.plant.B = MatrixXd::Zero(cfg.plant.A.rows(), 1);
    cfg.plant.S = MatrixXd::Zero(1, cfg.plant.A.rows());
  }
  cfg.plant.lipschitz_ell = pj.value("lipschitz_ell", 1.0);
  std::string psi_kind = "zero";
  double psi_amp = 0.0;
  if (pj.contains("psi")) {
    reject_unknown(pj.at("psi"), {"kind", "amplitude"}, "plant.psi");
    psi_kind = pj.at("psi").value("kind", "zero");
    psi_amp = pj.at("psi").value("amplitude", 0.0);
  }
  cfg.plant.psi = build_psi(psi_kind, psi_amp);
  if (auto bad = validate_plant(cfg.plant); !bad.empty())
    throw std::invalid_argument("plant does not validate: " + bad.front());

  const json& sj = j.at("sampling");
  reject_unknown(sj, {"T1", "T2", "T2_range"}, "sampling");
  cfg.sampling.T1 = sj.at("T1").get<double>();
  if (sj.contains("T2")) cfg.sampling.T2 = sj.at("T2").get<double>();
  if (sj.contains("T2_range")) {
    const auto& r = sj.at("T2_range");
    cfg.T2_range = {{r.at(0).get<double>(), r.at(1).get<double>()}};
    if (!sj.contains("T2")) cfg.sampling.T2 = cfg.T2_range->second;
  }
  if (!(cfg.sampling.T1 > 0.0) || cfg.sampling.T1 > cfg.sampling.T2)
    throw std::invalid_argument("sampling requires 0 < T1 <= T2");

  if (j.contains("design")) {
    const json& dj = j.at("design");
    reject_unknown(dj, {"method", "lambda_t", "gamma", "delta_grid", "gain_norm_cap", "gains"},
                   "design");
    cfg.design.method = method_from_string(dj.value("method", "PropPred"));
    cfg.design.lambda_t = dj.value("lambda_t", 0.0);
    if (dj.contains("gamma") && !dj.at("gamma").is_null())
      cfg.design.fixed_gamma = dj.at("gamma").get<double>();
    if (dj.contains("gain_norm_cap") && !dj.at("gain_norm_cap").is_null())
      cfg.design.gain_norm_cap = dj.at("gain_norm_cap").get<double>();
    if (dj.contains("delta_grid")) cfg.design.delta_grid = delta_grid_from_json(dj.at("delta_grid"));
    if (dj.contains("gains")) cfg.design.gains = gains_from_json(dj.at("gains"));
  }

  if (j.contains("simulate")) {
    const json& mj = j.at("simulate");
    reject_unknown(mj, {"init", "w", "jitter", "horizon"}, "simulate");
    SimulateConfig sim;
    const json& ij = mj.at("init");
    reject_unknown(ij, {"z", "eps", "theta_tilde", "tau"}, "simulate.init");
    sim.z0 = vector_from_json(ij.at("z"));
    sim.eps0 = vector_from_json(ij.at("eps"));
    sim.theta_tilde0 = vector_from_json(ij.at("theta_tilde"));
    sim.tau0 = ij.value("tau", cfg.sampling.T2);
    if (mj.contains("w")) {
      const json& wj = mj.at("w");
      reject_unknown(wj, {"kind", "times", "values", "amplitude", "omega", "t_end"}, "simulate.w");
      sim.w.kind = wj.value("kind", "zero");
      if (wj.contains("times"))
        sim.w.times = wj.at("times").get<std::vector<double>>();
      if (wj.contains("values"))
        sim.w.values = wj.at("values").get<std::vector<double>>();
      sim.w.amplitude = wj.value("amplitude", 0.0);
      sim.w.omega = wj.value("omega", 0.0);
      sim.w.t_end = wj.value("t_end", std::numeric_limits<double>::infinity());
    }
    if (mj.contains("jitter")) {
      const json& jj = mj.at("jitter");
      reject_unknown(jj, {"kind", "seed", "value"}, "simulate.jitter");
      sim.jitter_kind = jj.value("kind", "deterministic");
      sim.seed = jj.value("seed", 1);
      sim.jitter_value = jj.value("value", cfg.sampling.T2);
    }
    if (mj.contains("horizon")) {
      const json& hj = mj.at("horizon");
      reject_unknown(hj, {"t", "jumps"}, "simulate.horizon");
      sim.horizon_t = hj.value("t", 10.0);
      sim.horizon_jumps = hj.value("jumps", std::numeric_limits<int>::max());
    }
    cfg.simulate = std::move(sim);
  }

  if (j.contains("output")) {
    reject_unknown(j.at("output"), {"dir"}, "output");
    cfg.output_dir = j.at("output").value("dir", ".");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario: " + path);
  json j = json::parse(f);
  return parse_scenario(j);
}

VectorXd parse_grid_spec(const std::string& spec) {
  std::istringstream ss(spec);
  std::string lo_s, hi_s, n_s, kind;
  if (!std::getline(ss, lo_s, ',') || !std::getline(ss, hi_s, ',') ||
      !std::getline(ss, n_s, ',') || !std::getline(ss, kind, ','))
    throw std::invalid_argument("grid spec must be lo,hi,n,log|lin");
  const double lo = std::stod(lo_s), hi = std::stod(hi_s);
  const int n = std::stoi(n_s);
  if (kind == "log") return log_grid(lo, hi, n);
  if (kind == "lin") return lin_grid(lo, hi, n);
  throw std::invalid_argument("grid spec spacing must be log or lin");
}

}  // namespace sporadic
