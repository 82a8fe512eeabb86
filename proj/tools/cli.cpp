#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sporadic/config.hpp"
#include "sporadic/sdpa.hpp"

namespace fs = std::filesystem;
using namespace sporadic;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;       // usage or numerical error
constexpr int kExitInfeasible = 2;  // infeasible / verification fail

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::string gains_path;
  std::string method_override;
  std::string delta_grid_override;
  bool plot = false;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

ScenarioConfig load(const CommonArgs& args) {
  ScenarioConfig cfg = load_scenario(args.config_path);
  if (!args.out_dir.empty()) cfg.output_dir = args.out_dir;
  if (!args.method_override.empty())
    cfg.design.method = method_from_string(args.method_override);
  if (!args.delta_grid_override.empty())
    cfg.design.delta_grid = parse_grid_spec(args.delta_grid_override);
  if (args.seed_set && cfg.simulate) cfg.simulate->seed = args.seed;
  fs::create_directories(cfg.output_dir);
  return cfg;
}

DesignRequest request_from(const ScenarioConfig& cfg) {
  DesignRequest req;
  req.plant = cfg.plant;
  req.method = cfg.design.method;
  req.lambda_t = cfg.design.lambda_t;
  req.T1 = cfg.sampling.T1;
  req.T2 = cfg.sampling.T2;
  req.delta_grid = cfg.design.delta_grid;
  req.fixed_gamma = cfg.design.fixed_gamma;
  req.gain_norm_cap = cfg.design.gain_norm_cap;
  return req;
}

// Gains plus (optionally) the certificate bundled in a design result file.
std::pair<ObserverGains, std::optional<Certificate>> resolve_gains(const CommonArgs& args,
                                                                   const ScenarioConfig& cfg) {
  if (!args.gains_path.empty()) {
    std::ifstream f(args.gains_path);
    if (!f) throw std::runtime_error("cannot open gains file: " + args.gains_path);
    json j = json::parse(f);
    if (j.contains("gains")) {
      std::optional<Certificate> cert;
      if (j.contains("certificate")) cert = certificate_from_json(j.at("certificate"));
      return {gains_from_json(j.at("gains")), cert};
    }
    return {gains_from_json(j), std::nullopt};
  }
  if (cfg.design.gains) return {*cfg.design.gains, std::nullopt};
  throw std::runtime_error("no gains: provide --gains FILE or a design.gains block");
}

int run_design(const CommonArgs& args) {
  ScenarioConfig cfg = load(args);
  try {
    DesignResult res = design_min_gamma(request_from(cfg));
    write_file(cfg.output_dir + "/design_result.json", design_result_to_json(res).dump(2) + "\n");
    write_file(cfg.output_dir + "/gains.json", gains_to_json(res.gains).dump(2) + "\n");
    std::cout << "feasible: gamma = " << res.certificate.gamma
              << ", delta = " << res.delta_selected << "\n";
    return kExitOk;
  } catch (const AllInfeasible& e) {
    std::cout << "infeasible over the delta grid (best slack " << e.best_slack << ")\n";
    return kExitInfeasible;
  }
}

int run_verify(const CommonArgs& args) {
  ScenarioConfig cfg = load(args);
  auto [gains, cert] = resolve_gains(args, cfg);
  if (!cert) {
    // No certificate supplied: search one over the delta grid at the scenario's T2.
    VectorXd t2_grid(1);
    t2_grid(0) = cfg.sampling.T2;
    try {
      RefineResult ref = two_stage_refine(cfg.plant, gains, cfg.design.delta_grid, t2_grid,
                                          cfg.design.lambda_t);
      cert = ref.certificate;
    } catch (const AllInfeasible&) {
      std::cout << "verification infeasible at T2 = " << cfg.sampling.T2 << "\n";
      return kExitInfeasible;
    }
  }
  VerificationReport rep = verify_certificate(cfg.plant, gains, *cert);
  json out = report_to_json(rep);
  out["certificate"] = certificate_to_json(*cert);
  write_file(cfg.output_dir + "/verification_report.json", out.dump(2) + "\n");
  std::cout << (rep.pass ? "pass" : "fail") << ": grid max eig = " << rep.grid_max_eig
            << ", hinf lower bound = " << rep.hinf_lower_bound << "\n";
  return rep.pass ? kExitOk : kExitInfeasible;
}

int run_simulate(const CommonArgs& args) {
  ScenarioConfig cfg = load(args);
  if (!cfg.simulate) throw std::runtime_error("scenario has no simulate block");
  auto [gains, cert] = resolve_gains(args, cfg);
  const SimulateConfig& sim = *cfg.simulate;
  SignalSpec sig;
  sig.w = sim.w.build(cfg.plant.nw());
  sig.eta = [ny = cfg.plant.ny()](double, int) { return VectorXd::Zero(ny).eval(); };
  HybridState init{sim.z0, sim.eps0, sim.theta_tilde0, sim.tau0};
  HybridArc arc = simulate(cfg.plant, gains, init, sig, sim.build_jitter(cfg.sampling),
                           {sim.horizon_t, sim.horizon_jumps});
  write_file(cfg.output_dir + "/arc.csv", arc_csv(arc, cert));
  if (args.plot) {
    PlotSeries dist{"dist_A", {}, {}};
    for (const auto& s : arc.samples) {
      dist.x.push_back(s.t);
      dist.y.push_back(distance_to_A(s.state));
    }
    write_file(cfg.output_dir + "/arc.svg", render_svg({dist}, "t", "|x|_A"));
  }
  std::cout << "simulated " << arc.jumps.size() << " jumps over t <= "
            << (arc.samples.empty() ? 0.0 : arc.samples.back().t) << "\n";
  return kExitOk;
}

int run_pareto(const CommonArgs& args, int t2_points) {
  ScenarioConfig cfg = load(args);
  if (!cfg.T2_range) throw std::runtime_error("pareto needs sampling.T2_range");
  const VectorXd t2_grid = lin_grid(cfg.T2_range->first, cfg.T2_range->second, t2_points);
  TradeoffCurve curve = pareto_sweep(request_from(cfg), t2_grid);
  write_file(cfg.output_dir + "/tradeoff.csv", tradeoff_csv(curve, cfg.design.method));
  if (args.plot) {
    PlotSeries s{to_string(cfg.design.method), {}, {}};
    for (const auto& pt : curve.points) {
      s.x.push_back(pt.T2);
      s.y.push_back(pt.gamma);
    }
    write_file(cfg.output_dir + "/tradeoff.svg", render_svg({s}, "T2", "gamma"));
  }
  std::cout << curve.points.size() << " feasible points, " << curve.infeasible_T2.size()
            << " infeasible\n";
  return curve.points.empty() ? kExitInfeasible : kExitOk;
}

int run_export_sdpa(const CommonArgs& args) {
  ScenarioConfig cfg = load(args);
  const double delta = cfg.design.delta_grid(0);
  LmiProblem prob;
  if (cfg.design.gains)
    prob = build_verification_problem(cfg.plant, *cfg.design.gains, cfg.design.lambda_t, delta,
                                      cfg.sampling.T2, cfg.design.fixed_gamma);
  else
    prob = build_design_problem(cfg.plant, cfg.design.method, cfg.design.lambda_t, delta,
                                cfg.sampling.T2, cfg.design.fixed_gamma,
                                cfg.design.gain_norm_cap);
  write_file(cfg.output_dir + "/problem.dat-s", export_sdpa(prob));
  std::cout << "exported " << prob.num_vars() << " variables, " << prob.constraints.size()
            << " blocks (delta = " << delta << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Observer design and verification for plants with sporadic measurements"};
  app.require_subcommand(1);
  CommonArgs args;
  int t2_points = 10;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", args.config_path, "scenario JSON")->required();
    cmd->add_option("--out", args.out_dir, "output directory (overrides scenario)");
    cmd->add_option("--gains", args.gains_path, "gains or design-result JSON");
    cmd->add_option("--method", args.method_override, "design method override");
    cmd->add_option("--delta-grid", args.delta_grid_override, "lo,hi,n,log|lin");
    cmd->add_flag("--plot", args.plot, "write SVG plots");
    cmd->add_option("--seed", args.seed, "jitter seed override")
        ->each([&](const std::string&) { args.seed_set = true; });
  };

  CLI::App* design = app.add_subcommand("design", "solve the gamma-minimizing design");
  CLI::App* verify = app.add_subcommand("verify", "verify gains / a certificate");
  CLI::App* simulate = app.add_subcommand("simulate", "simulate the hybrid closed loop");
  CLI::App* pareto = app.add_subcommand("pareto", "sweep the (T2, gamma) tradeoff");
  CLI::App* exp = app.add_subcommand("export-sdpa", "write the problem in SDPA sparse format");
  for (CLI::App* c : {design, verify, simulate, pareto, exp}) add_common(c);
  pareto->add_option("--t2-points", t2_points, "T2 grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }

  try {
    if (design->parsed()) return run_design(args);
    if (verify->parsed()) return run_verify(args);
    if (simulate->parsed()) return run_simulate(args);
    if (pareto->parsed()) return run_pareto(args, t2_points);
    if (exp->parsed()) return run_export_sdpa(args);
  } catch (const AllInfeasible& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
