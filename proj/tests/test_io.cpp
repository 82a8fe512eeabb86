#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "sporadic/config.hpp"
#include "sporadic/io.hpp"

using namespace sporadic;
using namespace sporadic::testing;

TEST_CASE("matrix json round-trip") {
  std::mt19937_64 rng(91);
  const MatrixXd M = random_matrix(rng, 3, 2);
  const MatrixXd back = matrix_from_json(matrix_to_json(M));
  CHECK((M - back).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS(matrix_from_json(json::parse("[[1,2],[3]]")));
}

TEST_CASE("gains and certificate json round-trips preserve every entry") {
  const ObserverGains g = oscillator_gains_tuned();
  const ObserverGains back = gains_from_json(gains_to_json(g));
  CHECK((g.L - back.L).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g.H - back.H).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.method == g.method);

  std::mt19937_64 rng(92);
  Certificate c;
  c.P1 = random_spd(rng, 2);
  c.P2 = random_spd(rng, 1);
  c.delta = 1.3;
  c.chi = 0.0;
  c.lambda_t = 0.05;
  c.gamma = 34.5;
  c.T2 = 0.41;
  const Certificate cb = certificate_from_json(certificate_to_json(c));
  CHECK((c.P1 - cb.P1).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cb.gamma == c.gamma);
  CHECK(cb.T2 == c.T2);
}

TEST_CASE("arc csv has the advertised header and one line per sample") {
  const PlantModel p = oscillator_plant();
  const auto g = oscillator_gains_tuned();
  HybridState init;
  init.z = VectorXd::Ones(2);
  init.eps = VectorXd::Ones(2);
  init.theta_tilde = VectorXd::Zero(1);
  init.tau = 0.3;
  const auto arc = simulate(p, g, init, SignalSpec::zero(1, 1),
                            JitterSequence::constant(0.2, 0.4, 0.3), {1.0});
  const std::string csv = arc_csv(arc, std::nullopt);
  CHECK(csv.rfind("t,j,side,z1,z2,eps1,eps2,theta_tilde1,tau,dist_A,V\n", 0) == 0);
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) ==
        arc.samples.size() + 1);
  CHECK(csv.find("pre-jump") != std::string::npos);
  CHECK(csv.find("post-jump") != std::string::npos);
  CHECK(csv.find("nan") != std::string::npos);  // V column without a certificate
}

TEST_CASE("identical simulations produce byte-identical csv") {
  const PlantModel p = oscillator_plant();
  const auto g = oscillator_gains_tuned();
  HybridState init;
  init.z = VectorXd::Ones(2);
  init.eps = VectorXd::Ones(2);
  init.theta_tilde = VectorXd::Zero(1);
  init.tau = 0.41;
  auto run = [&] {
    return arc_csv(simulate(p, g, init, SignalSpec::zero(1, 1),
                            JitterSequence::uniform(0.205, 0.41, 99), {8.0}),
                   std::nullopt);
  };
  CHECK(run() == run());
}

TEST_CASE("svg renderer emits polylines and axes") {
  PlotSeries s{"curve", {0.0, 1.0, 2.0}, {1.0, 0.5, 2.0}};
  const std::string svg = render_svg({s}, "T2", "gamma");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("curve") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
}

TEST_CASE("scenario parsing validates and rejects unknown keys") {
  const json ok = {
      {"plant",
       {{"A", {{0, 1}, {-4, 0}}}, {"C", {{1, 0}}}, {"N", {{1}, {0}}},
        {"Cp", {{1, 0}, {0, 1}}}}},
      {"sampling", {{"T1", 0.205}, {"T2", 0.41}}},
      {"design", {{"method", "PropPred"}, {"lambda_t", 0.05}}}};
  const ScenarioConfig cfg = parse_scenario(ok);
  CHECK(cfg.plant.nz() == 2);
  CHECK(cfg.plant.is_linear());
  CHECK(cfg.sampling.T2 == 0.41);
  CHECK(cfg.design.method == DesignMethod::PropPred);

  json bad = ok;
  bad["plant"]["Q"] = 1;
  CHECK_THROWS_AS(parse_scenario(bad), std::invalid_argument);
  json bad2 = ok;
  bad2["typo"] = 1;
  CHECK_THROWS_AS(parse_scenario(bad2), std::invalid_argument);
  json bad3 = ok;
  bad3["sampling"]["T1"] = 0.5;  // T1 > T2
  CHECK_THROWS_AS(parse_scenario(bad3), std::invalid_argument);
}

TEST_CASE("nonlinearity selectors build the advertised psi") {
  json j = {{"plant",
             {{"A", {{0, 1}, {-4, 0}}},
              {"C", {{1, 0}}},
              {"N", {{1}, {0}}},
              {"B", {{0}, {1}}},
              {"S", {{1, 0}}},
              {"lipschitz_ell", 2.0},
              {"psi", {{"kind", "sin"}, {"amplitude", 2.0}}}}},
            {"sampling", {{"T1", 0.1}, {"T2", 0.2}}}};
  const ScenarioConfig cfg = parse_scenario(j);
  CHECK_FALSE(cfg.plant.is_linear());
  VectorXd v(1);
  v << 0.3;
  CHECK(cfg.plant.psi(v)(0) == doctest::Approx(2.0 * std::sin(0.3)));
}

TEST_CASE("piecewise constant and sine signal builders") {
  WSignalConfig w;
  w.kind = "piecewise_constant";
  w.times = {0, 5, 10, 15};
  w.values = {-1, 1, -1, 0};
  auto f = w.build(1);
  CHECK(f(2.0)(0) == -1.0);
  CHECK(f(6.0)(0) == 1.0);
  CHECK(f(12.0)(0) == -1.0);
  CHECK(f(20.0)(0) == 0.0);

  WSignalConfig s;
  s.kind = "sine";
  s.amplitude = 2.0;
  s.omega = 3.0;
  s.t_end = 1.0;
  auto fs = s.build(1);
  CHECK(fs(0.5)(0) == doctest::Approx(2.0 * std::sin(1.5)));
  CHECK(fs(1.5)(0) == 0.0);
}

TEST_CASE("grid spec parser") {
  const VectorXd g = parse_grid_spec("1,100,3,log");
  CHECK(g.size() == 3);
  CHECK(g(0) == doctest::Approx(1.0));
  CHECK(g(1) == doctest::Approx(10.0));
  CHECK(g(2) == doctest::Approx(100.0));
  const VectorXd l = parse_grid_spec("0,1,5,lin");
  CHECK(l(3) == doctest::Approx(0.75));
  CHECK_THROWS(parse_grid_spec("1,2,3"));
}
