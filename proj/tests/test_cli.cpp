#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "sporadic/io.hpp"

namespace fs = std::filesystem;
using sporadic::json;

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CLI_BINARY) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

const fs::path kWork = fs::temp_directory_path() / "sporadic-cli-test";

}  // namespace

TEST_CASE("design then verify round-trips the emitted gains file") {
  fs::remove_all(kWork);
  fs::create_directories(kWork);
  const std::string scen = std::string(SCENARIO_DIR) + "/example1.json";
  const std::string out = (kWork / "design").string();
  REQUIRE(run_cli("design --config " + scen + " --out " + out) == 0);
  REQUIRE(fs::exists(out + "/design_result.json"));
  REQUIRE(fs::exists(out + "/gains.json"));
  // The design result is accepted by verify unchanged.
  CHECK(run_cli("verify --config " + scen + " --gains " + out + "/design_result.json --out " +
                out) == 0);
  CHECK(fs::exists(out + "/verification_report.json"));
  const json rep = json::parse(slurp(out + "/verification_report.json"));
  CHECK(rep.at("status") == "pass");
}

TEST_CASE("verify with manual gains from the scenario") {
  const std::string scen = std::string(SCENARIO_DIR) + "/example1.json";
  const std::string out = (kWork / "verify-manual").string();
  CHECK(run_cli("verify --config " + scen + " --out " + out) == 0);
}

TEST_CASE("an out-of-reach T2 exits with the infeasible code") {
  // Rewrite the oscillator scenario with T2 = 100.
  fs::create_directories(kWork);
  json j = json::parse(slurp(std::string(SCENARIO_DIR) + "/example1.json"));
  j["sampling"]["T2"] = 100.0;
  j["sampling"]["T1"] = 50.0;
  const std::string scen = (kWork / "impossible.json").string();
  std::ofstream(scen) << j.dump(2);
  CHECK(run_cli("design --config " + scen + " --out " + (kWork / "imp").string()) == 2);
}

TEST_CASE("malformed json exits with the usage/error code") {
  fs::create_directories(kWork);
  const std::string scen = (kWork / "broken.json").string();
  std::ofstream(scen) << "{ not json";
  CHECK(run_cli("design --config " + scen) == 1);
  CHECK(run_cli("design --config /nonexistent.json") == 1);
  CHECK(run_cli("design") == 1);  // missing required option
}

TEST_CASE("simulate writes a deterministic arc csv and svg") {
  const std::string scen = std::string(SCENARIO_DIR) + "/example1.json";
  const std::string out1 = (kWork / "sim1").string();
  const std::string out2 = (kWork / "sim2").string();
  REQUIRE(run_cli("simulate --config " + scen + " --plot --out " + out1) == 0);
  REQUIRE(run_cli("simulate --config " + scen + " --plot --out " + out2) == 0);
  const std::string a = slurp(out1 + "/arc.csv");
  CHECK_FALSE(a.empty());
  CHECK(a == slurp(out2 + "/arc.csv"));  // identical config -> identical bytes
  CHECK(fs::exists(out1 + "/arc.svg"));
}

TEST_CASE("pareto sweep writes the tradeoff csv") {
  const std::string scen = std::string(SCENARIO_DIR) + "/example2.json";
  const std::string out = (kWork / "pareto").string();
  REQUIRE(run_cli("pareto --config " + scen + " --t2-points 3 --plot --out " + out) == 0);
  const std::string csv = slurp(out + "/tradeoff.csv");
  CHECK(csv.rfind("T2,gamma,delta,method", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') >= 2);
  CHECK(fs::exists(out + "/tradeoff.svg"));
}

TEST_CASE("export-sdpa writes a parseable problem file") {
  const std::string scen = std::string(SCENARIO_DIR) + "/example1.json";
  const std::string out = (kWork / "sdpa").string();
  REQUIRE(run_cli("export-sdpa --config " + scen + " --out " + out) == 0);
  std::ifstream f(out + "/problem.dat-s");
  REQUIRE(f.good());
  int nvars = 0;
  f >> nvars;
  CHECK(nvars == 5);  // P1 (3) + P2 (1) + mu on the linear benchmark
}
