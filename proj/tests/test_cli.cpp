#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <json.hpp>

#include "mabt/report.hpp"
#include "mabt/sim.hpp"

using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(MABT_CLI_PATH) + " " + args + " 2>/dev/null";
  std::array<char, 4096> buf{};
  RunResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  while (std::size_t got = fread(buf.data(), 1, buf.size(), pipe)) result.output.append(buf.data(), got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string write_demo_csv() {
  const std::string path = "/tmp/mabt_cli_demo.csv";
  std::ofstream out(path);
  out << "y,a,b,c\n";
  // Fixed numbers; a drives y, b weakly, c is noise.
  const double rows[20][4] = {
      {2.1, 1.0, 0.3, -0.2}, {0.4, -0.5, 0.1, 0.9},  {3.2, 1.8, -0.4, 0.1},
      {1.0, 0.2, 0.8, -0.7}, {-0.8, -1.3, 0.2, 0.3}, {2.5, 1.1, 0.9, -1.2},
      {0.1, -0.9, -0.1, 0.4},{1.9, 0.7, 0.5, 0.8},   {-1.2, -1.7, -0.8, -0.3},
      {2.8, 1.5, 0.1, 0.6},  {0.9, 0.1, 0.4, -0.5},  {1.4, 0.5, -0.6, 0.2},
      {-0.3, -0.8, 0.7, 0.1},{3.6, 2.0, 0.6, -0.9},  {0.6, -0.2, -0.3, 0.5},
      {2.2, 0.9, 0.2, 0.0},  {-1.6, -2.1, 0.4, -0.4},{1.1, 0.3, -0.2, 0.7},
      {0.2, -0.6, 0.9, -0.1},{2.9, 1.6, -0.5, 0.3},
  };
  for (const auto& r : rows)
    out << r[0] << "," << r[1] << "," << r[2] << "," << r[3] << "\n";
  return path;
}

}  // namespace

TEST_CASE("fit emits simplex weights and is deterministic") {
  const std::string csv = write_demo_csv();
  const std::string args = "fit --input " + csv + " --response y --m half_n --B 50 --seed 7";

  const RunResult r1 = run_cli(args);
  REQUIRE(r1.exit_code == 0);
  const json parsed = json::parse(r1.output);
  CHECK(parsed["schema_version"] == 1);
  double sum = 0.0;
  for (const auto& w : parsed["methods"][0]["weights"]) sum += w.get<double>();
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));

  const RunResult r2 = run_cli(args);
  CHECK(r1.output == r2.output);

  // Thread count must not change a byte.
  const RunResult t1 = run_cli(args, "MABT_THREADS=1");
  const RunResult t2 = run_cli(args, "MABT_THREADS=4");
  CHECK(t1.output == r1.output);
  CHECK(t2.output == r1.output);
}

TEST_CASE("unknown method names the offending token and exits nonzero") {
  const std::string csv = write_demo_csv();
  const RunResult r =
      run_cli("fit --input " + csv + " --response y --methods btma,nonsense --seed 1");
  CHECK(r.exit_code == 2);
  const json parsed = json::parse(r.output);
  CHECK(parsed["error"]["code"] == "InvalidConfig");
  CHECK(std::string(parsed["error"]["message"]).find("nonsense") != std::string::npos);
}

TEST_CASE("validation failures are listed exhaustively") {
  const std::string csv = write_demo_csv();
  const RunResult r = run_cli("fit --input " + csv +
                              " --response y --methods bad1,bad2 --m wrong --seed 1");
  CHECK(r.exit_code == 2);
  const json parsed = json::parse(r.output);
  const std::string msg = parsed["error"]["message"];
  CHECK(msg.find("bad1") != std::string::npos);
  CHECK(msg.find("bad2") != std::string::npos);
  CHECK(msg.find("--m") != std::string::npos);
}

TEST_CASE("missing response column produces a machine-readable error") {
  const std::string csv = write_demo_csv();
  const RunResult r = run_cli("fit --input " + csv + " --response zz --seed 1");
  CHECK(r.exit_code == 1);
  const json parsed = json::parse(r.output);
  CHECK(parsed["error"]["code"] == "MissingColumn");
}

TEST_CASE("ci subcommand reports ordered intervals") {
  const std::string csv = write_demo_csv();
  const RunResult r = run_cli("ci --input " + csv +
                              " --response y --coef a --coef b --methods btma,full,bic" +
                              " --B 60 --U 80 --seed 9");
  REQUIRE(r.exit_code == 0);
  const json parsed = json::parse(r.output);
  REQUIRE(parsed["intervals"].size() == 6);
  for (const auto& ci : parsed["intervals"]) {
    CHECK(ci["lower"].get<double>() <= ci["upper"].get<double>());
    CHECK(ci["level"].get<double>() == doctest::Approx(0.95));
  }
}

TEST_CASE("risk-sim csv output is tidy and threads-invariant") {
  const std::string args =
      "risk-sim --n 40 --alpha 1 --r2 0.5 --reps 4 --B 25 --methods aic,btma --seed 3 "
      "--format csv";
  const RunResult r1 = run_cli(args, "MABT_THREADS=1");
  const RunResult r2 = run_cli(args, "MABT_THREADS=3");
  REQUIRE(r1.exit_code == 0);
  CHECK(r1.output == r2.output);
  CHECK(r1.output.rfind("method,metric,value,mc_se,", 0) == 0);
  CHECK(r1.output.find("btma,risk,") != std::string::npos);
}

TEST_CASE("coverage-sim runs a tiny case end to end") {
  const RunResult r = run_cli(
      "coverage-sim --case 1 --eta 0.5 --n 30 --reps 3 --B 20 --U 20 --methods btma,bic "
      "--seed 4");
  REQUIRE(r.exit_code == 0);
  const json parsed = json::parse(r.output);
  CHECK(parsed["rows"].size() == 4);  // 2 methods x {beta3, beta4}
}

TEST_CASE("coverage-sim output equals the direct library call") {
  const RunResult r = run_cli(
      "coverage-sim --case 2 --eta 1.0 --n 40 --reps 4 --B 25 --U 25 --methods btma,just "
      "--seed 99");
  REQUIRE(r.exit_code == 0);

  mabt::CICaseConfig config;
  config.case_id = 2;
  config.n = 40;
  config.eta = 1.0;
  config.reps = 4;
  config.b_reps = 25;
  config.u_draws = 25;
  config.m_policy = mabt::ResamplePolicy::gcv();
  const mabt::CoverageReport report = mabt::run_coverage_experiment(
      config, {mabt::Method::Btma, mabt::Method::Just}, mabt::SeedSpec{99});
  CHECK(r.output == mabt::coverage_report_json(report));
}

TEST_CASE("predict runs end to end on the demo csv") {
  const std::string csv = write_demo_csv();
  const RunResult r = run_cli("predict --input " + csv +
                              " --response y --train-n 15 --splits 3 --B 20 "
                              "--methods saic,btma --seed 5");
  REQUIRE(r.exit_code == 0);
  const json parsed = json::parse(r.output);
  for (const auto& row : parsed["rows"]) CHECK(row["mspe_mean"].get<double>() >= 0.0);
}

TEST_CASE("output lands in --out when requested") {
  const std::string csv = write_demo_csv();
  const std::string out_path = "/tmp/mabt_cli_out.json";
  std::remove(out_path.c_str());
  const RunResult r = run_cli("fit --input " + csv + " --response y --B 20 --seed 2 --out " +
                              out_path);
  REQUIRE(r.exit_code == 0);
  std::ifstream in(out_path);
  REQUIRE(in.good());
  json parsed;
  in >> parsed;
  CHECK(parsed["subcommand"] == "fit");
}
