#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include "oracles.hpp"

using namespace geophase;

namespace {

constexpr double kPiD = std::numbers::pi;

std::string scenario_path(const std::string& name) { return std::string(GEOPHASE_SCENARIO_DIR) + "/" + name; }

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("geophase_test_" + name)).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string error_of(const std::string& text) {
  try {
    parse_scenario_text(text, "t.json");
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

int run_cli(const std::string& args, const std::string& out_file) {
  const std::string cmd = std::string(GEOPHASE_CLI) + " " + args + " > " + out_file + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST(Scenario, DiagonalExampleHasExactLevels) {
  const auto sc = parse_scenario(scenario_path("three_level_uniform.json"));
  ASSERT_EQ(sc.hamiltonian.kind, HamiltonianBlock::Kind::Diagonal);
  EXPECT_EQ(sc.hamiltonian.eigenvalues, (std::vector<Rational>{Rational(0), Rational(1), Rational(3)}));
  EXPECT_EQ(sc.hamiltonian.scale, 1.0);
  EXPECT_NEAR(sc.state.norm(), 1.0, 1e-15);
}

TEST(Scenario, DensePauliX) {
  const auto sc = parse_scenario(scenario_path("pauli_x.json"));
  const auto sp = build_spectrum(sc);
  ASSERT_EQ(sp.size(), 2u);
  EXPECT_NEAR(sp.energies[0], -1.0, 1e-14);
  EXPECT_NEAR(sp.energies[1], 1.0, 1e-14);
}

TEST(Scenario, RoundTrip) {
  for (const char* name : {"three_level_uniform.json", "pauli_x.json", "four_level_rational.json", "incommensurate.json"}) {
    const auto a = parse_scenario(scenario_path(name));
    const auto b = parse_scenario_text(serialize_scenario(a));
    EXPECT_EQ(a.hbar, b.hbar);
    EXPECT_EQ(a.hamiltonian.kind, b.hamiltonian.kind);
    EXPECT_EQ(a.hamiltonian.eigenvalues, b.hamiltonian.eigenvalues);
    EXPECT_EQ(a.hamiltonian.scale, b.hamiltonian.scale);
    EXPECT_EQ(a.hamiltonian.matrix, b.hamiltonian.matrix);
    EXPECT_EQ(a.state, b.state) << name;
    EXPECT_EQ(a.options, b.options);
    EXPECT_EQ(serialize_scenario(a), serialize_scenario(b));
  }
}

TEST(Scenario, Errors) {
  const std::string good_h = R"("hamiltonian": {"type": "diagonal", "eigenvalues": ["0", "1"]})";
  EXPECT_NE(error_of("{\n  \"hbar\": 1,\n  oops\n}").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("{" + good_h + R"(, "state": [[1, 0]]})").find("'state'"), std::string::npos);
  EXPECT_NE(error_of("{" + good_h + R"(, "state": [[1, 0], [1, 0]]})").find("norm"), std::string::npos);
  EXPECT_EQ(error_of("{" + good_h + R"(, "state": [[1, 0], [1, 0]], "options": {"auto_normalize": true}})"), "");
  EXPECT_NE(error_of(R"({"hamiltonian": {"type": "dense", "matrix": [[0,0],[1,0],[2,0],[0,0]]}, "state": [[1,0],[0,0]]})")
                .find("Hermitian"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"hamiltonian": {"type": "diagonal", "eigenvalues": ["1/0", "1"]}, "state": [[1,0],[0,0]]})"),
            "");
  EXPECT_NE(error_of("{" + good_h + R"(, "state": [[1, 0], [0, 0]], "extra": 1})").find("extra"), std::string::npos);
  EXPECT_NE(error_of("{" + good_h + R"(, "state": [[1, 0], [0, 0]], "hbar": -1})").find("hbar"), std::string::npos);
  EXPECT_THROW(parse_scenario("/nonexistent/scenario.json"), Error);
}

TEST(Analyze, ThreeLevelReport) {
  const auto a = analyze_scenario(parse_scenario(scenario_path("three_level_uniform.json")));
  std::ostringstream os;
  run_analyze(a, os);
  const std::string r = os.str();
  EXPECT_NE(r.find("verdict: cyclic"), std::string::npos);
  EXPECT_NE(r.find("tau: 6.28318530718"), std::string::npos);
  EXPECT_NE(r.find("gamma_reduced: 2.09439510239"), std::string::npos);
  EXPECT_NE(r.find("omega_prime: 3"), std::string::npos);
  EXPECT_NE(r.find("p: 0 1 3"), std::string::npos);
  EXPECT_NE(r.find("S_psi: 7.83650890569"), std::string::npos);
}

TEST(Analyze, IncommensurateAndStationary) {
  std::ostringstream inc, stat, two;
  run_analyze(analyze_scenario(parse_scenario(scenario_path("incommensurate.json"))), inc);
  EXPECT_NE(inc.str().find("verdict: not cyclic"), std::string::npos);
  run_analyze(analyze_scenario(parse_scenario(scenario_path("stationary.json"))), stat);
  EXPECT_NE(stat.str().find("stationary; gamma = 0"), std::string::npos);
  run_analyze(analyze_scenario(parse_scenario(scenario_path("two_level.json"))), two);
  EXPECT_NE(two.str().find("two_level_closed_form: 3.14159265359"), std::string::npos);
  EXPECT_NE(two.str().find("G_upper_gauge: diag(-6.28318530718, 0)"), std::string::npos);
}

TEST(Analyze, DeterministicOutput) {
  const auto sc = parse_scenario(scenario_path("four_level_rational.json"));
  std::ostringstream a, b;
  run_analyze(analyze_scenario(sc), a);
  run_analyze(analyze_scenario(sc), b);
  EXPECT_EQ(a.str(), b.str());
}

TEST(Evolve, ThreeLevelFinalRow) {
  const auto a = analyze_scenario(parse_scenario(scenario_path("three_level_uniform.json")));
  std::ostringstream os;
  const auto path = temp_path("evolve.csv");
  const auto r = run_evolve(a, 2 * kPiD, 2048, Method::ExactSpectral, path, os);
  EXPECT_NEAR(r.ledger.entries.back().fidelity, 1.0, 1e-12);
  EXPECT_LT(circle_distance(r.ledger.entries.back().sb, 2 * kPiD / 3), 1e-8);
  const std::string csv = read_file(path);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "t,s,fidelity,pancharatnam,dynamical,sb,linear_law,divergence,re_0,im_0,re_1,im_1,re_2,im_2");
  EXPECT_NE(os.str().find("fs_length: 7.83650890569"), std::string::npos);
  EXPECT_NE(os.str().find("detected_period: tau=6.28318530718"), std::string::npos);
}

TEST(Evolve, EigenstateAndRk4Warning) {
  std::ostringstream os;
  const auto r = run_evolve(analyze_scenario(parse_scenario(scenario_path("stationary.json"))), 3.0, 9,
                            Method::ExactSpectral, temp_path("stat.csv"), os);
  for (const auto& s : r.trajectory.samples) EXPECT_EQ(s.s, 0.0);

  std::ostringstream w;
  run_evolve(analyze_scenario(parse_scenario(scenario_path("three_level_uniform.json"))), 2 * kPiD, 20, Method::Rk4,
             temp_path("rk4.csv"), w);
  EXPECT_NE(w.str().find("warning: norm drift"), std::string::npos);

  EXPECT_THROW(run_evolve(analyze_scenario(parse_scenario(scenario_path("two_level.json"))), 1.0, 3,
                          Method::ExactSpectral, "/nonexistent/dir/x.csv", os),
               Error);
}

TEST(Verify, ScenarioOutcomes) {
  for (const char* name : {"three_level_uniform.json", "two_level.json", "pauli_x.json", "four_level_rational.json",
                           "two_level_theta_pi3.json", "stationary.json"}) {
    const auto rep = run_verify(analyze_scenario(parse_scenario(scenario_path(name))));
    std::ostringstream os;
    rep.print(os);
    EXPECT_TRUE(rep.passed()) << name << "\n" << os.str();
  }
  const auto inc = run_verify(analyze_scenario(parse_scenario(scenario_path("incommensurate.json"))));
  EXPECT_TRUE(inc.passed());
  EXPECT_GT(inc.count(CheckStatus::Skip), 0u);
  EXPECT_THROW(parse_scenario(scenario_path("corrupted_norm.json")), Error);
}

TEST(Clock, Examples) {
  std::ostringstream os;
  const auto three = analyze_scenario(parse_scenario(scenario_path("three_level_uniform.json")));
  EXPECT_NEAR(run_clock(three, 0.5, 2.0, os).estimate, 1.5, 1e-6);
  const auto pi3 = analyze_scenario(parse_scenario(scenario_path("two_level_theta_pi3.json")));
  EXPECT_NEAR(run_clock(pi3, 0.0, 1.0, os).estimate, 1.0, 1e-6);
  EXPECT_THROW(run_clock(three, 1.0, 1.0, os), Error);
  EXPECT_THROW(run_clock(analyze_scenario(parse_scenario(scenario_path("stationary.json"))), 0.0, 1.0, os), Error);
}

TEST(Sweep, Rows) {
  const auto rows = sweep_two_level(9, false);
  ASSERT_EQ(rows.size(), 9u);
  EXPECT_NEAR(rows[4].closed_form, kPiD, 1e-14);
  EXPECT_NEAR(rows[4].pipeline, kPiD, 1e-12);
  EXPECT_NEAR(rows[4].sb_oracle, kPiD, 1e-12);
  EXPECT_EQ(rows[0].closed_form, 0.0);
  EXPECT_TRUE(std::isnan(rows[0].sb_oracle));
  for (const auto& r : rows) EXPECT_LT(sweep_disagreement(r), 1e-8);

  const auto grid = sweep_two_level(4, false);  // theta = 2pi/3 is row 2
  EXPECT_NEAR(grid[2].theta, 2 * kPiD / 3, 1e-15);
  EXPECT_NEAR(grid[2].pipeline, 3 * kPiD / 2, 1e-12);
  const auto rev = sweep_two_level(4, true);
  EXPECT_NEAR(rev[2].pipeline, kPiD / 2, 1e-12);
  for (const auto& r : rev) EXPECT_LT(sweep_disagreement(r), 1e-8);
  EXPECT_THROW(sweep_two_level(1, false), Error);
}

TEST(Cli, ExitCodes) {
  const auto out = temp_path("cli.txt");
  EXPECT_EQ(run_cli("analyze " + scenario_path("incommensurate.json"), out), 0);
  EXPECT_NE(read_file(out).find("not cyclic"), std::string::npos);
  EXPECT_EQ(run_cli("verify " + scenario_path("three_level_uniform.json"), out), 0);
  EXPECT_NE(run_cli("verify " + scenario_path("corrupted_norm.json"), out), 0);
  EXPECT_NE(read_file(out).find("norm"), std::string::npos);
  EXPECT_EQ(run_cli("clock " + scenario_path("two_level.json") + " --t1 1 --t2 1", out), 2);
  EXPECT_EQ(run_cli("clock " + scenario_path("three_level_uniform.json") + " --t1 0.5 --t2 2", out), 0);
  EXPECT_NE(read_file(out).find("elapsed_estimate: 1.5"), std::string::npos);
  EXPECT_NE(run_cli("evolve " + scenario_path("two_level.json") + " --t-max 1 --samples 3 --out /nonexistent/x.csv", out),
            0);
  EXPECT_EQ(run_cli("sweep-two-level --steps 9 --out " + temp_path("sweep.csv"), out), 0);
  EXPECT_EQ(run_cli("--hbar 2 analyze " + scenario_path("two_level.json"), out), 0);
  EXPECT_NE(read_file(out).find("tau: 12.5663706144"), std::string::npos);
  EXPECT_EQ(run_cli("bogus", out), 2);
}
