// Command-line front end: analyze, evolve, verify, clock, sweep-two-level.
// Exit codes: 0 success, 1 analysis error or failed verification, 2 usage error.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "geophase/geophase.hpp"

namespace {

struct UsageError : geophase::Error {
  using geophase::Error::Error;
};

geophase::Scenario load(const std::string& path, const std::optional<double>& hbar) {
  auto sc = geophase::parse_scenario(path);
  if (hbar) {
    if (!(*hbar > 0.0)) throw UsageError("--hbar must be positive");
    sc.hbar = *hbar;
  }
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Geometric phase of cyclic quantum evolutions"};
  app.require_subcommand(1);

  std::optional<double> hbar;
  app.add_option("--hbar", hbar, "Override the reduced Planck constant of the scenario");

  std::string file;
  std::optional<std::string> json_out;
  auto* analyze = app.add_subcommand("analyze", "Cyclic structure, phases and geometric operator of a scenario");
  analyze->add_option("file", file, "Scenario file")->required();
  analyze->add_option("--json", json_out, "Also write the results as JSON");

  double t_max = 0.0;
  std::size_t samples = 0;
  std::string method = "exact";
  std::string out;
  auto* evolve = app.add_subcommand("evolve", "Propagate and write the trajectory with its phase ledger as CSV");
  evolve->add_option("file", file, "Scenario file")->required();
  evolve->add_option("--t-max", t_max, "End time")->required();
  evolve->add_option("--samples", samples, "Number of samples including t = 0")->required();
  evolve->add_option("--method", method, "Propagator")->check(CLI::IsMember({"exact", "rk4"}));
  evolve->add_option("--out", out, "CSV output path")->required();

  auto* verify = app.add_subcommand("verify", "Run the invariant checks on a scenario");
  verify->add_option("file", file, "Scenario file")->required();

  double t1 = 0.0, t2 = 0.0;
  auto* clock = app.add_subcommand("clock", "Elapsed time from the time operator expectation");
  clock->add_option("file", file, "Scenario file")->required();
  clock->add_option("--t1", t1, "Start time")->required();
  clock->add_option("--t2", t2, "End time")->required();

  std::size_t steps = 0;
  std::string order = "normal";
  auto* sweep = app.add_subcommand("sweep-two-level", "Two-level phase on a theta grid over [0, pi]");
  sweep->add_option("--steps", steps, "Number of grid points")->required();
  sweep->add_option("--order", order, "normal: lambda_0 < lambda_1, reversed: lambda_0 > lambda_1")
      ->check(CLI::IsMember({"normal", "reversed"}));
  sweep->add_option("--out", out, "CSV output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (*analyze) {
      const auto a = geophase::analyze_scenario(load(file, hbar));
      geophase::run_analyze(a, std::cout);
      if (json_out) geophase::write_analysis_json(a, *json_out);
    } else if (*evolve) {
      if (!(t_max > 0.0)) throw UsageError("--t-max must be positive");
      if (samples < 2) throw UsageError("--samples must be at least 2");
      const auto a = geophase::analyze_scenario(load(file, hbar));
      geophase::run_evolve(a, t_max, samples,
                           method == "rk4" ? geophase::Method::Rk4 : geophase::Method::ExactSpectral, out, std::cout);
    } else if (*verify) {
      const auto a = geophase::analyze_scenario(load(file, hbar));
      const auto report = geophase::run_verify(a);
      report.print(std::cout);
      return report.passed() ? 0 : 1;
    } else if (*clock) {
      if (!(t1 >= 0.0) || !(t2 > t1)) throw UsageError("clock needs 0 <= t1 < t2");
      const auto a = geophase::analyze_scenario(load(file, hbar));
      const auto r = geophase::run_clock(a, t1, t2, std::cout);
      if (!(r.error <= 1e-6)) {
        std::cerr << "error: clock error " << r.error << " exceeds 1e-6\n";
        return 1;
      }
    } else if (*sweep) {
      if (steps < 2) throw UsageError("--steps must be at least 2");
      const double h = hbar.value_or(1.0);
      if (!(h > 0.0)) throw UsageError("--hbar must be positive");
      const double worst = geophase::run_sweep_two_level(steps, order == "reversed", out, std::cout, h);
      if (!(worst <= 1e-8)) {
        std::cerr << "error: columns disagree by " << worst << "\n";
        return 1;
      }
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
