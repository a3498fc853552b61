#pragma once

// Implementations behind the command-line subcommands. Each runner writes its
// report to a caller-supplied stream so it can be exercised from tests.

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "geophase/cyclic.hpp"
#include "geophase/dynamics.hpp"
#include "geophase/geometric_operator.hpp"
#include "geophase/linalg.hpp"
#include "geophase/scenario.hpp"
#include "geophase/spectral.hpp"
#include "geophase/time_operator.hpp"

namespace geophase {

inline std::string real_text(double x, int digits = 12) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // drop the sign of negative zero
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

inline std::string complex_text(Complex z, int digits = 12) {
  return real_text(z.real(), digits) + (z.imag() < 0 ? " - " : " + ") + real_text(std::fabs(z.imag()), digits) + "i";
}

/// Everything derived from one scenario before any propagation.
struct ScenarioAnalysis {
  Scenario scenario;
  HermitianMatrix hamiltonian;
  Spectrum spectrum;
  SupportDecomposition support;
  CyclicAnalysis cycle;
  double energy = 0.0;
  double delta_H = 0.0;
  std::optional<GeometricOperator> G;
  std::optional<SelectionReport> selection;

  bool clock_capable() const { return cycle.cyclic && !cycle.stationary; }
};

inline ScenarioAnalysis analyze_scenario(const Scenario& sc) {
  ScenarioAnalysis a;
  a.scenario = sc;
  a.hamiltonian = hamiltonian_matrix(sc);
  a.spectrum = build_spectrum(sc);
  a.support = support(sc.state, a.spectrum, sc.options.eps_support);
  CycleOptions co;
  co.max_denominator = sc.options.max_denominator;
  co.rat_tol = sc.options.rat_tol;
  a.cycle = analyze_cycle(a.support, sc.hbar, co);
  a.energy = expectation_energy(sc.state, a.spectrum);
  a.delta_H = energy_uncertainty(sc.state, a.spectrum);
  if (a.clock_capable()) {
    const CMatrix* dense = sc.hamiltonian.kind == HamiltonianBlock::Kind::Dense ? &a.hamiltonian.matrix() : nullptr;
    a.G = geometric_operator(a.cycle, a.spectrum, sc.state, dense);
    a.selection = selection_rule(a.support, a.cycle, sc.options.max_denominator, sc.options.rat_tol);
  }
  return a;
}

namespace detail {

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f, const char* sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += f(v[i]);
  }
  return out;
}

inline std::string integer_text(const Integer& i) { return i.str(); }

/// theta with |phi_0| = cos(theta/2), |phi_1| = sin(theta/2) for a two-level spectrum.
inline double two_level_theta(const Spectrum& s, const CVector& state) {
  const auto w = s.weights(state);
  return 2.0 * std::atan2(std::sqrt(w[1]), std::sqrt(w[0]));
}

}  // namespace detail

inline void run_analyze(const ScenarioAnalysis& a, std::ostream& os) {
  using detail::join;
  const auto& sc = a.scenario;
  const auto& sp = a.spectrum;
  const auto& c = a.cycle;
  auto r12 = [](double x) { return real_text(x); };
  auto rat = [](const Rational& r) { return r.to_string(); };

  os << "scenario: " << sc.source << "\n";
  os << "dimension: " << sp.dim() << "\n";
  os << "hbar: " << r12(sc.hbar) << "\n";
  os << "hamiltonian: " << (sc.hamiltonian.kind == HamiltonianBlock::Kind::Diagonal ? "diagonal" : "dense") << "\n";
  os << "levels: " << sp.size() << " distinct\n";
  os << "energies: " << join(sp.energies, r12) << "\n";
  os << "commensurate_spectrum: " << (sp.commensurate ? "yes" : "no") << "\n";
  if (sp.commensurate) {
    os << "base_unit: " << r12(sp.base_unit) << "\n";
    os << "offset: " << r12(sp.offset) << "\n";
    os << "level_ratios: " << join(sp.levels, rat) << "\n";
  } else {
    os << "spectrum_diagnostic: " << sp.diagnostic << "\n";
  }
  os << "support_levels: " << join(a.support.indices, [](std::size_t i) { return std::to_string(i); }) << "\n";
  os << "support_energies: " << join(a.support.energies, r12) << "\n";
  os << "probabilities: " << join(a.support.probabilities, r12) << "\n";
  os << "energy_expectation: " << r12(a.energy) << "\n";
  os << "delta_H: " << r12(a.delta_H) << "\n";
  os << "speed: " << r12(a.delta_H / sc.hbar) << "\n";

  if (!c.cyclic) {
    os << "verdict: not cyclic\n";
    os << "diagnostic: " << c.diagnostic << "\n";
    return;
  }
  if (c.stationary) {
    os << "verdict: stationary; gamma = 0\n";
    os << "Gamma_unreduced: 0\n";
    os << "gamma_reduced: 0\n";
    return;
  }
  os << "verdict: cyclic\n";
  os << "Lambda_psi: " << join(c.ratios, rat) << " (x " << r12(c.base_unit) << ")\n";
  os << "L_psi: " << c.L.to_string() << " (units of 1/" << r12(c.base_unit) << ")\n";
  os << "tau: " << r12(c.tau) << "\n";
  os << "gauge: level " << c.support_levels[c.gauge_index] << " (lambda = " << r12(c.gauge_energy) << ")\n";
  os << "p: " << join(c.p, detail::integer_text) << "\n";
  os << "phi_total: " << r12(c.phi_total) << " (winding m = " << c.winding << ")\n";
  os << "Gamma_unreduced: " << r12(c.Gamma) << "\n";
  os << "gamma_reduced: " << r12(c.gamma) << "\n";
  if (a.selection) {
    const auto& s = *a.selection;
    if (s.probabilities_rational) {
      os << "rational_probabilities: " << join(s.probabilities, rat) << "\n";
      os << "omega_prime: " << s.omega_prime->str() << "\n";
      if (s.omega_square) {
        os << "omega: " << s.omega_square->str() << " (alpha = " << join(s.alpha, detail::integer_text) << ")\n";
      } else {
        os << "omega: absent (no integer omega makes every omega*|phi_i|^2 a perfect square)\n";
      }
      os << "gamma_over_2pi: " << s.phase_fraction->to_string() << "\n";
      os << "allowed_phase_lattice: 2*pi*n/" << s.omega_prime->str() << " (step " << r12(s.lattice_step) << ")\n";
    } else {
      os << "rational_probabilities: no (phases are not confined to a finite lattice)\n";
    }
  }
  if (a.G) {
    os << "S_psi: " << r12(a.G->S_psi) << "\n";
    os << "delta_G: " << r12(a.G->delta_G) << "\n";
    os << "expect_G: " << r12(a.G->expect_G) << "\n";
    os << "G_eigen_diagonal: " << join(a.G->eigen_diagonal, r12) << "\n";
  }
  if (sp.dim() == 2 && sp.size() == 2 && a.G) {
    const double theta = detail::two_level_theta(sp, sc.state);
    os << "two_level_theta: " << r12(theta) << "\n";
    os << "two_level_closed_form: " << r12(two_level_gamma(theta, true)) << "\n";
    // The alternative gauge on the upper level gives diag(-2*pi, 0); ours is
    // that matrix plus 2*pi times the identity.
    const double upper_gauge_entry = a.G->eigen_diagonal[0] - kTwoPi * static_cast<double>(c.p.back());
    os << "G_minimum_gauge: diag(" << r12(a.G->eigen_diagonal[0]) << ", " << r12(a.G->eigen_diagonal[1]) << ")\n";
    os << "G_upper_gauge: diag(" << r12(upper_gauge_entry) << ", 0) = G_minimum_gauge - "
       << r12(kTwoPi * static_cast<double>(c.p.back())) << " * I\n";
  }
}

inline void write_analysis_json(const ScenarioAnalysis& a, const std::string& path) {
  using nlohmann::json;
  const auto& c = a.cycle;
  json j;
  j["commensurate_spectrum"] = a.spectrum.commensurate;
  j["energies"] = a.spectrum.energies;
  j["support_levels"] = a.support.indices;
  j["probabilities"] = a.support.probabilities;
  j["energy_expectation"] = a.energy;
  j["delta_H"] = a.delta_H;
  j["cyclic"] = c.cyclic;
  j["stationary"] = c.stationary;
  if (!c.diagnostic.empty()) j["diagnostic"] = c.diagnostic;
  if (a.clock_capable()) {
    j["L_psi"] = c.L.to_string();
    j["tau"] = c.tau;
    j["gauge_energy"] = c.gauge_energy;
    std::vector<std::string> p;
    for (const auto& v : c.p) p.push_back(v.str());
    j["p"] = p;
    j["phi_total"] = c.phi_total;
    j["winding"] = c.winding;
    j["Gamma_unreduced"] = c.Gamma;
    j["gamma_reduced"] = c.gamma;
    if (a.G) {
      j["S_psi"] = a.G->S_psi;
      j["delta_G"] = a.G->delta_G;
    }
    if (a.selection && a.selection->probabilities_rational) {
      j["omega_prime"] = a.selection->omega_prime->str();
      j["omega"] = a.selection->omega_square ? json(a.selection->omega_square->str()) : json(nullptr);
      j["gamma_over_2pi"] = a.selection->phase_fraction->to_string();
    }
  } else if (c.stationary) {
    j["Gamma_unreduced"] = 0.0;
    j["gamma_reduced"] = 0.0;
  }
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

/// Trajectory CSV: t,s,fidelity,pancharatnam,dynamical,sb,linear_law,divergence,re_0,im_0,...
inline void write_trajectory_csv(const Trajectory& tr, const PhaseLedger& led, std::ostream& os) {
  const Index n = tr.initial().size();
  os << "t,s,fidelity,pancharatnam,dynamical,sb,linear_law,divergence";
  for (Index i = 0; i < n; ++i) os << ",re_" << i << ",im_" << i;
  os << "\n";
  auto r = [](double x) { return real_text(x, 15); };
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const auto& s = tr.samples[k];
    const auto& e = led.entries[k];
    os << r(s.t) << ',' << r(s.s) << ',' << r(e.fidelity) << ',' << r(e.pancharatnam) << ',' << r(e.dynamical) << ','
       << r(e.sb) << ',' << r(e.linear_law) << ',' << r(e.divergence);
    for (Index i = 0; i < n; ++i) os << ',' << r(s.state(i).real()) << ',' << r(s.state(i).imag());
    os << "\n";
  }
}

struct EvolveResult {
  Trajectory trajectory;
  PhaseLedger ledger;
  FsLength length;
  std::optional<DetectedCycle> detected;
};

inline EvolveResult run_evolve(const ScenarioAnalysis& a, double t_max, std::size_t samples, Method method,
                               const std::string& out_path, std::ostream& os) {
  if (!(t_max > 0.0)) throw Error("--t-max must be positive");
  if (samples < 2) throw Error("--samples must be at least 2");
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write '" + out_path + "'");

  EvolveResult r;
  const double gauge = a.cycle.gauge_energy;
  if (method == Method::ExactSpectral) {
    r.trajectory = propagate_exact(a.spectrum, a.scenario.state, linspace_times(t_max, samples), gauge);
  } else {
    const double dt = t_max / static_cast<double>(samples - 1);
    r.trajectory = propagate_rk4(a.hamiltonian, a.scenario.state, dt, samples - 1, gauge, a.scenario.hbar);
  }
  r.ledger = phase_ledger(r.trajectory, a.clock_capable() ? &a.cycle : nullptr);
  r.length = fs_length(r.trajectory);
  r.detected = detect_cycle(r.trajectory, a.scenario.options.fidelity_tol);
  write_trajectory_csv(r.trajectory, r.ledger, out);
  if (!out) throw Error("failed writing '" + out_path + "'");

  const auto& last = r.ledger.entries.back();
  os << "evolve: method=" << method_name(method) << " samples=" << samples << " t_max=" << real_text(t_max)
     << " gauge=" << real_text(gauge) << "\n";
  os << "output: " << out_path << "\n";
  os << "fs_length: " << real_text(r.length.total) << "\n";
  os << "chord_length: " << real_text(r.length.chord_total) << "\n";
  os << "speed: " << real_text(r.trajectory.speed) << " (max deviation " << real_text(r.length.max_speed_deviation)
     << ")\n";
  os << "final_fidelity: " << real_text(last.fidelity) << "\n";
  os << "final_sb_mod_2pi: " << real_text(wrap_to_2pi(last.sb)) << "\n";
  if (!r.ledger.ambiguous.empty())
    os << "branch_ambiguous_samples: " << r.ledger.ambiguous.size() << " (first at t = "
       << real_text(r.trajectory.samples[r.ledger.ambiguous.front()].t) << ")\n";
  if (r.detected) {
    os << "detected_period: tau=" << real_text(r.detected->tau) << " length=" << real_text(r.detected->length) << "\n";
  } else {
    os << "detected_period: none within window\n";
  }
  if (method == Method::Rk4) os << "norm_drift: " << real_text(r.trajectory.norm_drift) << "\n";
  for (const auto& w : r.trajectory.warnings) os << "warning: " << w << "\n";
  return r;
}

enum class CheckStatus { Pass, Fail, Skip };

struct Check {
  std::string name;
  CheckStatus status = CheckStatus::Skip;
  double measured = std::numeric_limits<double>::quiet_NaN();
  double tolerance = std::numeric_limits<double>::quiet_NaN();
  /// Which relation is being tested.
  std::string reference;
  std::string detail;
};

struct VerifyReport {
  std::vector<Check> checks;

  bool passed() const {
    for (const auto& c : checks)
      if (c.status == CheckStatus::Fail) return false;
    return true;
  }
  std::size_t count(CheckStatus s) const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.status == s ? 1 : 0;
    return n;
  }

  void expect_le(std::string name, double measured, double tol, std::string ref, std::string detail = {}) {
    checks.push_back({std::move(name), measured <= tol ? CheckStatus::Pass : CheckStatus::Fail, measured, tol,
                      std::move(ref), std::move(detail)});
  }
  void skip(std::string name, std::string ref, std::string reason) {
    checks.push_back({std::move(name), CheckStatus::Skip, std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN(), std::move(ref), std::move(reason)});
  }

  /// One line per check: STATUS name measured=.. tol=.. ref=.. [detail].
  void print(std::ostream& os) const {
    for (const auto& c : checks) {
      os << (c.status == CheckStatus::Pass ? "PASS" : c.status == CheckStatus::Fail ? "FAIL" : "SKIP") << ' '
         << c.name << " measured=" << real_text(c.measured, 6) << " tol=" << real_text(c.tolerance, 6)
         << " ref=" << c.reference;
      if (!c.detail.empty()) os << " [" << c.detail << "]";
      os << "\n";
    }
    os << "summary: " << count(CheckStatus::Pass) << " passed, " << count(CheckStatus::Fail) << " failed, "
       << count(CheckStatus::Skip) << " skipped\n";
  }
};

namespace detail {

inline double max_generator_magnitude(const Spectrum& s, double gauge) {
  double m = 0.0;
  for (double e : s.energies) m = std::max(m, std::fabs(e - gauge));
  return m;
}

/// Max ||psi_rk4 - psi_exact|| over the stored samples of an RK4 run of length t_end.
inline std::optional<double> rk4_deviation(const ScenarioAnalysis& a, double t_end, double gauge,
                                           std::size_t max_steps) {
  const double hn = max_generator_magnitude(a.spectrum, gauge);
  if (!(hn > 0.0)) return 0.0;
  const double dt_target = 1e-3 * a.scenario.hbar / hn;
  const auto steps = static_cast<std::size_t>(std::ceil(t_end / dt_target));
  if (steps > max_steps) return std::nullopt;
  const double dt = t_end / static_cast<double>(steps);
  const auto tr = propagate_rk4(a.hamiltonian, a.scenario.state, dt, steps, gauge, a.scenario.hbar, false,
                                std::max<std::size_t>(1, steps / 256));
  const SpectralPropagator exact(a.spectrum, a.scenario.state, gauge);
  double dev = 0.0;
  for (const auto& s : tr.samples) dev = std::max(dev, (s.state - exact.state(s.t)).norm());
  return dev;
}

/// Brute-force smallest omega in [1, limit] with omega*q an integer square for every q.
inline std::optional<Integer> brute_force_omega(const std::vector<Rational>& probs, long long limit) {
  for (long long w = 1; w <= limit; ++w) {
    bool ok = true;
    for (const auto& q : probs) {
      const Integer num = Integer(w) * q.num();
      if (num % q.den() != 0 || !is_perfect_square(num / q.den())) {
        ok = false;
        break;
      }
    }
    if (ok) return Integer(w);
  }
  return std::nullopt;
}

}  // namespace detail

inline VerifyReport run_verify(const ScenarioAnalysis& a) {
  VerifyReport rep;
  const auto& sc = a.scenario;
  const auto& sp = a.spectrum;
  const auto& c = a.cycle;
  const double hbar = sc.hbar;
  const Index n = sp.dim();

  // Spectral checks hold for every scenario.
  {
    const double hn = std::max(1.0, a.hamiltonian.matrix().cwiseAbs().maxCoeff());
    rep.expect_le("spectral.reconstruction", (sp.reconstruct() - a.hamiltonian.matrix()).cwiseAbs().maxCoeff() / hn,
                  1e-9, "spectral-resolution");
    double gram = 0.0;
    CMatrix all(n, 0);
    for (const auto& v : sp.eigenvectors) {
      CMatrix next(n, all.cols() + v.cols());
      next << all, v;
      all = next;
    }
    gram = (all.adjoint() * all - CMatrix::Identity(all.cols(), all.cols())).cwiseAbs().maxCoeff();
    rep.expect_le("spectral.orthonormality", gram, 1e-10, "eigenbasis");
    double sum = 0.0;
    for (double w : a.support.probabilities) sum += w;
    rep.expect_le("support.probability_sum", std::fabs(1.0 - sum),
                  static_cast<double>(n) * a.support.eps_support + 1e-12, "support-definition");
  }

  const double gauge = c.gauge_energy;
  if (c.stationary) {
    const auto tr = propagate_exact(sp, sc.state, linspace_times(10.0 * hbar, 64), gauge);
    double worst = 0.0;
    for (const auto& s : tr.samples) worst = std::max(worst, 1.0 - std::abs(tr.initial().dot(s.state)));
    rep.expect_le("stationary.constant_ray", worst, 1e-12, "stationary-state");
    rep.expect_le("stationary.zero_speed", tr.speed, 1e-12, "speed-of-evolution");
    for (const char* name : {"period.return_fidelity", "phase.sb_at_period", "operator.length_identity",
                             "clock.expect_T", "commutator.H_T"})
      rep.skip(name, "cyclic-evolution", "stationary state: no period");
    return rep;
  }

  if (!c.cyclic) {
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < a.support.energies.size(); ++i)
      min_gap = std::min(min_gap, a.support.energies[i] - a.support.energies[i - 1]);
    const double window = kTwoPi * hbar / min_gap;
    const auto tr = propagate_exact(sp, sc.state, linspace_times(window, 2049), gauge);
    const auto len = fs_length(tr);
    rep.expect_le("length.constant_speed", len.max_speed_deviation, 1e-6, "speed-of-evolution");
    rep.expect_le("length.fs_integral", std::fabs(len.total - tr.speed * window) / std::max(1e-300, len.total), 1e-6,
                  "fubini-study-length");
    if (auto dev = detail::rk4_deviation(a, window, gauge, 4000000)) {
      rep.expect_le("oracle.rk4_vs_exact", *dev, 1e-8, "propagation-oracle");
    } else {
      rep.skip("oracle.rk4_vs_exact", "propagation-oracle", "step count too large");
    }
    const auto det = detect_cycle(tr, sc.options.fidelity_tol);
    rep.checks.push_back({"oracle.no_cycle_in_window", det ? CheckStatus::Fail : CheckStatus::Pass,
                          det ? det->tau : 0.0, 0.0, "period-lcm", "incommensurate support"});
    for (const char* name : {"period.return_fidelity", "phase.sb_at_period", "operator.length_identity",
                             "selection.lattice", "clock.expect_T", "commutator.H_T"})
      rep.skip(name, "cyclic-evolution", c.diagnostic);
    return rep;
  }

  const double tau = c.tau;
  const GeometricOperator& G = *a.G;
  const double Gscale = std::max(1.0, std::fabs(c.Gamma));

  // p-algebra: integers, antisymmetry, cocycle.
  {
    std::size_t violations = 0;
    const std::size_t m = c.p.size();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        const Integer pij = p_coefficient(c, i, j);
        if (pij != -p_coefficient(c, j, i)) ++violations;
        for (std::size_t k = 0; k < m; ++k)
          if (pij != p_coefficient(c, k, j) - p_coefficient(c, k, i)) ++violations;
      }
    rep.expect_le("cyclic.p_algebra", static_cast<double>(violations), 0.0, "p-antisymmetry-cocycle",
                  "exact integer arithmetic");
  }
  {
    double worst = 0.0;
    for (std::size_t g = 0; g < c.p.size(); ++g) {
      CycleOptions co;
      co.gauge = g;
      co.max_denominator = sc.options.max_denominator;
      co.rat_tol = sc.options.rat_tol;
      const auto other = analyze_cycle(a.support, hbar, co);
      worst = std::max(worst, circle_distance(other.gamma, c.gamma));
    }
    rep.expect_le("cyclic.gauge_invariance", worst, 1e-12 * Gscale, "gauge-choice");
  }

  // Period: return to the initial ray, and no earlier return at tau/k.
  const SpectralPropagator prop(sp, sc.state, gauge);
  {
    const double f = std::abs(sc.state.dot(prop.state(tau)));
    rep.expect_le("period.return_fidelity", 1.0 - f, 1e-10, "period-lcm");
    double worst = 0.0;
    for (int k = 2; k <= 12; ++k) worst = std::max(worst, std::abs(sc.state.dot(prop.state(tau / k))));
    rep.checks.push_back({"period.minimality", worst < 1.0 - 1e-6 ? CheckStatus::Pass : CheckStatus::Fail, worst,
                          1.0 - 1e-6, "period-lcm", "max fidelity at tau/k, k = 2..12"});
  }
  {
    const double winding_ok = std::fabs(principal_angle(-tau * gauge / hbar) - c.phi_total);
    rep.expect_le("phase.total_phase", winding_ok, 1e-9 * std::max(1.0, std::fabs(tau * gauge / hbar)),
                  "total-phase");
    rep.expect_le("phase.gamma_energy_identity", std::fabs(c.Gamma - tau * c.epsilon / hbar) / Gscale, 1e-10,
                  "gamma-epsilon-relation");
    double worst = 0.0;
    for (int m = 1; m <= 3; ++m) {
      const Complex z = sc.state.dot(prop.state(m * tau));
      const double sb = std::arg(z) + c.epsilon * m * tau / hbar;
      worst = std::max(worst, circle_distance(sb, m * c.Gamma));
    }
    rep.expect_le("phase.sb_at_period", worst, 1e-8, "samuel-bhandari-oracle", "n = 1..3 periods");
  }

  // Geometric operator.
  {
    const double gmax = std::max(1.0, G.matrix.cwiseAbs().maxCoeff());
    rep.expect_le("operator.construction_equality", G.construction_mismatch / gmax, 1e-10, "projector-vs-hamiltonian");
    rep.expect_le("operator.expectation_is_phase", circle_distance(G.expect_G, c.gamma), 1e-8, "expectation-of-G");
    const double S_ref = tau * a.delta_H / hbar;
    rep.expect_le("operator.length_identity", std::fabs(G.S_psi - S_ref) / std::max(1e-300, S_ref), 1e-10,
                  "S-equals-delta-G");
    const double de = 1e-5 * std::fabs(c.epsilon);
    const Complex t_eps = energy_representation_check(c, sp, sc.state, de);
    rep.expect_le("operator.energy_representation", std::abs(t_eps - Complex(tau, 0.0)) / tau, 1e-5,
                  "time-as-energy-derivative");
  }
  if (sp.dim() == 2 && sp.size() == 2) {
    const double theta = detail::two_level_theta(sp, sc.state);
    rep.expect_le("two_level.closed_form", circle_distance(two_level_gamma(theta, true), c.gamma), 1e-10,
                  "two-level-law");
  }

  // Selection rule.
  if (a.selection && a.selection->probabilities_rational) {
    const auto& s = *a.selection;
    const double x = c.gamma * static_cast<double>(*s.omega_prime) / kTwoPi;
    const double off = std::fabs(x - std::round(x));
    rep.expect_le("selection.lattice", std::min(off, std::fabs(x - static_cast<double>(*s.omega_prime))), 1e-8,
                  "selection-rule", "gamma * omega' / 2pi is an integer");
    const auto brute = detail::brute_force_omega(s.probabilities, 10000);
    const bool closed_in_range = s.omega_square && *s.omega_square <= 10000;
    const bool agree = (brute.has_value() == closed_in_range) && (!brute || *brute == *s.omega_square);
    rep.checks.push_back({"selection.omega_bruteforce", agree ? CheckStatus::Pass : CheckStatus::Fail,
                          brute ? static_cast<double>(*brute) : 0.0, 0.0, "selection-rule",
                          std::string("closed form ") + (s.omega_square ? s.omega_square->str() : "absent")});
  } else {
    rep.skip("selection.lattice", "selection-rule", "probabilities are not rational");
  }

  // Trajectory over one period.
  const auto N = static_cast<std::size_t>(sc.options.samples_per_period);
  const auto tr = propagate_exact(sp, sc.state, linspace_times(tau, N + 1), gauge);
  {
    const auto len = fs_length(tr);
    const double S_ref = tau * a.delta_H / hbar;
    rep.expect_le("length.fs_integral", std::fabs(len.total - S_ref) / S_ref, 1e-6, "fubini-study-length");
    rep.expect_le("length.equals_delta_G", std::fabs(len.total - G.delta_G) / S_ref, 1e-6, "S-equals-delta-G");
    rep.expect_le("length.constant_speed", len.max_speed_deviation, 1e-6, "speed-of-evolution");
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.size(); k += std::max<std::size_t>(1, tr.size() / 16))
      worst = std::max(worst, 1.0 - std::abs(tr.samples[k].state.dot(prop.state(tr.samples[k].t + tau))));
    rep.expect_le("length.cyclic_in_distance", worst, 1e-8, "period-in-length");
  }
  {
    const auto eom = eom_residual(tr, G);
    rep.expect_le("eom.s_parametrization", eom.max_s, 1e-8, "geometric-equation-of-motion");
    rep.expect_le("eom.t_parametrization", eom.max_t, 1e-8, "geometric-equation-of-motion");
  }
  {
    const auto led = phase_ledger(tr, &c);
    const auto& end = led.entries.back();
    rep.expect_le("ledger.sb_matches_linear_law_at_period", end.divergence, 1e-8, "linear-law");
    double max_gap = 0.0;
    for (std::size_t k = 1; k + 1 < tr.size(); k += std::max<std::size_t>(1, tr.size() / 64)) {
      const auto e = time_operator_expectation(tr, k, c);
      max_gap = std::max(max_gap, std::fabs(e.expect_G - led.entries[k].linear_law));
    }
    rep.expect_le("ledger.linear_law_is_expectation", max_gap, 1e-8, "instantaneous-geometric-phase");
  }
  {
    double worst_t = 0.0, worst_s = 0.0, worst_fd = 0.0;
    double worst_ht = 0.0, worst_gt = 0.0, worst_matrix = 0.0;
    double ht_min = std::numeric_limits<double>::infinity(), ht_max = -ht_min;
    std::int64_t p_max = 0;
    for (const auto& p : c.p) p_max = std::max(p_max, static_cast<std::int64_t>(p));
    const double fd_tol = std::pow(kTwoPi * static_cast<double>(p_max) / static_cast<double>(N), 2);
    for (int j = 1; j <= 10; ++j) {
      const std::size_t k = static_cast<std::size_t>(j) * N / 11;
      const auto e = commutator_expectations(tr, k, c, G);
      worst_t = std::max(worst_t, std::fabs(e.expect_T - e.t));
      worst_s = std::max(worst_s, std::fabs(e.expect_S - e.s));
      worst_fd = std::max(worst_fd, std::fabs(e.expect_T_fd - e.expect_T) / std::max(e.t, tau / N));
      worst_ht = std::max(worst_ht, std::abs(e.commutator_HT - Complex(0.0, hbar)));
      worst_gt = std::max(worst_gt, std::abs(e.commutator_GT - Complex(0.0, tau)));
      worst_matrix = std::max(worst_matrix, std::abs(e.commutator_HT_matrix));
      ht_min = std::min(ht_min, e.commutator_HT.imag());
      ht_max = std::max(ht_max, e.commutator_HT.imag());
    }
    rep.expect_le("clock.expect_T", worst_t, 1e-8, "time-operator", "10 interior samples");
    rep.expect_le("clock.expect_S", worst_s, 1e-8, "distance-operator", "10 interior samples");
    rep.expect_le("clock.finite_difference_crosscheck", worst_fd, fd_tol, "time-operator",
                  "grid central differences vs analytic derivative");
    rep.expect_le("commutator.H_T", worst_ht, 1e-6, "canonical-commutator", "generator representation");
    rep.expect_le("commutator.H_T_time_spread", ht_max - ht_min, 1e-6, "canonical-commutator");
    rep.expect_le("commutator.G_T", worst_gt, 1e-6, "G-T-commutator", "generator representation");
    rep.expect_le("commutator.H_T_matrix_representation", worst_matrix, 1e-6, "canonical-commutator",
                  "fixed-matrix H commutes with d/ds, so this vanishes");
  }

  // Independent oracles.
  if (auto dev = detail::rk4_deviation(a, tau, gauge, 4000000)) {
    rep.expect_le("oracle.rk4_vs_exact", *dev, 1e-8, "propagation-oracle", "dt = 1e-3 hbar/||H'||, one period");
  } else {
    rep.skip("oracle.rk4_vs_exact", "propagation-oracle", "step count too large");
  }
  {
    const auto scan = propagate_exact(sp, sc.state, linspace_times(1.25 * tau, 4097), gauge);
    const auto det = detect_cycle(scan, sc.options.fidelity_tol);
    if (det) {
      rep.expect_le("oracle.detect_cycle", std::fabs(det->tau - tau) / std::max(1.0, tau), 1e-6, "period-lcm");
    } else {
      rep.checks.push_back({"oracle.detect_cycle", CheckStatus::Fail, std::numeric_limits<double>::quiet_NaN(), 1e-6,
                            "period-lcm", "no return detected within 1.25 tau"});
    }
  }
  return rep;
}

struct ClockReading {
  double expect_T1 = 0.0;
  double expect_T2 = 0.0;
  double estimate = 0.0;
  double truth = 0.0;
  double error = 0.0;
};

inline ClockReading run_clock(const ScenarioAnalysis& a, double t1, double t2, std::ostream& os) {
  if (!(t1 >= 0.0) || !(t2 > t1)) throw Error("clock needs 0 <= t1 < t2");
  if (!a.clock_capable()) throw Error("clock needs a non-stationary cyclic scenario");
  const auto tr = propagate_exact(a.spectrum, a.scenario.state, {0.0, t1, t2}, a.cycle.gauge_energy);
  ClockReading r;
  r.expect_T1 = time_operator_expectation(tr, 1, a.cycle).expect_T;
  r.expect_T2 = time_operator_expectation(tr, 2, a.cycle).expect_T;
  r.estimate = r.expect_T2 - r.expect_T1;
  r.truth = t2 - t1;
  r.error = std::fabs(r.estimate - r.truth);
  os << "expect_T(t1): " << real_text(r.expect_T1) << "\n";
  os << "expect_T(t2): " << real_text(r.expect_T2) << "\n";
  os << "elapsed_estimate: " << real_text(r.estimate) << "\n";
  os << "elapsed_true: " << real_text(r.truth) << "\n";
  os << "absolute_error: " << real_text(r.error) << "\n";
  return r;
}

struct SweepRow {
  double theta = 0.0;
  double closed_form = 0.0;
  double pipeline = 0.0;
  double sb_oracle = std::numeric_limits<double>::quiet_NaN();
};

/// gamma over a theta grid on [0, pi] for cos(theta/2)|0> + sin(theta/2)|1>,
/// lambda_0 < lambda_1 (normal) or lambda_0 > lambda_1 (reversed). The oracle
/// column is NaN where the state is an eigenstate.
inline std::vector<SweepRow> sweep_two_level(std::size_t steps, bool reversed, double hbar = 1.0) {
  if (steps < 2) throw Error("--steps must be at least 2");
  const std::vector<Rational> levels = reversed ? std::vector<Rational>{1, 0} : std::vector<Rational>{0, 1};
  const Spectrum sp = commensurate_structure(levels, 1.0, hbar);
  std::vector<SweepRow> rows;
  for (std::size_t k = 0; k < steps; ++k) {
    SweepRow row;
    row.theta = kPi * static_cast<double>(k) / static_cast<double>(steps - 1);
    CVector psi(2);
    psi << std::cos(row.theta / 2), std::sin(row.theta / 2);
    row.closed_form = two_level_gamma(row.theta, !reversed);
    const auto supp = support(psi, sp);
    const auto c = analyze_cycle(supp, hbar);
    row.pipeline = c.gamma;
    if (!c.stationary) {
      const SpectralPropagator prop(sp, psi, c.gauge_energy);
      const Complex z = psi.dot(prop.state(c.tau));
      row.sb_oracle = wrap_to_2pi(std::arg(z) + c.epsilon * c.tau / hbar);
    }
    rows.push_back(row);
  }
  return rows;
}

/// Largest pairwise circle distance between the three columns of a row.
inline double sweep_disagreement(const SweepRow& r) {
  double d = circle_distance(r.closed_form, r.pipeline);
  if (!std::isnan(r.sb_oracle)) {
    d = std::max(d, circle_distance(r.closed_form, r.sb_oracle));
    d = std::max(d, circle_distance(r.pipeline, r.sb_oracle));
  }
  return d;
}

inline double run_sweep_two_level(std::size_t steps, bool reversed, const std::string& out_path, std::ostream& os,
                                  double hbar = 1.0) {
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write '" + out_path + "'");
  const auto rows = sweep_two_level(steps, reversed, hbar);
  out << "theta,closed_form,pipeline,sb_oracle\n";
  double worst = 0.0;
  for (const auto& r : rows) {
    out << real_text(r.theta, 15) << ',' << real_text(r.closed_form, 15) << ',' << real_text(r.pipeline, 15) << ','
        << real_text(r.sb_oracle, 15) << "\n";
    worst = std::max(worst, sweep_disagreement(r));
  }
  os << "sweep: steps=" << steps << " order=" << (reversed ? "reversed" : "normal") << "\n";
  os << "output: " << out_path << "\n";
  os << "max_pairwise_disagreement: " << real_text(worst) << "\n";
  return worst;
}

}  // namespace geophase
