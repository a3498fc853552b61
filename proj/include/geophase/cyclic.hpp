#pragma once

// Cyclic-evolution algebra: support of a state on the eigenbasis, the period
// from the LCM of inverse spacings, integer p-coefficients, the unreduced and
// reduced geometric phase, and the rational selection rule for that phase.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geophase/linalg.hpp"
#include "geophase/rational.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

struct SupportDecomposition {
  /// Spectrum level indices carrying weight, ascending in energy.
  std::vector<std::size_t> indices;
  /// <phi_i|psi> for non-degenerate levels; the projection norm otherwise.
  std::vector<Complex> amplitudes;
  std::vector<double> probabilities;
  std::vector<double> energies;
  /// Exact level ratios; empty when the spectrum has none.
  std::vector<Rational> levels;
  double base_unit = 1.0;
  double offset = 0.0;
  double eps_support = 1e-12;
};

inline SupportDecomposition support(const CVector& state, const Spectrum& spectrum, double eps_support = 1e-12) {
  require_dim(state.size(), spectrum.dim(), "support");
  if (!(eps_support > 0.0)) throw Error("eps_support must be positive");
  SupportDecomposition s;
  s.eps_support = eps_support;
  s.base_unit = spectrum.base_unit;
  s.offset = spectrum.offset;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const CVector proj = spectrum.eigenvectors[k].adjoint() * state;
    const double w = proj.squaredNorm();
    if (w <= eps_support) continue;
    s.indices.push_back(k);
    s.amplitudes.push_back(proj.size() == 1 ? proj(0) : Complex(std::sqrt(w), 0.0));
    s.probabilities.push_back(w);
    s.energies.push_back(spectrum.energies[k]);
    if (spectrum.commensurate) s.levels.push_back(spectrum.levels[k]);
  }
  if (s.indices.empty()) throw Error("state has no weight above eps_support on any eigenspace");
  return s;
}

struct CyclicAnalysis {
  bool cyclic = false;
  bool stationary = false;
  std::string diagnostic;
  double hbar = 1.0;

  /// Support data carried along (spectrum level indices, weights, energies).
  std::vector<std::size_t> support_levels;
  std::vector<double> probabilities;
  std::vector<double> energies;
  std::vector<Rational> ratios;
  double base_unit = 1.0;

  /// LCM of inverse rational spacings, in units of 1/base_unit.
  Rational L;
  /// Period 2*pi*hbar*L/base_unit; NaN for stationary or non-cyclic states.
  double tau = std::numeric_limits<double>::quiet_NaN();
  /// Position of the gauge level within the support (0 = minimum energy).
  std::size_t gauge_index = 0;
  double gauge_energy = 0.0;
  /// p_i = (r_i - r_gauge) * L, exact.
  std::vector<Integer> p;
  /// Total phase, principal value in (-pi, pi], and the winding m with
  /// phi_total = -tau*gauge_energy/hbar + 2*pi*m.
  double phi_total = 0.0;
  long long winding = 0;
  /// <H> - gauge_energy.
  double epsilon = 0.0;
  /// Unreduced phase 2*pi*sum p_i |phi_i|^2, and its reduction into [0, 2*pi).
  double Gamma = 0.0;
  double gamma = 0.0;
};

struct CycleOptions {
  /// Gauge level as a support position; the minimum energy level by default.
  std::optional<std::size_t> gauge;
  long long max_denominator = 1000000;
  double rat_tol = 1e-9;
};

inline CyclicAnalysis analyze_cycle(const SupportDecomposition& supp, double hbar, const CycleOptions& opts = {}) {
  if (!(hbar > 0.0)) throw Error("hbar must be positive");
  CyclicAnalysis a;
  a.hbar = hbar;
  a.support_levels = supp.indices;
  a.probabilities = supp.probabilities;
  a.energies = supp.energies;
  const std::size_t n = supp.indices.size();
  if (n == 0) throw Error("empty support");
  a.gauge_index = opts.gauge.value_or(0);
  if (a.gauge_index >= n) throw Error("gauge index outside the support");
  a.gauge_energy = supp.energies[a.gauge_index];

  if (n == 1) {
    a.cyclic = true;
    a.stationary = true;
    a.p = {Integer(0)};
    a.ratios = {Rational(0)};
    a.diagnostic = "stationary state";
    return a;
  }

  // Exact level ratios for the support. Two levels always have one: the single
  // spacing is the unit.
  std::vector<Rational> r;
  double unit = supp.base_unit;
  if (!supp.levels.empty()) {
    r = supp.levels;
  } else if (n == 2) {
    r = {Rational(0), Rational(1)};
    unit = supp.energies[1] - supp.energies[0];
  } else {
    unit = supp.energies[1] - supp.energies[0];
    r = {Rational(0), Rational(1)};
    for (std::size_t i = 2; i < n; ++i) {
      const double x = (supp.energies[i] - supp.energies[0]) / unit;
      auto q = identify_rational(x, opts.max_denominator, opts.rat_tol);
      if (!q) {
        std::ostringstream os;
        os.precision(15);
        os << "incommensurate support: spacing ratio " << x << " is not rational";
        a.diagnostic = os.str();
        return a;
      }
      r.push_back(*q);
    }
  }
  a.ratios = r;
  a.base_unit = unit;

  std::vector<Rational> inverse_spacings;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k) inverse_spacings.push_back(Rational(1) / (r[k] - r[i]));
  a.L = lcm_set(inverse_spacings);
  a.tau = kTwoPi * hbar * a.L.to_double() / unit;

  double sum_pw = 0.0;
  double eps = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Rational pi = (r[i] - r[a.gauge_index]) * a.L;
    if (!pi.is_integer()) throw Error("internal: non-integer p-coefficient " + pi.to_string());
    a.p.push_back(pi.num());
    sum_pw += static_cast<double>(pi.num()) * supp.probabilities[i];
    eps += (r[i] - r[a.gauge_index]).to_double() * unit * supp.probabilities[i];
  }
  a.Gamma = kTwoPi * sum_pw;
  a.gamma = wrap_to_2pi(a.Gamma);
  a.epsilon = eps;

  const double raw_phi = -a.tau * a.gauge_energy / hbar;
  a.phi_total = principal_angle(raw_phi);
  a.winding = std::llround((a.phi_total - raw_phi) / kTwoPi);
  a.cyclic = true;
  return a;
}

/// p_ij = (r_i - r_j) * L for support positions i, j.
inline Integer p_coefficient(const CyclicAnalysis& a, std::size_t i, std::size_t j) {
  const Rational v = (a.ratios.at(i) - a.ratios.at(j)) * a.L;
  if (!v.is_integer()) throw Error("internal: non-integer p-coefficient");
  return v.num();
}

struct SelectionReport {
  bool probabilities_rational = false;
  std::vector<Rational> probabilities;
  /// LCM of the reduced probability denominators.
  std::optional<Integer> omega_prime;
  /// Smallest omega making every omega*|phi_i|^2 an integer square, if any.
  std::optional<Integer> omega_square;
  std::vector<Integer> alpha;
  double lattice_step = std::numeric_limits<double>::quiet_NaN();
  /// gamma / (2*pi) as an exact fraction in [0, 1), when probabilities are rational.
  std::optional<Rational> phase_fraction;
};

/// Closed-form search for the smallest omega with omega*a_i/b_i = alpha_i^2.
/// Every such omega has squarefree part s = squarefree(a_i*b_i) for all i, so
/// omega = s*k^2, and writing a_i*b_i = s*t_i^2 the condition is
/// b_i | s*k*t_i, i.e. k a multiple of b_i / gcd(b_i, s*t_i).
inline std::optional<std::pair<Integer, std::vector<Integer>>> minimal_square_multiplier(
    const std::vector<Rational>& probs) {
  std::optional<std::uint64_t> common_s;
  std::vector<std::uint64_t> t(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Integer ab = probs[i].num() * probs[i].den();
    if (ab <= 0 || ab > Integer(std::numeric_limits<std::uint64_t>::max() / 4))
      throw Error("probability outside the supported range for the square-multiplier search");
    const auto abu = static_cast<std::uint64_t>(ab);
    const std::uint64_t s = squarefree_part(abu);
    if (common_s && *common_s != s) return std::nullopt;
    common_s = s;
    t[i] = isqrt(abu / s);
  }
  const Integer s(*common_s);
  Integer k = 1;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const Integer& b = probs[i].den();
    k = lcm(k, b / gcd(b, s * Integer(t[i])));
  }
  std::vector<Integer> alpha;
  for (std::size_t i = 0; i < probs.size(); ++i) alpha.push_back(s * k * Integer(t[i]) / probs[i].den());
  return std::make_pair(Integer(s * k * k), std::move(alpha));
}

inline SelectionReport selection_rule(const SupportDecomposition& supp, const CyclicAnalysis& analysis,
                                      long long max_denominator = 1000000, double rat_tol = 1e-9) {
  if (!analysis.cyclic) throw Error("selection rule requires a cyclic evolution");
  SelectionReport rep;
  for (double w : supp.probabilities) {
    auto q = identify_rational(w, max_denominator, rat_tol);
    if (!q || q->sign() <= 0) return rep;
    rep.probabilities.push_back(*q);
  }
  rep.probabilities_rational = true;
  Integer wp = 1;
  for (const auto& q : rep.probabilities) wp = lcm(wp, q.den());
  rep.omega_prime = wp;
  rep.lattice_step = kTwoPi / static_cast<double>(wp);
  if (auto m = minimal_square_multiplier(rep.probabilities)) {
    rep.omega_square = m->first;
    rep.alpha = std::move(m->second);
  }
  Rational frac(0);
  for (std::size_t i = 0; i < rep.probabilities.size() && i < analysis.p.size(); ++i)
    frac = frac + Rational(analysis.p[i]) * rep.probabilities[i];
  Integer rem = frac.num() % frac.den();
  if (rem < 0) rem += frac.den();
  rep.phase_fraction = Rational(rem, frac.den());
  return rep;
}

/// (n * Gamma) mod 2*pi.
inline double phase_after_cycles(const CyclicAnalysis& a, std::uint64_t n) {
  if (!a.cyclic) throw Error("phase after cycles requires a cyclic evolution");
  if (n == 0) return 0.0;
  return wrap_to_2pi(static_cast<double>(n) * a.Gamma);
}

/// Smallest q != p in [1, q_max] whose accumulated phase is within tol of the
/// phase after p cycles, measured on the circle.
inline std::optional<std::uint64_t> near_recurrence(const CyclicAnalysis& a, std::uint64_t p, double tol,
                                                    std::uint64_t q_max) {
  if (!a.cyclic) throw Error("near recurrence requires a cyclic evolution");
  const double target = phase_after_cycles(a, p);
  for (std::uint64_t q = 1; q <= q_max; ++q) {
    if (q == p) continue;
    if (circle_distance(phase_after_cycles(a, q), target) <= tol) return q;
  }
  return std::nullopt;
}

}  // namespace geophase
