#pragma once

#include <cmath>
#include <vector>

#include "geophase/cyclic.hpp"
#include "geophase/linalg.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

/// State-dependent geometric operator G = sum_i 2*pi*p_i P_i, equivalently
/// (tau/hbar)(H - lambda_gauge).
struct GeometricOperator {
  /// Working-basis matrix built from integer p-coefficients on the support;
  /// off-support levels get (tau/hbar)(lambda_k - lambda_gauge).
  CMatrix matrix;
  /// Same operator built as (tau/hbar)(H - lambda_gauge).
  CMatrix from_hamiltonian;
  /// Diagonal in the eigenbasis, one entry per spectrum level.
  std::vector<double> eigen_diagonal;
  std::size_t gauge_level = 0;
  double gauge_energy = 0.0;
  double tau = 0.0;
  /// max |matrix - from_hamiltonian| over support-level matrix elements.
  double construction_mismatch = 0.0;
  double expect_G = 0.0;
  double delta_G = 0.0;
  /// Length of one period in Fubini-Study distance; equals delta_G.
  double S_psi = 0.0;
};

struct OperatorStatistics {
  double expect = 0.0;
  double delta = 0.0;
  double S_psi = 0.0;
};

inline OperatorStatistics operator_statistics(const GeometricOperator& g, const CVector& state) {
  require_dim(state.size(), g.matrix.rows(), "operator_statistics");
  require_normalized(state, 1e-10, "operator_statistics");
  const CVector gs = g.matrix * state;
  const double mean = state.dot(gs).real();
  // <G^2> - <G>^2 = || (G - <G>) psi ||^2 for Hermitian G.
  const double delta = (gs - mean * state).norm();
  return {mean, delta, delta};
}

/// Builds G for the analysed state. When `hamiltonian` is given, the second
/// construction uses that matrix directly instead of the spectral resolution.
inline GeometricOperator geometric_operator(const CyclicAnalysis& a, const Spectrum& spectrum, const CVector& state,
                                            const CMatrix* hamiltonian = nullptr) {
  if (!a.cyclic) throw Error("no geometric operator for non-cyclic evolutions");
  if (a.stationary) throw Error("no geometric operator for stationary states");
  require_dim(state.size(), spectrum.dim(), "geometric_operator");
  GeometricOperator g;
  g.tau = a.tau;
  g.gauge_level = a.support_levels.at(a.gauge_index);
  g.gauge_energy = a.gauge_energy;
  const Index n = spectrum.dim();

  g.eigen_diagonal.assign(spectrum.size(), 0.0);
  for (std::size_t k = 0; k < spectrum.size(); ++k)
    g.eigen_diagonal[k] = a.tau / a.hbar * (spectrum.energies[k] - a.gauge_energy);
  for (std::size_t i = 0; i < a.support_levels.size(); ++i)
    g.eigen_diagonal[a.support_levels[i]] = kTwoPi * static_cast<double>(a.p[i]);

  g.matrix = CMatrix::Zero(n, n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const CMatrix& v = spectrum.eigenvectors[k];
    g.matrix += g.eigen_diagonal[k] * v * v.adjoint();
  }

  const CMatrix h = hamiltonian != nullptr ? *hamiltonian : spectrum.reconstruct();
  require_dim(h.rows(), n, "geometric_operator");
  g.from_hamiltonian = a.tau / a.hbar * (h - a.gauge_energy * CMatrix::Identity(n, n));

  // Compare on the support: P_S (G1 - G2) P_S.
  CMatrix proj = CMatrix::Zero(n, n);
  for (auto k : a.support_levels) proj += spectrum.eigenvectors[k] * spectrum.eigenvectors[k].adjoint();
  g.construction_mismatch = (proj * (g.matrix - g.from_hamiltonian) * proj).cwiseAbs().maxCoeff();

  const auto stats = operator_statistics(g, state);
  g.expect_G = stats.expect;
  g.delta_G = stats.delta;
  g.S_psi = stats.S_psi;
  return g;
}

/// Two-level closed form for cos(theta/2)|0> + sin(theta/2)|1>: pi(1 - cos theta)
/// mod 2*pi when lambda_0 < lambda_1, the negative otherwise.
inline double two_level_gamma(double theta, bool lambda0_less) {
  const double g = kPi * (1.0 - std::cos(theta));
  return wrap_to_2pi(lambda0_less ? g : -g);
}

}  // namespace geophase
