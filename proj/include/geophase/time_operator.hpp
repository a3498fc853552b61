#pragma once

// Expectation values of the distance, time and instantaneous geometric
// operators along a trajectory, and their commutators with H and G.
//
// All three operators are s-derivatives on the solution family:
//   G(s) = i s d/ds,  S(s) = i s (S_psi/Gamma) d/ds,  T(s) = i s (tau/Gamma) d/ds.
// For commutators H acts through its generator i hbar d/dt and G through
// i tau d/dt; as fixed matrices both commute with d/ds and the commutator
// expectation vanishes (reported as commutator_HT_matrix).

#include <cmath>
#include <limits>

#include "geophase/cyclic.hpp"
#include "geophase/dynamics.hpp"
#include "geophase/geometric_operator.hpp"
#include "geophase/linalg.hpp"

namespace geophase {

struct OperatorExpectations {
  double t = 0.0;
  double s = 0.0;
  double expect_G = 0.0;
  double expect_T = 0.0;
  double expect_S = 0.0;
  /// expect_T with d/ds from central differences of neighbouring samples; NaN at the ends.
  double expect_T_fd = std::numeric_limits<double>::quiet_NaN();
  Complex commutator_HT{};
  Complex commutator_GT{};
  Complex commutator_HT_matrix{};
};

namespace detail {

inline void require_clock(const CyclicAnalysis& a, const Trajectory& tr) {
  if (!a.cyclic || a.stationary) throw Error("time operator needs a non-stationary cyclic evolution");
  if (a.Gamma == 0.0) throw Error("time operator undefined at zero unreduced phase");
  if (!(tr.speed > 0.0)) throw Error("time operator undefined for stationary trajectories");
}

}  // namespace detail

inline OperatorExpectations time_operator_expectation(const Trajectory& tr, std::size_t k, const CyclicAnalysis& a) {
  detail::require_clock(a, tr);
  if (k >= tr.size()) throw Error("sample index out of range");
  const auto& smp = tr.samples[k];
  const CVector psi = smp.state.normalized();
  const CVector dpsi_ds = ((-kI / tr.hbar) * (tr.generator * psi)) / tr.speed;
  const double i_dds = psi.dot(kI * dpsi_ds).real();
  const double S = a.tau * tr.speed;

  OperatorExpectations out;
  out.t = smp.t;
  out.s = smp.s;
  out.expect_G = smp.s * i_dds;
  out.expect_T = smp.s * (a.tau / a.Gamma) * i_dds;
  out.expect_S = smp.s * (S / a.Gamma) * i_dds;
  if (k > 0 && k + 1 < tr.size()) {
    const double ds = tr.samples[k + 1].s - tr.samples[k - 1].s;
    if (ds > 0.0) {
      const CVector fd = (tr.samples[k + 1].state - tr.samples[k - 1].state) / ds;
      out.expect_T_fd = smp.s * (a.tau / a.Gamma) * psi.dot(kI * fd).real();
    }
  }
  return out;
}

/// Adds the commutator expectations at sample k. Needs an exact trajectory:
/// a five-point central stencil is evaluated on the propagator with a step
/// h_rel * hbar / ||H'||, independent of the sampling grid.
inline OperatorExpectations commutator_expectations(const Trajectory& tr, std::size_t k, const CyclicAnalysis& a,
                                                    const GeometricOperator& g, double h_rel = 1e-3) {
  detail::require_clock(a, tr);
  if (k == 0 || k + 1 >= tr.size()) throw Error("commutators need an interior sample (finite differences)");
  if (!tr.propagator) throw Error("commutators need an exact-spectral trajectory");
  OperatorExpectations out = time_operator_expectation(tr, k, a);
  const auto& prop = *tr.propagator;
  const double t = tr.samples[k].t;
  const double gen_norm = std::max(tr.generator.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const double h = h_rel * tr.hbar / gen_norm;
  const double c = a.tau / a.Gamma;  // T = i c t d/dt on the family
  const CVector psi = prop.state(t);

  auto tf = [&](double tt) -> CVector { return kI * c * tt * prop.derivative(tt); };  // T psi
  auto ddt = [&](auto&& f) -> CVector {
    return (8.0 * (f(t + h) - f(t - h)) - (f(t + 2.0 * h) - f(t - 2.0 * h))) / (12.0 * h);
  };

  // Generator representation: X = i x d/dt with x = hbar (for H) or tau (for G).
  auto commutator = [&](double x) {
    const CVector x_tpsi = kI * x * ddt(tf);
    const CVector t_xpsi = kI * c * t * ddt([&](double tt) -> CVector { return kI * x * prop.derivative(tt); });
    return psi.dot(x_tpsi - t_xpsi);
  };
  out.commutator_HT = commutator(tr.hbar);
  out.commutator_GT = commutator(g.tau);

  const CMatrix& hm = tr.generator;
  const CVector h_tpsi = hm * tf(t);
  const CVector t_hpsi = kI * c * t * ddt([&](double tt) -> CVector { return hm * prop.state(tt); });
  out.commutator_HT_matrix = psi.dot(h_tpsi - t_hpsi);
  return out;
}

/// <T(tau)> in the energy representation i hbar d/d(epsilon), evaluated by
/// central differences of exp(-i Gamma(epsilon)) where Gamma(epsilon) is the
/// expectation of the geometric operator with the shifted Hamiltonian rescaled
/// to move <H> - lambda_gauge by +-d_eps. Should equal tau.
inline Complex energy_representation_check(const CyclicAnalysis& a, const Spectrum& spectrum, const CVector& state,
                                           double d_eps) {
  if (!a.cyclic) throw Error("energy representation needs a cyclic evolution");
  require_dim(state.size(), spectrum.dim(), "energy_representation_check");
  const Index n = spectrum.dim();
  const CMatrix shifted = spectrum.reconstruct() - a.gauge_energy * CMatrix::Identity(n, n);
  const double eps = state.dot(shifted * state).real();
  if (a.stationary || std::fabs(eps) < 1e-300) throw Error("energy representation undefined at epsilon = 0");
  if (!(d_eps > 0.0)) throw Error("d_eps must be positive");
  auto gamma_at = [&](double e) { return a.tau / a.hbar * (e / eps) * state.dot(shifted * state).real(); };
  auto chi = [&](double e) { return std::exp(-kI * gamma_at(e)); };
  const Complex d = (chi(eps + d_eps) - chi(eps - d_eps)) / (2.0 * d_eps);
  return std::conj(chi(eps)) * kI * a.hbar * d;
}

}  // namespace geophase
