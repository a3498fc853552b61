#pragma once

// Numerical oracle for everything the cyclic algebra predicts: exact spectral
// and RK4 propagation, Fubini-Study length, the Pancharatnam / dynamical /
// Samuel-Bhandari phase ledger, equation-of-motion residuals and cycle
// detection by scanning the return fidelity.

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "geophase/cyclic.hpp"
#include "geophase/geometric_operator.hpp"
#include "geophase/linalg.hpp"
#include "geophase/spectral.hpp"

namespace geophase {

/// psi(t) = sum_k exp(-i (lambda_k - gauge) t / hbar) P_k psi0.
class SpectralPropagator {
public:
  SpectralPropagator(const Spectrum& spectrum, const CVector& psi0, double gauge) : hbar_(spectrum.hbar) {
    require_dim(psi0.size(), spectrum.dim(), "propagator");
    for (std::size_t k = 0; k < spectrum.size(); ++k) {
      const CMatrix& v = spectrum.eigenvectors[k];
      CVector comp = v * (v.adjoint() * psi0);
      if (comp.squaredNorm() == 0.0) continue;
      shifted_.push_back(spectrum.energies[k] - gauge);
      components_.push_back(std::move(comp));
    }
    dim_ = psi0.size();
  }

  /// State at time t, with the shifted energies optionally scaled by c.
  CVector state(double t, double c = 1.0) const {
    CVector out = CVector::Zero(dim_);
    for (std::size_t k = 0; k < components_.size(); ++k)
      out += std::exp(-kI * (c * shifted_[k] * t / hbar_)) * components_[k];
    return out;
  }

  /// d psi / dt = -i H' psi / hbar.
  CVector derivative(double t) const {
    CVector out = CVector::Zero(dim_);
    for (std::size_t k = 0; k < components_.size(); ++k)
      out += (-kI * shifted_[k] / hbar_) * std::exp(-kI * (shifted_[k] * t / hbar_)) * components_[k];
    return out;
  }

  double hbar() const { return hbar_; }

private:
  double hbar_;
  Index dim_ = 0;
  std::vector<double> shifted_;
  std::vector<CVector> components_;
};

enum class Method { ExactSpectral, Rk4 };

inline const char* method_name(Method m) { return m == Method::ExactSpectral ? "exact" : "rk4"; }

struct TrajectorySample {
  double t = 0.0;
  double s = 0.0;
  CVector state;
};

struct Trajectory {
  Method method = Method::ExactSpectral;
  /// lambda_gauge; propagation used H' = H - gauge.
  double gauge = 0.0;
  double hbar = 1.0;
  /// Delta H / hbar of the initial state.
  double speed = 0.0;
  /// <H'> of the initial state.
  double epsilon = 0.0;
  CMatrix generator;
  std::vector<TrajectorySample> samples;
  /// Present for exact trajectories; lets derived quantities be refined off-grid.
  std::shared_ptr<const SpectralPropagator> propagator;
  double norm_drift = 0.0;
  bool renormalized = false;
  std::vector<std::string> warnings;

  const CVector& initial() const { return samples.front().state; }
  std::size_t size() const { return samples.size(); }
};

namespace detail {

inline double generator_spread(const CMatrix& gen, const CVector& psi) {
  const CVector hp = gen * psi;
  const double nn = psi.squaredNorm();
  const double mean = psi.dot(hp).real() / nn;
  return std::sqrt(std::max(0.0, (hp - mean * psi).squaredNorm() / nn));
}

inline double generator_mean(const CMatrix& gen, const CVector& psi) {
  return psi.dot(gen * psi).real() / psi.squaredNorm();
}

}  // namespace detail

inline Trajectory propagate_exact(const Spectrum& spectrum, const CVector& state, const std::vector<double>& times,
                                  double gauge) {
  require_dim(state.size(), spectrum.dim(), "propagate_exact");
  require_normalized(state, 1e-10, "propagate_exact");
  if (times.empty() || times.front() != 0.0) throw Error("propagation times must start at 0");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (times[k] < times[k - 1]) throw Error("propagation times must be nondecreasing");

  Trajectory tr;
  tr.method = Method::ExactSpectral;
  tr.gauge = gauge;
  tr.hbar = spectrum.hbar;
  tr.speed = speed_of_evolution(state, spectrum);
  tr.epsilon = expectation_energy(state, spectrum) - gauge;
  const Index n = spectrum.dim();
  tr.generator = spectrum.reconstruct() - gauge * CMatrix::Identity(n, n);
  tr.propagator = std::make_shared<SpectralPropagator>(spectrum, state, gauge);
  tr.samples.reserve(times.size());
  for (double t : times) tr.samples.push_back({t, tr.speed * t, tr.propagator->state(t)});
  return tr;
}

/// Evenly spaced times 0, t_max/(count-1), ..., t_max.
inline std::vector<double> linspace_times(double t_max, std::size_t count) {
  if (count < 2) throw Error("need at least two samples");
  std::vector<double> t(count);
  for (std::size_t k = 0; k < count; ++k) t[k] = t_max * static_cast<double>(k) / static_cast<double>(count - 1);
  t.back() = t_max;
  return t;
}

struct FsLength {
  /// Cumulative length at each sample (trapezoid rule on the metric speed).
  std::vector<double> s;
  /// sqrt(<psi'|psi'> - |<psi|psi'>|^2) at each sample.
  std::vector<double> speed;
  double total = 0.0;
  /// Sum of arccos|<psi_k|psi_k+1>| over consecutive samples.
  double chord_total = 0.0;
  double expected_speed = 0.0;
  double max_speed_deviation = 0.0;
};

inline FsLength fs_length(const Trajectory& tr) {
  if (tr.size() < 2) throw Error("Fubini-Study length needs at least two samples");
  FsLength out;
  out.expected_speed = tr.speed;
  out.s.resize(tr.size());
  out.speed.resize(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const CVector psi = tr.samples[k].state.normalized();
    const CVector dpsi = (-kI / tr.hbar) * (tr.generator * psi);
    const double v2 = dpsi.squaredNorm() - std::norm(psi.dot(dpsi));
    out.speed[k] = std::sqrt(std::max(0.0, v2));
    out.max_speed_deviation = std::max(out.max_speed_deviation, std::fabs(out.speed[k] - tr.speed));
  }
  out.s[0] = 0.0;
  for (std::size_t k = 1; k < tr.size(); ++k) {
    const double dt = tr.samples[k].t - tr.samples[k - 1].t;
    out.s[k] = out.s[k - 1] + 0.5 * dt * (out.speed[k] + out.speed[k - 1]);
    const double ov = std::abs(tr.samples[k - 1].state.normalized().dot(tr.samples[k].state.normalized()));
    out.chord_total += std::acos(std::min(1.0, ov));
  }
  out.total = out.s.back();
  return out;
}

/// Classical RK4 on i hbar dpsi/dt = (H - gauge) psi. Every `record_every`-th
/// step is stored; s is the cumulative Fubini-Study length of the stored samples.
inline Trajectory propagate_rk4(const HermitianMatrix& h, const CVector& state, double dt, std::size_t steps,
                                double gauge, double hbar = 1.0, bool renormalize = false,
                                std::size_t record_every = 1) {
  require_dim(state.size(), h.dim(), "propagate_rk4");
  require_normalized(state, 1e-10, "propagate_rk4");
  if (!(dt > 0.0)) throw Error("dt must be positive");
  if (!(hbar > 0.0)) throw Error("hbar must be positive");
  if (record_every == 0) record_every = 1;
  Trajectory tr;
  tr.method = Method::Rk4;
  tr.gauge = gauge;
  tr.hbar = hbar;
  tr.renormalized = renormalize;
  const Index n = h.dim();
  tr.generator = h.matrix() - gauge * CMatrix::Identity(n, n);
  tr.speed = detail::generator_spread(tr.generator, state) / hbar;
  tr.epsilon = detail::generator_mean(tr.generator, state);

  const CMatrix a = (-kI / hbar) * tr.generator;
  CVector psi = state;
  tr.samples.push_back({0.0, 0.0, psi});
  for (std::size_t step = 1; step <= steps; ++step) {
    const CVector k1 = a * psi;
    const CVector k2 = a * (psi + 0.5 * dt * k1);
    const CVector k3 = a * (psi + 0.5 * dt * k2);
    const CVector k4 = a * (psi + dt * k3);
    psi += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tr.norm_drift = std::max(tr.norm_drift, std::fabs(psi.norm() - 1.0));
    if (renormalize) psi.normalize();
    if (step % record_every == 0 || step == steps) tr.samples.push_back({static_cast<double>(step) * dt, 0.0, psi});
  }
  if (!renormalize && tr.norm_drift > 1e-6) {
    std::ostringstream os;
    os << "norm drift " << tr.norm_drift << " exceeds 1e-6; reduce dt or enable renormalization";
    tr.warnings.push_back(os.str());
  }
  if (tr.size() >= 2) {
    const auto len = fs_length(tr);
    for (std::size_t k = 0; k < tr.size(); ++k) tr.samples[k].s = len.s[k];
  }
  return tr;
}

struct LedgerEntry {
  double fidelity = 1.0;
  double pancharatnam = 0.0;
  double dynamical = 0.0;
  double sb = 0.0;
  double linear_law = std::numeric_limits<double>::quiet_NaN();
  double divergence = std::numeric_limits<double>::quiet_NaN();
};

struct PhaseLedger {
  std::vector<LedgerEntry> entries;
  /// Samples where the overlap with the initial state vanishes or the
  /// Pancharatnam phase jumps by more than pi/2 between samples.
  std::vector<std::size_t> ambiguous;
};

/// Pancharatnam phase arg<psi(0)|psi(t)> unwrapped by nearest-branch
/// continuation, dynamical phase -(1/hbar) int <H'> dt, their difference (the
/// Samuel-Bhandari phase) and the linear law s*Gamma/S when `analysis` is a
/// non-stationary cyclic analysis.
inline PhaseLedger phase_ledger(const Trajectory& tr, const CyclicAnalysis* analysis = nullptr) {
  PhaseLedger led;
  const CVector psi0 = tr.initial().normalized();
  const bool have_law = analysis != nullptr && analysis->cyclic && !analysis->stationary && tr.speed > 0.0;
  const double S = have_law ? analysis->tau * tr.speed : 0.0;
  double unwrapped = 0.0;
  double prev_raw = 0.0;
  double dyn = 0.0;
  double prev_mean = detail::generator_mean(tr.generator, tr.samples[0].state);
  for (std::size_t k = 0; k < tr.size(); ++k) {
    const CVector& psi = tr.samples[k].state;
    LedgerEntry e;
    const Complex z = psi0.dot(psi) / psi.norm();
    e.fidelity = std::abs(z);
    if (k > 0) {
      if (e.fidelity < 1e-9) {
        led.ambiguous.push_back(k);
      } else {
        const double raw = std::arg(z);
        const double step = principal_angle(raw - prev_raw);
        if (std::fabs(step) > kPi / 2) led.ambiguous.push_back(k);
        unwrapped += step;
        prev_raw = raw;
      }
      const double mean = detail::generator_mean(tr.generator, psi);
      dyn -= 0.5 * (tr.samples[k].t - tr.samples[k - 1].t) * (mean + prev_mean) / tr.hbar;
      prev_mean = mean;
    }
    e.pancharatnam = unwrapped;
    e.dynamical = dyn;
    e.sb = e.pancharatnam - e.dynamical;
    if (have_law) {
      e.linear_law = tr.samples[k].s * analysis->Gamma / S;
      e.divergence = circle_distance(e.sb, e.linear_law);
    }
    led.entries.push_back(e);
  }
  return led;
}

struct EomResidual {
  std::vector<double> s_residual;
  std::vector<double> t_residual;
  double max_s = 0.0;
  double max_t = 0.0;
};

/// || i S dpsi/ds - G psi || and || i tau dpsi/dt - G psi || per sample, with the
/// derivatives taken analytically from the trajectory's generator.
inline EomResidual eom_residual(const Trajectory& tr, const GeometricOperator& g) {
  if (!(tr.speed > 0.0)) throw Error("equation of motion undefined for stationary states");
  require_dim(tr.generator.rows(), g.matrix.rows(), "eom_residual");
  EomResidual r;
  for (const auto& smp : tr.samples) {
    const CVector dpsi_dt = (-kI / tr.hbar) * (tr.generator * smp.state);
    const CVector dpsi_ds = dpsi_dt / tr.speed;
    const CVector gpsi = g.matrix * smp.state;
    r.s_residual.push_back((kI * g.S_psi * dpsi_ds - gpsi).norm());
    r.t_residual.push_back((kI * g.tau * dpsi_dt - gpsi).norm());
    r.max_s = std::max(r.max_s, r.s_residual.back());
    r.max_t = std::max(r.max_t, r.t_residual.back());
  }
  return r;
}

struct DetectedCycle {
  double tau = 0.0;
  double length = 0.0;
  double fidelity = 0.0;
};

/// First return of |<psi(0)|psi(t)>| to within fidelity_tol of 1 after it has
/// left that band. Exact trajectories are refined on the propagator by
/// bisection on d|overlap|^2/dt.
inline std::optional<DetectedCycle> detect_cycle(const Trajectory& tr, double fidelity_tol) {
  if (tr.size() < 3) return std::nullopt;
  const CVector psi0 = tr.initial().normalized();
  std::vector<double> fid(tr.size());
  for (std::size_t k = 0; k < tr.size(); ++k) fid[k] = std::abs(psi0.dot(tr.samples[k].state.normalized()));

  auto overlap_slope = [&](double t) {
    const Complex z = psi0.dot(tr.propagator->state(t));
    const Complex dz = psi0.dot(tr.propagator->derivative(t));
    return (std::conj(z) * dz).real();
  };
  auto refine = [&](double lo, double hi) -> std::optional<double> {
    double glo = overlap_slope(lo), ghi = overlap_slope(hi);
    if (!(glo >= 0.0 && ghi <= 0.0)) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      (overlap_slope(mid) >= 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  };

  bool left_band = false;
  const std::size_t last = tr.size() - 1;
  for (std::size_t k = 1; k <= last; ++k) {
    if (fid[k] < 1.0 - fidelity_tol) left_band = true;
    if (!left_band) continue;
    const bool interior_max = k < last && fid[k] >= fid[k - 1] && fid[k] >= fid[k + 1];
    const bool edge_max = k == last && fid[k] >= fid[k - 1] && tr.propagator != nullptr;
    if (!interior_max && !edge_max) continue;
    double t_best = tr.samples[k].t;
    double f_best = fid[k];
    if (tr.propagator) {
      const double lo = tr.samples[k - 1].t;
      const double hi = k < last ? tr.samples[k + 1].t : 2.0 * tr.samples[k].t - lo;
      if (auto t = refine(lo, hi)) {
        t_best = *t;
        f_best = std::abs(psi0.dot(tr.propagator->state(t_best)));
      }
    }
    if (f_best >= 1.0 - fidelity_tol) return DetectedCycle{t_best, tr.speed * t_best, f_best};
  }
  return std::nullopt;
}

}  // namespace geophase
