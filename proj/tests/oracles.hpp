#pragma once

// Independent reference computations shared by the tests. None of these use
// the library's spectral propagator or cyclic analysis.

#include <cmath>
#include <random>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "geophase/geophase.hpp"

namespace oracle {

using geophase::CMatrix;
using geophase::Complex;
using geophase::CVector;

inline CVector uniform(int n) { return CVector::Constant(n, Complex(1.0 / std::sqrt(double(n)), 0.0)); }

inline CVector two_level(double theta) {
  CVector v(2);
  v << std::cos(theta / 2), std::sin(theta / 2);
  return v;
}

inline CMatrix diag(const std::vector<double>& e) {
  CMatrix m = CMatrix::Zero(e.size(), e.size());
  for (std::size_t i = 0; i < e.size(); ++i) m(i, i) = e[i];
  return m;
}

/// exp(-i (H - gauge) t / hbar) psi via Eigen's Pade-based matrix exponential.
inline CVector evolve(const CMatrix& h, const CVector& psi, double t, double gauge = 0.0, double hbar = 1.0) {
  const CMatrix a = (Complex(0, -t / hbar)) * (h - gauge * CMatrix::Identity(h.rows(), h.cols()));
  return a.exp() * psi;
}

/// Samuel-Bhandari phase at t: arg<psi|psi(t)> + <H - gauge> t / hbar, wrapped.
inline double sb_phase(const CMatrix& h, const CVector& psi, double t, double gauge = 0.0, double hbar = 1.0) {
  const CVector pt = evolve(h, psi, t, gauge, hbar);
  const double mean = psi.dot(h * psi).real() - gauge;
  return geophase::wrap_to_2pi(std::arg(psi.dot(pt)) + mean * t / hbar);
}

/// Largest fidelity |<psi|psi(t)>| over an even grid on [t_lo, t_hi].
inline double max_fidelity(const CMatrix& h, const CVector& psi, double t_lo, double t_hi, int grid = 4000) {
  double best = 0.0;
  for (int k = 0; k <= grid; ++k) {
    const double t = t_lo + (t_hi - t_lo) * k / grid;
    best = std::max(best, std::abs(psi.dot(evolve(h, psi, t))));
  }
  return best;
}

inline CVector random_state(std::mt19937_64& rng, int n, double min_weight = 0.0) {
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (;;) {
    CVector v(n);
    for (int i = 0; i < n; ++i) v(i) = Complex(g(rng), g(rng));
    v.normalize();
    bool ok = true;
    for (int i = 0; i < n; ++i) ok = ok && std::norm(v(i)) >= min_weight;
    if (ok) return v;
  }
}

}  // namespace oracle
