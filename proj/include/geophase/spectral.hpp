#pragma once

// Hamiltonian -> Spectrum: dense diagonalization, degeneracy merging, the
// commensurability decision, and energy moments of a state.

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "geophase/linalg.hpp"
#include "geophase/rational.hpp"

namespace geophase {

/// One distinct eigenvalue and an orthonormal basis of its eigenspace (columns).
struct EigenLevel {
  double value = 0.0;
  CMatrix vectors;
};

struct Spectrum {
  double hbar = 1.0;
  /// Level energies are offset + r_k * base_unit when commensurate.
  double base_unit = 1.0;
  double offset = 0.0;
  bool commensurate = false;
  /// Distinct energies, strictly increasing.
  std::vector<double> energies;
  /// Exact level ratios r_k; empty when the spectrum is not commensurate.
  std::vector<Rational> levels;
  /// Eigenspace basis for each distinct level.
  std::vector<CMatrix> eigenvectors;
  /// Why commensurate is false, when it is.
  std::string diagnostic;

  std::size_t size() const { return energies.size(); }
  Index dim() const { return eigenvectors.empty() ? 0 : eigenvectors.front().rows(); }

  /// Total squared projection of state onto each level.
  std::vector<double> weights(const CVector& state) const {
    std::vector<double> w(size());
    for (std::size_t k = 0; k < size(); ++k) w[k] = (eigenvectors[k].adjoint() * state).squaredNorm();
    return w;
  }

  /// Sum_k E_k P_k in the working basis.
  CMatrix reconstruct() const {
    const Index n = dim();
    CMatrix h = CMatrix::Zero(n, n);
    for (std::size_t k = 0; k < size(); ++k) h += energies[k] * eigenvectors[k] * eigenvectors[k].adjoint();
    return h;
  }
};

struct StructureOptions {
  long long max_denominator = 1000000;
  double rat_tol = 1e-9;
  double hbar = 1.0;
};

inline constexpr Index kMaxDenseDimension = 64;

namespace detail {

inline CMatrix orthonormal_columns(const CMatrix& block) {
  if (block.cols() == 1) return block / block.norm();
  Eigen::HouseholderQR<CMatrix> qr(block);
  return qr.householderQ() * CMatrix::Identity(block.rows(), block.cols());
}

}  // namespace detail

/// Eigendecomposition with eigenvalues closer than deg_tol merged into one level.
/// A non-positive deg_tol selects the default 1e-10 * max|lambda|.
inline std::vector<EigenLevel> diagonalize(const HermitianMatrix& h, double deg_tol = -1.0,
                                           Index max_dim = kMaxDenseDimension) {
  if (h.dim() > max_dim) {
    throw Error("Hamiltonian dimension " + std::to_string(h.dim()) + " exceeds the maximum of " +
                std::to_string(max_dim));
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix());
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed to converge");
  const Eigen::VectorXd& vals = solver.eigenvalues();  // ascending
  const CMatrix& vecs = solver.eigenvectors();
  if (deg_tol <= 0.0) deg_tol = 1e-10 * vals.cwiseAbs().maxCoeff();

  std::vector<EigenLevel> out;
  Index start = 0;
  const Index n = vals.size();
  for (Index i = 1; i <= n; ++i) {
    if (i < n && vals(i) - vals(i - 1) <= deg_tol) continue;
    const Index width = i - start;
    EigenLevel level;
    level.value = vals.segment(start, width).mean();
    level.vectors = detail::orthonormal_columns(vecs.middleCols(start, width));
    out.push_back(std::move(level));
    start = i;
  }
  return out;
}

/// Exact spectrum from rational eigenvalues (working basis = eigenbasis, in the
/// listed order). Duplicates become one degenerate level.
inline Spectrum commensurate_structure(std::span<const Rational> eigenvalues, double scale, double hbar = 1.0) {
  if (eigenvalues.empty()) throw Error("spectrum needs at least one eigenvalue");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw Error("spectrum scale must be a positive finite real");
  if (!(hbar > 0.0)) throw Error("hbar must be positive");
  const auto n = static_cast<Index>(eigenvalues.size());
  std::vector<Rational> distinct(eigenvalues.begin(), eigenvalues.end());
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Spectrum s;
  s.hbar = hbar;
  s.base_unit = scale;
  s.offset = 0.0;
  s.commensurate = true;
  s.levels = distinct;
  for (const auto& r : distinct) {
    std::vector<Index> cols;
    for (Index i = 0; i < n; ++i)
      if (eigenvalues[static_cast<std::size_t>(i)] == r) cols.push_back(i);
    CMatrix v = CMatrix::Zero(n, static_cast<Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) v(cols[c], static_cast<Index>(c)) = 1.0;
    s.energies.push_back(r.to_double() * scale);
    s.eigenvectors.push_back(std::move(v));
  }
  return s;
}

/// Spectrum from numerically obtained levels. Spacing ratios
/// (E_k - E_0) / (E_1 - E_0) must each be identified as rationals; the base unit
/// is E_1 - E_0 so that r_0 = 0 and r_1 = 1.
inline Spectrum commensurate_structure(std::vector<EigenLevel> levels, const StructureOptions& opts = {}) {
  if (levels.empty()) throw Error("spectrum needs at least one eigenvalue");
  if (!(opts.hbar > 0.0)) throw Error("hbar must be positive");
  std::sort(levels.begin(), levels.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  Spectrum s;
  s.hbar = opts.hbar;
  s.offset = levels.front().value;
  for (auto& l : levels) {
    s.energies.push_back(l.value);
    s.eigenvectors.push_back(std::move(l.vectors));
  }
  for (std::size_t k = 1; k < s.energies.size(); ++k) {
    if (!(s.energies[k] > s.energies[k - 1])) throw Error("levels must be distinct; merge degeneracies first");
  }
  if (s.size() == 1) {
    s.base_unit = 1.0;
    s.commensurate = true;
    s.levels = {Rational(0)};
    return s;
  }
  s.base_unit = s.energies[1] - s.energies[0];
  std::vector<Rational> ratios{Rational(0), Rational(1)};
  for (std::size_t k = 2; k < s.size(); ++k) {
    const double x = (s.energies[k] - s.offset) / s.base_unit;
    auto r = identify_rational(x, opts.max_denominator, opts.rat_tol);
    if (!r) {
      std::ostringstream os;
      os.precision(15);
      os << "spacing ratio (E_" << k << " - E_0)/(E_1 - E_0) = " << x
         << " has no rational form with denominator <= " << opts.max_denominator;
      s.diagnostic = os.str();
      s.commensurate = false;
      return s;
    }
    ratios.push_back(*r);
  }
  s.commensurate = true;
  s.levels = std::move(ratios);
  // Snap energies onto the rational grid so every downstream quantity agrees
  // with the exact period.
  for (std::size_t k = 0; k < s.size(); ++k) s.energies[k] = s.offset + s.levels[k].to_double() * s.base_unit;
  return s;
}

/// Convenience overload: plain real eigenvalues with standard-basis eigenvectors.
inline Spectrum commensurate_structure(std::span<const double> eigenvalues, const StructureOptions& opts = {}) {
  const auto n = static_cast<Index>(eigenvalues.size());
  std::vector<EigenLevel> levels;
  for (Index i = 0; i < n; ++i) {
    EigenLevel l;
    l.value = eigenvalues[static_cast<std::size_t>(i)];
    l.vectors = CMatrix::Zero(n, 1);
    l.vectors(i, 0) = 1.0;
    levels.push_back(std::move(l));
  }
  return commensurate_structure(std::move(levels), opts);
}

/// Diagonalize then classify.
inline Spectrum spectrum_from_matrix(const HermitianMatrix& h, double deg_tol, const StructureOptions& opts) {
  return commensurate_structure(diagonalize(h, deg_tol), opts);
}

inline double expectation_energy(const CVector& state, const Spectrum& spectrum) {
  require_dim(state.size(), spectrum.dim(), "expectation_energy");
  require_normalized(state, 1e-10, "expectation_energy");
  const auto w = spectrum.weights(state);
  double e = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) e += spectrum.energies[k] * w[k];
  return e;
}

/// Delta H = sqrt(<H^2> - <H>^2), evaluated as the weighted spread about the
/// mean so that it is shift invariant and never negative.
inline double energy_uncertainty(const CVector& state, const Spectrum& spectrum) {
  const double mean = expectation_energy(state, spectrum);
  const auto w = spectrum.weights(state);
  double var = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double d = spectrum.energies[k] - mean;
    var += d * d * w[k];
  }
  return std::sqrt(std::max(0.0, var));
}

/// Fubini-Study speed Delta H / hbar.
inline double speed_of_evolution(const CVector& state, const Spectrum& spectrum) {
  return energy_uncertainty(state, spectrum) / spectrum.hbar;
}

}  // namespace geophase
