#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "geophase/error.hpp"

namespace geophase {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using Index = Eigen::Index;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr Complex kI{0.0, 1.0};

/// Complex matrix known to equal its conjugate transpose (after symmetrization).
class HermitianMatrix {
public:
  HermitianMatrix() = default;

  /// Validates max |H_ij - conj(H_ji)| <= tol_herm * max(1, max|H_ij|) and stores
  /// the symmetrized matrix.
  explicit HermitianMatrix(const CMatrix& m, double tol_herm = 1e-10) {
    if (m.rows() != m.cols()) {
      throw Error("Hamiltonian must be square, got " + std::to_string(m.rows()) + "x" +
                  std::to_string(m.cols()));
    }
    if (m.rows() == 0) throw Error("Hamiltonian must not be empty");
    if (!m.allFinite()) throw Error("Hamiltonian has non-finite entries");
    const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (asym > tol_herm * scale) {
      std::ostringstream os;
      os << "matrix is not Hermitian: max asymmetry |H_ij - conj(H_ji)| = " << asym;
      throw Error(os.str());
    }
    m_ = 0.5 * (m + m.adjoint());
  }

  const CMatrix& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }

  /// Spectral norm bound used for step-size selection (max row sum of |H_ij|).
  double norm_bound() const { return m_.cwiseAbs().rowwise().sum().maxCoeff(); }

private:
  CMatrix m_;
};

inline double wrap_to_2pi(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r;
}

/// Principal value in (-pi, pi].
inline double principal_angle(double x) {
  double r = wrap_to_2pi(x);
  if (r > kPi) r -= kTwoPi;
  return r;
}

/// Distance between two angles measured on the unit circle, in [0, pi].
inline double circle_distance(double a, double b) { return std::fabs(principal_angle(a - b)); }

inline void require_normalized(const CVector& state, double tol, const char* what) {
  const double n = state.norm();
  if (std::fabs(n - 1.0) > tol) {
    std::ostringstream os;
    os << what << ": state is not normalized (norm " << n << ")";
    throw Error(os.str());
  }
}

inline void require_dim(Index got, Index expected, const char* what) {
  if (got != expected) {
    throw Error(std::string(what) + ": dimension mismatch (" + std::to_string(got) + " vs " +
                std::to_string(expected) + ")");
  }
}

}  // namespace geophase
