#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "oracles.hpp"

using namespace geophase;

TEST(Spectral, HermitianCheckNamesAsymmetry) {
  CMatrix m(2, 2);
  m << 0, 1, 0.5, 0;
  try {
    HermitianMatrix h(m);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("asymmetry"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("0.5"), std::string::npos);
  }
  CMatrix nonsquare(2, 3);
  nonsquare.setZero();
  EXPECT_THROW(HermitianMatrix{nonsquare}, Error);
}

TEST(Spectral, DiagonalizeDiagonal) {
  const auto levels = diagonalize(HermitianMatrix(oracle::diag({0, 1, 3})));
  ASSERT_EQ(levels.size(), 3u);
  const double want[] = {0, 1, 3};
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(levels[k].value, want[k], 1e-14);
    ASSERT_EQ(levels[k].vectors.cols(), 1);
    EXPECT_NEAR(std::abs(levels[k].vectors(k, 0)), 1.0, 1e-14);
  }
}

TEST(Spectral, DiagonalizePauliX) {
  CMatrix m(2, 2);
  m << 0, 1, 1, 0;
  const auto levels = diagonalize(HermitianMatrix(m));
  ASSERT_EQ(levels.size(), 2u);
  EXPECT_NEAR(levels[0].value, -1.0, 1e-14);
  EXPECT_NEAR(levels[1].value, 1.0, 1e-14);
  CVector minus(2), plus(2);
  minus << 1, -1;
  plus << 1, 1;
  EXPECT_NEAR(std::abs(levels[0].vectors.col(0).dot(minus / std::sqrt(2.0))), 1.0, 1e-14);
  EXPECT_NEAR(std::abs(levels[1].vectors.col(0).dot(plus / std::sqrt(2.0))), 1.0, 1e-14);
}

TEST(Spectral, DegenerateLevelsMerge) {
  const auto levels = diagonalize(HermitianMatrix(oracle::diag({1.0, 1.0 + 1e-14})), 1e-10);
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_NEAR(levels[0].value, 1.0, 1e-13);
  EXPECT_EQ(levels[0].vectors.cols(), 2);
}

TEST(Spectral, RandomHermitianReconstruction) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int n = 1; n <= 8; ++n) {
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    const CMatrix h = a + a.adjoint();
    const Spectrum sp = spectrum_from_matrix(HermitianMatrix(h), -1.0, {});
    EXPECT_LT((sp.reconstruct() - h).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()));
    for (std::size_t k = 1; k < sp.size(); ++k) EXPECT_LT(sp.energies[k - 1], sp.energies[k]);
  }
}

TEST(Spectral, CommensurateIntegerSpectrum) {
  const std::vector<double> e{0, 1, 3};
  const Spectrum sp = commensurate_structure(std::span<const double>(e));
  ASSERT_TRUE(sp.commensurate);
  EXPECT_NEAR(sp.base_unit, 1.0, 1e-14);
  ASSERT_EQ(sp.levels.size(), 3u);
  EXPECT_EQ(sp.levels[0], Rational(0));
  EXPECT_EQ(sp.levels[1], Rational(1));
  EXPECT_EQ(sp.levels[2], Rational(3));
}

TEST(Spectral, CommensurateScaledSpectrum) {
  const double r2 = std::numbers::sqrt2;
  const std::vector<double> e{0, r2, 3 * r2};
  const Spectrum sp = commensurate_structure(std::span<const double>(e));
  ASSERT_TRUE(sp.commensurate);
  EXPECT_NEAR(sp.base_unit, r2, 1e-14);
  EXPECT_EQ(sp.levels[1], Rational(1));
  EXPECT_EQ(sp.levels[2], Rational(3));
}

TEST(Spectral, IncommensurateSpectrum) {
  const std::vector<double> e{0, 1, std::numbers::sqrt2};
  const Spectrum sp = commensurate_structure(std::span<const double>(e));
  EXPECT_FALSE(sp.commensurate);
  EXPECT_TRUE(sp.levels.empty());
  EXPECT_FALSE(sp.diagnostic.empty());
}

TEST(Spectral, RationalListKeepsExactLevels) {
  const std::vector<Rational> r{Rational::parse("1/2"), Rational(0), Rational::parse("4/3")};
  const Spectrum sp = commensurate_structure(std::span<const Rational>(r), 2.0);
  ASSERT_TRUE(sp.commensurate);
  ASSERT_EQ(sp.size(), 3u);
  // Levels follow the listed basis order; energies are r * scale.
  EXPECT_NEAR(sp.energies[0] + sp.energies[1] + sp.energies[2], 2.0 * (0.5 + 0 + 4.0 / 3.0), 1e-14);
}

TEST(Spectral, ExpectationEnergyExamples) {
  const std::vector<double> e3{0, 1, 3}, e2{0, 1};
  const Spectrum s3 = commensurate_structure(std::span<const double>(e3));
  const Spectrum s2 = commensurate_structure(std::span<const double>(e2));
  EXPECT_NEAR(expectation_energy(oracle::uniform(3), s3), 4.0 / 3.0, 1e-14);
  CVector phi1(2);
  phi1 << 0, 1;
  EXPECT_NEAR(expectation_energy(phi1, s2), 1.0, 1e-14);
  EXPECT_NEAR(expectation_energy(oracle::two_level(std::numbers::pi / 2), s2), 0.5, 1e-14);
  EXPECT_THROW(expectation_energy(oracle::uniform(2), s3), Error);
}

TEST(Spectral, EnergyUncertaintyExamples) {
  const std::vector<double> e3{0, 1, 3}, e2{0, 1};
  const Spectrum s3 = commensurate_structure(std::span<const double>(e3));
  const Spectrum s2 = commensurate_structure(std::span<const double>(e2));
  EXPECT_NEAR(energy_uncertainty(oracle::uniform(2), s2), 0.5, 1e-14);
  CVector phi1(2);
  phi1 << 0, 1;
  EXPECT_NEAR(energy_uncertainty(phi1, s2), 0.0, 1e-14);
  EXPECT_NEAR(energy_uncertainty(oracle::uniform(3), s3), std::sqrt(14.0) / 3.0, 1e-14);
  EXPECT_THROW(energy_uncertainty(oracle::uniform(2), s3), Error);
}

TEST(Spectral, UncertaintyInvariantUnderPhaseAndShift) {
  std::mt19937_64 rng(5);
  const std::vector<double> e{0.3, 1.7, 2.2, 4.0};
  std::vector<double> shifted = e;
  for (double& x : shifted) x += 12.5;
  const auto a = spectrum_from_matrix(HermitianMatrix(oracle::diag(e)), -1.0, {});
  const auto b = spectrum_from_matrix(HermitianMatrix(oracle::diag(shifted)), -1.0, {});
  for (int t = 0; t < 20; ++t) {
    const CVector psi = oracle::random_state(rng, 4);
    const double d = energy_uncertainty(psi, a);
    EXPECT_NEAR(energy_uncertainty(std::exp(Complex(0, 0.77 * t)) * psi, a), d, 1e-12);
    EXPECT_NEAR(energy_uncertainty(psi, b), d, 1e-12);
  }
}
