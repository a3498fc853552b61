#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

#include "geophase/rational.hpp"

using geophase::Error;
using geophase::Integer;
using geophase::Rational;

namespace {

// Smallest positive a/b (b <= max_b, a <= max_a) that is an integer multiple
// of every value, by exhaustive search.
std::optional<Rational> brute_force_lcm(const std::vector<Rational>& values, int max_a, int max_b) {
  std::optional<Rational> best;
  for (int b = 1; b <= max_b; ++b)
    for (int a = 1; a <= max_a; ++a) {
      const Rational x{Integer(a), Integer(b)};
      bool ok = true;
      for (const auto& v : values) ok = ok && (x / v).is_integer();
      if (ok && (!best || x < *best)) best = x;
    }
  return best;
}

std::uint64_t brute_squarefree(std::uint64_t n) {
  std::uint64_t best = n;
  for (std::uint64_t k = 1; k * k <= n; ++k)
    if (n % (k * k) == 0) best = std::min(best, n / (k * k));
  return best;
}

}  // namespace

TEST(Rational, ReduceExamples) {
  EXPECT_EQ(geophase::reduce(2, 4), Rational(Integer(1), Integer(2)));
  const Rational r = geophase::reduce(-3, -6);
  EXPECT_EQ(r.num(), 1);
  EXPECT_EQ(r.den(), 2);
  const Rational z = geophase::reduce(0, 7);
  EXPECT_EQ(z.num(), 0);
  EXPECT_EQ(z.den(), 1);
  EXPECT_EQ(geophase::reduce(3, -9).to_string(), "-1/3");
}

TEST(Rational, ZeroDenominatorThrows) {
  try {
    geophase::reduce(1, 0);
    FAIL() << "expected throw";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "zero denominator");
  }
}

TEST(Rational, ArithmeticIsExact) {
  const Rational a = Rational::parse("1/3"), b = Rational::parse("1/6");
  EXPECT_EQ(a + b, Rational::parse("1/2"));
  EXPECT_EQ(a - b, b);
  EXPECT_EQ(a * b, Rational::parse("1/18"));
  EXPECT_EQ(a / b, Rational(2));
  EXPECT_EQ(-a, Rational::parse("-1/3"));
  EXPECT_LT(b, a);
  EXPECT_THROW((void)(a / Rational(0)), Error);
}

TEST(Rational, ParseAcceptsSignsAndRejectsGarbage) {
  EXPECT_EQ(Rational::parse("-4/6"), Rational::parse("-2/3"));
  EXPECT_EQ(Rational::parse("+5"), Rational(5));
  EXPECT_EQ(Rational::parse("123456789012345678901234567890/10").num(),
            Integer("12345678901234567890123456789"));
  for (const char* bad : {"", "1/", "/2", "abc", "1.5", "1/0", "--1"}) EXPECT_THROW(Rational::parse(bad), Error) << bad;
}

TEST(Rational, LcmSetExamples) {
  const std::vector<Rational> a{Rational::parse("1/6"), Rational::parse("1/10")};
  EXPECT_EQ(geophase::lcm_set(a), Rational::parse("1/2"));
  const std::vector<Rational> b{Rational::parse("1/2"), Rational::parse("1/3")};
  EXPECT_EQ(geophase::lcm_set(b), Rational(1));
  const std::vector<Rational> c{Rational(5)};
  EXPECT_EQ(geophase::lcm_set(c), Rational(5));
}

TEST(Rational, LcmSetMatchesBruteForce) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> num(1, 6), den(1, 8), count(1, 4);
  for (int trial = 0; trial < 150; ++trial) {
    std::vector<Rational> v;
    const int m = count(rng);
    for (int i = 0; i < m; ++i) v.emplace_back(Integer(num(rng)), Integer(den(rng)));
    const auto brute = brute_force_lcm(v, 120, 8);
    ASSERT_TRUE(brute.has_value());
    EXPECT_EQ(geophase::lcm_set(v), *brute);
  }
}

TEST(Rational, LcmSetErrors) {
  EXPECT_THROW(geophase::lcm_set(std::vector<Rational>{}), Error);
  EXPECT_THROW(geophase::lcm_set(std::vector<Rational>{Rational(0)}), Error);
  EXPECT_THROW(geophase::lcm_set(std::vector<Rational>{Rational(-1)}), Error);
}

TEST(Rational, RationalizeExamples) {
  auto r = geophase::rationalize(0.5, 100, 1e-9);
  EXPECT_EQ(r.value, Rational::parse("1/2"));
  EXPECT_TRUE(r.converged);

  r = geophase::rationalize(0.333333333333, 1000000, 1e-9);
  EXPECT_EQ(r.value, Rational::parse("1/3"));
  EXPECT_TRUE(r.converged);

  r = geophase::rationalize(3.14159265358979, 10, 1e-9);
  EXPECT_EQ(r.value, Rational::parse("22/7"));
  EXPECT_FALSE(r.converged);
  EXPECT_NEAR(r.residual, std::fabs(22.0 / 7.0 - 3.14159265358979), 1e-15);
  EXPECT_NEAR(r.residual, 1.26e-3, 1e-5);

  EXPECT_THROW(geophase::rationalize(NAN, 10, 1e-9), Error);
  EXPECT_THROW(geophase::rationalize(INFINITY, 10, 1e-9), Error);
}

TEST(Rational, RationalizeRecoversRandomFractions) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> num(-500, 500), den(1, 500);
  for (int trial = 0; trial < 500; ++trial) {
    const Rational q(Integer(num(rng)), Integer(den(rng)));
    const auto r = geophase::rationalize(q.to_double(), 1000000, 1e-9);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.value, q);
  }
}

TEST(Rational, IdentifyRationalRejectsIrrationals) {
  EXPECT_FALSE(geophase::identify_rational(std::numbers::sqrt2, 1000000, 1e-9).has_value());
  EXPECT_FALSE(geophase::identify_rational(std::numbers::pi, 1000000, 1e-9).has_value());
  EXPECT_EQ(*geophase::identify_rational(2.0 / 7.0, 1000000, 1e-9), Rational::parse("2/7"));
  EXPECT_EQ(*geophase::identify_rational(3.0, 1000000, 1e-9), Rational(3));
}

TEST(Rational, SquarefreePart) {
  EXPECT_EQ(geophase::squarefree_part(1), 1u);
  EXPECT_EQ(geophase::squarefree_part(12), 3u);
  EXPECT_EQ(geophase::squarefree_part(45), 5u);
  for (std::uint64_t n = 1; n <= 3000; ++n) EXPECT_EQ(geophase::squarefree_part(n), brute_squarefree(n)) << n;
  EXPECT_THROW(geophase::squarefree_part(0), Error);
}

TEST(Rational, PerfectSquares) {
  for (int k = 0; k < 200; ++k) {
    EXPECT_TRUE(geophase::is_perfect_square(Integer(k) * k));
    if (k > 1) EXPECT_FALSE(geophase::is_perfect_square(Integer(k) * k + 1));
  }
  EXPECT_FALSE(geophase::is_perfect_square(Integer(-4)));
}
