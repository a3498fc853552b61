#pragma once

// Exact rational arithmetic on arbitrary-precision integers, plus the small
// amount of number theory the period and selection-rule computations need.

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "geophase/error.hpp"

namespace geophase {

using Integer = boost::multiprecision::cpp_int;

inline Integer gcd(Integer a, Integer b) {
  a = abs(a);
  b = abs(b);
  while (b != 0) {
    Integer r = a % b;
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

inline Integer lcm(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  return abs(a / gcd(a, b) * b);
}

/// Reduced fraction with a strictly positive denominator.
class Rational {
public:
  Rational() : num_(0), den_(1) {}
  Rational(long long n) : num_(n), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(Integer n) : num_(std::move(n)), den_(1) {}  // NOLINT(google-explicit-constructor)
  Rational(Integer n, Integer d) : num_(std::move(n)), den_(std::move(d)) { normalize(); }

  const Integer& num() const { return num_; }
  const Integer& den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  int sign() const { return num_.sign(); }

  double to_double() const {
    return static_cast<double>(static_cast<long double>(num_) / static_cast<long double>(den_));
  }

  /// "p/q", or "p" when the denominator is 1.
  std::string to_string() const {
    if (den_ == 1) return num_.str();
    return num_.str() + "/" + den_.str();
  }

  /// Parses "p", "p/q", "-p/q" or "+p/q". No embedded whitespace.
  static Rational parse(std::string_view text) {
    auto bad = [&] { return Error("invalid rational literal \"" + std::string(text) + "\""); };
    if (text.empty()) throw bad();
    const auto slash = text.find('/');
    auto digits = [&](std::string_view part, bool allow_sign) -> Integer {
      std::size_t i = 0;
      bool neg = false;
      if (allow_sign && !part.empty() && (part[0] == '-' || part[0] == '+')) {
        neg = part[0] == '-';
        i = 1;
      }
      if (i == part.size()) throw bad();
      Integer v = 0;
      for (; i < part.size(); ++i) {
        const char c = part[i];
        if (c < '0' || c > '9') throw bad();
        v = v * 10 + (c - '0');
      }
      return neg ? Integer(-v) : v;
    };
    if (slash == std::string_view::npos) return Rational(digits(text, true));
    Integer n = digits(text.substr(0, slash), true);
    Integer d = digits(text.substr(slash + 1), false);
    return Rational(std::move(n), std::move(d));
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_};
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return {a.num_ * b.num_, a.den_ * b.den_};
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw Error("division by zero rational");
    return {a.num_ * b.den_, a.den_ * b.num_};
  }
  Rational operator-() const { return {Integer(-num_), den_}; }

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const Integer lhs = a.num_ * b.den_;
    const Integer rhs = b.num_ * a.den_;
    if (lhs < rhs) return std::strong_ordering::less;
    if (lhs > rhs) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

private:
  void normalize() {
    if (den_ == 0) throw Error("zero denominator");
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const Integer g = gcd(num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }

  Integer num_;
  Integer den_;
};

inline Rational reduce(const Integer& numerator, const Integer& denominator) {
  return {numerator, denominator};
}

inline Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }

/// Smallest positive L with L / r integral for every r. For reduced fractions
/// p_k/q_k this is lcm(p_k) / gcd(q_k).
inline Rational lcm_set(std::span<const Rational> values) {
  if (values.empty()) throw Error("lcm of an empty set");
  Integer num_lcm = 1;
  Integer den_gcd = 0;
  for (const auto& v : values) {
    if (v.sign() <= 0) throw Error("lcm_set requires strictly positive values, got " + v.to_string());
    num_lcm = lcm(num_lcm, v.num());
    den_gcd = gcd(den_gcd, v.den());
  }
  return {num_lcm, den_gcd};
}

struct RationalizationResult {
  Rational value;
  double residual = 0.0;
  bool converged = false;
};

namespace detail {

// Walks the continued-fraction convergents of x, calling visit(p, q, residual)
// for every convergent whose denominator does not exceed max_denominator.
// The visitor returns true to stop early.
template <class Visit>
void for_each_convergent(double x, const Integer& max_denominator, Visit&& visit) {
  // h_n = a_n h_{n-1} + h_{n-2}, seeded with h_{-1} = 1, h_{-2} = 0.
  Integer h = 1, h_prev = 0;
  Integer k = 0, k_prev = 1;
  long double rem = x;
  for (int iter = 0; iter < 96; ++iter) {
    const long double a_ld = std::floor(rem);
    const Integer a(static_cast<long long>(a_ld));
    Integer h_next = a * h + h_prev;
    Integer k_next = a * k + k_prev;
    if (k_next > max_denominator) return;
    h_prev = std::move(h);
    h = std::move(h_next);
    k_prev = std::move(k);
    k = std::move(k_next);
    const long double approx = static_cast<long double>(h) / static_cast<long double>(k);
    const double residual = static_cast<double>(std::fabs(static_cast<long double>(x) - approx));
    if (visit(h, k, residual)) return;
    const long double frac = rem - a_ld;
    if (frac == 0.0L || residual == 0.0) return;
    rem = 1.0L / frac;
    if (!std::isfinite(static_cast<double>(rem)) || rem > 9.0e18L) return;
  }
}

}  // namespace detail

/// Last continued-fraction convergent of x whose denominator is within
/// max_denominator. converged reports residual <= tol.
inline RationalizationResult rationalize(double x, long long max_denominator, double tol) {
  if (!std::isfinite(x)) throw Error("cannot rationalize a non-finite value");
  if (max_denominator < 1) throw Error("max_denominator must be >= 1");
  if (std::fabs(x) > 9.0e18) throw Error("value too large to rationalize");
  RationalizationResult best;
  detail::for_each_convergent(x, Integer(max_denominator), [&](const Integer& p, const Integer& q, double res) {
    best.value = Rational(p, q);
    best.residual = res;
    return false;
  });
  best.converged = best.residual <= tol;
  return best;
}

/// Decides whether x is "really" a rational with a small denominator.
///
/// Any real has convergents p/q with |x - p/q| < 1/q^2, so an absolute
/// tolerance alone accepts irrationals once max_denominator is large. This
/// accepts the first convergent with |x - p/q| <= tol / q^2, which floating
/// noise on a genuine small-denominator rational satisfies and which an
/// irrational only satisfies at an abnormally large partial quotient.
inline std::optional<Rational> identify_rational(double x, long long max_denominator, double tol) {
  if (!std::isfinite(x)) return std::nullopt;
  if (std::fabs(x) > 9.0e18) return std::nullopt;
  std::optional<Rational> found;
  detail::for_each_convergent(x, Integer(max_denominator), [&](const Integer& p, const Integer& q, double res) {
    const double qd = static_cast<double>(q);
    if (res <= tol / (qd * qd)) {
      found = Rational(p, q);
      return true;
    }
    return false;
  });
  return found;
}

/// Square-free s with n = s * m^2, by trial division.
inline std::uint64_t squarefree_part(std::uint64_t n) {
  if (n < 1) throw Error("squarefree_part requires n >= 1");
  std::uint64_t s = 1;
  for (std::uint64_t f = 2; f <= n / f; ++f) {
    int e = 0;
    while (n % f == 0) {
      n /= f;
      ++e;
    }
    if (e % 2 == 1) s *= f;
  }
  return s * n;  // leftover n is 1 or a prime
}

inline std::uint64_t isqrt(std::uint64_t n) {
  auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
  while (r * r > n) --r;
  while ((r + 1) * (r + 1) <= n) ++r;
  return r;
}

inline bool is_perfect_square(const Integer& n) {
  if (n < 0) return false;
  const Integer r = boost::multiprecision::sqrt(n);
  return r * r == n;
}

}  // namespace geophase
