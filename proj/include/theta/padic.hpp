#pragma once

// Truncated p-adic arithmetic over Q_p, Hilbert symbols, the additive and
// quadratic characters, Gauss integrals and Weil indices.

#include <gmpxx.h>

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace theta {

using BigInt = mpz_class;
using Rational = mpq_class;
using Complex = std::complex<double>;

/// Raised when a computation needs more p-adic digits than are carried.
class PrecisionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a truncated limit did not settle within its cap.
class StabilizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace padic {

bool is_prime(long n);

/// v_p(n) for n != 0.
long valuation(const BigInt& n, long p);
/// v_p(q) for q != 0.
long valuation(const Rational& q, long p);

/// Parses "7", "-3/5" or "2/9" into a canonical rational.
Rational parse_rational(std::string_view text);
std::string to_string(const Rational& q);

/// Legendre symbol (a|p) for odd prime p; 0 when p divides a.
int legendre(const BigInt& a, long p);

/// Q_p carried to a fixed number of significant digits.
struct LocalField {
  long p = 3;
  int precision = 12;

  LocalField() = default;
  LocalField(long prime, int digits = 12);

  bool odd() const { return p != 2; }
  BigInt modulus() const;  // p^precision
};

/// p^valuation * unit with unit a unit mod p^precision. Zero is a flag.
class TruncatedPadic {
 public:
  TruncatedPadic() = default;

  static TruncatedPadic zero(const LocalField& field);
  static TruncatedPadic from_rational(const LocalField& field, const Rational& q);
  static TruncatedPadic from_int(const LocalField& field, long n);
  static TruncatedPadic uniformizer(const LocalField& field);
  /// unit need not be reduced; it must be prime to p.
  static TruncatedPadic from_parts(long p, long valuation, const BigInt& unit, int precision);

  long prime() const { return p_; }
  int precision() const { return precision_; }
  bool is_zero() const { return zero_; }
  /// nullopt stands for +infinity.
  std::optional<long> valuation() const;
  /// Valuation of a nonzero element.
  long val() const;
  const BigInt& unit() const { return unit_; }

  TruncatedPadic operator-() const;
  TruncatedPadic operator+(const TruncatedPadic& o) const;
  TruncatedPadic operator-(const TruncatedPadic& o) const;
  TruncatedPadic operator*(const TruncatedPadic& o) const;
  TruncatedPadic operator/(const TruncatedPadic& o) const;
  TruncatedPadic inverse() const;

  /// Equal valuations and units agreeing mod p^min(precisions).
  bool operator==(const TruncatedPadic& o) const;

  bool is_square() const;
  /// Legendre symbol of the unit part (p odd).
  int unit_legendre() const;
  /// The rational p^v * unit with unit taken in [0, p^precision).
  Rational to_rational() const;
  std::string str() const;

 private:
  long p_ = 3;
  int precision_ = 12;
  bool zero_ = true;
  long val_ = 0;
  BigInt unit_ = 0;
};

/// valuation(x) with +infinity for zero.
std::optional<long> valuation(const TruncatedPadic& x);

/// A root of unity exp(2 pi i num/den), stored reduced with 0 <= num < den.
class UnitRoot {
 public:
  UnitRoot() = default;
  UnitRoot(std::int64_t num, std::int64_t den);

  static UnitRoot one() { return {}; }
  static UnitRoot minus_one() { return {1, 2}; }
  static UnitRoot i() { return {1, 4}; }
  static UnitRoot sign(int s) { return s < 0 ? minus_one() : one(); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  UnitRoot operator*(const UnitRoot& o) const;
  UnitRoot inverse() const;
  UnitRoot pow(long k) const;
  bool operator==(const UnitRoot& o) const = default;

  Complex to_complex() const;
  /// Nearest root of unity of order dividing `order`; throws if |z| is off or no root is close.
  static UnitRoot snap(Complex z, std::int64_t order, double tol = 1e-8);
  std::string str() const;

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

/// exp(2 pi i num/den) evaluated in double precision from the reduced fraction.
Complex cis_turns(std::int64_t num, std::int64_t den);

/// A place of Q: a prime, or the real place (p == 0).
struct Place {
  long p = 0;
  static Place infinity() { return {0}; }
  static Place prime(long q) { return {q}; }
  bool is_infinite() const { return p == 0; }
};

/// (a,b)_v for nonzero rationals at any place of Q.
int hilbert_symbol(const Rational& a, const Rational& b, Place v);
/// Local symbol for p-adic arguments (p odd, or p = 2 with at least 3 digits).
int hilbert_symbol(const TruncatedPadic& a, const TruncatedPadic& b);

/// psi(x) = exp(-2 pi i lambda(epsilon * p^d * x)); trivial exactly on epsilon^-1 p^-d O.
class AdditiveCharacter {
 public:
  AdditiveCharacter() = default;
  AdditiveCharacter(const LocalField& field, Rational epsilon = 1, long diff_exponent = 0);

  const LocalField& field() const { return field_; }
  const Rational& epsilon() const { return epsilon_; }
  long diff_exponent() const { return d_; }
  /// epsilon * p^d: psi(x) = psi_0(scale * x).
  Rational scale() const;
  /// psi^c(x) = psi(c x).
  AdditiveCharacter scaled(const Rational& c) const;

  UnitRoot operator()(const TruncatedPadic& x) const;

 private:
  LocalField field_{};
  Rational epsilon_ = 1;
  long d_ = 0;
};

UnitRoot eval_psi(const AdditiveCharacter& psi, const TruncatedPadic& x);

/// chi(a) = (a, -kappa)_p with chi(0) = 0.
class QuadraticCharacter {
 public:
  QuadraticCharacter() = default;
  QuadraticCharacter(const LocalField& field, const Rational& kappa);

  const LocalField& field() const { return field_; }
  const Rational& kappa() const { return kappa_; }
  bool is_trivial() const;
  bool is_unramified() const;

  int operator()(const TruncatedPadic& x) const;
  int operator()(const Rational& x) const;

 private:
  LocalField field_{};
  Rational kappa_ = 1;
};

int eval_chi(const QuadraticCharacter& chi, const TruncatedPadic& x);

struct GaussIntegral {
  Complex value;
  bool stabilized = false;
  long stable_at = -1;             // first n with value(n) == value(n+1)
  std::vector<Complex> partial;    // truncations n = 0, 1, ..., n_max
};

/// lim_n of the integral of psi(-alpha) chi(alpha) over p^-n O, with vol(O) = 1.
GaussIntegral gauss_integral(const AdditiveCharacter& psi, const QuadraticCharacter& chi,
                             long n_max);

/// Integral of psi(c x^2) over p^-k O (vol(O) = 1), by direct summation.
Complex quadratic_gauss_truncation(const AdditiveCharacter& psi, const Rational& c, long k);

/// Weil index of the character of second degree x -> psi(c x^2), read off as the phase
/// of the stabilized quadratic Gauss integral.
UnitRoot weil_constant(const AdditiveCharacter& psi, const Rational& c, long k_max = 8);

/// gamma(a, psi^{1/2}) = gamma(psi^{a/2}) / gamma(psi^{1/2}).
UnitRoot weil_index(const Rational& a, const AdditiveCharacter& psi, long k_max = 8);
UnitRoot weil_index(const TruncatedPadic& a, const AdditiveCharacter& psi, long k_max = 8);

/// Nonresidue unit representative u (smallest positive integer with (u|p) = -1).
long nonresidue(long p);

}  // namespace padic
}  // namespace theta
