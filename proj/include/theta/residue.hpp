#pragma once

// Fixed-width arithmetic in Z/p^K with K maximal such that p^K < 2^62.
// Used by the hot loops of orbit enumeration and the finite Fourier transforms.

#include <cstdint>
#include <vector>

#include "theta/padic.hpp"

namespace theta::residue {

class Ring {
 public:
  explicit Ring(long p);

  long p() const { return p_; }
  int digits() const { return K_; }
  std::int64_t modulus() const { return P_; }
  /// p^i for 0 <= i <= digits().
  std::int64_t pw(int i) const { return pw_[i]; }

  std::int64_t reduce(std::int64_t a) const {
    a %= P_;
    return a < 0 ? a + P_ : a;
  }
  std::int64_t add(std::int64_t a, std::int64_t b) const {
    std::int64_t s = a + b;
    return s >= P_ ? s - P_ : s;
  }
  std::int64_t sub(std::int64_t a, std::int64_t b) const {
    std::int64_t s = a - b;
    return s < 0 ? s + P_ : s;
  }
  std::int64_t mul(std::int64_t a, std::int64_t b) const {
    return static_cast<std::int64_t>((static_cast<__int128>(a) * b) % P_);
  }
  /// Valuation of a residue; digits() stands for "at least digits()".
  int val(std::int64_t a) const;
  /// a / p^val(a) for nonzero a.
  std::int64_t unit(std::int64_t a) const;
  std::int64_t inv(std::int64_t unit) const;
  /// Legendre symbol of a unit residue.
  int legendre(std::int64_t unit) const { return leg_[static_cast<std::size_t>(unit % p_)]; }

  /// An element of Z_p reduced mod p^K.
  std::int64_t from_rational(const Rational& q) const;
  std::int64_t from_padic(const padic::TruncatedPadic& x) const;

 private:
  long p_;
  int K_;
  std::int64_t P_;
  std::vector<std::int64_t> pw_;
  std::vector<int> leg_;
};

/// p^e * u with u a unit residue mod p^K; the split used for rationals of any valuation.
struct Scaled {
  long e = 0;
  std::int64_t u = 1;
};

Scaled split(const Ring& R, const Rational& q);

/// psi_0-style phase: the turns num/den with den = p^L of frac(c * m) for integer m.
/// Built once per coefficient c, then evaluated on many integers.
class FracTable {
 public:
  FracTable(const Ring& R, const Rational& c);
  /// frac(c * m) as (num, den).
  std::int64_t num(std::int64_t m) const;
  std::int64_t den() const { return den_; }

 private:
  std::int64_t den_ = 1;
  std::int64_t mult_ = 0;  // c * den mod den
};

}  // namespace theta::residue
