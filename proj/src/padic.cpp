#include "theta/padic.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace theta::padic {

namespace {

BigInt pow_p(long p, long k) {
  BigInt r;
  mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(k));
  return r;
}

BigInt mod_pos(const BigInt& a, const BigInt& m) {
  BigInt r = a % m;
  if (r < 0) r += m;
  return r;
}

std::int64_t ipow(long p, long k) {
  __int128 r = 1;
  for (long i = 0; i < k; ++i) {
    r *= p;
    if (r > (static_cast<__int128>(1) << 62)) throw PrecisionError("p^k exceeds 64-bit range");
  }
  return static_cast<std::int64_t>(r);
}

// Unit part of a nonzero rational reduced mod p^k.
BigInt rational_unit_mod(const Rational& q, long p, long k) {
  BigInt num = q.get_num();
  BigInt den = q.get_den();
  while (num % p == 0) num /= p;
  while (den % p == 0) den /= p;
  const BigInt m = pow_p(p, k);
  BigInt inv;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0)
    throw DomainError("denominator not invertible");
  return mod_pos(num * inv, m);
}

// Unit of a rational mod 8 (p = 2).
long unit_mod8(const Rational& q) {
  return rational_unit_mod(q, 2, 3).get_si();
}

int hilbert_odd(long va, int leg_a, long vb, int leg_b, long p) {
  int s = 1;
  if ((va & 1) && (vb & 1) && ((p - 1) / 2) % 2 == 1) s = -s;
  if (vb & 1) s *= leg_a;
  if (va & 1) s *= leg_b;
  return s;
}

int hilbert_two(long va, long ua, long vb, long ub) {
  auto eps = [](long u) { return ((u - 1) / 2) & 1; };
  auto omega = [](long u) { return ((u * u - 1) / 8) & 1; };
  const long e = eps(ua) * eps(ub) + (va & 1) * omega(ub) + (vb & 1) * omega(ua);
  return (e & 1) ? -1 : 1;
}

}  // namespace

bool is_prime(long n) {
  if (n < 2) return false;
  for (long d = 2; d * d <= n; ++d)
    if (n % d == 0) return false;
  return true;
}

long valuation(const BigInt& n, long p) {
  if (n == 0) throw DomainError("valuation of zero");
  BigInt m = n;
  long v = 0;
  while (m % p == 0) {
    m /= p;
    ++v;
  }
  return v;
}

long valuation(const Rational& q, long p) {
  if (q == 0) throw DomainError("valuation of zero");
  return valuation(BigInt(q.get_num()), p) - valuation(BigInt(q.get_den()), p);
}

Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw DomainError("empty rational");
  Rational q;
  if (q.set_str(s, 10) != 0) throw DomainError("cannot parse rational: " + s);
  if (q.get_den() == 0) throw DomainError("zero denominator: " + s);
  q.canonicalize();
  return q;
}

std::string to_string(const Rational& q) { return q.get_str(); }

int legendre(const BigInt& a, long p) {
  BigInt pp = p;
  return mpz_legendre(a.get_mpz_t(), pp.get_mpz_t());
}

long nonresidue(long p) {
  if (p == 2) throw DomainError("nonresidue needs odd p");
  for (long u = 2; u < p; ++u)
    if (legendre(BigInt(u), p) == -1) return u;
  throw DomainError("no nonresidue found");
}

LocalField::LocalField(long prime, int digits) : p(prime), precision(digits) {
  if (!is_prime(prime)) throw DomainError("not a prime: " + std::to_string(prime));
  if (digits < 4) throw DomainError("precision must be at least 4");
}

BigInt LocalField::modulus() const { return pow_p(p, precision); }

// ---------------------------------------------------------------------------
// TruncatedPadic

TruncatedPadic TruncatedPadic::zero(const LocalField& field) {
  TruncatedPadic z;
  z.p_ = field.p;
  z.precision_ = field.precision;
  return z;
}

TruncatedPadic TruncatedPadic::from_parts(long p, long v, const BigInt& unit, int precision) {
  if (precision <= 0) throw PrecisionError("no significant digits left");
  if (unit % p == 0) throw DomainError("unit divisible by p");
  TruncatedPadic x;
  x.p_ = p;
  x.precision_ = precision;
  x.zero_ = false;
  x.val_ = v;
  x.unit_ = mod_pos(unit, pow_p(p, precision));
  return x;
}

TruncatedPadic TruncatedPadic::from_rational(const LocalField& field, const Rational& q) {
  if (q == 0) return zero(field);
  return from_parts(field.p, padic::valuation(q, field.p), rational_unit_mod(q, field.p, field.precision),
                    field.precision);
}

TruncatedPadic TruncatedPadic::from_int(const LocalField& field, long n) {
  return from_rational(field, Rational(n));
}

TruncatedPadic TruncatedPadic::uniformizer(const LocalField& field) {
  return from_parts(field.p, 1, 1, field.precision);
}

std::optional<long> TruncatedPadic::valuation() const {
  if (zero_) return std::nullopt;
  return val_;
}

long TruncatedPadic::val() const {
  if (zero_) throw DomainError("valuation of zero is infinite");
  return val_;
}

TruncatedPadic TruncatedPadic::operator-() const {
  if (zero_) return *this;
  return from_parts(p_, val_, -unit_, precision_);
}

TruncatedPadic TruncatedPadic::operator+(const TruncatedPadic& o) const {
  if (o.p_ != p_) throw DomainError("mixed primes");
  if (zero_) return o;
  if (o.zero_) return *this;
  const long abs_prec = std::min(val_ + precision_, o.val_ + o.precision_);
  const long m = std::min(val_, o.val_);
  const BigInt mod = pow_p(p_, abs_prec - m);
  BigInt s = unit_ * pow_p(p_, val_ - m) + o.unit_ * pow_p(p_, o.val_ - m);
  s = mod_pos(s, mod);
  if (s == 0) {
    TruncatedPadic z = *this;
    z.zero_ = true;
    z.unit_ = 0;
    z.val_ = 0;
    return z;
  }
  const long vs = padic::valuation(s, p_);
  BigInt u = s;
  mpz_divexact(u.get_mpz_t(), s.get_mpz_t(), pow_p(p_, vs).get_mpz_t());
  const long rel = abs_prec - (m + vs);
  return from_parts(p_, m + vs, u, static_cast<int>(rel));
}

TruncatedPadic TruncatedPadic::operator-(const TruncatedPadic& o) const { return *this + (-o); }

TruncatedPadic TruncatedPadic::operator*(const TruncatedPadic& o) const {
  if (o.p_ != p_) throw DomainError("mixed primes");
  if (zero_) return *this;
  if (o.zero_) return o;
  return from_parts(p_, val_ + o.val_, unit_ * o.unit_, std::min(precision_, o.precision_));
}

TruncatedPadic TruncatedPadic::inverse() const {
  if (zero_) throw DomainError("inverse of zero");
  BigInt inv;
  const BigInt m = pow_p(p_, precision_);
  mpz_invert(inv.get_mpz_t(), unit_.get_mpz_t(), m.get_mpz_t());
  return from_parts(p_, -val_, inv, precision_);
}

TruncatedPadic TruncatedPadic::operator/(const TruncatedPadic& o) const { return *this * o.inverse(); }

bool TruncatedPadic::operator==(const TruncatedPadic& o) const {
  if (p_ != o.p_) return false;
  if (zero_ || o.zero_) return zero_ && o.zero_;
  if (val_ != o.val_) return false;
  const BigInt m = pow_p(p_, std::min(precision_, o.precision_));
  return mod_pos(unit_ - o.unit_, m) == 0;
}

bool TruncatedPadic::is_square() const {
  if (zero_) return true;
  if (val_ % 2 != 0) return false;
  if (p_ == 2) {
    if (precision_ < 3) throw PrecisionError("2-adic square test needs 3 digits");
    return mod_pos(unit_, 8) == 1;
  }
  return legendre(unit_, p_) == 1;
}

int TruncatedPadic::unit_legendre() const {
  if (zero_) return 0;
  return legendre(unit_, p_);
}

Rational TruncatedPadic::to_rational() const {
  if (zero_) return 0;
  Rational r(unit_);
  if (val_ >= 0)
    r *= Rational(pow_p(p_, val_));
  else
    r /= Rational(pow_p(p_, -val_));
  r.canonicalize();
  return r;
}

std::string TruncatedPadic::str() const {
  if (zero_) return "0";
  std::ostringstream os;
  os << p_ << "^" << val_ << "*" << unit_.get_str() << " (+O(" << p_ << "^" << precision_ << "))";
  return os.str();
}

std::optional<long> valuation(const TruncatedPadic& x) { return x.valuation(); }

// ---------------------------------------------------------------------------
// UnitRoot

UnitRoot::UnitRoot(std::int64_t num, std::int64_t den) {
  if (den <= 0) throw DomainError("root of unity needs positive denominator");
  num %= den;
  if (num < 0) num += den;
  const std::int64_t g = std::gcd(num, den);
  num_ = num / g;
  den_ = den / g;
  if (num_ == 0) den_ = 1;
}

UnitRoot UnitRoot::operator*(const UnitRoot& o) const {
  const std::int64_t g = std::gcd(den_, o.den_);
  const __int128 l = static_cast<__int128>(den_ / g) * o.den_;
  if (l > (static_cast<__int128>(1) << 62)) throw PrecisionError("root of unity order overflow");
  const __int128 n = static_cast<__int128>(num_) * (l / den_) + static_cast<__int128>(o.num_) * (l / o.den_);
  return UnitRoot(static_cast<std::int64_t>(n % l), static_cast<std::int64_t>(l));
}

UnitRoot UnitRoot::inverse() const { return UnitRoot(-num_, den_); }

UnitRoot UnitRoot::pow(long k) const {
  const __int128 n = static_cast<__int128>(num_) * k;
  __int128 r = n % den_;
  if (r < 0) r += den_;
  return UnitRoot(static_cast<std::int64_t>(r), den_);
}

Complex cis_turns(std::int64_t num, std::int64_t den) {
  std::int64_t n = num % den;
  if (n < 0) n += den;
  // Fold into (-1/2, 1/2] for accuracy.
  double t;
  if (2 * static_cast<__int128>(n) > den)
    t = -static_cast<double>(den - n) / static_cast<double>(den);
  else
    t = static_cast<double>(n) / static_cast<double>(den);
  const double a = 2.0 * std::numbers::pi * t;
  return {std::cos(a), std::sin(a)};
}

Complex UnitRoot::to_complex() const { return cis_turns(num_, den_); }

UnitRoot UnitRoot::snap(Complex z, std::int64_t order, double tol) {
  const double r = std::abs(z);
  if (std::abs(r - 1.0) > tol) throw DomainError("value is not of unit modulus");
  const double turns = std::arg(z) / (2.0 * std::numbers::pi);
  const double k = std::round(turns * static_cast<double>(order));
  UnitRoot u(static_cast<std::int64_t>(k), order);
  if (std::abs(u.to_complex() - z) > tol) throw DomainError("value is not a root of the given order");
  return u;
}

std::string UnitRoot::str() const {
  return "e(" + std::to_string(num_) + "/" + std::to_string(den_) + ")";
}

// ---------------------------------------------------------------------------
// Hilbert symbols

int hilbert_symbol(const Rational& a, const Rational& b, Place v) {
  if (a == 0 || b == 0) throw DomainError("Hilbert symbol of zero");
  if (v.is_infinite()) return (a < 0 && b < 0) ? -1 : 1;
  const long p = v.p;
  if (!is_prime(p)) throw DomainError("place is not a prime");
  const long va = valuation(a, p);
  const long vb = valuation(b, p);
  if (p == 2) return hilbert_two(va, unit_mod8(a), vb, unit_mod8(b));
  const int la = legendre(rational_unit_mod(a, p, 1), p);
  const int lb = legendre(rational_unit_mod(b, p, 1), p);
  return hilbert_odd(va, la, vb, lb, p);
}

int hilbert_symbol(const TruncatedPadic& a, const TruncatedPadic& b) {
  if (a.is_zero() || b.is_zero()) throw DomainError("Hilbert symbol of zero");
  if (a.prime() != b.prime()) throw DomainError("mixed primes");
  const long p = a.prime();
  if (p == 2) {
    if (a.precision() < 3 || b.precision() < 3) throw PrecisionError("2-adic symbol needs 3 digits");
    return hilbert_two(a.val(), mod_pos(a.unit(), 8).get_si(), b.val(), mod_pos(b.unit(), 8).get_si());
  }
  return hilbert_odd(a.val(), a.unit_legendre(), b.val(), b.unit_legendre(), p);
}

// ---------------------------------------------------------------------------
// Characters

AdditiveCharacter::AdditiveCharacter(const LocalField& field, Rational epsilon, long diff_exponent)
    : field_(field), epsilon_(std::move(epsilon)), d_(diff_exponent) {
  if (epsilon_ == 0) throw DomainError("epsilon must be nonzero");
}

Rational AdditiveCharacter::scale() const {
  Rational s = epsilon_;
  if (d_ >= 0)
    s *= Rational(pow_p(field_.p, d_));
  else
    s /= Rational(pow_p(field_.p, -d_));
  s.canonicalize();
  return s;
}

AdditiveCharacter AdditiveCharacter::scaled(const Rational& c) const {
  if (c == 0) throw DomainError("psi^0 is trivial");
  Rational e = epsilon_ * c;
  e.canonicalize();
  return AdditiveCharacter(field_, e, d_);
}

UnitRoot AdditiveCharacter::operator()(const TruncatedPadic& x) const {
  if (x.is_zero()) return UnitRoot::one();
  const TruncatedPadic z = TruncatedPadic::from_rational(LocalField(field_.p, x.precision()), scale()) * x;
  const long v = z.val();
  if (v >= 0) return UnitRoot::one();
  const long L = -v;
  if (L > z.precision()) throw PrecisionError("not enough digits to read off the fractional part");
  const std::int64_t den = ipow(field_.p, L);
  const BigInt r = mod_pos(z.unit(), BigInt(static_cast<long>(den)));
  return UnitRoot(-r.get_si(), den);
}

UnitRoot eval_psi(const AdditiveCharacter& psi, const TruncatedPadic& x) { return psi(x); }

QuadraticCharacter::QuadraticCharacter(const LocalField& field, const Rational& kappa)
    : field_(field), kappa_(kappa) {
  if (kappa == 0) throw DomainError("kappa must be nonzero");
}

bool QuadraticCharacter::is_trivial() const {
  return TruncatedPadic::from_rational(field_, -kappa_).is_square();
}

bool QuadraticCharacter::is_unramified() const {
  if (field_.p == 2) {
    const long u = unit_mod8(-kappa_);
    return valuation(kappa_, 2) % 2 == 0 && (u % 4 == 1);
  }
  return valuation(kappa_, field_.p) % 2 == 0;
}

int QuadraticCharacter::operator()(const TruncatedPadic& x) const {
  if (x.is_zero()) return 0;
  return hilbert_symbol(x, TruncatedPadic::from_rational(LocalField(field_.p, x.precision()), -kappa_));
}

int QuadraticCharacter::operator()(const Rational& x) const {
  if (x == 0) return 0;
  return hilbert_symbol(x, Rational(-kappa_), Place::prime(field_.p));
}

int eval_chi(const QuadraticCharacter& chi, const TruncatedPadic& x) { return chi(x); }

// ---------------------------------------------------------------------------
// Gauss integrals

GaussIntegral gauss_integral(const AdditiveCharacter& psi, const QuadraticCharacter& chi, long n_max) {
  const long p = psi.field().p;
  if (p == 2) throw DomainError("Gauss integral implemented for odd p");
  if (n_max < 1) throw DomainError("n_max must be positive");
  const Rational S = psi.scale();
  const long vS = valuation(S, p);
  const Rational mk = -chi.kappa();
  const long vk = valuation(mk, p);
  const int lk = legendre(rational_unit_mod(mk, p, 1), p);
  const bool ramified = (vk % 2) != 0;
  // chi(p) for the unramified (or trivial) character.
  const double chi_p = hilbert_odd(1, 1, vk, lk, p);

  // Contribution of the shell v(alpha) = j.
  auto shell = [&](long j) -> Complex {
    const double mass = std::pow(static_cast<double>(p), static_cast<double>(-j));
    if (j >= -vS) {
      if (ramified) return 0.0;
      return mass * (1.0 - 1.0 / p) * std::pow(chi_p, static_cast<double>(j));
    }
    const long L = -vS - j;
    const std::int64_t den = ipow(p, L);
    const std::int64_t uS = rational_unit_mod(S, p, L).get_si();
    Complex acc = 0.0;
    for (std::int64_t u = 1; u < den; ++u) {
      if (u % p == 0) continue;
      const int c = hilbert_odd(j, legendre(BigInt(static_cast<long>(u % p)), p), vk, lk, p);
      const std::int64_t t = static_cast<std::int64_t>((static_cast<__int128>(uS) * u) % den);
      acc += static_cast<double>(c) * cis_turns(t, den);
    }
    return mass * acc / static_cast<double>(den);
  };

  // Tail over v(alpha) >= j0 where psi is trivial: closed-form geometric sum.
  auto tail = [&](long j0) -> Complex {
    if (ramified) return 0.0;
    const double r = chi_p / p;
    return (1.0 - 1.0 / p) * std::pow(r, static_cast<double>(j0)) / (1.0 - r);
  };

  GaussIntegral out;
  if (n_max < vS + 1) throw DomainError("n_max does not reach the conductor of psi");
  for (long n = 0; n <= n_max + 1; ++n) {
    Complex v = tail(std::max(-n, -vS));
    for (long j = -n; j < -vS; ++j) v += shell(j);
    out.partial.push_back(v);
  }
  // Shells below -vS - 1 cancel; agreement is only meaningful once the conductor shell is in.
  for (long n = std::max(0L, vS + 1); n + 1 < static_cast<long>(out.partial.size()); ++n) {
    const double scale = std::max(1.0, std::abs(out.partial[n]));
    if (std::abs(out.partial[n + 1] - out.partial[n]) <= 1e-12 * scale) {
      out.stabilized = true;
      out.stable_at = n;
      out.value = out.partial[n];
      break;
    }
  }
  out.partial.pop_back();
  if (!out.stabilized) out.value = out.partial.back();
  return out;
}

Complex quadratic_gauss_truncation(const AdditiveCharacter& psi, const Rational& c, long k) {
  const long p = psi.field().p;
  if (c == 0) return std::pow(static_cast<double>(p), static_cast<double>(k));
  Rational sc = psi.scale() * c;
  sc.canonicalize();
  const long E = valuation(sc, p) - 2 * k;
  const double vol = std::pow(static_cast<double>(p), static_cast<double>(k));
  if (E >= 0) return vol;
  const long L = -E;
  const std::int64_t den = ipow(p, L);
  if (den > 50'000'000) throw PrecisionError("quadratic Gauss sum too large");
  const std::int64_t U = rational_unit_mod(sc, p, L).get_si();
  Complex acc = 0.0;
  for (std::int64_t y = 0; y < den; ++y) {
    const __int128 y2 = (static_cast<__int128>(y) * y) % den;
    const std::int64_t t = static_cast<std::int64_t>((y2 * U) % den);
    acc += cis_turns(-t, den);
  }
  return vol * acc / static_cast<double>(den);
}

UnitRoot weil_constant(const AdditiveCharacter& psi, const Rational& c, long k_max) {
  if (psi.field().p == 2) throw DomainError("Weil index implemented for odd p");
  if (c == 0) throw DomainError("Weil index of a degenerate form");
  Rational sc = psi.scale() * c;
  sc.canonicalize();
  const long v = valuation(sc, psi.field().p);
  const long k0 = std::max(0L, (v + 1) / 2);
  Complex prev = quadratic_gauss_truncation(psi, c, k0);
  for (long k = k0 + 1; k <= k0 + k_max; ++k) {
    const Complex cur = quadratic_gauss_truncation(psi, c, k);
    if (std::abs(cur - prev) <= 1e-10 * std::abs(prev)) return UnitRoot::snap(cur / std::abs(cur), 8, 1e-8);
    prev = cur;
  }
  throw StabilizationError("quadratic Gauss integral did not stabilize");
}

UnitRoot weil_index(const Rational& a, const AdditiveCharacter& psi, long k_max) {
  if (a == 0) throw DomainError("Weil index of zero");
  Rational half(1, 2);
  Rational ah = a * half;
  ah.canonicalize();
  return weil_constant(psi, ah, k_max) * weil_constant(psi, half, k_max).inverse();
}

UnitRoot weil_index(const TruncatedPadic& a, const AdditiveCharacter& psi, long k_max) {
  if (a.is_zero()) throw DomainError("Weil index of zero");
  // Depends only on the square class, fixed by the valuation and the unit mod p.
  const long p = a.prime();
  Rational r(mod_pos(a.unit(), BigInt(p)));
  if (a.val() >= 0)
    r *= Rational(pow_p(p, a.val()));
  else
    r /= Rational(pow_p(p, -a.val()));
  r.canonicalize();
  return weil_index(r, psi, k_max);
}

}  // namespace theta::padic
