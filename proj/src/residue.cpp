#include "theta/residue.hpp"

namespace theta::residue {

Ring::Ring(long p) : p_(p) {
  if (!padic::is_prime(p)) throw DomainError("residue ring needs a prime");
  __int128 P = 1;
  pw_.push_back(1);
  while (P * p < (static_cast<__int128>(1) << 62)) {
    P *= p;
    pw_.push_back(static_cast<std::int64_t>(P));
  }
  K_ = static_cast<int>(pw_.size()) - 1;
  P_ = pw_.back();
  leg_.assign(static_cast<std::size_t>(p), -1);
  leg_[0] = 0;
  for (long x = 1; x < p; ++x) leg_[static_cast<std::size_t>((x * x) % p)] = 1;
  if (p == 2) leg_[1] = 1;
}

int Ring::val(std::int64_t a) const {
  if (a == 0) return K_;
  int v = 0;
  while (a % p_ == 0) {
    a /= p_;
    ++v;
  }
  return v;
}

std::int64_t Ring::unit(std::int64_t a) const {
  if (a == 0) throw DomainError("unit part of zero residue");
  while (a % p_ == 0) a /= p_;
  return a;
}

std::int64_t Ring::inv(std::int64_t u) const {
  // Extended Euclid on (u, P).
  __int128 r0 = P_, r1 = reduce(u), t0 = 0, t1 = 1;
  while (r1 != 0) {
    const __int128 q = r0 / r1;
    __int128 tmp = r0 - q * r1;
    r0 = r1;
    r1 = tmp;
    tmp = t0 - q * t1;
    t0 = t1;
    t1 = tmp;
  }
  if (r0 != 1) throw DomainError("residue is not a unit");
  __int128 t = t0 % P_;
  if (t < 0) t += P_;
  return static_cast<std::int64_t>(t);
}

std::int64_t Ring::from_rational(const Rational& q) const {
  if (q == 0) return 0;
  BigInt num = q.get_num();
  BigInt den = q.get_den();
  BigInt m = P_;
  BigInt inv;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0)
    throw DomainError("rational is not p-integral");
  BigInt r = (num * inv) % m;
  if (r < 0) r += m;
  return r.get_si();
}

std::int64_t Ring::from_padic(const padic::TruncatedPadic& x) const {
  if (x.is_zero()) return 0;
  if (x.val() < 0) throw DomainError("p-adic value is not integral");
  if (x.val() >= K_) return 0;
  if (x.precision() + x.val() < K_) throw PrecisionError("p-adic value carries too few digits");
  BigInt m = P_;
  BigInt r = (x.unit() * BigInt(pw_[static_cast<std::size_t>(x.val())])) % m;
  return r.get_si();
}

Scaled split(const Ring& R, const Rational& q) {
  if (q == 0) throw DomainError("split of zero");
  Scaled s;
  s.e = padic::valuation(q, R.p());
  Rational u;
  BigInt scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), static_cast<unsigned long>(R.p()),
                static_cast<unsigned long>(s.e >= 0 ? s.e : -s.e));
  if (s.e >= 0)
    u = q / Rational(scale);
  else
    u = q * Rational(scale);
  u.canonicalize();
  s.u = R.from_rational(u);
  return s;
}

FracTable::FracTable(const Ring& R, const Rational& c) {
  if (c == 0) return;
  const Scaled s = split(R, c);
  if (s.e >= 0) return;
  const long L = -s.e;
  if (L > R.digits()) throw PrecisionError("character argument below working precision");
  den_ = R.pw(static_cast<int>(L));
  mult_ = s.u % den_;
}

std::int64_t FracTable::num(std::int64_t m) const {
  if (den_ == 1) return 0;
  std::int64_t r = m % den_;
  if (r < 0) r += den_;
  return static_cast<std::int64_t>((static_cast<__int128>(r) * mult_) % den_);
}

}  // namespace theta::residue
