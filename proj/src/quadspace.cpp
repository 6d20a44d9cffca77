#include "theta/quadspace.hpp"

#include <functional>
#include <sstream>

namespace theta::quad {

using padic::LocalField;
using padic::TruncatedPadic;

namespace {

Rational rpow(long p, long e) {
  BigInt m;
  mpz_ui_pow_ui(m.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e >= 0 ? e : -e));
  return e >= 0 ? Rational(m) : Rational(1) / Rational(m);
}

int hilbert_odd(long va, int leg_a, long vb, int leg_b, long p) {
  int s = 1;
  if ((va & 1) && (vb & 1) && ((p - 1) / 2) % 2 == 1) s = -s;
  if (vb & 1) s *= leg_a;
  if (va & 1) s *= leg_b;
  return s;
}

// Ordering 0, 1, -1, 2, -2, ... used by the small-point search.
long zigzag(long i) { return (i % 2 == 1) ? (i + 1) / 2 : -(i / 2); }

// Depth-first refinement of the balls y + p^k O^3 in O^3 against nu(y) = t.
// accept(y, k) returns the weight of a certified ball, or nullopt to refine further.
class Enumerator {
 public:
  using Accept = std::function<std::optional<int>(const std::array<std::int64_t, 3>&, int)>;

  Enumerator(const residue::Ring& R, const std::array<std::int64_t, 3>& n, long vnmin, std::int64_t t,
             int max_level)
      : R_(R), n_(n), vnmin_(vnmin), t_(t), max_level_(max_level) {
    for (int i = 0; i < 3; ++i) two_n_[i] = R_.add(n_[i], n_[i]);
  }

  void run(int min_level, const Accept& accept, const std::function<bool(const OrbitCell&)>& emit) {
    min_level_ = min_level;
    accept_ = &accept;
    emit_ = &emit;
    stop_ = false;
    std::array<std::int64_t, 3> y{0, 0, 0};
    dfs(y, 0);
  }

 private:
  void dfs(const std::array<std::int64_t, 3>& y, int k) {
    if (stop_) return;
    const int K = R_.digits();
    std::int64_t nu = 0;
    int g = K;
    for (int i = 0; i < 3; ++i) {
      nu = R_.add(nu, R_.mul(n_[i], R_.mul(y[i], y[i])));
      g = std::min(g, R_.val(R_.mul(two_n_[i], y[i])));
    }
    const int vd = R_.val(R_.sub(nu, t_));
    if (k > g) {
      if (k + g >= K) throw PrecisionError("orbit refinement exceeds the residue precision");
      if (vd < k + g) return;
      if (k >= min_level_) {
        if (auto w = (*accept_)(y, k)) {
          OrbitCell c;
          c.y = y;
          c.k = k;
          c.g = g;
          c.weight = *w;
          int vy = K;
          for (int i = 0; i < 3; ++i) vy = std::min(vy, R_.val(y[i]));
          c.stratum = -vy;
          if (!(*emit_)(c)) stop_ = true;
          return;
        }
      }
    } else {
      const long reach = std::min<long>(static_cast<long>(k) + g, 2L * k + vnmin_);
      if (vd < reach) return;
      if (vd >= K && reach >= K) throw PrecisionError("orbit refinement exceeds the residue precision");
    }
    if (k + 1 > max_level_) throw PrecisionError("orbit refinement exceeded the level cap");
    const std::int64_t step = R_.pw(k);
    const long p = R_.p();
    std::array<std::int64_t, 3> z;
    for (long c0 = 0; c0 < p; ++c0) {
      z[0] = y[0] + c0 * step;
      for (long c1 = 0; c1 < p; ++c1) {
        z[1] = y[1] + c1 * step;
        for (long c2 = 0; c2 < p; ++c2) {
          z[2] = y[2] + c2 * step;
          dfs(z, k + 1);
          if (stop_) return;
        }
      }
    }
  }

  const residue::Ring& R_;
  std::array<std::int64_t, 3> n_;
  std::array<std::int64_t, 3> two_n_{};
  long vnmin_;
  std::int64_t t_;
  int max_level_;
  int min_level_ = 0;
  const Accept* accept_ = nullptr;
  const std::function<bool(const OrbitCell&)>* emit_ = nullptr;
  bool stop_ = false;
};

void check_integral_gram(const QuadSpaceV& V) {
  for (const auto& c : V.gram())
    if (padic::valuation(c, V.p()) < 0) throw DomainError("structure constants must be p-integral");
  if (V.p() == 2) throw DomainError("orbit computations need odd p");
}

std::array<std::int64_t, 3> gram_mod(const QuadSpaceV& V, const residue::Ring& R, long& vnmin) {
  std::array<std::int64_t, 3> n{};
  vnmin = 1L << 40;
  for (int i = 0; i < 3; ++i) {
    n[i] = R.from_rational(V.gram()[i]);
    vnmin = std::min(vnmin, padic::valuation(V.gram()[i], V.p()));
  }
  return n;
}

}  // namespace

// ---------------------------------------------------------------------------

QuaternionAlgebra::QuaternionAlgebra(const LocalField& f, Rational a_, Rational b_)
    : field(f), a(std::move(a_)), b(std::move(b_)) {
  if (a == 0 || b == 0) throw DomainError("structure constants must be nonzero");
}

int invariant(const QuaternionAlgebra& B) {
  return padic::hilbert_symbol(B.a, B.b, padic::Place::prime(B.field.p));
}

QuadSpaceV::QuadSpaceV(const QuaternionAlgebra& B) : B_(B), inv_(invariant(B)) {
  n_ = {Rational(-B.a), Rational(-B.b), Rational(B.a * B.b)};
  for (auto& c : n_) c.canonicalize();
}

Rational QuadSpaceV::nu(const Vec3& x) const {
  Rational s = 0;
  for (int i = 0; i < 3; ++i) s += n_[i] * x[i] * x[i];
  s.canonicalize();
  return s;
}

Rational QuadSpaceV::bform(const Vec3& x, const Vec3& y) const {
  Rational s = 0;
  for (int i = 0; i < 3; ++i) s += 2 * n_[i] * x[i] * y[i];
  s.canonicalize();
  return s;
}

TruncatedPadic QuadSpaceV::nu(const PVec3& x) const {
  TruncatedPadic s = TruncatedPadic::zero(field());
  for (int i = 0; i < 3; ++i) {
    if (n_[i] == 0) continue;
    s = s + TruncatedPadic::from_rational(field(), n_[i]) * x[i] * x[i];
  }
  return s;
}

TruncatedPadic QuadSpaceV::bform(const PVec3& x, const PVec3& y) const {
  TruncatedPadic s = TruncatedPadic::zero(field());
  for (int i = 0; i < 3; ++i) s = s + TruncatedPadic::from_rational(field(), 2 * n_[i]) * x[i] * y[i];
  return s;
}

Rational QuadSpaceV::det_bilinear() const {
  Rational d = 8 * n_[0] * n_[1] * n_[2];
  d.canonicalize();
  return d;
}

int QuadSpaceV::hasse() const {
  int h = 1;
  const auto place = padic::Place::prime(p());
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j) h *= padic::hilbert_symbol(Rational(2 * n_[i]), Rational(2 * n_[j]), place);
  return h;
}

std::string BasePoint::str() const {
  std::ostringstream os;
  if (exact) {
    os << "(" << (*exact)[0].get_str() << ", " << (*exact)[1].get_str() << ", " << (*exact)[2].get_str() << ")";
  } else {
    os << "(" << x0[0].str() << ", " << x0[1].str() << ", " << x0[2].str() << ")";
  }
  return os.str();
}

BasePoint find_base_point(const QuadSpaceV& V, const Rational& kappa, long max_search, bool integral) {
  if (kappa == 0) throw DomainError("kappa must be nonzero");
  const LocalField& F = V.field();
  const long p = F.p;
  if (V.inv() == -1 && TruncatedPadic::from_rational(F, -kappa).is_square())
    throw NotRepresented("nu does not represent kappa on an anisotropic V when -kappa is a square");

  // Small integer points, ordered by sup norm then zigzag in each coordinate.
  const long B = std::max(6L, max_search);
  for (long r = 0; r <= B; ++r) {
    for (long i1 = 0; i1 <= 2 * r; ++i1)
      for (long i2 = 0; i2 <= 2 * r; ++i2)
        for (long i3 = 0; i3 <= 2 * r; ++i3) {
          const long x1 = zigzag(i1), x2 = zigzag(i2), x3 = zigzag(i3);
          if (std::max({std::abs(x1), std::abs(x2), std::abs(x3)}) != r) continue;
          Vec3 x{Rational(x1), Rational(x2), Rational(x3)};
          if (V.nu(x) != kappa) continue;
          BasePoint bp;
          bp.kappa = kappa;
          bp.exact = x;
          for (int i = 0; i < 3; ++i) bp.x0[i] = TruncatedPadic::from_rational(F, x[i]);
          return bp;
        }
  }

  // Residue search over p^-s O^3 with a certified cell, then Newton lifting.
  check_integral_gram(V);
  const residue::Ring R(p);
  long vnmin = 0;
  const auto n = gram_mod(V, R, vnmin);
  const long s_max = integral ? 0 : max_search;
  for (long s = 0; s <= s_max; ++s) {
    const Rational t = kappa * rpow(p, 2 * s);
    if (padic::valuation(t, p) < 0) continue;
    Enumerator en(R, n, vnmin, R.from_rational(t), R.digits() - 1);
    std::optional<OrbitCell> found;
    Enumerator::Accept any = [](const std::array<std::int64_t, 3>&, int) { return std::optional<int>(1); };
    std::function<bool(const OrbitCell&)> keep = [&](const OrbitCell& c) {
      found = c;
      return false;
    };
    en.run(0, any, keep);
    if (!found) continue;

    const long W = F.precision + found->g + 2;
    BigInt m;
    mpz_ui_pow_ui(m.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(W));
    auto red = [&](const Rational& q) {
      BigInt inv;
      BigInt den = q.get_den();
      mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t());
      BigInt r = (BigInt(q.get_num()) * inv) % m;
      if (r < 0) r += m;
      return r;
    };
    std::array<BigInt, 3> y, nn;
    for (int i = 0; i < 3; ++i) {
      y[i] = found->y[i];
      nn[i] = red(V.gram()[i]);
    }
    const BigInt tt = red(t);
    int idx = 0;
    for (int i = 0; i < 3; ++i) {
      BigInt gi = (2 * nn[i] * y[i]) % m;
      if (gi != 0 && padic::valuation(gi, p) == found->g) {
        idx = i;
        break;
      }
    }
    for (int it = 0; it < 200; ++it) {
      BigInt d = (nn[0] * y[0] * y[0] + nn[1] * y[1] * y[1] + nn[2] * y[2] * y[2] - tt) % m;
      if (d < 0) d += m;
      if (d == 0) break;
      BigInt grad = (2 * nn[idx] * y[idx]) % m;
      BigInt pg;
      mpz_ui_pow_ui(pg.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(found->g));
      BigInt gu = grad / pg;
      BigInt inv;
      mpz_invert(inv.get_mpz_t(), gu.get_mpz_t(), m.get_mpz_t());
      y[idx] = (y[idx] - (d / pg) * inv) % m;
      if (y[idx] < 0) y[idx] += m;
    }
    BasePoint bp;
    bp.kappa = kappa;
    for (int i = 0; i < 3; ++i) {
      if (y[i] == 0) {
        bp.x0[i] = TruncatedPadic::zero(F);
        continue;
      }
      const long v = padic::valuation(y[i], p);
      BigInt pv;
      mpz_ui_pow_ui(pv.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(v));
      bp.x0[i] = TruncatedPadic::from_parts(p, v - s, y[i] / pv, static_cast<int>(W - v));
    }
    return bp;
  }
  throw SearchExhausted("no smooth point of the quadric found in the scanned lattices");
}

TruncatedPadic alpha(const QuadSpaceV& V, const BasePoint& x0, const PVec3& x) {
  const LocalField& F = V.field();
  return V.bform(x, x0.x0) / TruncatedPadic::from_rational(F, 2 * x0.kappa);
}

// ---------------------------------------------------------------------------

Rational OrbitShell::measure() const {
  Rational s = 0;
  for (const auto& c : cells) s += rpow(p, c.log_measure);
  s.canonicalize();
  return s;
}

Rational OrbitShell::weighted_measure() const {
  Rational s = 0;
  for (const auto& c : cells) s += c.weight * rpow(p, c.log_measure);
  s.canonicalize();
  return s;
}

long OrbitShell::min_log() const {
  long m = 0;
  bool first = true;
  for (const auto& c : cells) {
    if (first || c.log_measure < m) m = c.log_measure;
    first = false;
  }
  return m;
}

std::map<int, std::pair<Rational, Rational>> OrbitShell::strata() const {
  std::map<int, std::pair<Rational, Rational>> out;
  for (const auto& c : cells) {
    auto& e = out[c.stratum];
    const Rational m = rpow(p, c.log_measure);
    e.first += m;
    e.second += c.weight * m;
  }
  for (auto& [k, v] : out) {
    v.first.canonicalize();
    v.second.canonicalize();
  }
  return out;
}

Orbit::Orbit(const QuadSpaceV& V, const BasePoint& x0, const padic::QuadraticCharacter& chi)
    : V_(V), x0_(x0), chi_(chi), R_(V.p()) {
  check_integral_gram(V_);
  const long p = V_.p();
  chi_trivial_ = chi_.is_trivial();
  long vnmin = 0;
  n_ = gram_mod(V_, R_, vnmin);
  const Rational& kappa = x0_.kappa;
  vk_ = padic::valuation(kappa, p);
  Rational ku = kappa * rpow(p, -vk_);
  ku.canonicalize();
  inv2ku_ = R_.inv(R_.from_rational(2 * ku));
  const Rational mk = -kappa * rpow(p, -vk_);
  minus_kappa_leg_ = R_.legendre(R_.from_rational(mk) % p);

  // l_i = 2 n_i x0_i = p^c0 * l'_i.
  std::array<std::optional<long>, 3> vl;
  if (x0_.exact) {
    std::array<Rational, 3> l;
    for (int i = 0; i < 3; ++i) {
      l[i] = 2 * V_.gram()[i] * (*x0_.exact)[i];
      l[i].canonicalize();
      if (l[i] != 0) vl[i] = padic::valuation(l[i], p);
    }
    c0_ = 1L << 40;
    for (int i = 0; i < 3; ++i)
      if (vl[i]) c0_ = std::min(c0_, *vl[i]);
    for (int i = 0; i < 3; ++i) l_[i] = (l[i] == 0) ? 0 : R_.from_rational(l[i] * rpow(p, -c0_));
    alpha_digits_ = R_.digits();
  } else {
    std::array<TruncatedPadic, 3> l;
    for (int i = 0; i < 3; ++i) {
      l[i] = TruncatedPadic::from_rational(V_.field(), 2 * V_.gram()[i]) * x0_.x0[i];
      if (!l[i].is_zero()) vl[i] = l[i].val();
    }
    c0_ = 1L << 40;
    for (int i = 0; i < 3; ++i)
      if (vl[i]) c0_ = std::min(c0_, *vl[i]);
    alpha_digits_ = R_.digits();
    for (int i = 0; i < 3; ++i) {
      if (!vl[i]) {
        l_[i] = 0;
        continue;
      }
      const long shift = *vl[i] - c0_;
      alpha_digits_ = std::min<long>(alpha_digits_, l[i].precision() + shift);
      if (shift >= R_.digits()) {
        l_[i] = 0;
        continue;
      }
      BigInt m = R_.modulus();
      BigInt r = (l[i].unit() * BigInt(R_.pw(static_cast<int>(shift)))) % m;
      l_[i] = r.get_si();
    }
  }
  if (c0_ == (1L << 40)) throw DomainError("base point is zero");
}

int Orbit::chi_of(long v, int leg) const {
  return hilbert_odd(v, leg, vk_, minus_kappa_leg_, V_.p());
}

OrbitShell Orbit::shell(long s, int min_level, bool weighted) const {
  const long p = V_.p();
  OrbitShell out;
  out.p = p;
  out.s = s;
  out.min_level = min_level;
  out.weighted = weighted && !chi_trivial_;
  const Rational t = x0_.kappa * rpow(p, 2 * s);
  if (padic::valuation(t, p) < 0) return out;
  long vnmin = 0;
  gram_mod(V_, R_, vnmin);
  Enumerator en(R_, n_, vnmin, R_.from_rational(t), R_.digits() - 1);

  const long E = c0_ - s - vk_;
  const int leg2 = R_.legendre(2);
  const int inv = V_.inv();
  const bool use_weight = out.weighted;
  const residue::Ring& R = R_;
  const long digits = alpha_digits_;

  Enumerator::Accept accept = [&](const std::array<std::int64_t, 3>& y, int k) -> std::optional<int> {
    if (!use_weight) return 1;
    std::int64_t A = 0;
    for (int i = 0; i < 3; ++i) A = R.add(A, R.mul(l_[i], y[i]));
    A = R.mul(A, inv2ku_);
    if (k + E >= 1) {
      std::int64_t bp, bm;
      long off;
      if (E >= 0) {
        const std::int64_t pa = E >= R.digits() ? 0 : R.mul(R.pw(static_cast<int>(E)), A);
        bp = R.add(pa, 1);
        bm = R.sub(pa, 1);
        off = 0;
      } else {
        if (-E >= R.digits()) throw PrecisionError("alpha below residue precision");
        const std::int64_t sh = R.pw(static_cast<int>(-E));
        bp = R.add(A, sh);
        bm = R.sub(A, sh);
        off = E;
      }
      const int vp = R.val(bp), vm = R.val(bm);
      const bool plus = vp <= vm;
      const int vb = plus ? vp : vm;
      if (vb >= digits) throw PrecisionError("base point carries too few digits for the weight");
      const std::int64_t ub = R.unit(plus ? bp : bm);
      const int w = chi_of(off + vb, leg2 * R.legendre(ub));
      return plus ? w : inv * w;
    }
    const int vA = R.val(A);
    if (vA + E < 0 && k > vA) {
      if (vA >= digits) throw PrecisionError("base point carries too few digits for the weight");
      // 2(alpha+1) = 2 alpha (1 + 1/alpha) with 1/alpha in pO.
      return chi_of(E + vA, leg2 * R.legendre(R.unit(A)));
    }
    return std::nullopt;
  };
  std::function<bool(const OrbitCell&)> keep = [&](const OrbitCell& c) {
    OrbitCell cell = c;
    cell.log_measure = s + c.g - 2L * c.k;
    cell.stratum = c.stratum + static_cast<int>(s);
    out.cells.push_back(cell);
    return true;
  };
  en.run(min_level, accept, keep);
  return out;
}

OrbitShell orbit_shell(const Orbit& orbit, long s, int min_level, bool weighted) {
  return orbit.shell(s, min_level, weighted);
}

NormalizationLedger normalization(const Orbit& orbit) {
  NormalizationLedger led;
  led.lattice_volume = orbit.shell(0, 0, false).measure();
  if (led.lattice_volume == 0) throw DomainError("the orbit does not meet the standard lattice");
  led.c_norm = 1 / led.lattice_volume;
  led.c_norm.canonicalize();
  led.convention = "Haar measure on the orbit scaled so that {nu = kappa} meets O^3 in volume 1";
  return led;
}

ClassSums class_sums(const OrbitShell& shell, long L, std::int64_t u) {
  if (L < 0) throw DomainError("negative lookup level");
  const long p = shell.p;
  std::int64_t D = 1;
  for (long i = 0; i < L; ++i) D *= p;
  ClassSums cs;
  cs.base = shell.min_log();
  cs.sums.assign(static_cast<std::size_t>(D * D * D), 0);
  const __int128 cap = static_cast<__int128>(1) << 100;
  std::map<long, __int128> powers;
  auto pw = [&](long e) {
    auto it = powers.find(e);
    if (it != powers.end()) return it->second;
    __int128 r = 1;
    for (long i = 0; i < e; ++i) {
      r *= p;
      if (r > cap) throw PrecisionError("orbit measures span too many orders of magnitude");
    }
    powers[e] = r;
    return r;
  };
  std::int64_t uu = u % D;
  if (uu < 0) uu += D;
  for (const auto& c : shell.cells) {
    if (c.k < L) throw DomainError("orbit cells are coarser than the function level");
    std::size_t idx = 0;
    for (int i = 0; i < 3; ++i) {
      const std::int64_t yi = static_cast<std::int64_t>((static_cast<__int128>(c.y[i] % D) * uu) % D);
      idx = idx * static_cast<std::size_t>(D) + static_cast<std::size_t>(yi);
    }
    cs.sums[idx] += c.weight * pw(c.log_measure - cs.base);
  }
  return cs;
}

namespace {

Rational from_i128(__int128 v) {
  const bool neg = v < 0;
  unsigned __int128 a = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
  BigInt hi = static_cast<unsigned long>(a >> 64);
  BigInt lo = static_cast<unsigned long>(a & 0xFFFFFFFFFFFFFFFFULL);
  BigInt r = hi * (BigInt(1) << 64) + lo;
  if (neg) r = -r;
  return Rational(r);
}

template <class T>
T convert(__int128 v);

template <>
Rational convert<Rational>(__int128 v) {
  return from_i128(v);
}

template <>
Complex convert<Complex>(__int128 v) {
  return Complex(static_cast<double>(v), 0.0);
}

template <class T>
T scale_pow(long p, long e);

template <>
Rational scale_pow<Rational>(long p, long e) {
  return rpow(p, e);
}

template <>
Complex scale_pow<Complex>(long p, long e) {
  return std::pow(static_cast<double>(p), static_cast<double>(e));
}

}  // namespace

template <class T>
T orbital_integral(const OrbitShell& shell, const std::vector<T>& f, long L, std::int64_t u) {
  T acc = T(0);
  if (shell.cells.empty()) return acc;
  const ClassSums cs = class_sums(shell, L, u);
  if (f.size() != cs.sums.size()) throw DomainError("function size does not match its level");
  for (std::size_t j = 0; j < f.size(); ++j) {
    if (cs.sums[j] == 0 || f[j] == T(0)) continue;
    acc += f[j] * convert<T>(cs.sums[j]);
  }
  return acc * scale_pow<T>(shell.p, cs.base);
}

template Rational orbital_integral<Rational>(const OrbitShell&, const std::vector<Rational>&, long, std::int64_t);
template Complex orbital_integral<Complex>(const OrbitShell&, const std::vector<Complex>&, long, std::int64_t);

}  // namespace theta::quad
