#include "theta/schwartz.hpp"

#include <cmath>
#include <sstream>

#include "theta/residue.hpp"

namespace theta::schwartz {

using padic::UnitRoot;

namespace {

std::int64_t ipow(long p, long k) {
  if (k < 0) throw DomainError("negative exponent");
  __int128 r = 1;
  for (long i = 0; i < k; ++i) {
    r *= p;
    if (r > (static_cast<__int128>(1) << 40)) throw PrecisionError("grid too large");
  }
  return static_cast<std::int64_t>(r);
}

Rational rpow(long p, long e) {
  BigInt m;
  mpz_ui_pow_ui(m.get_mpz_t(), static_cast<unsigned long>(p), static_cast<unsigned long>(e >= 0 ? e : -e));
  return e >= 0 ? Rational(m) : Rational(1) / Rational(m);
}

// Reduce a p-integral rational mod D = p^k.
std::int64_t reduce_mod(const Rational& q, std::int64_t D) {
  if (D == 1 || q == 0) return 0;
  BigInt m = D;
  BigInt den = q.get_den();
  BigInt inv;
  if (mpz_invert(inv.get_mpz_t(), den.get_mpz_t(), m.get_mpz_t()) == 0)
    throw DomainError("value is not p-integral");
  BigInt r = (BigInt(q.get_num()) * inv) % m;
  if (r < 0) r += m;
  return r.get_si();
}

// exp(-2 pi i frac(c m)) for integers m, c fixed.
class PsiTable {
 public:
  PsiTable(const residue::Ring& R, const Rational& c) : frac_(R, c) {
    const std::int64_t den = frac_.den();
    if (den <= (1 << 22)) {
      table_.resize(static_cast<std::size_t>(den));
      for (std::int64_t t = 0; t < den; ++t) table_[static_cast<std::size_t>(t)] = padic::cis_turns(-t, den);
    }
  }
  Complex operator()(std::int64_t m) const {
    const std::int64_t t = frac_.num(m);
    if (!table_.empty()) return table_[static_cast<std::size_t>(t)];
    return padic::cis_turns(-t, frac_.den());
  }
  std::int64_t den() const { return frac_.den(); }

 private:
  residue::FracTable frac_;
  std::vector<Complex> table_;
};

// ceil(x / 2)
long ceil_half(long x) { return x >= 0 ? (x + 1) / 2 : -((-x) / 2); }

template <class T>
T zero_value() {
  return T(0);
}

}  // namespace

// ---------------------------------------------------------------------------
// BasicSchwartzFn

template <class T>
BasicSchwartzFn<T>::BasicSchwartzFn(int rank, long p, long N, long M) : rank_(rank), p_(p), N_(N), M_(M) {
  if (rank != 1 && rank != 3) throw DomainError("rank must be 1 or 3");
  if (N + M < 0) throw DomainError("support level below invariance level");
  side_ = ipow(p, N + M);
  std::size_t n = 1;
  for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(side_);
  if (n > (std::size_t{1} << 26)) throw PrecisionError("Schwartz function grid too large");
  values_.assign(n, zero_value<T>());
}

template <class T>
std::size_t BasicSchwartzFn<T>::index(const std::array<std::int64_t, 3>& j) const {
  std::size_t idx = 0;
  for (int i = 0; i < rank_; ++i) idx = idx * static_cast<std::size_t>(side_) + static_cast<std::size_t>(j[i]);
  return idx;
}

template <class T>
std::array<std::int64_t, 3> BasicSchwartzFn<T>::digits(std::size_t idx) const {
  std::array<std::int64_t, 3> j{0, 0, 0};
  for (int i = rank_ - 1; i >= 0; --i) {
    j[i] = static_cast<std::int64_t>(idx % static_cast<std::size_t>(side_));
    idx /= static_cast<std::size_t>(side_);
  }
  return j;
}

template <class T>
T BasicSchwartzFn<T>::eval(const std::vector<Rational>& x) const {
  if (static_cast<int>(x.size()) < rank_) throw DomainError("point has too few coordinates");
  std::array<std::int64_t, 3> j{0, 0, 0};
  for (int i = 0; i < rank_; ++i) {
    if (x[i] == 0) continue;
    if (padic::valuation(x[i], p_) < -N_) return zero_value<T>();
    j[i] = reduce_mod(x[i] * rpow(p_, N_), side_);
  }
  return values_[index(j)];
}

template <class T>
BasicSchwartzFn<T> BasicSchwartzFn<T>::refine(long N2, long M2) const {
  if (N2 < N_ || M2 < M_) throw DomainError("refinement must not coarsen");
  if (N2 == N_ && M2 == M_) return *this;
  BasicSchwartzFn<T> out(rank_, p_, N2, M2);
  const std::int64_t shift = ipow(p_, N2 - N_);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    auto j = out.digits(idx);
    bool inside = true;
    for (int i = 0; i < rank_; ++i) {
      if (j[i] % shift != 0) {
        inside = false;
        break;
      }
      j[i] = (j[i] / shift) % side_;
    }
    if (inside) out.values_[idx] = values_[index(j)];
  }
  return out;
}

template <class T>
BasicSchwartzFn<T>& BasicSchwartzFn<T>::operator+=(const BasicSchwartzFn& o) {
  if (o.rank_ != rank_ || o.p_ != p_) throw DomainError("mismatched Schwartz functions");
  const long N2 = std::max(N_, o.N_), M2 = std::max(M_, o.M_);
  *this = refine(N2, M2);
  const BasicSchwartzFn<T> b = o.refine(N2, M2);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += b.values_[i];
  return *this;
}

template <class T>
BasicSchwartzFn<T> BasicSchwartzFn<T>::operator*(const T& c) const {
  BasicSchwartzFn<T> out = *this;
  for (auto& v : out.values_) v *= c;
  return out;
}

template <class T>
BasicSchwartzFn<T> BasicSchwartzFn<T>::indicator(int rank, long p, long N) {
  BasicSchwartzFn<T> f(rank, p, N, -N);
  f.values_[0] = T(1);
  return f;
}

template class BasicSchwartzFn<Complex>;
template class BasicSchwartzFn<Rational>;

SchwartzFn to_complex(const ExactSchwartzFn& f) {
  SchwartzFn out(f.rank(), f.p(), f.N(), f.M());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = Complex(f[i].get_d(), 0.0);
  return out;
}

double max_diff(const SchwartzFn& f, const SchwartzFn& g) {
  const long N2 = std::max(f.N(), g.N()), M2 = std::max(f.M(), g.M());
  const SchwartzFn a = f.refine(N2, M2), b = g.refine(N2, M2);
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

bool equal_exact(const ExactSchwartzFn& f, const ExactSchwartzFn& g) {
  const long N2 = std::max(f.N(), g.N()), M2 = std::max(f.M(), g.M());
  return f.refine(N2, M2).values() == g.refine(N2, M2).values();
}

// ---------------------------------------------------------------------------
// Weil context

WeilContext WeilContext::for_V(const padic::AdditiveCharacter& psi, const quad::QuadSpaceV& V) {
  WeilContext c;
  c.psi_ = psi;
  c.n_.assign(V.gram().begin(), V.gram().end());
  if (psi.field().p == 2) throw DomainError("the Weil representation needs odd p");
  c.gamma_ = UnitRoot::one();
  c.c_sd_ = 1.0;
  Rational disc = 1;
  const long p = psi.field().p;
  for (const auto& ni : c.n_) {
    c.gamma_ = c.gamma_ * padic::weil_constant(psi, ni);
    const long v = padic::valuation(Rational(2 * ni * psi.scale()), p);
    c.c_sd_ *= std::pow(static_cast<double>(p), -0.5 * static_cast<double>(v));
    disc *= 2 * ni;
  }
  c.disc_ = -disc;
  c.disc_.canonicalize();
  return c;
}

WeilContext WeilContext::for_U(const padic::AdditiveCharacter& psi, const Rational& kappa) {
  if (kappa == 0) throw DomainError("kappa must be nonzero");
  if (psi.field().p == 2) throw DomainError("the Weil representation needs odd p");
  WeilContext c;
  c.psi_ = psi;
  c.n_ = {kappa};
  c.gamma_ = padic::weil_constant(psi, kappa);
  const long p = psi.field().p;
  const long v = padic::valuation(Rational(2 * kappa * psi.scale()), p);
  c.c_sd_ = std::pow(static_cast<double>(p), -0.5 * static_cast<double>(v));
  c.disc_ = 2 * kappa;
  c.disc_.canonicalize();
  return c;
}

int WeilContext::m_symbol(const Rational& a) const {
  return padic::hilbert_symbol(a, disc_, padic::Place::prime(p()));
}

Complex WeilContext::m_prefactor(const Rational& a) const {
  if (a == 0) throw DomainError("m(a) needs a nonzero");
  const long v = padic::valuation(a, p());
  const double abs_a = std::pow(static_cast<double>(p()), -static_cast<double>(v));
  const double mag = std::pow(abs_a, 0.5 * rank());
  const UnitRoot g = padic::weil_index(a, psi_);
  return mag * static_cast<double>(m_symbol(a)) * g.inverse().to_complex();
}

// ---------------------------------------------------------------------------
// Operators

template <class T>
BasicSchwartzFn<T> dilate(const BasicSchwartzFn<T>& f, const Rational& a) {
  if (a == 0) throw DomainError("dilation by zero");
  const long p = f.p();
  const long v = padic::valuation(a, p);
  BasicSchwartzFn<T> out(f.rank(), p, f.N() + v, f.M() - v);
  const std::int64_t D = f.side();
  Rational u = a * rpow(p, -v);
  const std::int64_t ua = reduce_mod(u, D);
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    auto j = out.digits(idx);
    for (int i = 0; i < f.rank(); ++i)
      j[i] = static_cast<std::int64_t>((static_cast<__int128>(j[i]) * ua) % (D == 0 ? 1 : D));
    out[idx] = f[f.index(j)];
  }
  return out;
}

template BasicSchwartzFn<Complex> dilate(const BasicSchwartzFn<Complex>&, const Rational&);
template BasicSchwartzFn<Rational> dilate(const BasicSchwartzFn<Rational>&, const Rational&);

SchwartzFn op_m(const WeilContext& ctx, const Rational& a, const SchwartzFn& f) {
  if (f.rank() != ctx.rank()) throw DomainError("rank mismatch");
  return dilate(f, a) * ctx.m_prefactor(a);
}

SchwartzFn op_n(const WeilContext& ctx, const Rational& b, const SchwartzFn& f) {
  if (f.rank() != ctx.rank()) throw DomainError("rank mismatch");
  if (b == 0) return f;
  const long p = ctx.p();
  const Rational eb = ctx.psi().scale() * b;
  long M2 = f.M();
  const long N = f.N();
  for (const auto& ni : ctx.coeffs()) {
    if (ni == 0) continue;
    const long vc = padic::valuation(Rational(2 * eb * ni), p);
    const long vs = padic::valuation(Rational(eb * ni), p);
    M2 = std::max(M2, N - vc);
    M2 = std::max(M2, ceil_half(-vs));
  }
  SchwartzFn out = f.refine(N, M2);
  const residue::Ring R(p);
  const std::int64_t D = out.side();
  std::vector<std::vector<Complex>> tab(static_cast<std::size_t>(ctx.rank()));
  for (int i = 0; i < ctx.rank(); ++i) {
    const Rational c = eb * ctx.coeffs()[i] * rpow(p, -2 * N);
    const PsiTable psi(R, c);
    tab[i].resize(static_cast<std::size_t>(D));
    for (std::int64_t j = 0; j < D; ++j) {
      const std::int64_t jj = j % std::max<std::int64_t>(psi.den(), 1);
      tab[i][static_cast<std::size_t>(j)] = psi(static_cast<std::int64_t>((static_cast<__int128>(jj) * jj) % psi.den()));
    }
  }
  for (std::size_t idx = 0; idx < out.size(); ++idx) {
    if (out[idx] == Complex(0.0, 0.0)) continue;
    const auto j = out.digits(idx);
    Complex ph = 1.0;
    for (int i = 0; i < ctx.rank(); ++i) ph *= tab[i][static_cast<std::size_t>(j[i])];
    out[idx] *= ph;
  }
  return out;
}

SchwartzFn op_w(const WeilContext& ctx, const SchwartzFn& f) {
  if (f.rank() != ctx.rank()) throw DomainError("rank mismatch");
  const long p = ctx.p();
  const int r = ctx.rank();
  std::vector<long> vi;
  for (const auto& ni : ctx.coeffs()) vi.push_back(padic::valuation(Rational(2 * ni * ctx.psi().scale()), p));
  const long vmax = *std::max_element(vi.begin(), vi.end());
  const long vmin = *std::min_element(vi.begin(), vi.end());
  const long N = f.N(), M = f.M();
  const long N2 = M + vmax, M2 = N - vmin;
  SchwartzFn out(r, p, N2, M2);
  const std::int64_t D = f.side(), D2 = out.side();
  const residue::Ring R(p);

  // Axis-by-axis transform; shape[i] tracks the current length of axis i.
  std::vector<std::int64_t> shape(static_cast<std::size_t>(r), D);
  std::vector<Complex> cur = f.values();
  for (int ax = 0; ax < r; ++ax) {
    const Rational c = -2 * ctx.psi().scale() * ctx.coeffs()[ax] * rpow(p, -N - N2);
    const PsiTable psi(R, c);
    const std::int64_t den = std::max<std::int64_t>(psi.den(), 1);
    // The cell integral over p^M O kills y outside p^-(M + v_ax) O.
    const std::int64_t step = ipow(p, vmax - vi[static_cast<std::size_t>(ax)]);
    std::vector<Complex> K(static_cast<std::size_t>(D2 * D), Complex(0.0, 0.0));
    for (std::int64_t a = 0; a < D2; a += step)
      for (std::int64_t b = 0; b < D; ++b)
        K[static_cast<std::size_t>(a * D + b)] =
            psi(static_cast<std::int64_t>((static_cast<__int128>(a % den) * (b % den)) % den));
    std::int64_t outer = 1, inner = 1;
    for (int i = 0; i < ax; ++i) outer *= shape[i];
    for (int i = ax + 1; i < r; ++i) inner *= shape[i];
    std::vector<Complex> nxt(static_cast<std::size_t>(outer * D2 * inner), Complex(0.0, 0.0));
    for (std::int64_t o = 0; o < outer; ++o)
      for (std::int64_t b = 0; b < D; ++b)
        for (std::int64_t in = 0; in < inner; ++in) {
          const Complex v = cur[static_cast<std::size_t>((o * D + b) * inner + in)];
          if (v == Complex(0.0, 0.0)) continue;
          for (std::int64_t a = 0; a < D2; ++a)
            nxt[static_cast<std::size_t>((o * D2 + a) * inner + in)] += v * K[static_cast<std::size_t>(a * D + b)];
        }
    cur.swap(nxt);
    shape[ax] = D2;
  }
  const Complex pref = ctx.gamma_form().inverse().to_complex() * ctx.self_dual_constant() *
                       std::pow(static_cast<double>(p), -static_cast<double>(r) * static_cast<double>(M));
  for (auto& v : cur) v *= pref;
  out.values() = std::move(cur);
  return out;
}

// ---------------------------------------------------------------------------
// Words

std::string Letter::str() const {
  switch (kind) {
    case Kind::M:
      return "m(" + arg.get_str() + ")";
    case Kind::N:
      return "n(" + arg.get_str() + ")";
    case Kind::W:
      return "w";
    case Kind::EpsFlip:
      return "eps";
  }
  return "?";
}

std::string MetaplecticWord::str() const {
  std::string s;
  for (const auto& l : letters) {
    if (!s.empty()) s += " ";
    s += l.str();
  }
  return s.empty() ? "1" : s;
}

MetaplecticWord MetaplecticWord::parse(const std::string& text) {
  MetaplecticWord w;
  std::istringstream is(text);
  std::string tok;
  while (is >> tok) {
    if (tok == "1") continue;
    if (tok == "w") {
      w.letters.push_back(Letter::w());
    } else if (tok == "eps") {
      w.letters.push_back(Letter::eps());
    } else if (tok.size() > 3 && (tok[0] == 'm' || tok[0] == 'n') && tok[1] == '(' && tok.back() == ')') {
      const Rational q = padic::parse_rational(tok.substr(2, tok.size() - 3));
      if (tok[0] == 'm') {
        if (q == 0) throw DomainError("m(0) is not a group element");
        w.letters.push_back(Letter::m(q));
      } else {
        w.letters.push_back(Letter::n(q));
      }
    } else {
      throw DomainError("cannot parse word letter: " + tok);
    }
  }
  return w;
}

SchwartzFn apply_word(const WeilContext& ctx, const MetaplecticWord& word, const SchwartzFn& f) {
  SchwartzFn cur = f;
  for (auto it = word.letters.rbegin(); it != word.letters.rend(); ++it) {
    switch (it->kind) {
      case Letter::Kind::M:
        cur = op_m(ctx, it->arg, cur);
        break;
      case Letter::Kind::N:
        cur = op_n(ctx, it->arg, cur);
        break;
      case Letter::Kind::W:
        cur = op_w(ctx, cur);
        break;
      case Letter::Kind::EpsFlip:
        cur = cur * Complex(-1.0, 0.0);
        break;
    }
  }
  return cur;
}

template <class T>
BasicSchwartzFn<T> reflect(const BasicSchwartzFn<T>& f) {
  BasicSchwartzFn<T> out(f.rank(), f.p(), f.N(), f.M());
  const std::int64_t D = f.side();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    auto j = f.digits(idx);
    for (int i = 0; i < f.rank(); ++i) j[i] = (D - j[i]) % D;
    out[idx] = f[f.index(j)];
  }
  return out;
}

template <class T>
BasicSchwartzFn<T> parity_project(const BasicSchwartzFn<T>& f, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("parity sign must be +1 or -1");
  const BasicSchwartzFn<T> r = reflect(f);
  BasicSchwartzFn<T> out = f;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (sign == 1)
      out[i] = (f[i] + r[i]) / T(2);
    else
      out[i] = (f[i] - r[i]) / T(2);
  }
  return out;
}

template BasicSchwartzFn<Complex> reflect(const BasicSchwartzFn<Complex>&);
template BasicSchwartzFn<Rational> reflect(const BasicSchwartzFn<Rational>&);
template BasicSchwartzFn<Complex> parity_project(const BasicSchwartzFn<Complex>&, int);
template BasicSchwartzFn<Rational> parity_project(const BasicSchwartzFn<Rational>&, int);

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const SchwartzFn& f) {
  nlohmann::json j;
  j["rank"] = f.rank();
  j["p"] = f.p();
  j["N"] = f.N();
  j["M"] = f.M();
  nlohmann::json entries = nlohmann::json::array();
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    if (f[idx] == Complex(0.0, 0.0)) continue;
    const auto d = f.digits(idx);
    nlohmann::json digits = nlohmann::json::array();
    for (int i = 0; i < f.rank(); ++i) digits.push_back(d[i]);
    entries.push_back({digits, f[idx].real(), f[idx].imag()});
  }
  j["entries"] = entries;
  return j;
}

SchwartzFn schwartz_from_json(const nlohmann::json& j) {
  const int rank = j.at("rank").get<int>();
  SchwartzFn f(rank, j.at("p").get<long>(), j.at("N").get<long>(), j.at("M").get<long>());
  for (const auto& e : j.at("entries")) {
    const auto& digits = e.at(0);
    if (static_cast<int>(digits.size()) != rank) throw DomainError("entry has wrong number of digits");
    std::array<std::int64_t, 3> d{0, 0, 0};
    for (int i = 0; i < rank; ++i) {
      d[i] = digits.at(i).get<std::int64_t>();
      if (d[i] < 0 || d[i] >= f.side()) throw DomainError("entry digit out of range");
    }
    f[f.index(d)] = Complex(e.at(1).get<double>(), e.at(2).get<double>());
  }
  return f;
}

}  // namespace theta::schwartz
