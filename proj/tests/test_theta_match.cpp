#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "theta/theta_match.hpp"

using namespace theta;
using match::MatchingContext;
using padic::LocalField;
using schwartz::ExactSchwartzFn;
using schwartz::MetaplecticWord;
using schwartz::SchwartzFn;

namespace {

struct Setup {
  long p, a, b, kappa, N, M;
};

const Setup kSplit3{3, 1, 1, 1, 1, 1};
const Setup kSplit5{5, 1, 1, 2, 0, 1};
const Setup kDiv3{3, 2, 3, 1, 1, 1};
const Setup kDiv5{5, 2, 5, 2, 0, 1};

MatchingContext ctx_of(const Setup& s) { return MatchingContext(LocalField(s.p), s.a, s.b, s.kappa); }

Rational pw(long p, long e) { return e >= 0 ? oracle::Q(oracle::ipow(p, e), 1) : oracle::Q(1, oracle::ipow(p, -e)); }

// Points r = p^n u covering every unit class mod p^2 for n in [lo, hi].
std::vector<Rational> sample_r(long p, long lo, long hi) {
  std::vector<Rational> out;
  for (long n = lo; n <= hi; ++n)
    for (long u = 1; u < p * p; ++u)
      if (u % p) out.push_back(Rational(u) * pw(p, n));
  return out;
}

bool reports_pass(const std::vector<MatchReport>& rs) {
  bool ok = true;
  for (const auto& r : rs)
    if (!r.pass && r.blocking) {
      ok = false;
      MESSAGE(r.identity << " " << r.params.dump() << " lhs=" << r.lhs << " rhs=" << r.rhs);
    }
  return ok;
}

}  // namespace

TEST_CASE("admissibility") {
  // Division algebra at 3 with -kappa a square: chi trivial.
  CHECK_THROWS_AS(MatchingContext(LocalField(3), 2, 3, 2), DomainError);
  CHECK_NOTHROW(ctx_of(kDiv3));
  const auto c = ctx_of(kDiv3);
  CHECK(c.inv() == -1);
  CHECK(c.ledger().c_norm == Rational(1, 2));
}

TEST_CASE("fundamental lemma") {
  for (long p : {3L, 5L, 7L}) {
    const long u = padic::nonresidue(p);
    for (long kappa : {1L, u}) CHECK_MESSAGE(reports_pass(match::verify_fundamental_lemma(p, kappa, 4)), "p=" << p);
  }
}

TEST_CASE("transform of the standard lattice is Char(O)") {
  for (const auto& s : {Setup{3, 1, 1, 1, 0, 0}, Setup{5, 1, 1, 2, 0, 0}, Setup{3, 1, 1, 2, 0, 0}}) {
    const auto ctx = ctx_of(s);
    const auto P = match::transform_phi0<Rational>(ctx, ExactSchwartzFn::indicator(3, s.p, 0));
    CHECK(P.mode == "constant");
    CHECK(P.near_zero == 1);
    for (const auto& r : sample_r(s.p, -4, 4)) CHECK(P.fn.eval({r}) == (padic::valuation(r, s.p) >= 0 ? 1 : 0));
  }
}

TEST_CASE("zero maps to zero") {
  const auto ctx = ctx_of(kSplit3);
  const auto P = match::transform_phi0<Rational>(ctx, ExactSchwartzFn(3, 3, 1, 1));
  for (const auto& v : P.fn.values()) CHECK(v == 0);
}

TEST_CASE("linearity and locality") {
  for (const auto& s : {kSplit3, kDiv3}) {
    const auto ctx = ctx_of(s);
    auto bat = match::random_battery(s.p, s.N, s.M, 21, 2);
    const Rational x(2, 3), y(-5);
    ExactSchwartzFn comb = bat[0] * x;
    comb += bat[1] * y;
    const auto P0 = match::transform_phi0<Rational>(ctx, bat[0]);
    const auto P1 = match::transform_phi0<Rational>(ctx, bat[1]);
    const auto Pc = match::transform_phi0<Rational>(ctx, comb);
    const auto Pr = match::transform_phi0<Rational>(ctx, bat[0].refine(s.N + 1, s.M + 1));
    for (const auto& r : sample_r(s.p, -3, 4)) {
      CHECK(Pc.fn.eval({r}) == x * P0.fn.eval({r}) + y * P1.fn.eval({r}));
      CHECK(Pr.fn.eval({r}) == P0.fn.eval({r}));
    }
    // Locally constant at the predicted inner level.
    const long lvl = P0.n_star;
    for (const auto& r : sample_r(s.p, P0.n_lo, P0.n_star))
      CHECK(P0.fn.eval({r + pw(s.p, lvl + padic::valuation(r, s.p) + P0.unit_level)}) == P0.fn.eval({r}));
  }
}

TEST_CASE("support: norms off the class of kappa give zero") {
  for (const auto& s : {kSplit3, kDiv3, kDiv5}) {
    const auto ctx = ctx_of(s);
    std::mt19937_64 rng(4);
    const auto phi = match::off_class_phi(ctx, rng);
    const auto P = match::transform_phi0<Rational>(ctx, phi);
    for (const auto& v : P.fn.values()) CHECK(v == 0);
  }
}

TEST_CASE("parity") {
  for (const auto& s : {kSplit3, kSplit5, kDiv3, kDiv5}) {
    const auto ctx = ctx_of(s);
    const auto bat = match::random_battery(s.p, s.N, s.M, 5, 4);
    CHECK(reports_pass(match::verify_parity(ctx, bat)));
    const auto P = match::transform_phi0<Rational>(ctx, bat[0]);
    if (ctx.inv() == -1) {
      CHECK(P.mode == "vanishing");
      CHECK(P.near_zero == 0);
      // Odd: phi0(-r) = -phi0(r).
      for (const auto& r : sample_r(s.p, -3, 3)) CHECK(P.fn.eval({-r}) == -P.fn.eval({r}));
    } else {
      for (const auto& r : sample_r(s.p, -3, 3)) CHECK(P.fn.eval({-r}) == P.fn.eval({r}));
    }
  }
}

TEST_CASE("whittaker functions") {
  const auto ctx = ctx_of(kSplit3);
  const auto phi = schwartz::to_complex(match::random_battery(3, 1, 1, 8, 1)[0]);
  const Complex w1 = match::whittaker_V(ctx, phi, {});
  // n(b) on the orbit nu = kappa is the scalar psi(b kappa).
  for (const Rational b : {Rational(1, 3), Rational(2, 9)}) {
    const Complex want = oracle::psi(b * ctx.kappa()) * w1;
    CHECK(std::abs(match::whittaker_V(ctx, phi, {schwartz::Letter::n(b)}) - want) < 1e-12);
    CHECK(std::abs(match::whittaker_V_direct(ctx, phi, {schwartz::Letter::n(b)}) - want) < 1e-12);
  }
  const auto word = MetaplecticWord::parse("n(1/3) w");
  CHECK(std::abs(match::whittaker_V(ctx, phi, word) - match::whittaker_V_direct(ctx, phi, word)) < 1e-12);
  // A finer orbit decomposition does not move the value.
  CHECK(std::abs(match::whittaker_V(ctx, phi, {}, 2) - w1) < 1e-12);
}

TEST_CASE("borel matching") {
  for (const auto& s : {kSplit3, kDiv3, kDiv5}) {
    const auto ctx = ctx_of(s);
    const auto bat = match::random_battery(s.p, s.N, s.M, 3, 2);
    const Rational u(padic::nonresidue(s.p));
    std::vector<Rational> as{1, u, Rational(s.p), u * s.p};
    std::vector<Rational> bs;
    for (long k = -2; k <= 2; ++k) bs.push_back(pw(s.p, k));
    CHECK(reports_pass(match::verify_borel(ctx, bat, as, bs)));
  }
}

TEST_CASE("equivariance") {
  for (const auto& s : {kSplit3, kSplit5, kDiv3}) {
    const auto ctx = ctx_of(s);
    const auto bat = match::random_battery(s.p, s.N, s.M, 13, 2);
    const std::string ip = "1/" + std::to_string(s.p);
    std::vector<MetaplecticWord> words;
    for (const auto& t : {"n(" + ip + ")", std::string("m(2)"), "m(" + std::to_string(s.p) + ")", std::string("eps")})
      words.push_back(MetaplecticWord::parse(t));
    CHECK(reports_pass(match::verify_equivariance(ctx, bat, words)));
  }
}

TEST_CASE("big cell") {
  for (const auto& s : {kSplit3, kDiv3, Setup{3, 1, 1, 2, 1, 1}}) {
    const auto ctx = ctx_of(s);
    const auto bat = match::random_battery(s.p, s.N, s.M, 17, 3);
    std::vector<MetaplecticWord> words;
    for (const auto* t : {"w", "w n(1)", "n(1) w", "w m(3)"}) words.push_back(MetaplecticWord::parse(t));
    const auto rs = match::verify_bigcell(ctx, bat, words);
    CHECK(reports_pass(rs));
    bool saw_one = false;
    for (const auto& r : rs)
      if (r.identity == "bigcell_ratio_one") {
        saw_one = true;
        CHECK(r.blocking == !ctx.chi().is_trivial());
      }
    CHECK(saw_one);
  }
}

TEST_CASE("square class vanishing") {
  for (const auto& s : {kSplit3, kDiv3}) {
    const auto ctx = ctx_of(s);
    std::vector<MetaplecticWord> words;
    for (const auto* t : {"", "n(1)", "m(2)", "w", "w n(1/3)"}) words.push_back(MetaplecticWord::parse(t));
    CHECK(reports_pass(match::verify_square_class(ctx, words, 2)));
  }
  // Control: a ball around x0 is on-class and is seen.
  const auto ctx = ctx_of(kSplit3);
  ExactSchwartzFn ball(3, 3, 0, 1);
  const auto& x0 = ctx.x0().exact;
  REQUIRE(x0.has_value());
  ball[ball.index({oracle::mod((*x0)[0].get_num().get_si(), 3), oracle::mod((*x0)[1].get_num().get_si(), 3),
                   oracle::mod((*x0)[2].get_num().get_si(), 3)})] = 1;
  CHECK(std::abs(match::whittaker_V(ctx, schwartz::to_complex(ball), {})) > 0.1);
}

TEST_CASE("symbol layer") {
  CHECK(reports_pass(match::verify_product_formula(1, 100)));
  for (long p : {3L, 5L}) {
    CHECK(reports_pass(match::verify_gauss(p, 8)));
    CHECK(reports_pass(match::verify_weil_index(p)));
  }
}

TEST_CASE("volume scaling") {
  CHECK(reports_pass(match::verify_volume_scaling(3, 2, 2)));
  CHECK(reports_pass(match::verify_volume_scaling(5, 1, 2)));
  CHECK_THROWS_AS(match::verify_volume_scaling(3, 1, 1), DomainError);
}

TEST_CASE("fourier involution") {
  CHECK(reports_pass(match::verify_involution(ctx_of(kSplit3), 0, 1)));
  CHECK(reports_pass(match::verify_involution(ctx_of(kDiv3), 0, 1)));
}
