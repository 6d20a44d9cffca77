#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "theta/schwartz.hpp"

using namespace theta;
using padic::LocalField;
using schwartz::ExactSchwartzFn;
using schwartz::Letter;
using schwartz::MetaplecticWord;
using schwartz::SchwartzFn;
using schwartz::WeilContext;

namespace {

SchwartzFn random_fn(int rank, long p, long N, long M, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SchwartzFn f(rank, p, N, M);
  for (auto& v : f.values()) v = Complex(u(rng), u(rng));
  return f;
}

std::vector<Rational> random_point(int rank, long p, long depth, std::mt19937_64& rng) {
  std::uniform_int_distribution<long> d(-200, 200);
  std::vector<Rational> x;
  for (int i = 0; i < rank; ++i) {
    Rational q(d(rng), oracle::ipow(p, static_cast<int>(depth)));
    q.canonicalize();
    x.push_back(q);
  }
  return x;
}

quad::QuadSpaceV space(long p, long a, long b) { return quad::QuadSpaceV(quad::QuaternionAlgebra(LocalField(p), a, b)); }

}  // namespace

TEST_CASE("storage") {
  ExactSchwartzFn f(3, 3, 1, 1);
  CHECK(f.side() == 9);
  CHECK(f.size() == 729);
  for (std::size_t i = 0; i < f.size(); i += 37) CHECK(f.index(f.digits(i)) == i);
  f[f.index({1, 2, 3})] = 5;
  CHECK(f.eval({Rational(1, 3), Rational(2, 3), Rational(1)}) == 5);
  CHECK(f.eval({Rational(1, 3) + 3, Rational(2, 3) - 6, Rational(4)}) == 5);
  CHECK(f.eval({Rational(1, 9), Rational(0), Rational(0)}) == 0);
  const auto one = ExactSchwartzFn::indicator(1, 5, 0);
  CHECK(one.eval({Rational(7)}) == 1);
  CHECK(one.eval({Rational(1, 5)}) == 0);
  CHECK_THROWS(SchwartzFn(3, 5, 6, 6));
}

TEST_CASE("refinement preserves values") {
  std::mt19937_64 rng(1);
  const SchwartzFn f = random_fn(3, 3, 1, 1, 4);
  const SchwartzFn g = f.refine(2, 3);
  for (int t = 0; t < 200; ++t) {
    const auto x = random_point(3, 3, 2, rng);
    CHECK(std::abs(f.eval(x) - g.eval(x)) < 1e-15);
  }
  CHECK(schwartz::max_diff(f, g) < 1e-15);
}

TEST_CASE("weil context constants") {
  const LocalField F(3);
  const padic::AdditiveCharacter psi(F);
  const auto V = space(3, 2, 3);
  const auto W = WeilContext::for_V(psi, V);
  // prod |2 n_i|^(1/2) with n = (-2, -3, 6).
  CHECK(W.self_dual_constant() == doctest::Approx(1.0 / 3.0));
  // gamma of the form against the det/Hasse description.
  const auto det = V.det_bilinear();
  const padic::UnitRoot g1 = padic::weil_constant(psi, Rational(1, 2));
  const padic::UnitRoot expect =
      padic::weil_index(det, psi) * g1 * g1 * g1 * padic::UnitRoot::sign(V.hasse());
  CHECK(W.gamma_form() == expect);
  for (const Rational a : {Rational(2), Rational(3), Rational(6), Rational(1, 3)}) {
    CHECK(W.m_symbol(a) == padic::hilbert_symbol(a, Rational(-2), padic::Place::prime(3)));
    const Complex want = std::pow(3.0, -1.5 * padic::valuation(a, 3)) * static_cast<double>(W.m_symbol(a)) *
                         padic::weil_index(a, psi).inverse().to_complex();
    CHECK(std::abs(W.m_prefactor(a) - want) < 1e-12);
  }
  const auto U = WeilContext::for_U(psi, 5);
  CHECK(U.rank() == 1);
  CHECK(U.m_symbol(2) == padic::hilbert_symbol(2, 10, padic::Place::prime(3)));
}

TEST_CASE("op_n is multiplication by psi(b nu)") {
  const LocalField F(3);
  const padic::AdditiveCharacter psi(F);
  const auto V = space(3, 2, 3);
  const auto W = WeilContext::for_V(psi, V);
  const SchwartzFn f = random_fn(3, 3, 1, 1, 2);
  std::mt19937_64 rng(3);
  for (const Rational b : {Rational(1), Rational(1, 3), Rational(2, 9), Rational(3)}) {
    const SchwartzFn g = schwartz::op_n(W, b, f);
    for (int t = 0; t < 100; ++t) {
      const auto x = random_point(3, 3, 1, rng);
      const Rational nu = V.nu({x[0], x[1], x[2]});
      const Complex want = oracle::psi(b * nu) * f.eval(x);
      CHECK(std::abs(g.eval(x) - want) < 1e-12);
    }
  }
}

TEST_CASE("op_m is a scaled dilation") {
  const LocalField F(5);
  const padic::AdditiveCharacter psi(F);
  const auto W = WeilContext::for_V(psi, space(5, 1, 1));
  const SchwartzFn f = random_fn(3, 5, 1, 1, 6);
  std::mt19937_64 rng(7);
  for (const Rational a : {Rational(2), Rational(5), Rational(1, 5), Rational(3, 25)}) {
    const SchwartzFn g = schwartz::op_m(W, a, f);
    for (int t = 0; t < 60; ++t) {
      const auto x = random_point(3, 5, 3, rng);
      std::vector<Rational> ax;
      for (const auto& c : x) ax.push_back(a * c);
      CHECK(std::abs(g.eval(x) - W.m_prefactor(a) * f.eval(ax)) < 1e-12);
    }
  }
}

TEST_CASE("m and n satisfy m(a) n(b) = n(a^2 b) m(a)") {
  const LocalField F(3);
  const padic::AdditiveCharacter psi(F);
  const auto W = WeilContext::for_V(psi, space(3, 1, 1));
  const SchwartzFn f = random_fn(3, 3, 1, 1, 8);
  for (const Rational a : {Rational(2), Rational(3), Rational(1, 3)})
    for (const Rational b : {Rational(1), Rational(1, 3), Rational(2, 9)}) {
      const auto lhs = schwartz::op_m(W, a, schwartz::op_n(W, b, f));
      const auto rhs = schwartz::op_n(W, a * a * b, schwartz::op_m(W, a, f));
      CHECK(schwartz::max_diff(lhs, rhs) < 1e-12);
      const auto nn = schwartz::op_n(W, b, schwartz::op_n(W, a, f));
      CHECK(schwartz::max_diff(nn, schwartz::op_n(W, a + b, f)) < 1e-12);
    }
}

TEST_CASE("op_w on separable functions against a Riemann sum") {
  struct Case {
    long p, a, b;
    long N, M;
  };
  for (const Case c : {Case{3, 1, 1, 1, 1}, Case{3, 2, 3, 1, 1}, Case{5, 2, 5, 0, 1}}) {
    const LocalField F(c.p);
    const padic::AdditiveCharacter psi(F);
    const auto V = space(c.p, c.a, c.b);
    const auto W = WeilContext::for_V(psi, V);
    std::array<std::vector<Complex>, 3> axes;
    const std::int64_t D = oracle::ipow(c.p, static_cast<int>(c.N + c.M));
    std::mt19937_64 rng(c.p * 100 + c.b);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto& ax : axes) {
      ax.resize(static_cast<std::size_t>(D));
      for (auto& v : ax) v = Complex(u(rng), u(rng));
    }
    SchwartzFn f(3, c.p, c.N, c.M);
    for (std::size_t i = 0; i < f.size(); ++i) {
      const auto j = f.digits(i);
      f[i] = axes[0][j[0]] * axes[1][j[1]] * axes[2][j[2]];
    }
    const SchwartzFn g = schwartz::op_w(W, f);
    const Complex pref = W.gamma_form().inverse().to_complex() * W.self_dual_constant();
    // Sample the output grid and points just outside it.
    for (int t = 0; t < 40; ++t) {
      const auto y = random_point(3, c.p, c.M + 2, rng);
      Complex want = pref;
      for (int i = 0; i < 3; ++i)
        want *= oracle::fourier_1d(c.p, static_cast<int>(c.N), static_cast<int>(c.M), axes[i], -2 * V.gram()[i], y[i], 3);
      CHECK_MESSAGE(std::abs(g.eval(y) - want) < 1e-9, "p=" << c.p << " b=" << c.b << " y=" << y[0] << "," << y[1] << "," << y[2] << " got " << g.eval(y) << " want " << want);
    }
  }
}

TEST_CASE("fourier transform squares to a reflection") {
  for (long b : {1L, 3L}) {
    const LocalField F(3);
    const padic::AdditiveCharacter psi(F);
    const auto W = WeilContext::for_V(psi, space(3, b == 1 ? 1 : 2, b));
    const SchwartzFn f = random_fn(3, 3, 1, 1, 10 + b);
    const auto ww = schwartz::op_w(W, schwartz::op_w(W, f));
    const auto r = schwartz::reflect(f);
    // The constant is read at one point and must hold everywhere.
    std::mt19937_64 rng(b);
    std::vector<Rational> x0{Rational(1, 3), Rational(0), Rational(1)};
    std::vector<Rational> mx0{Rational(-1, 3), Rational(0), Rational(-1)};
    const Complex c = ww.eval(x0) / f.eval(mx0);
    CHECK(std::abs(std::abs(c) - 1.0) < 1e-12);
    CHECK(schwartz::max_diff(ww, r * c) < 1e-10);
  }
  const LocalField F(5);
  const auto U = WeilContext::for_U(padic::AdditiveCharacter(F), 10);
  const SchwartzFn f = random_fn(1, 5, 2, 1, 3);
  const auto ww = schwartz::op_w(U, schwartz::op_w(U, f));
  const Complex c = ww.eval({Rational(-1, 25)}) / f.eval({Rational(1, 25)});
  CHECK(std::abs(std::abs(c) - 1.0) < 1e-12);
  CHECK(schwartz::max_diff(ww, schwartz::reflect(f) * c) < 1e-10);
}

TEST_CASE("words") {
  const auto w = MetaplecticWord::parse("m(3) n(-1/5) w eps");
  REQUIRE(w.letters.size() == 4);
  CHECK(w.letters[0].kind == Letter::Kind::M);
  CHECK(w.letters[0].arg == 3);
  CHECK(w.letters[1].arg == Rational(-1, 5));
  CHECK(w.letters[2].kind == Letter::Kind::W);
  CHECK(w.letters[3].kind == Letter::Kind::EpsFlip);
  CHECK(w.str() == "m(3) n(-1/5) w eps");
  CHECK(MetaplecticWord::parse("").letters.empty());
  CHECK(MetaplecticWord::parse("").str() == "1");
  CHECK_THROWS(MetaplecticWord::parse("m(0)"));
  CHECK_THROWS(MetaplecticWord::parse("q(2)"));

  // The rightmost letter acts first.
  const LocalField F(3);
  const auto W = WeilContext::for_V(padic::AdditiveCharacter(F), space(3, 1, 1));
  const SchwartzFn f = random_fn(3, 3, 1, 1, 12);
  const auto g = schwartz::apply_word(W, MetaplecticWord::parse("n(1/3) m(2)"), f);
  CHECK(schwartz::max_diff(g, schwartz::op_n(W, Rational(1, 3), schwartz::op_m(W, 2, f))) < 1e-14);
  const auto e = schwartz::apply_word(W, MetaplecticWord::parse("eps"), f);
  CHECK(schwartz::max_diff(e, f * Complex(-1.0, 0.0)) < 1e-15);
}

TEST_CASE("parity projection") {
  ExactSchwartzFn f(3, 3, 1, 1);
  std::mt19937_64 rng(2);
  for (auto& v : f.values()) v = static_cast<long>(rng() % 7) - 3;
  const auto even = schwartz::parity_project(f, 1), odd = schwartz::parity_project(f, -1);
  CHECK(schwartz::equal_exact(schwartz::reflect(even), even));
  CHECK(schwartz::equal_exact(schwartz::reflect(odd), odd * Rational(-1)));
  auto sum = even;
  sum += odd;
  CHECK(schwartz::equal_exact(sum, f));
}

TEST_CASE("json round trip") {
  const SchwartzFn f = random_fn(1, 3, 1, 2, 5);
  const auto j = schwartz::to_json(f);
  const auto g = schwartz::schwartz_from_json(j);
  CHECK(schwartz::max_diff(f, g) == 0.0);
  CHECK(schwartz::to_json(g).dump() == j.dump());
  CHECK_THROWS(schwartz::schwartz_from_json(nlohmann::json::object()));
}
