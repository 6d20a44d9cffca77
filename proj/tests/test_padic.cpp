#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "theta/padic.hpp"

using namespace theta;
using padic::LocalField;
using padic::Place;
using padic::TruncatedPadic;
using padic::UnitRoot;

TEST_CASE("valuations and parsing") {
  CHECK(padic::valuation(Rational(54), 3) == 3);
  CHECK(padic::valuation(Rational(2, 27), 3) == -3);
  CHECK(padic::valuation(Rational(7, 5), 3) == 0);
  CHECK(padic::parse_rational("-3/6") == Rational(-1, 2));
  CHECK(padic::parse_rational("12") == 12);
  CHECK_THROWS(padic::parse_rational("x/2"));
}

TEST_CASE("truncated arithmetic agrees with rationals") {
  const LocalField F(5, 10);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> d(-300, 300);
  for (int i = 0; i < 200; ++i) {
    Rational a(d(rng), 1 + (d(rng) + 300) % 40), b(d(rng), 1 + (d(rng) + 300) % 40);
    a.canonicalize();
    b.canonicalize();
    if (a == 0 || b == 0) continue;
    const auto A = TruncatedPadic::from_rational(F, a), B = TruncatedPadic::from_rational(F, b);
    CHECK(A * B == TruncatedPadic::from_rational(F, a * b));
    CHECK(A / B == TruncatedPadic::from_rational(F, a / b));
    if (a + b != 0) CHECK(A + B == TruncatedPadic::from_rational(F, a + b));
    CHECK(A.val() == padic::valuation(a, 5));
  }
  // 1 - 5^10 is 1 at ten digits; the difference has no digits left.
  const auto one = TruncatedPadic::from_int(F, 1);
  const auto near = TruncatedPadic::from_rational(F, Rational(1) - Rational(9765625));
  CHECK(one == near);
}

TEST_CASE("squares") {
  const LocalField F(7);
  CHECK(TruncatedPadic::from_int(F, 2).is_square());   // 3^2 = 2 mod 7
  CHECK_FALSE(TruncatedPadic::from_int(F, 3).is_square());
  CHECK_FALSE(TruncatedPadic::from_int(F, 7).is_square());
  CHECK(TruncatedPadic::from_int(F, 98).is_square());
  CHECK(padic::nonresidue(7) == 3);
  CHECK(padic::nonresidue(3) == 2);
}

TEST_CASE("roots of unity") {
  CHECK(UnitRoot(2, 8) == UnitRoot::i());
  CHECK(UnitRoot::i().pow(4) == UnitRoot::one());
  CHECK(UnitRoot(3, 8) * UnitRoot(5, 8) == UnitRoot::one());
  CHECK(UnitRoot::snap(std::polar(1.0, 3.14159265358979 / 4), 8) == UnitRoot(1, 8));
  CHECK_THROWS(UnitRoot::snap({0.5, 0.0}, 8));
}

TEST_CASE("hilbert symbol against a solubility search") {
  const std::vector<long> primes{2, 3, 5};
  const std::vector<Rational> vals{-1, 2, -2, 3, 5, 6, -3, 10, -15, Rational(1, 3), 7, 12};
  for (long p : primes)
    for (const auto& a : vals)
      for (const auto& b : vals) {
        const int want = oracle::hilbert_bruteforce(a, b, p);
        REQUIRE(want != 0);
        CHECK_MESSAGE(padic::hilbert_symbol(a, b, Place::prime(p)) == want, "p=" << p << " a=" << a << " b=" << b);
      }
}

TEST_CASE("hilbert symbol values") {
  CHECK(padic::hilbert_symbol(-1, -1, Place::prime(2)) == -1);
  CHECK(padic::hilbert_symbol(-1, -1, Place::infinity()) == -1);
  CHECK(padic::hilbert_symbol(-1, -1, Place::prime(3)) == 1);
  CHECK(padic::hilbert_symbol(2, 3, Place::prime(3)) == -1);
  CHECK(padic::hilbert_symbol(1, 5, Place::prime(5)) == 1);
  const LocalField F(3);
  CHECK(padic::hilbert_symbol(TruncatedPadic::from_int(F, 2), TruncatedPadic::from_int(F, 3)) == -1);
}

TEST_CASE("hilbert product formula") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> e(-2, 2);
  auto draw = [&] {
    Rational q = (rng() & 1) ? -1 : 1;
    for (long l : {2, 3, 5, 7, 11}) {
      const int k = e(rng);
      q *= k >= 0 ? Rational(oracle::ipow(l, k)) : Rational(1, oracle::ipow(l, -k));
    }
    return q;
  };
  for (int i = 0; i < 100; ++i) {
    const Rational a = draw(), b = draw();
    int prod = padic::hilbert_symbol(a, b, Place::infinity());
    for (long q : {2, 3, 5, 7, 11}) prod *= padic::hilbert_symbol(a, b, Place::prime(q));
    CHECK(prod == 1);
  }
}

TEST_CASE("additive character") {
  const LocalField F(3);
  const padic::AdditiveCharacter psi(F);
  CHECK(psi(TruncatedPadic::from_int(F, 5)) == UnitRoot::one());
  CHECK(psi(TruncatedPadic::from_rational(F, Rational(1, 3))) == UnitRoot(2, 3));
  const Rational x(7, 9);
  CHECK(std::abs(psi(TruncatedPadic::from_rational(F, x)).to_complex() - oracle::psi(x)) < 1e-12);
  const padic::AdditiveCharacter psi2(F, 2, 1);
  CHECK(std::abs(psi2(TruncatedPadic::from_rational(F, x)).to_complex() - oracle::psi(x * 6)) < 1e-12);
}

TEST_CASE("quadratic character") {
  const LocalField F(5);
  const padic::QuadraticCharacter chi1(F, 1), chi2(F, 2), chi5(F, 5);
  CHECK(chi1.is_trivial());  // -1 is a square mod 5
  CHECK_FALSE(chi2.is_trivial());
  CHECK(chi2.is_unramified());
  CHECK_FALSE(chi5.is_unramified());
  CHECK(chi2(Rational(5)) == -1);
  CHECK(chi2(Rational(3)) == 1);
  CHECK(chi2(Rational(0)) == 0);
}

TEST_CASE("gauss integral") {
  for (long p : {3L, 5L, 7L}) {
    const LocalField F(p);
    const padic::AdditiveCharacter psi(F);
    const double q = static_cast<double>(p);
    const long u = padic::nonresidue(p);
    const auto G = oracle::classical_gauss_sum(p);
    for (long k : {p, u * p}) {
      const auto g = padic::gauss_integral(psi, padic::QuadraticCharacter(F, k), 8);
      CHECK(g.stabilized);
      CHECK(std::norm(g.value) == doctest::Approx(q).epsilon(1e-12));
      // One shell survives: the classical sum up to the sign chi(p^-1) and complex conjugation.
      const double d = std::min({std::abs(g.value - G), std::abs(g.value + G), std::abs(g.value - std::conj(G)),
                                 std::abs(g.value + std::conj(G))});
      CHECK(d < 1e-9);
    }
    for (long k : {1L, u}) {
      const padic::QuadraticCharacter chi(F, k);
      const auto g = padic::gauss_integral(psi, chi, 8);
      CHECK(g.stabilized);
      const double want = chi.is_trivial() ? 0.0 : 2.0 * q / (q + 1.0);
      CHECK(std::abs(g.value - want) < 1e-9);
    }
  }
}

TEST_CASE("gauss integral scaling") {
  // psi -> psi^(c^2) multiplies the integral by |c|^-2.
  const LocalField F(3);
  const padic::QuadraticCharacter chi(F, 3);
  const auto g1 = padic::gauss_integral(padic::AdditiveCharacter(F), chi, 8);
  const auto g9 = padic::gauss_integral(padic::AdditiveCharacter(F, 9), chi, 10);
  CHECK(std::abs(g9.value - 9.0 * g1.value) < 1e-9);
  CHECK(std::abs(g9.value - 3.0 * g1.value) > 1.0);
}

TEST_CASE("quadratic gauss truncation matches a direct sum") {
  const LocalField F(5);
  const padic::AdditiveCharacter psi(F);
  for (const Rational c : {Rational(1), Rational(2), Rational(1, 5), Rational(3, 25)}) {
    for (long k = 0; k <= 2; ++k) {
      const std::int64_t D = oracle::ipow(5, 2 * k + 2);
      std::complex<double> s = 0.0;
      for (std::int64_t j = 0; j < D; ++j) {
        Rational x(j, oracle::ipow(5, k));
        s += oracle::psi(c * x * x);
      }
      s /= static_cast<double>(oracle::ipow(5, k + 2));
      CHECK(std::abs(padic::quadratic_gauss_truncation(psi, c, k) - s) < 1e-9);
    }
  }
}

TEST_CASE("weil index") {
  for (long p : {3L, 5L, 7L}) {
    const LocalField F(p);
    const padic::AdditiveCharacter psi(F);
    CHECK(padic::weil_index(1, psi) == UnitRoot::one());
    const long u = padic::nonresidue(p);
    for (const Rational a : {Rational(u), Rational(p), Rational(u * p)}) {
      const auto g = padic::weil_index(a, psi);
      CHECK(g.pow(8) == UnitRoot::one());
      for (const Rational c : {Rational(2), Rational(p), Rational(1, p), Rational(4, 3 * p)})
        CHECK(padic::weil_index(a * c * c, psi) == g);
    }
    // gamma(a) gamma(b) = gamma(ab) (a,b)
    for (const Rational a : {Rational(u), Rational(p), Rational(-1)})
      for (const Rational b : {Rational(u), Rational(p), Rational(u * p)}) {
        const int s = padic::hilbert_symbol(a, b, Place::prime(p));
        CHECK(padic::weil_index(a, psi) * padic::weil_index(b, psi) ==
              padic::weil_index(a * b, psi) * UnitRoot::sign(s));
      }
    // The constant of a unit coefficient is 1 for a character of level 0.
    CHECK(padic::weil_constant(psi, 1) == UnitRoot::one());
    // p = 3 mod 4 gives the Gauss sum phase -i on the shell.
    if (p % 4 == 3) CHECK(padic::weil_constant(psi, Rational(1, p)).pow(2) == UnitRoot::minus_one());
  }
}
