#pragma once

// Schwartz-Bruhat functions on V (rank 3) and U (rank 1) stored densely on
// (p^-N O / p^M O)^rank, and the Weil representation on generators.

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "theta/padic.hpp"
#include "theta/quadspace.hpp"

namespace theta::schwartz {

/// f(x) for x in p^-N O^rank, invariant under p^M O^rank, zero outside.
/// Index j in [0, p^(N+M))^rank stands for x = p^-N j; storage is row-major.
template <class T>
class BasicSchwartzFn {
 public:
  BasicSchwartzFn() = default;
  BasicSchwartzFn(int rank, long p, long N, long M);

  int rank() const { return rank_; }
  long p() const { return p_; }
  long N() const { return N_; }
  long M() const { return M_; }
  /// p^(N+M)
  std::int64_t side() const { return side_; }
  std::size_t size() const { return values_.size(); }

  std::vector<T>& values() { return values_; }
  const std::vector<T>& values() const { return values_; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::size_t index(const std::array<std::int64_t, 3>& j) const;
  std::array<std::int64_t, 3> digits(std::size_t idx) const;

  /// Value at a point with rational coordinates (rank entries used).
  T eval(const std::vector<Rational>& x) const;

  /// Same function on the finer grid (N2 >= N, M2 >= M).
  BasicSchwartzFn refine(long N2, long M2) const;

  BasicSchwartzFn& operator+=(const BasicSchwartzFn& o);
  BasicSchwartzFn operator*(const T& c) const;

  /// Characteristic function of p^-N O^rank.
  static BasicSchwartzFn indicator(int rank, long p, long N = 0);

 private:
  int rank_ = 1;
  long p_ = 3;
  long N_ = 0;
  long M_ = 0;
  std::int64_t side_ = 1;
  std::vector<T> values_;
};

using SchwartzFn = BasicSchwartzFn<Complex>;
using ExactSchwartzFn = BasicSchwartzFn<Rational>;

SchwartzFn to_complex(const ExactSchwartzFn& f);

/// max |f - g| after common refinement.
double max_diff(const SchwartzFn& f, const SchwartzFn& g);
bool equal_exact(const ExactSchwartzFn& f, const ExactSchwartzFn& g);

/// Q(x) = sum_i n_i x_i^2 paired with psi: the data the Weil operators need.
class WeilContext {
 public:
  static WeilContext for_V(const padic::AdditiveCharacter& psi, const quad::QuadSpaceV& V);
  static WeilContext for_U(const padic::AdditiveCharacter& psi, const Rational& kappa);

  int rank() const { return static_cast<int>(n_.size()); }
  long p() const { return psi_.field().p; }
  const padic::AdditiveCharacter& psi() const { return psi_; }
  const std::vector<Rational>& coeffs() const { return n_; }

  /// Weil index of x -> psi(Q(x)).
  padic::UnitRoot gamma_form() const { return gamma_; }
  /// prod_i |2 eps' n_i|^(1/2): the self-dual measure against vol(O^rank) = 1.
  double self_dual_constant() const { return c_sd_; }
  /// The symbol (a, (-1)^((rank-1)/2) det(2 n_i)).
  int m_symbol(const Rational& a) const;
  /// |a|^(rank/2) (a, ...) gamma(a, psi^1/2)^-1.
  Complex m_prefactor(const Rational& a) const;

 private:
  padic::AdditiveCharacter psi_;
  std::vector<Rational> n_;
  padic::UnitRoot gamma_;
  double c_sd_ = 1.0;
  Rational disc_;
};

SchwartzFn op_n(const WeilContext& ctx, const Rational& b, const SchwartzFn& f);
SchwartzFn op_m(const WeilContext& ctx, const Rational& a, const SchwartzFn& f);
SchwartzFn op_w(const WeilContext& ctx, const SchwartzFn& f);

/// Exact dilation x -> f(a x) without the prefactor.
template <class T>
BasicSchwartzFn<T> dilate(const BasicSchwartzFn<T>& f, const Rational& a);

struct Letter {
  enum class Kind { M, N, W, EpsFlip };
  Kind kind = Kind::W;
  Rational arg = 0;

  static Letter m(const Rational& a) { return {Kind::M, a}; }
  static Letter n(const Rational& b) { return {Kind::N, b}; }
  static Letter w() { return {Kind::W, 0}; }
  static Letter eps() { return {Kind::EpsFlip, 0}; }
  std::string str() const;
};

/// g = l_1 l_2 ... l_k acting as omega(l_1) o ... o omega(l_k).
struct MetaplecticWord {
  std::vector<Letter> letters;

  MetaplecticWord() = default;
  MetaplecticWord(std::initializer_list<Letter> ls) : letters(ls) {}
  std::string str() const;
  /// Parses "m(3) n(-1/5) w eps"; the empty string is the identity.
  static MetaplecticWord parse(const std::string& text);
};

SchwartzFn apply_word(const WeilContext& ctx, const MetaplecticWord& word, const SchwartzFn& f);

/// (f(x) + sign f(-x)) / 2
template <class T>
BasicSchwartzFn<T> parity_project(const BasicSchwartzFn<T>& f, int sign);

/// f(-x)
template <class T>
BasicSchwartzFn<T> reflect(const BasicSchwartzFn<T>& f);

nlohmann::json to_json(const SchwartzFn& f);
SchwartzFn schwartz_from_json(const nlohmann::json& j);

}  // namespace theta::schwartz
