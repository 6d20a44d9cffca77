#pragma once

// The transform phi -> phi0 from S(V) to S(U), Whittaker functions on both
// sides, and the verifiers for the local matching identities.

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "theta/padic.hpp"
#include "theta/quadspace.hpp"
#include "theta/report.hpp"
#include "theta/schwartz.hpp"

namespace theta::match {

struct Tolerances {
  double standard = 1e-9;
  double bigcell = 1e-6;
};

class MatchingContext {
 public:
  /// Rejects Inv(B) = -1 with chi trivial. integral_base asks for x0 in O^3.
  MatchingContext(const padic::LocalField& field, const Rational& a, const Rational& b, const Rational& kappa,
                  const Rational& epsilon = 1, long d = 0, bool integral_base = true);

  const padic::LocalField& field() const { return field_; }
  long p() const { return field_.p; }
  const quad::QuadSpaceV& V() const { return V_; }
  const padic::QuadraticCharacter& chi() const { return chi_; }
  const padic::AdditiveCharacter& psi() const { return psi_; }
  const quad::BasePoint& x0() const { return orbit_.base(); }
  const quad::Orbit& orbit() const { return orbit_; }
  const quad::NormalizationLedger& ledger() const { return ledger_; }
  const schwartz::WeilContext& weil_V() const { return weil_V_; }
  const schwartz::WeilContext& weil_U() const { return weil_U_; }
  const Rational& kappa() const { return kappa_; }
  int inv() const { return V_.inv(); }

  /// chi(p^v u) for a unit residue u.
  int chi_of(long v, std::int64_t u) const;
  nlohmann::json describe() const;

 private:
  padic::LocalField field_;
  Rational kappa_;
  quad::QuadSpaceV V_;
  padic::QuadraticCharacter chi_;
  padic::AdditiveCharacter psi_;
  quad::Orbit orbit_;
  quad::NormalizationLedger ledger_;
  schwartz::WeilContext weil_V_;
  schwartz::WeilContext weil_U_;
};

/// phi0 as a rank-1 Schwartz function plus the shell data it was built from.
template <class T>
struct Phi0 {
  schwartz::BasicSchwartzFn<T> fn;
  long n_lo = 0;     // phi0 vanishes on v(r) < n_lo
  long n_star = 0;   // phi0 equals near_zero on v(r) >= n_star
  long unit_level = 1;
  std::map<long, std::vector<T>> shells;  // n -> value at p^n u for u mod p^unit_level
  T near_zero{};
  std::string mode;  // "constant" or "vanishing"
};

/// phi0(p^n u) for all units u mod p^max(1, N+M).
template <class T>
std::vector<T> phi0_shell(const MatchingContext& ctx, const schwartz::BasicSchwartzFn<T>& phi, long n);

/// Computes shells upward from the first possibly nonzero one until two consecutive
/// shells show the near-0 behaviour, then extends. Throws StabilizationError past n_max.
template <class T>
Phi0<T> transform_phi0(const MatchingContext& ctx, const schwartz::BasicSchwartzFn<T>& phi, long n_max = 6);

/// W_phi(g): the weighted orbital integral of omega(g) phi at x0.
Complex whittaker_V(const MatchingContext& ctx, const schwartz::SchwartzFn& phi,
                    const schwartz::MetaplecticWord& word, int extra_depth = 0);
/// whittaker_V without peeling leading n(b) letters; every letter goes through the grid.
Complex whittaker_V_direct(const MatchingContext& ctx, const schwartz::SchwartzFn& phi,
                           const schwartz::MetaplecticWord& word, int extra_depth = 0);
/// W_phi0(g) = (omega0(g) phi0)(1).
Complex whittaker_U(const MatchingContext& ctx, const schwartz::SchwartzFn& phi0,
                    const schwartz::MetaplecticWord& word);

/// Seeded random phi: small rational values on random residue classes.
/// parity 0 leaves it as drawn, +1/-1 symmetrizes.
schwartz::ExactSchwartzFn random_phi(long p, long N, long M, std::mt19937_64& rng, int parity = 0,
                                     double density = 0.35);
std::vector<schwartz::ExactSchwartzFn> random_battery(long p, long N, long M, std::uint64_t seed, int count);

/// Unit representatives of the four square classes: 1, u, p, up.
std::vector<Rational> square_class_reps(long p);

std::vector<MatchReport> verify_fundamental_lemma(long p, const Rational& kappa, long ord_bound = 4);
/// Unweighted orbit volume of p^-n O^3 against O^3 for n = 1..n_max; needs chi trivial.
std::vector<MatchReport> verify_volume_scaling(long p, const Rational& kappa, long n_max = 2);
std::vector<MatchReport> verify_borel(const MatchingContext& ctx, const std::vector<schwartz::ExactSchwartzFn>& battery,
                                      const std::vector<Rational>& a_samples, const std::vector<Rational>& b_samples,
                                      const Tolerances& tol = {});
std::vector<MatchReport> verify_equivariance(const MatchingContext& ctx,
                                             const std::vector<schwartz::ExactSchwartzFn>& battery,
                                             const std::vector<schwartz::MetaplecticWord>& words,
                                             const Tolerances& tol = {});
std::vector<MatchReport> verify_parity(const MatchingContext& ctx, const std::vector<schwartz::ExactSchwartzFn>& battery);
/// One report per phi plus a summary report for the constancy of the ratio and one for ratio = 1.
std::vector<MatchReport> verify_bigcell(const MatchingContext& ctx, const std::vector<schwartz::ExactSchwartzFn>& battery,
                                        const std::vector<schwartz::MetaplecticWord>& words,
                                        const Tolerances& tol = {});
/// phi supported on balls where nu avoids the class of kappa; W_phi must vanish on every word.
std::vector<MatchReport> verify_square_class(const MatchingContext& ctx,
                                             const std::vector<schwartz::MetaplecticWord>& words,
                                             std::uint64_t seed, const Tolerances& tol = {});
/// Ball characteristic functions with nu in a class other than kappa's.
schwartz::ExactSchwartzFn off_class_phi(const MatchingContext& ctx, std::mt19937_64& rng);

/// Gauss integral checks at p: ramified chi against the classical sum, unramified against its closed form.
std::vector<MatchReport> verify_gauss(long p, long n_max = 8);
/// Hilbert product formula over {2,3,5,7,11,inf} for seeded pairs supported there.
std::vector<MatchReport> verify_product_formula(std::uint64_t seed, int pairs = 100);
/// gamma(a c^2) = gamma(a) over the square classes and sample c.
std::vector<MatchReport> verify_weil_index(long p);
/// op_w twice equals a unit constant times x -> -x on a basis of indicator functions.
std::vector<MatchReport> verify_involution(const MatchingContext& ctx, long N, long M, const Tolerances& tol = {});

}  // namespace theta::match
