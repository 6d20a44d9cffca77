#pragma once

// Quaternion algebras by structure constants, the trace-zero space V with its
// norm form, base points on the quadric nu = kappa, and orbit measures.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "theta/padic.hpp"
#include "theta/residue.hpp"

namespace theta::quad {

using Vec3 = std::array<Rational, 3>;
using PVec3 = std::array<padic::TruncatedPadic, 3>;

class NotRepresented : public DomainError {
 public:
  using DomainError::DomainError;
};

class SearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// i^2 = a, j^2 = b, ij = -ji over Q_p.
struct QuaternionAlgebra {
  padic::LocalField field;
  Rational a;
  Rational b;

  QuaternionAlgebra(const padic::LocalField& f, Rational a_, Rational b_);
};

/// Hilbert symbol (a,b)_p: +1 split, -1 division.
int invariant(const QuaternionAlgebra& B);

/// Trace-zero elements x1 i + x2 j + x3 ij with nu(x) = -a x1^2 - b x2^2 + ab x3^2.
class QuadSpaceV {
 public:
  explicit QuadSpaceV(const QuaternionAlgebra& B);

  const QuaternionAlgebra& algebra() const { return B_; }
  const padic::LocalField& field() const { return B_.field; }
  long p() const { return B_.field.p; }
  /// Diagonal coefficients (-a, -b, ab).
  const Vec3& gram() const { return n_; }
  int inv() const { return inv_; }

  Rational nu(const Vec3& x) const;
  Rational bform(const Vec3& x, const Vec3& y) const;
  padic::TruncatedPadic nu(const PVec3& x) const;
  padic::TruncatedPadic bform(const PVec3& x, const PVec3& y) const;

  /// Determinant of the matrix of bform: 8 a^2 b^2.
  Rational det_bilinear() const;
  /// prod_{i<j} (2n_i, 2n_j) for the bilinear diagonal entries 2n_i.
  int hasse() const;

 private:
  QuaternionAlgebra B_;
  Vec3 n_;
  int inv_;
};

struct BasePoint {
  PVec3 x0;
  Rational kappa;
  std::optional<Vec3> exact;  // set when a rational point was found

  std::string str() const;
};

/// A point with nu(x0) = kappa. Small rational points are tried first, then a
/// residue search with Newton lifting over the lattices p^-s O^3, s < max_search.
/// integral restricts to x0 in O^3.
BasePoint find_base_point(const QuadSpaceV& V, const Rational& kappa, long max_search = 6,
                          bool integral = false);

/// alpha(x) = bform(x, x0) / (2 kappa).
padic::TruncatedPadic alpha(const QuadSpaceV& V, const BasePoint& x0, const PVec3& x);

/// A ball p^-s (y + p^k O^3) meeting the quadric, certified by Hensel's lemma.
/// Its orbit measure is p^log_measure.
struct OrbitCell {
  std::array<std::int64_t, 3> y{};
  int k = 0;
  int g = 0;           // valuation of the gradient of nu at y
  long log_measure = 0;
  int weight = 1;      // chi(nu(h)) on the cell, or 1 when unweighted
  int stratum = 0;     // -min_i v(x_i)
};

struct OrbitShell {
  long p = 3;
  long s = 0;
  int min_level = 0;
  bool weighted = false;
  std::vector<OrbitCell> cells;

  Rational measure() const;
  Rational weighted_measure() const;
  long min_log() const;
  /// stratum -> (measure, weighted measure)
  std::map<int, std::pair<Rational, Rational>> strata() const;
};

/// Leray measure dx/dnu on {nu = kappa}; the weight is chi(2(alpha+1)), read
/// through Inv(B) chi(2(alpha-1)) near alpha = -1.
class Orbit {
 public:
  Orbit(const QuadSpaceV& V, const BasePoint& x0, const padic::QuadraticCharacter& chi);

  const QuadSpaceV& space() const { return V_; }
  const BasePoint& base() const { return x0_; }
  const residue::Ring& ring() const { return R_; }

  /// Cells of the quadric inside p^-s O^3, each of y-level at least min_level.
  OrbitShell shell(long s, int min_level, bool weighted = true) const;

 private:
  QuadSpaceV V_;
  BasePoint x0_;
  padic::QuadraticCharacter chi_;
  residue::Ring R_;
  bool chi_trivial_;
  std::array<std::int64_t, 3> n_{};   // gram coefficients mod P
  std::array<std::int64_t, 3> l_{};   // 2 n_i x0_i / p^c0 mod P
  long c0_ = 0;
  long vk_ = 0;                        // v(kappa)
  std::int64_t inv2ku_ = 1;            // (2 kappa / p^vk)^-1 mod P
  int minus_kappa_leg_ = 1;
  long alpha_digits_ = 0;              // digits of alpha we can trust
  int chi_of(long v, int leg) const;
};

OrbitShell orbit_shell(const Orbit& orbit, long s, int min_level, bool weighted = true);

/// Haar normalization on the orbit: the orbit meets O^3 in volume 1.
struct NormalizationLedger {
  Rational lattice_volume;  // Leray measure of {nu = kappa} inside O^3
  Rational c_norm;          // 1 / lattice_volume
  std::string convention;
};

NormalizationLedger normalization(const Orbit& orbit);

/// Sum over cells of f(u y mod p^L) * weight * measure, with f dense over (Z/p^L)^3.
/// Accumulates exactly per residue class before multiplying by f.
template <class T>
T orbital_integral(const OrbitShell& shell, const std::vector<T>& f, long L, std::int64_t u = 1);

/// The exact per-class accumulator: index -> sum of weight * p^(log_measure - base).
struct ClassSums {
  long base = 0;
  std::vector<__int128> sums;
};
ClassSums class_sums(const OrbitShell& shell, long L, std::int64_t u);

}  // namespace theta::quad
