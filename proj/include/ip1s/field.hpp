/// @file field.hpp
/// @brief Exact arithmetic in prime fields F_p and dynamic towers of extensions.
///
/// A FieldCtx is either a prime field or an extension of a parent context by a
/// monic irreducible polynomial, built at runtime and shared immutably.
/// Elements carry their coordinates over F_p in one flat vector (constant
/// coordinate first, innermost tower level first), so addition is
/// coordinatewise and multiplication reduces level by level against the
/// minimal polynomials of the tower.
///
/// Text form of the tower: "p=3; ext=[1,0,1],[...]" lists the minimal
/// polynomial of each level, coefficients low-to-high with the leading 1
/// omitted being NOT allowed: the full monic coefficient list is written.
/// Elements print as plain integers at level 0 and as nested parenthesized
/// tuples "(c0,c1,...)" above.
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "ip1s/errors.hpp"
#include "ip1s/rng.hpp"

namespace ip1s {

class FieldCtx;
class FieldElem;
using FieldPtr = std::shared_ptr<const FieldCtx>;

/// Guard rails for runtime-built towers. Operations that provably need more
/// room (e.g. splitting fields of an n x n charpoly) pass explicit limits.
struct TowerLimits {
  int max_levels = 8;
  std::uint64_t max_total_degree = std::uint64_t{1} << 16;
};

bool is_prime_u64(std::uint64_t n);

class FieldCtx : public std::enable_shared_from_this<FieldCtx> {
 public:
  /// F_p for prime p (primality checked).
  static FieldPtr prime_field(std::uint64_t p);

  /// Extension of `parent` by a monic polynomial given through its low
  /// coefficients c0..c_{d-1} (elements of `parent`); the leading coefficient
  /// is implicitly 1. Irreducibility is NOT checked here; use adjoin_root from
  /// unipoly.hpp for the checked entry point.
  static FieldPtr extension_unchecked(const FieldPtr& parent,
                                      const std::vector<FieldElem>& minpoly_low,
                                      const TowerLimits& limits = {});

  static FieldPtr parse_spec(const std::string& text);
  std::string spec_string() const;

  std::uint64_t characteristic() const { return p_; }
  int level() const { return level_; }
  const FieldPtr& parent() const { return parent_; }
  /// Degree of this level over its parent (1 for a prime field).
  std::uint64_t degree() const { return deg_; }
  /// Degree over F_p == number of F_p coordinates of an element.
  std::uint64_t total_degree() const { return words_; }
  mpz_class order() const;
  bool is_prime_field() const { return level_ == 0; }

  FieldElem zero() const;
  FieldElem one() const;
  FieldElem from_int(std::int64_t v) const;
  /// Element from its flat F_p coordinate vector (length total_degree()).
  FieldElem from_words(std::vector<std::uint64_t> w) const;
  /// Element of this level from degree() coefficients over the parent.
  FieldElem from_coeffs(const std::vector<FieldElem>& coeffs) const;
  /// The adjoined root of this level's minimal polynomial (level >= 1).
  FieldElem gen() const;
  /// Lift an element of an ancestor context into this one.
  FieldElem embed(const FieldElem& a) const;

  /// Canonical enumeration: index written base p into the coordinate vector.
  FieldElem element_at(const mpz_class& index) const;
  mpz_class index_of(const FieldElem& a) const;
  FieldElem sample(Rng& rng) const;

  /// First nonsquare in the canonical enumeration (odd characteristic).
  FieldElem canonical_nonsquare() const;

  /// Minimal polynomial low coefficients over the parent (level >= 1).
  std::vector<FieldElem> minpoly_low() const;

  bool same_field(const FieldCtx& other) const;
  /// True if `other` extends this context (or is the same tower node).
  bool is_ancestor_of(const FieldCtx& other) const;

  /// Raw minimal polynomial storage: degree() blocks of parent coordinates.
  const std::vector<std::uint64_t>& minpoly_flat() const { return minflat_; }

  FieldElem parse_elem(const std::string& text) const;

 private:
  FieldCtx() = default;
  friend class FieldElem;

  std::uint64_t p_ = 0;
  FieldPtr parent_;
  int level_ = 0;
  std::uint64_t deg_ = 1;
  std::uint64_t words_ = 1;
  std::vector<std::uint64_t> minflat_;
  mutable std::optional<std::vector<std::uint64_t>> nonsquare_cache_;
};

class FieldElem {
 public:
  FieldElem() = default;

  const FieldPtr& ctx() const { return ctx_; }
  bool valid() const { return ctx_ != nullptr; }
  const std::vector<std::uint64_t>& words() const { return w_; }

  bool is_zero() const;
  bool is_one() const;

  FieldElem operator-() const;
  FieldElem inv() const;
  FieldElem pow(std::uint64_t e) const;
  FieldElem pow(const mpz_class& e) const;
  /// a^(p^k): the k-th Frobenius power.
  FieldElem frobenius(std::uint64_t k = 1) const;

  friend FieldElem operator+(const FieldElem& a, const FieldElem& b);
  friend FieldElem operator-(const FieldElem& a, const FieldElem& b);
  friend FieldElem operator*(const FieldElem& a, const FieldElem& b);
  friend FieldElem operator/(const FieldElem& a, const FieldElem& b);
  FieldElem& operator+=(const FieldElem& b) { return *this = *this + b; }
  FieldElem& operator-=(const FieldElem& b) { return *this = *this - b; }
  FieldElem& operator*=(const FieldElem& b) { return *this = *this * b; }
  FieldElem& operator/=(const FieldElem& b) { return *this = *this / b; }

  friend bool operator==(const FieldElem& a, const FieldElem& b);
  friend bool operator!=(const FieldElem& a, const FieldElem& b) { return !(a == b); }

  /// Lexicographic comparison of flat coordinate vectors (same context).
  bool lex_less(const FieldElem& b) const;

  /// Coefficients over the parent level (level >= 1), length degree().
  std::vector<FieldElem> coeffs() const;

  std::string to_string() const;

 private:
  friend class FieldCtx;
  FieldElem(FieldPtr ctx, std::vector<std::uint64_t> w) : ctx_(std::move(ctx)), w_(std::move(w)) {}

  FieldPtr ctx_;
  std::vector<std::uint64_t> w_;
};

/// True for 0 and for elements with a square root in their own field.
bool is_square(const FieldElem& a);

/// Square root in the element's own field. Odd characteristic: throws
/// NonSquareElement if none exists; of the two roots +-w the one with the
/// lexicographically smaller coordinate vector is returned. Characteristic 2:
/// the Frobenius preimage (always exists, unique).
FieldElem sqrt(const FieldElem& a);

/// Absolute trace to F_2 (characteristic 2), returned as 0 or 1.
int trace_to_f2(const FieldElem& a);

/// Solves x^2 + x = d over a characteristic-2 field; empty if trace(d) = 1.
std::optional<FieldElem> artin_schreier_root(const FieldElem& d);

}  // namespace ip1s
