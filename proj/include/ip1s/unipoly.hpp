/// @file unipoly.hpp
/// @brief Univariate polynomials over a FieldCtx.
///
/// Dense coefficient representation, exact arithmetic, gcds, modular
/// exponentiation and composition, Rabin irreducibility, squarefree
/// decomposition, and full factorization (seeded Cantor-Zassenhaus by default,
/// deterministic Berlekamp selectable for small fields). adjoin_root is the
/// checked way to grow a field tower.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ip1s/field.hpp"

namespace ip1s {

class UniPoly {
 public:
  UniPoly() = default;
  explicit UniPoly(FieldPtr ctx) : ctx_(std::move(ctx)) {}

  /// Coefficients low to high; trailing zeros are trimmed.
  static UniPoly from_coeffs(const FieldPtr& ctx, std::vector<FieldElem> coeffs);
  static UniPoly from_ints(const FieldPtr& ctx, const std::vector<std::int64_t>& coeffs);
  static UniPoly zero(const FieldPtr& ctx) { return UniPoly(ctx); }
  static UniPoly one(const FieldPtr& ctx);
  static UniPoly x(const FieldPtr& ctx);
  static UniPoly constant(const FieldElem& c);
  static UniPoly monomial(const FieldElem& c, std::uint64_t e);

  const FieldPtr& ctx() const { return ctx_; }
  /// Degree; -1 for the zero polynomial.
  int degree() const { return (int)c_.size() - 1; }
  bool is_zero() const { return c_.empty(); }
  bool is_one() const { return c_.size() == 1 && c_[0].is_one(); }
  bool is_monic() const { return !c_.empty() && c_.back().is_one(); }
  FieldElem coeff(std::uint64_t i) const { return i < c_.size() ? c_[i] : ctx_->zero(); }
  const FieldElem& lead() const { return c_.back(); }
  const std::vector<FieldElem>& coeffs() const { return c_; }

  UniPoly operator-() const;
  friend UniPoly operator+(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator-(const UniPoly& a, const UniPoly& b);
  friend UniPoly operator*(const UniPoly& a, const UniPoly& b);
  UniPoly scaled(const FieldElem& c) const;
  UniPoly shifted(std::uint64_t k) const;  // multiply by x^k
  friend bool operator==(const UniPoly& a, const UniPoly& b);
  friend bool operator!=(const UniPoly& a, const UniPoly& b) { return !(a == b); }

  /// Quotient and remainder; divisor must be nonzero.
  std::pair<UniPoly, UniPoly> divmod(const UniPoly& d) const;
  UniPoly operator/(const UniPoly& d) const { return divmod(d).first; }
  UniPoly operator%(const UniPoly& d) const { return divmod(d).second; }

  UniPoly make_monic() const;
  UniPoly derivative() const;
  FieldElem eval(const FieldElem& x) const;
  /// Coefficient-wise lift into an extension of the coefficient field.
  UniPoly lift(const FieldPtr& ext) const;

  std::string to_string(const std::string& var = "x") const;

 private:
  void trim();
  FieldPtr ctx_;
  std::vector<FieldElem> c_;
};

UniPoly gcd_poly(const UniPoly& a, const UniPoly& b);  // monic gcd
/// g = gcd, plus u, v with u*a + v*b = g.
void ext_gcd_poly(const UniPoly& a, const UniPoly& b, UniPoly& g, UniPoly& u, UniPoly& v);
UniPoly mul_mod(const UniPoly& a, const UniPoly& b, const UniPoly& mod);
UniPoly pow_mod(const UniPoly& a, const mpz_class& e, const UniPoly& mod);
/// f(g) mod h by Horner.
UniPoly compose_mod(const UniPoly& f, const UniPoly& g, const UniPoly& h);
/// x^(q^k) mod f where q is the order of the coefficient field.
UniPoly frobenius_power_x(const UniPoly& f, std::uint64_t k = 1);

bool is_irreducible(const UniPoly& f);

struct FactorPiece {
  UniPoly factor;  // monic irreducible
  int multiplicity;
};

enum class FactorAlgo { CantorZassenhaus, Berlekamp };

inline constexpr std::uint64_t kDefaultFactorSeed = 0x1b1f5a1e5ULL;

/// Monic irreducible factors with multiplicities, deterministically ordered
/// (degree, then coefficient enumeration indices). The leading coefficient of
/// f is discarded; f must be nonzero.
std::vector<FactorPiece> factor_univariate(const UniPoly& f, std::uint64_t seed = kDefaultFactorSeed,
                                           FactorAlgo algo = FactorAlgo::CantorZassenhaus);

/// Distinct roots of f in its own coefficient field.
std::vector<FieldElem> roots_in_field(const UniPoly& f, std::uint64_t seed = kDefaultFactorSeed);

/// Product of the distinct irreducible factors.
UniPoly squarefree_part(const UniPoly& f);

/// Checked tower growth: minpoly must be monic irreducible of degree >= 2.
FieldPtr adjoin_root(const UniPoly& minpoly, const TowerLimits& limits = {});

/// Uniformly sampled monic irreducible of the exact degree (rejection
/// sampling; expected degree-many draws).
UniPoly random_irreducible(const FieldPtr& ctx, int degree, Rng& rng);

}  // namespace ip1s
