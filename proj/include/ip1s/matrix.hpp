/// @file matrix.hpp
/// @brief Dense exact linear algebra over a FieldCtx.
///
/// MatrixF is a value type (row-major FieldElem entries). On top of it:
/// elimination tasks (rank, det, inverse, solve, kernel), characteristic and
/// minimal polynomials, Jordan normal form over a splitting tower, and the
/// primary rational canonical form with a base-field change of basis.
/// Everything is exact; there are no floating-point paths.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ip1s/field.hpp"
#include "ip1s/unipoly.hpp"

namespace ip1s {

class MatrixF {
 public:
  MatrixF() = default;
  MatrixF(FieldPtr ctx, int rows, int cols);  // zero-filled
  static MatrixF identity(const FieldPtr& ctx, int n);
  static MatrixF from_rows(const FieldPtr& ctx, const std::vector<std::vector<FieldElem>>& rows);
  static MatrixF from_ints(const FieldPtr& ctx, const std::vector<std::vector<std::int64_t>>& rows);
  static MatrixF random(const FieldPtr& ctx, int rows, int cols, Rng& rng);
  static MatrixF random_invertible(const FieldPtr& ctx, int n, Rng& rng);

  const FieldPtr& ctx() const { return ctx_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  bool is_square() const { return rows_ == cols_; }

  FieldElem& at(int i, int j) { return e_[(size_t)i * cols_ + j]; }
  const FieldElem& at(int i, int j) const { return e_[(size_t)i * cols_ + j]; }

  std::vector<FieldElem> row(int i) const;
  std::vector<FieldElem> col(int j) const;
  void set_col(int j, const std::vector<FieldElem>& v);

  MatrixF operator-() const;
  friend MatrixF operator+(const MatrixF& a, const MatrixF& b);
  friend MatrixF operator-(const MatrixF& a, const MatrixF& b);
  friend MatrixF operator*(const MatrixF& a, const MatrixF& b);
  MatrixF scaled(const FieldElem& c) const;
  std::vector<FieldElem> mul_vec(const std::vector<FieldElem>& v) const;
  MatrixF transpose() const;
  /// Entrywise embedding into an extension of the entry field.
  MatrixF lift(const FieldPtr& ext) const;
  /// Entrywise e-th power (used for Frobenius conjugation of basis columns).
  MatrixF entrywise_pow(const mpz_class& e) const;
  friend bool operator==(const MatrixF& a, const MatrixF& b);
  friend bool operator!=(const MatrixF& a, const MatrixF& b) { return !(a == b); }

  bool is_zero() const;
  bool is_identity() const;
  FieldElem trace() const;

  /// Text form: "rows cols" header line, then one row per line; extension
  /// entries print as nested coefficient tuples like (1,2) with no spaces.
  std::string to_text() const;
  static MatrixF parse_text(const FieldPtr& ctx, const std::string& text);

 private:
  FieldPtr ctx_;
  int rows_ = 0, cols_ = 0;
  std::vector<FieldElem> e_;
};

int rank(const MatrixF& m);
FieldElem det(const MatrixF& m);
MatrixF inverse(const MatrixF& m);  // throws SingularMatrix

/// Basis of the right null space (vectors v with m v = 0).
std::vector<std::vector<FieldElem>> kernel_basis(const MatrixF& m);

struct SolveResult {
  std::vector<FieldElem> particular;
  std::vector<std::vector<FieldElem>> kernel;
};
/// One solution of m x = b plus the kernel basis, or nullopt when inconsistent.
std::optional<SolveResult> solve(const MatrixF& m, const std::vector<FieldElem>& b);

/// Monic characteristic polynomial via Hessenberg reduction.
UniPoly charpoly(const MatrixF& m);
/// Minimal polynomial (lcm of local annihilators of the standard basis).
UniPoly minpoly(const MatrixF& m);
/// p(m) by Horner.
MatrixF eval_poly_at(const UniPoly& p, const MatrixF& m);

struct JordanBlock {
  FieldElem eigenvalue;  // lives at its own tower level
  int size;
  int factor_index;      // index into the charpoly factor list
  int conjugate_index;   // Frobenius power of the adjoined root
  int field_level;       // tower level of K(eigenvalue)
};

struct JordanData {
  std::vector<JordanBlock> blocks;
  MatrixF T, T_inv;  // over the splitting tower top; T_inv * M * T = J
  FieldPtr ext;      // the tower top
  MatrixF assembled() const;
};

/// Jordan normal form over a tower extension: one tower level is adjoined per
/// irreducible charpoly factor that does not already split; the conjugate
/// eigenvalues of a factor are iterated q-th powers of the single adjoined
/// root. Blocks are ordered by (factor index, conjugate index, size
/// descending); the column block of each eigenvalue is defined over its own
/// K(eigenvalue).
JordanData jordan_form(const MatrixF& m);

struct RcfBlock {
  UniPoly poly;       // monic irreducible
  int size;           // deg(poly): size of this companion copy
  bool link_to_next;  // 1 in the bottom-left corner of the next superdiagonal block
};

struct RationalCanonicalData {
  std::vector<RcfBlock> blocks;
  MatrixF T, T_inv;  // over the base field; T_inv * M * T = assembled()
  MatrixF assembled() const;
};

/// Primary rational canonical form: block diagonal companion copies C(P) with
/// a 1 in the bottom-left corner of the superdiagonal block linking
/// consecutive copies of one elementary divisor P^k. The change of basis stays
/// over the base field. Per factor, elementary divisor exponents descend.
RationalCanonicalData rational_canonical_form(const MatrixF& m, std::uint64_t seed = 0x5eedcab1eULL);

}  // namespace ip1s
