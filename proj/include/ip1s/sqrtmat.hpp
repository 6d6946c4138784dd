#pragma once

#include <optional>
#include <vector>

#include "ip1s/matrix.hpp"
#include "ip1s/unipoly.hpp"

namespace ip1s {

/// Exact square root of a matrix over a finite field, possibly defined over a
/// tower extension of the input field.
struct SqrtResult {
  MatrixF W;  // W * W equals the input lifted to W's field
  /// Polynomial Q with Q(Z) = W. Always present in odd characteristic; in
  /// characteristic 2 only when Z is diagonalizable (and then Q stays over the
  /// base field).
  std::optional<UniPoly> as_polynomial;
  int field_level = 0;  // tower level of W's coefficient field
};

/// Square root of the d x d Jordan block with eigenvalue zeta, odd
/// characteristic. The result is upper triangular Toeplitz over K(omega),
/// omega the canonical (lex-least) square root of zeta. The truncated binomial
/// series needs invertible factorials, so d must not exceed the
/// characteristic (BlockTooLarge otherwise); zeta = 0 is rejected
/// (ZeroEigenvalue).
MatrixF sqrt_jordan_block(const FieldElem& zeta, int d);

/// Same Toeplitz construction with a caller-chosen root: omega must satisfy
/// omega^2 = zeta (in omega's field, into which zeta is embedded). Lets the
/// caller pin one branch per eigenvalue across several blocks.
MatrixF jordan_block_root(const FieldElem& omega, const FieldElem& zeta, int d);

/// Square root of an invertible matrix in odd characteristic via its Jordan
/// form: per-eigenvalue truncated series glued by CRT into a single
/// polynomial Q with Q(Z) = W. Equal eigenvalues always receive the same root
/// determination. Throws SingularMatrix on singular input.
SqrtResult sqrt_poly(const MatrixF& z);

/// Square root data for a companion matrix C(P), P monic irreducible over
/// F_q with q odd and P(0) != 0. Q is monic of the same degree and satisfies
/// (-1)^deg(P) Q(z) Q(-z) = P(z^2), which makes C(Q)^2 similar to C(P).
struct CompanionSqrt {
  UniPoly Q;        // over the input field, or over the quadratic tower below
  bool base_field;  // true when the root of P is a square in F_q[x]/(P)
  /// When base_field is false, the coefficient of z^(deg P - j) in Q equals
  /// resid[j] evaluated at a root x of P, times y for odd j where y^2 = x.
  /// The resid entries are residues mod P over the input field, so Q can be
  /// rebuilt over any field containing such a pair (x, y).
  std::vector<UniPoly> resid;
  int field_level = 0;
};
CompanionSqrt sqrt_companion(const UniPoly& p);

enum class SqrtBackend { Jordan, Companion };

/// Facade over the two odd-characteristic backends. The Jordan backend falls
/// back to the companion one when a Jordan block is at least as large as the
/// characteristic (where the binomial series breaks down). Both backends
/// produce a W with W*W = Z and a polynomial representation Q(Z) = W.
SqrtResult sqrt_matrix(const MatrixF& z, SqrtBackend backend = SqrtBackend::Jordan);

/// Characteristic-2 square root verdict. A root exists iff the Jordan blocks
/// of each eigenvalue can be paired so that paired sizes differ by at most
/// one, blocks of size 1 being free to stay single. When no root exists,
/// `violations` lists the block size multisets (one per offending eigenvalue)
/// that cannot be paired.
struct Char2Sqrt {
  std::optional<SqrtResult> value;  // engaged iff a square root exists
  std::vector<std::vector<int>> violations;
  bool exists() const { return value.has_value(); }
};

/// Square root in characteristic 2. Diagonalizable inputs get a base-field
/// polynomial W = Q(Z) built from coefficient-wise square roots of the
/// minimal polynomial factors. Non-diagonalizable square roots form
/// positive-dimensional families; this routine returns the canonical member
/// obtained by conjugating one larger Jordan block of sqrt(eigenvalue) with
/// the even/odd basis interleaving, and as_polynomial stays empty.
Char2Sqrt sqrt_char2(const MatrixF& z);

}  // namespace ip1s
