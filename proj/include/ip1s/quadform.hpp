/// @file quadform.hpp
/// @brief Quadratic polynomial systems and their canonicalization.
///
/// A system is a list of m quadratic polynomials in n variables over a common
/// field, each stored as an upper-triangular coefficient matrix plus optional
/// affine parts. The operations here prepare a pair of systems for the
/// isomorphism solver: homogenization, reduction to essential variables,
/// a nondegenerate linear recombination, and the diagonal (odd
/// characteristic) or hyperbolic/elliptic (characteristic 2) normal form of
/// the leading form.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ip1s/field.hpp"
#include "ip1s/matrix.hpp"
#include "ip1s/rng.hpp"
#include "ip1s/unipoly.hpp"

namespace ip1s {

using Vec = std::vector<FieldElem>;

/// m quadratic polynomials in n variables: f_i = x^T H_i x + L_i x + c_i,
/// with H_i upper triangular (entry (i,j), i <= j, is the coefficient of
/// x_i x_j). A system constructed without affine parts is homogeneous.
class QuadSystem {
 public:
  QuadSystem() = default;
  QuadSystem(FieldPtr ctx, std::uint64_t n, std::vector<MatrixF> mats);
  QuadSystem(FieldPtr ctx, std::uint64_t n, std::vector<MatrixF> mats,
             std::vector<Vec> linear, std::vector<FieldElem> consts);

  static QuadSystem zero(const FieldPtr& ctx, std::uint64_t n, std::uint64_t m);
  static QuadSystem random_homogeneous(const FieldPtr& ctx, std::uint64_t n, std::uint64_t m,
                                       Rng& rng);

  const FieldPtr& ctx() const { return ctx_; }
  std::uint64_t n() const { return n_; }
  std::uint64_t m() const { return mats_.size(); }
  bool homogeneous() const { return homogeneous_; }
  const MatrixF& mat(std::uint64_t i) const { return mats_.at(i); }
  MatrixF& mat(std::uint64_t i) { return mats_.at(i); }
  const Vec& linear(std::uint64_t i) const { return linear_.at(i); }
  const FieldElem& constant(std::uint64_t i) const { return consts_.at(i); }

  FieldElem evaluate_one(std::uint64_t i, const Vec& point) const;
  Vec evaluate(const Vec& point) const;

  /// f(Ax) re-expressed in upper-triangular convention.
  QuadSystem substitute(const MatrixF& a) const;
  /// f(Ax + b); the general affine change of variables.
  QuadSystem substitute_affine(const MatrixF& a, const Vec& b) const;

  /// Single-polynomial slice, or the first s variables of every polynomial
  /// (requires all coefficients outside the leading block to vanish).
  QuadSystem poly_slice(std::uint64_t i) const;
  QuadSystem restrict_vars(std::uint64_t s) const;
  /// Pad with extra zero-coefficient variables at the end.
  QuadSystem pad_vars(std::uint64_t n_total) const;

  bool operator==(const QuadSystem& other) const;
  bool operator!=(const QuadSystem& other) const { return !(*this == other); }

  std::string to_text() const;

 private:
  FieldPtr ctx_;
  std::uint64_t n_ = 0;
  std::vector<MatrixF> mats_;
  std::vector<Vec> linear_;
  std::vector<FieldElem> consts_;
  bool homogeneous_ = true;
};

/// Symmetrized coefficient matrix of polynomial i. Odd characteristic:
/// H + H^T, the true matrix of second partials, so x^T(.)x = 2 f_i.
/// Characteristic 2: the alternating matrix H + H^T (zero diagonal).
MatrixF hessian(const QuadSystem& sys, std::uint64_t i);

/// Diagonal part of the coefficient matrix as a diagonal matrix. In
/// characteristic 2 this carries the square terms that the symmetrized
/// matrix cannot see.
MatrixF delta_diag(const QuadSystem& sys, std::uint64_t i);

/// Homogenize a pair of affine systems: one extra variable x_0 (index 0), a
/// guard polynomial x_0^2 prepended to both sides. Solutions of the affine
/// problem x -> Ax + b correspond to block matrices [[1,0],[b,A]] for the
/// homogenized pair.
std::pair<QuadSystem, QuadSystem> homogenize(const QuadSystem& f, const QuadSystem& g);
QuadSystem homogenize_one(const QuadSystem& f);
/// Inverse of homogenize_one; requires polynomial 0 to be x_0^2.
QuadSystem dehomogenize_one(const QuadSystem& fstar);

/// Change of variables exposing the essential variables: s is minimal with
/// an invertible M such that sys(Mx) involves only x_1..x_s. Valid in odd
/// characteristic and over any finite field of characteristic 2.
struct EssentialReduction {
  std::uint64_t s = 0;
  MatrixF M;
  QuadSystem reduced;  // s-variable system with sys(Mx) = reduced (padded)
};
EssentialReduction essential_reduce(const QuadSystem& sys);

/// Search for lambda with det(sum lambda_i hessian(f_i)) != 0, applied to
/// both systems of a candidate-equivalent pair.
enum class ComboStatus {
  Found,             // lambda works for both sides
  GSideSingular,     // lambda regular for f but not g: the pair cannot be equivalent
  Irregular,         // certified by exhaustive search: no lambda works for f
  ProbablyIrregular  // sampling budget exhausted, field too big to certify
};
struct RegularCombo {
  ComboStatus status = ComboStatus::ProbablyIrregular;
  std::vector<FieldElem> lambda;
  std::uint64_t pivot = 0;  // smallest index with lambda_pivot != 0
};
RegularCombo regular_combination(const QuadSystem& f, const QuadSystem& g,
                                 std::uint64_t seed = 0x5eedc0235ULL);

/// Gauss congruence reduction of a symmetric invertible matrix in odd
/// characteristic: P^T phi P = D diagonal, every entry 1 or the canonical
/// nonsquare. Throws DegenerateForm (SingularMatrix) if phi is singular.
struct DiagReduction {
  MatrixF D, P;
};
DiagReduction gauss_reduce(const MatrixF& phi);

/// Post-pass on a diagonal reduction: pairs of nonsquare entries merge into
/// pairs of ones, and a single leftover nonsquare moves to the last slot, so
/// D = diag(1,...,1) or diag(1,...,1,s).
void collapse_nonsquares(DiagReduction& red);

/// Characteristic-2 normal form of a single nondegenerate form in an even
/// number of variables: phi(Px) is x1x2 + x3x4 + ... (hyperbolic) or the
/// same plus x_{n-1}^2 + d x_n^2 with tr(d) = 1 (elliptic). delta is the
/// upper-triangular coefficient matrix of the normal form.
enum class Char2Type { Hyperbolic, Elliptic };
struct Char2Canon {
  MatrixF delta, P;
  Char2Type type = Char2Type::Hyperbolic;
  FieldElem d;  // trace-one constant of the elliptic block, if any
};
Char2Canon canonical_char2(const MatrixF& upper_tri_form);
/// The canonical trace-one element used for elliptic blocks (first in
/// enumeration order with absolute trace 1).
FieldElem canonical_trace_one(const FieldPtr& ctx);

/// A pair of systems after canonicalization of the leading forms. The first
/// matrix of both lists is the same D; P and Q record f(Px), g(Qx).
struct CanonicalInstance {
  FieldPtr ctx;
  MatrixF D;
  /// Both sides' matrices after the pivot combination was moved to slot 0 and
  /// both leading forms were reduced to the same D. Odd characteristic: the
  /// symmetric matrices S with x^T S x = f_i (so hs[0] == hs2[0] == D).
  /// Characteristic 2: upper-triangular coefficient matrices.
  std::vector<MatrixF> hs, hs2;
  MatrixF P, Q;                   // original sides evaluated at Px resp. Qx
  std::vector<FieldElem> shifts;  // nu_i with H_i replaced by H_i - nu_i H_1
  Char2Type type = Char2Type::Hyperbolic;
  std::vector<FieldElem> lambda;  // regular combination that produced slot 0
  std::uint64_t pivot = 0;        // index folded away by the recombination
  bool homogenized = false;       // solutions carry a forced affine shape
};

/// Replace H_i by H_i - nu_i H_1 (same nu on both sides) until every stored
/// matrix is invertible, odd characteristic meaning the Hessian view and
/// characteristic 2 the symmetrized view. Throws FieldTooSmall if some index
/// admits no such shift.
void shift_invertible(CanonicalInstance& inst);

/// Instance file format: header "IP1S v1", field spec, "n=.. m=..", then the
/// m upper-triangular matrices of f, a separator, and the m matrices of g.
std::string write_instance(const QuadSystem& f, const QuadSystem& g);
std::pair<QuadSystem, QuadSystem> parse_instance(const std::string& text);

}  // namespace ip1s
