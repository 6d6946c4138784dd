/// @file ip1s.hpp
/// @brief Exact equivalence of quadratic polynomial systems under a linear
/// (or affine, after homogenization) change of variables.
///
/// The pipeline: canonicalize a candidate pair into a shared leading form D,
/// compute the linear space of matrices intertwining the two reduced systems,
/// sample an invertible member, and turn it into a D-orthogonal solution with
/// an exact matrix square root. Every returned solution is verified against
/// the inputs; "no solution" answers are certified whenever the relevant
/// search space was small enough to enumerate.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ip1s/quadform.hpp"

namespace ip1s {

/// Basis of the linear space of matrices Y with K_i Y = Y K'_i for every
/// nontrivial pair of reduced coefficient matrices. Solutions of the
/// canonical problem are exactly the D-orthogonal invertible members.
struct ConjugacySpaceBasis {
  FieldPtr ctx;
  std::vector<MatrixF> basis;
  std::uint64_t dim() const { return basis.size(); }
};

/// A change of variables A with f(Ax) = g(x), possibly over a tower
/// extension of the input field. Factored solutions keep A = S * T^{-1}
/// unexpanded; they arise when the square-root stage determined roots at
/// mismatched tower levels. For inhomogeneous inputs A acts on the
/// homogenized space: first row (1, 0, ..., 0), first column (1, b), and
/// x -> Cx + b with the lower right block C solves the affine problem.
struct SolutionRepr {
  enum class Mode { Assembled, Factored };
  Mode mode = Mode::Assembled;
  MatrixF A;
  MatrixF S, T;
  /// Tower levels above the input field (0 means the solution is rational
  /// over the field the systems were given in).
  int field_level = 0;

  // provenance of the canonical reduction that produced the solution
  MatrixF P, Q;
  std::vector<FieldElem> lambda, nu;

  /// The solution as one matrix (computes S * T^{-1} for factored mode).
  MatrixF matrix() const;
};

enum class Verdict { Solved, NoSolution, Irregular };

/// Result of the reduction to a canonical pair. Solved means the instance
/// was produced; the other verdicts end the computation early (mismatched
/// invariants prove inequivalence, Irregular means no invertible combination
/// of the forms exists or none was found within the sampling budget).
struct CanonicalizeOutcome {
  Verdict verdict = Verdict::NoSolution;
  std::optional<CanonicalInstance> instance;
  std::string reason;
};

struct SolveOptions {
  /// Allow sampling an invertible intertwiner over a small extension when
  /// none was found over the input field. This gates the sampling stage
  /// only; the square-root stage may place a witness in an extension either
  /// way, reported through field_level.
  bool allow_extension = false;
  /// Candidate draws in the characteristic-2 loop before giving up.
  int resample_budget = 64;
};

struct SolveOutcome {
  Verdict verdict = Verdict::NoSolution;
  std::optional<SolutionRepr> solution;
  std::string reason;
};

/// Reduce a pair of systems to a canonical instance: homogenize if either
/// side is inhomogeneous, strip non-essential variables, pick a combination
/// of the forms with invertible matrix on both sides, reduce that leading
/// form to the canonical diagonal (odd characteristic) or hyperbolic or
/// elliptic normal form (characteristic 2), and shift the remaining forms so
/// all stored matrices are invertible. Throws FieldTooSmall if no shift
/// exists and ShapeMismatch on incompatible inputs.
CanonicalizeOutcome canonicalize(const QuadSystem& f, const QuadSystem& g, std::uint64_t seed);

/// Solution space of the simultaneous conjugacy equations of a canonical
/// instance. Uses a cyclic-module fast path when the first pair of reduced
/// matrices is nonderogatory and dense kernels otherwise.
ConjugacySpaceBasis conjugacy_space(const CanonicalInstance& inst);

/// An invertible member of the span, or nullopt if none was found. Spans
/// with at most 4096 members are enumerated exhaustively, so a nullopt is a
/// certificate there; larger spans get 64 seeded draws. With allow_extension
/// the search is retried over an extension big enough for random draws to
/// hit the invertible locus with good probability.
std::optional<MatrixF> sample_invertible(const ConjugacySpaceBasis& space, std::uint64_t seed,
                                         bool allow_extension = true);

/// Turn an invertible intertwiner into a D-orthogonal one (odd
/// characteristic): W^2 = D^{-1} Y^T D Y with W polynomial in its argument,
/// and A = Y W^{-1} solves the canonical instance. The result is assembled
/// into a single matrix when all square roots were determined at one tower
/// level and returned factored otherwise.
SolutionRepr orthogonalize(const MatrixF& y, const CanonicalInstance& inst);

/// Exact check of a candidate against the canonical instance: invertible,
/// and congruent-transports every stored matrix of the f side onto the g
/// side (including the leading form D).
bool verify(const SolutionRepr& sol, const CanonicalInstance& inst);

/// Full solver: canonicalize, then dispatch on the characteristic. Returned
/// solutions are verified exactly against f and g before being reported.
/// Witnesses may live over a small tower extension (field_level > 0); a
/// base-field witness is preferred and searched for exhaustively when the
/// intertwiner span is small enough to enumerate, so on such instances
/// field_level == 0 if and only if the systems are equivalent over their own
/// field.
SolveOutcome solve(const QuadSystem& f, const QuadSystem& g, std::uint64_t seed,
                   const SolveOptions& opts = {});

/// Characteristic-2 core loop: sample intertwiners until one has a
/// diagonalizable symmetrized product, take its polynomial square root, and
/// accept only candidates matching the diagonal (square-term) data of every
/// form. Throws LoopBudgetExceeded when the budget runs out without either a
/// solution or an exhaustive certificate.
SolveOutcome solve_char2(const QuadSystem& f, const QuadSystem& g, std::uint64_t seed,
                         const SolveOptions& opts = {});

/// Direct solver for generic inputs (odd characteristic, homogeneous, first
/// form invertible, joint intertwiner space of dimension one). Skips
/// canonicalization entirely: the unique candidate ray is scaled to match
/// the first form, adjoining a square root when the scaling factor is a
/// nonsquare (field_level 1 then certifies there is no solution over the
/// input field itself). Throws GenericityFailure when the space does not
/// collapse to dimension one and DegenerateForm when a first form is
/// singular.
SolveOutcome solve_generic(const QuadSystem& f, const QuadSystem& g, std::uint64_t seed);

/// Does f(Ax) = g(x) hold exactly? Accepts a over extensions of the systems'
/// field. For inhomogeneous systems a may be the homogenized-space matrix
/// (first row (1,0,...,0)), which is checked as the affine map it encodes.
bool check_equivalence(const QuadSystem& f, const QuadSystem& g, const MatrixF& a);

/// Basis of {Y : m Y = Y m2}. Nonderogatory inputs take a cyclic-module
/// path whose cost is a handful of matrix products; otherwise the dense
/// n^2 x n^2 kernel is computed (bit-packed over F_2, machine words over
/// other prime fields, generic arithmetic over extensions).
std::vector<MatrixF> intertwiner_basis(const MatrixF& m, const MatrixF& m2);

}  // namespace ip1s
