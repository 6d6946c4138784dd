/// @file counting.hpp
/// @brief Solution counts for quadratic-system self-equivalence: an exact
/// upper bound from Jordan data of the joined pencil, plus small exhaustive
/// counters used as oracles.
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <gmpxx.h>

#include "ip1s/quadform.hpp"

namespace ip1s {

struct CountBound {
  /// Dimension of the space containing every solution, computed from the
  /// Jordan block sizes of the pencil matrix.
  std::uint64_t dim = 0;
  /// q^dim - 1 with q the order of the input field.
  mpz_class bound;
  /// One entry per distinct eigenvalue: its printable form and the block
  /// sizes in ascending order.
  std::vector<std::pair<std::string, std::vector<int>>> jordan_summary;
  /// Degree of the extension joining the forms into one pencil (m, or 1 when
  /// there is a single form).
  std::uint64_t alpha_degree = 1;
  /// In characteristic 2 the bound is reported but rests on the symmetrized
  /// matrices only, which ignore the square terms.
  bool heuristic_even_char = false;
};

/// Bound on the number of invertible A with f(Ax) = f(x). The first form's
/// matrix must be invertible (DegenerateForm otherwise); with m > 1 forms
/// the pencil H_1 + a H_2 + ... + a^{m-1} H_m is read over a degree-m
/// extension K(a).
CountBound count_bound(const QuadSystem& f);

/// Centralizer dimension predicted by the Jordan block sizes of h.
std::uint64_t jordan_centralizer_dim(const MatrixF& h);

/// Centralizer dimension measured directly as the kernel of X -> hX - Xh.
std::uint64_t commutant_dimension(const MatrixF& h);

/// Count invertible matrices commuting with h by full enumeration. With
/// restrict_to_base the candidates range over the parent of h's field.
/// Throws TooLarge when the candidate count exceeds 2^24.
std::uint64_t brute_force_centralizer(const MatrixF& h, bool restrict_to_base);

struct BruteForceResult {
  bool equivalent = false;
  std::uint64_t count = 0;         // invertible A with f(Ax) = g(x)
  std::vector<MatrixF> witnesses;  // up to witness_cap of them
};

/// Enumerate every matrix over the systems' field and compare f(Ax) with g
/// exactly; homogeneous systems only. stop_at_first returns at the first
/// witness. Odd prime fields below 2^16 take a machine-word path. Throws
/// TooLarge when q^(n^2) exceeds 2^24.
BruteForceResult brute_force_equivalence(const QuadSystem& f, const QuadSystem& g,
                                         std::uint64_t witness_cap = 16,
                                         bool stop_at_first = false);

}  // namespace ip1s
