/// @file ippow.hpp
/// @brief Equivalence of a polynomial system to the power system
/// (x_1^d, ..., x_n^d).
///
/// Solves g = B * POW_{n,d}(A x) for invertible A and B. The Jacobian
/// determinant of such a g is a scalar times the product of the rows of A,
/// read as linear forms, each raised to the power d-1; factoring it through
/// random line restrictions recovers A, and B follows by linear algebra.
/// When the characteristic p divides d, the instance first descends through
/// d = p^r e and the substitution x -> x^{p^r}.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ip1s/errors.hpp"
#include "ip1s/field.hpp"
#include "ip1s/matrix.hpp"
#include "ip1s/rng.hpp"
#include "ip1s/unipoly.hpp"

namespace ip1s {

/// Multivariate polynomial with every nonzero monomial stored explicitly as
/// exponent vector -> coefficient. Exact arithmetic, sized for a handful of
/// variables and small degrees; the map is ordered lexicographically, which
/// is also the monomial order used by exact division.
class DensePoly {
 public:
  using Exps = std::vector<std::uint32_t>;

  DensePoly() = default;
  DensePoly(FieldPtr ctx, int nvars) : ctx_(std::move(ctx)), nvars_(nvars) {}

  static DensePoly constant(const FieldPtr& ctx, int nvars, const FieldElem& c);
  static DensePoly variable(const FieldPtr& ctx, int nvars, int j);
  static DensePoly monomial(const FieldPtr& ctx, int nvars, Exps e, const FieldElem& c);
  /// sum_j coeffs[j] * x_j in coeffs.size() variables.
  static DensePoly linear_form(const FieldPtr& ctx, const std::vector<FieldElem>& coeffs);

  const FieldPtr& ctx() const { return ctx_; }
  int nvars() const { return nvars_; }
  const std::map<Exps, FieldElem>& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  /// -1 for the zero polynomial.
  int total_degree() const;
  /// Every monomial has the same total degree (vacuously true for zero).
  bool is_homogeneous() const;
  FieldElem coeff(const Exps& e) const;

  DensePoly operator-() const;
  friend DensePoly operator+(const DensePoly& a, const DensePoly& b);
  friend DensePoly operator-(const DensePoly& a, const DensePoly& b);
  friend DensePoly operator*(const DensePoly& a, const DensePoly& b);
  DensePoly scaled(const FieldElem& c) const;
  DensePoly pow(std::uint64_t k) const;
  friend bool operator==(const DensePoly& a, const DensePoly& b);
  friend bool operator!=(const DensePoly& a, const DensePoly& b) { return !(a == b); }

  DensePoly partial(int j) const;
  FieldElem eval(const std::vector<FieldElem>& point) const;
  /// Univariate restriction t -> value at u + t*w.
  UniPoly restrict_line(const std::vector<FieldElem>& u, const std::vector<FieldElem>& w) const;
  /// Substitution x_j -> sum_k A[j][k] x_k (A square, one row per variable).
  DensePoly compose_linear(const MatrixF& a) const;
  /// Exact quotient, or nullopt when division leaves a remainder.
  std::optional<DensePoly> divided_by(const DensePoly& divisor) const;
  /// Substitute x_j -> x_j^k for every j.
  DensePoly inflate(std::uint64_t k) const;
  /// Inverse of inflate(p) combined with the coefficient Frobenius: the h
  /// with h^p == *this, or nullopt when some exponent is not a multiple of
  /// the characteristic.
  std::optional<DensePoly> pth_root() const;

  /// Space-separated "(e_1,...,e_n):coefficient" entries; "0" when zero.
  std::string to_string() const;
  static DensePoly parse(const FieldPtr& ctx, int nvars, const std::string& text);

 private:
  void add_term(const Exps& e, const FieldElem& c);
  FieldPtr ctx_;
  int nvars_ = 0;
  std::map<Exps, FieldElem> terms_;
};

/// A list of polynomials in a common variable set with a shared degree
/// bound. `homogeneous` is set when every member is nonzero and homogeneous
/// of degree exactly d.
struct DensePolySystem {
  FieldPtr ctx;
  int n = 0;  // number of variables
  int d = 0;  // degree bound
  bool homogeneous = false;
  std::vector<DensePoly> polys;

  static DensePolySystem make(const FieldPtr& ctx, int n, int d, std::vector<DensePoly> polys);

  /// Field spec line, "n=<int>" line, then one line per polynomial.
  std::string to_text() const;
  static DensePolySystem parse_text(const std::string& text);
};

/// Symbolic determinant of the Jacobian matrix (d g_i / d x_j), computed by
/// minor expansion with column-subset memoization. Needs as many polynomials
/// as variables; inputs whose dense result size estimate exceeds 2^20
/// monomials are rejected with TooLarge.
DensePoly jacobian_det(const DensePolySystem& g);

struct DescentResult {
  DensePolySystem reduced;  // g~ with g(x) = g~(x^{p^r})
  int r = 0;
  int e = 0;  // g.d = p^r * e with e prime to p
};

/// Splits the degree bound as d = p^r e (p the characteristic, e prime to p)
/// and removes the factor p^r from every exponent, so that the reduced
/// system satisfies g(x) = reduced(x^{p^r}). Throws NotAPthPower when some
/// exponent is not divisible by p^r, which proves that no B * POW_{n,d}(A x)
/// can equal g.
DescentResult frobenius_descent(const DensePolySystem& g);

struct ExtractedForms {
  FieldElem c;   // delta == c * prod_i (form_i)^(e-1)
  MatrixF rows;  // n x n; row i holds the coefficients of the i-th form,
                 // scaled so its first nonzero entry is 1
};

/// Factors a homogeneous polynomial of degree n(e-1) as a scalar times a
/// product of n pairwise independent linear forms, each to the power e-1.
/// Restriction to a random line locates the forms (roots of the univariate
/// image; coefficient ratios of the restricted partial derivatives lift each
/// root back to its hyperplane) and an exact division certifies the result,
/// so a returned value is always correct. |K| > 4ne makes a random line good
/// with high probability; 16 lines are tried. Throws NotAProduct when a
/// full-degree restriction refutes the product shape, UnluckyRestriction
/// when every sampled line was degenerate.
ExtractedForms extract_linear_factors(const DensePoly& delta, int n, int e,
                                      std::uint64_t seed = 0x90f7a11eULL);

struct PowSolution {
  MatrixF A, B;         // both invertible; B * POW_{n,d}(A x) equals the input
  std::uint64_t p = 0;  // field characteristic
  int r = 0, e = 0;     // d = p^r * e with e prime to p
};

/// B * ((l_1 x)^d, ..., (l_n x)^d)^T for l_i the rows of A: the image of the
/// power system under (A, B). Used to plant instances and to verify answers.
DensePolySystem pow_compose(const MatrixF& A, const MatrixF& B, int d);

/// Exact check of B * POW_{n,d}(A x) == g plus invertibility of A and B.
bool verify_pow(const PowSolution& sol, const DensePolySystem& g, int d);

/// Decides g = B * POW_{n,d}(A x) and recovers (A, B) over the base field.
/// The rows of A are normalized (first nonzero coefficient 1) with the
/// compensating factors absorbed into B; any representative passing the
/// exact final identity is acceptable, the solution set being stable under
/// d-th-root-of-unity scalings and coordinated permutations. nullopt means
/// no solution: descent impossible, the Jacobian determinant zero or not a
/// product of the required shape, a rank defect in A or the B system, or
/// the final check failing.
std::optional<PowSolution> solve_pow(const DensePolySystem& g, int d, std::uint64_t seed);

}  // namespace ip1s
