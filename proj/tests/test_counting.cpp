#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ip1s/counting.hpp"
#include "ip1s/ip1s.hpp"

using namespace ip1s;

namespace {

FieldPtr f3() { return FieldCtx::prime_field(3); }

FieldPtr f9() {
  auto base = f3();
  return FieldCtx::extension_unchecked(base, {base->one(), base->zero()});
}

QuadSystem sys(const FieldPtr& ctx, const std::vector<std::vector<std::vector<std::int64_t>>>& forms) {
  std::vector<MatrixF> mats;
  for (const auto& rows : forms) mats.push_back(MatrixF::from_ints(ctx, rows));
  return QuadSystem(ctx, (std::uint64_t)forms.at(0).size(), std::move(mats));
}

}  // namespace

TEST_CASE("centralizer counts of scalar matrices are full linear groups") {
  auto F = f3();
  // |GL_2(F_3)| = (9-1)(9-3)
  CHECK(brute_force_centralizer(MatrixF::identity(F, 2), false) == 48);

  auto E = f9();
  CHECK(brute_force_centralizer(MatrixF::identity(E, 2), true) == 48);
  CHECK(brute_force_centralizer(MatrixF::identity(E, 2), false) == 5760);  // (81-1)(81-9)
}

TEST_CASE("jordan block data predicts commutant dimensions") {
  auto F = f3();

  MatrixF split = MatrixF::from_ints(F, {{1, 0}, {0, 2}});
  CHECK(jordan_centralizer_dim(split) == 2);
  CHECK(commutant_dimension(split) == 2);
  CHECK(brute_force_centralizer(split, false) == 4);  // invertible diagonals

  MatrixF jblock = MatrixF::from_ints(F, {{1, 1}, {0, 1}});
  CHECK(jordan_centralizer_dim(jblock) == 2);
  CHECK(commutant_dimension(jblock) == 2);
  CHECK(brute_force_centralizer(jblock, false) == 6);  // aI + bN, a != 0

  // same eigenvalue, block sizes 1 and 2: 3*1 + 1*2
  MatrixF mixed = MatrixF::from_ints(F, {{1, 0, 0}, {0, 1, 1}, {0, 0, 1}});
  CHECK(jordan_centralizer_dim(mixed) == 5);
  CHECK(commutant_dimension(mixed) == 5);
  std::uint64_t bf = brute_force_centralizer(mixed, false);
  CHECK(bf >= 1);
  CHECK(mpz_class(bf) <= mpz_class(3) * 3 * 3 * 3 * 3 - 1);
}

TEST_CASE("jordan and kernel commutant dimensions agree on random matrices") {
  auto E = f9();
  Rng rng(913);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 2 + trial % 2;
    MatrixF h = MatrixF::random(E, n, n, rng);
    CHECK(jordan_centralizer_dim(h) == commutant_dimension(h));
  }
}

TEST_CASE("automorphism bound is tight for a single square") {
  auto F = f3();
  QuadSystem f = sys(F, {{{1}}});
  CountBound cb = count_bound(f);
  CHECK(cb.dim == 1);
  CHECK(cb.bound == 2);
  CHECK(cb.alpha_degree == 1);
  CHECK(!cb.heuristic_even_char);

  auto bf = brute_force_equivalence(f, f);
  CHECK(bf.equivalent);
  CHECK(bf.count == 2);  // x -> x and x -> -x

  QuadSystem scaled = sys(F, {{{2}}});
  CHECK(!brute_force_equivalence(f, scaled).equivalent);
}

TEST_CASE("sum of two squares over F_3 has the elliptic orthogonal group") {
  auto F = f3();
  QuadSystem f = sys(F, {{{1, 0}, {0, 1}}});
  CountBound cb = count_bound(f);
  CHECK(cb.dim == 4);
  CHECK(cb.bound == 80);

  auto bf = brute_force_equivalence(f, f, 80);
  CHECK(bf.count == 8);  // 2(q+1): the form is the norm of F_9
  for (const auto& w : bf.witnesses) CHECK(check_equivalence(f, f, w));
}

TEST_CASE("two-form pencils join over a quadratic extension") {
  auto F = FieldCtx::prime_field(5);
  QuadSystem f = sys(F, {{{1, 0}, {0, 1}}, {{0, 1}, {0, 0}}});
  CountBound cb = count_bound(f);
  CHECK(cb.alpha_degree == 2);
  CHECK(cb.dim == 2);  // distinct eigenvalues 1 +- alpha/2
  CHECK(cb.bound == 24);
  CHECK(cb.jordan_summary.size() == 2);

  auto bf = brute_force_equivalence(f, f, 8);
  CHECK(bf.count == 4);  // +-identity and +-swap
  CHECK(mpz_class(bf.count) <= cb.bound);
}

TEST_CASE("self-equivalence counts respect the bound on random regular forms") {
  Rng rng(2718);
  for (std::uint64_t q : {3, 5}) {
    auto F = FieldCtx::prime_field(q);
    for (int trial = 0; trial < 12; ++trial) {
      std::uint64_t m = 1 + trial % 2;
      QuadSystem f = QuadSystem::random_homogeneous(F, 2, m, rng);
      if (det(hessian(f, 0)).is_zero()) continue;
      CountBound cb = count_bound(f);
      auto bf = brute_force_equivalence(f, f, 2);
      CHECK(bf.count >= 2);  // the identity and its negative always work
      CHECK(mpz_class(bf.count) <= cb.bound);
    }
  }
}

TEST_CASE("characteristic-2 bounds are marked heuristic") {
  auto B = FieldCtx::prime_field(2);
  QuadSystem f = sys(B, {{{0, 1}, {0, 0}}});
  CountBound cb = count_bound(f);
  CHECK(cb.heuristic_even_char);
  CHECK(cb.dim == 4);
  CHECK(cb.bound == 15);
  auto bf = brute_force_equivalence(f, f);
  CHECK(bf.count == 2);  // identity and swap preserve x1 x2
  CHECK(mpz_class(bf.count) <= cb.bound);
}

TEST_CASE("guards reject degenerate or oversized inputs") {
  auto F = f3();
  QuadSystem deg = sys(F, {{{1, 0}, {0, 0}}});
  CHECK_THROWS_AS(count_bound(deg), DegenerateForm);

  auto F7 = FieldCtx::prime_field(7);
  QuadSystem big = QuadSystem::zero(F7, 3, 1);
  CHECK_THROWS_AS(brute_force_equivalence(big, big), TooLarge);  // 7^9 > 2^24
  CHECK_THROWS_AS(brute_force_centralizer(MatrixF::identity(F7, 3), false), TooLarge);

  QuadSystem affine(F, 1, {MatrixF::from_ints(F, {{1}})}, {{F->one()}}, {F->zero()});
  QuadSystem plain = sys(F, {{{1}}});
  CHECK_THROWS_AS(brute_force_equivalence(affine, affine), ShapeMismatch);
  CHECK_THROWS_AS(brute_force_equivalence(plain, QuadSystem::zero(F, 2, 1)), ShapeMismatch);
}

TEST_CASE("witness lists are capped and exact") {
  auto F = f3();
  QuadSystem f = sys(F, {{{1, 0}, {0, 1}}});
  auto capped = brute_force_equivalence(f, f, 3);
  CHECK(capped.count == 8);
  CHECK(capped.witnesses.size() == 3);
  auto first = brute_force_equivalence(f, f, 1, true);
  CHECK(first.equivalent);
  CHECK(first.count == 1);  // stopped at the first hit
  for (const auto& w : first.witnesses) CHECK(check_equivalence(f, f, w));
}
