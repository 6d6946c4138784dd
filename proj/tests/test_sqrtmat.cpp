#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ip1s/sqrtmat.hpp"

#include <algorithm>
#include <vector>

#include "ip1s/rng.hpp"

using namespace ip1s;

namespace {

FieldPtr f4() {
  auto f2 = FieldCtx::prime_field(2);
  return FieldCtx::extension_unchecked(f2, {f2->one(), f2->one()});
}

FieldPtr f9() {
  auto f3 = FieldCtx::prime_field(3);
  return FieldCtx::extension_unchecked(f3, {f3->one(), f3->zero()});
}

MatrixF jblock(const FieldElem& zeta, int d) {
  MatrixF j(zeta.ctx(), d, d);
  for (int i = 0; i < d; ++i) j.at(i, i) = zeta;
  for (int i = 0; i + 1 < d; ++i) j.at(i, i + 1) = zeta.ctx()->one();
  return j;
}

MatrixF blockdiag(const std::vector<MatrixF>& blocks) {
  int n = 0;
  for (const auto& b : blocks) n += b.rows();
  MatrixF r(blocks.front().ctx(), n, n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int i = 0; i < b.rows(); ++i)
      for (int j = 0; j < b.cols(); ++j) r.at(off + i, off + j) = b.at(i, j);
    off += b.rows();
  }
  return r;
}

MatrixF companion(const UniPoly& p) {
  const auto& ctx = p.ctx();
  const int d = p.degree();
  MatrixF c(ctx, d, d);
  for (int t = 0; t + 1 < d; ++t) c.at(t + 1, t) = ctx->one();
  for (int t = 0; t < d; ++t) c.at(t, d - 1) = -p.coeff((std::uint64_t)t);
  return c;
}

}  // namespace

TEST_CASE("jordan block square roots match the frozen small cases") {
  auto F7 = FieldCtx::prime_field(7);
  CHECK(sqrt_jordan_block(F7->from_int(2), 1) == MatrixF::from_ints(F7, {{3}}));
  CHECK(sqrt_jordan_block(F7->from_int(2), 2) == MatrixF::from_ints(F7, {{3, 6}, {0, 3}}));

  auto F5 = FieldCtx::prime_field(5);
  CHECK(sqrt_jordan_block(F5->from_int(1), 2) == MatrixF::from_ints(F5, {{1, 3}, {0, 1}}));

  auto g = sqrt_jordan_block(F7->from_int(2), 2);
  CHECK(g * g == MatrixF::from_ints(F7, {{2, 1}, {0, 2}}));
}

TEST_CASE("jordan block square root of a nonsquare eigenvalue needs one extension level") {
  auto F7 = FieldCtx::prime_field(7);
  auto g = sqrt_jordan_block(F7->from_int(3), 3);
  CHECK(g.ctx()->level() == 1);
  CHECK(g.ctx()->total_degree() == 2);
  CHECK(g * g == jblock(F7->from_int(3), 3).lift(g.ctx()));
}

TEST_CASE("jordan block square root rejects bad inputs") {
  auto F7 = FieldCtx::prime_field(7);
  CHECK_THROWS_AS(sqrt_jordan_block(F7->zero(), 2), ZeroEigenvalue);
  CHECK_THROWS_AS(sqrt_jordan_block(F7->from_int(2), 0), ShapeMismatch);
  auto F2 = FieldCtx::prime_field(2);
  CHECK_THROWS_AS(sqrt_jordan_block(F2->one(), 1), UnsupportedKind);
}

TEST_CASE("the series breaks down at the characteristic") {
  auto F3 = FieldCtx::prime_field(3);
  auto g = sqrt_jordan_block(F3->one(), 3);
  CHECK(g == MatrixF::from_ints(F3, {{1, 2, 1}, {0, 1, 2}, {0, 0, 1}}));
  CHECK(g * g == jblock(F3->one(), 3));
  CHECK_THROWS_AS(sqrt_jordan_block(F3->one(), 4), BlockTooLarge);
}

TEST_CASE("polynomial square root of the identity is the constant one") {
  auto F7 = FieldCtx::prime_field(7);
  auto r = sqrt_poly(MatrixF::identity(F7, 3));
  CHECK(r.W == MatrixF::identity(F7, 3));
  REQUIRE(r.as_polynomial.has_value());
  CHECK(r.as_polynomial->degree() == 0);
  CHECK(r.as_polynomial->coeff(0).is_one());
  CHECK(r.field_level == 0);
}

TEST_CASE("polynomial square root of a scalar matrix") {
  auto F7 = FieldCtx::prime_field(7);
  auto r = sqrt_poly(MatrixF::from_ints(F7, {{4, 0}, {0, 4}}));
  CHECK(r.W == MatrixF::from_ints(F7, {{2, 0}, {0, 2}}));
  REQUIRE(r.as_polynomial.has_value());
  CHECK(r.as_polynomial->degree() == 0);
  CHECK(r.as_polynomial->coeff(0) == F7->from_int(2));
}

TEST_CASE("polynomial square root of a single jordan block is the frozen matrix") {
  auto F7 = FieldCtx::prime_field(7);
  auto z = MatrixF::from_ints(F7, {{2, 1}, {0, 2}});
  auto r = sqrt_poly(z);
  CHECK(r.W == MatrixF::from_ints(F7, {{3, 6}, {0, 3}}));
  REQUIRE(r.as_polynomial.has_value());
  CHECK(eval_poly_at(*r.as_polynomial, z) == r.W);
}

TEST_CASE("polynomial square root rejects singular and even-characteristic inputs") {
  auto F7 = FieldCtx::prime_field(7);
  CHECK_THROWS_AS(sqrt_poly(MatrixF::from_ints(F7, {{0, 1}, {0, 0}})), SingularMatrix);
  auto F2 = FieldCtx::prime_field(2);
  CHECK_THROWS_AS(sqrt_poly(MatrixF::identity(F2, 2)), UnsupportedKind);
}

TEST_CASE("random matrices square back and stay polynomial in the input") {
  std::vector<FieldPtr> fields{FieldCtx::prime_field(7), f9(), FieldCtx::prime_field(101)};
  Rng rng(2026);
  for (const auto& F : fields) {
    for (int trial = 0; trial < 8; ++trial) {
      const int n = 1 + (int)rng.below(5);
      MatrixF z = MatrixF::random_invertible(F, n, rng);
      auto r = sqrt_poly(z);
      MatrixF zl = z.lift(r.W.ctx());
      CHECK(r.W * r.W == zl);
      CHECK(r.W * zl == zl * r.W);
      REQUIRE(r.as_polynomial.has_value());
      CHECK(eval_poly_at(*r.as_polynomial, zl) == r.W);
    }
  }
}

TEST_CASE("companion square root of a linear factor with a square root in the base field") {
  auto F7 = FieldCtx::prime_field(7);
  auto cs = sqrt_companion(UniPoly::from_ints(F7, {-4, 1}));
  CHECK(cs.base_field);
  CHECK(cs.field_level == 0);
  CHECK(cs.Q == UniPoly::from_ints(F7, {-2, 1}));
}

TEST_CASE("companion square root over F3 of x^2+1 stays over the base field") {
  auto F3 = FieldCtx::prime_field(3);
  auto p = UniPoly::from_ints(F3, {1, 0, 1});
  auto cs = sqrt_companion(p);
  CHECK(cs.base_field);
  CHECK(cs.Q == UniPoly::from_ints(F3, {2, 1, 1}));
  // defining identity: Q(z) Q(-z) = P(z^2) for even degree
  auto c = companion(cs.Q);
  CHECK(charpoly(c * c) == p);
}

TEST_CASE("companion square root of a linear factor with a nonsquare root") {
  auto F7 = FieldCtx::prime_field(7);
  auto cs = sqrt_companion(UniPoly::from_ints(F7, {-3, 1}));
  CHECK_FALSE(cs.base_field);
  CHECK(cs.field_level == 1);
  CHECK(cs.Q.degree() == 1);
  CHECK(cs.Q.coeff(1).is_one());
  CHECK(cs.Q.coeff(0) == -cs.Q.ctx()->gen());
  REQUIRE(cs.resid.size() == 2);
  CHECK(cs.resid[0].is_one());
  CHECK(cs.resid[1] == -UniPoly::one(F7));
}

TEST_CASE("companion square roots of random irreducibles square back as matrices") {
  auto F7 = FieldCtx::prime_field(7);
  Rng rng(77);
  for (int d = 2; d <= 3; ++d) {
    for (int trial = 0; trial < 4; ++trial) {
      UniPoly p = random_irreducible(F7, d, rng);
      auto cs = sqrt_companion(p);
      CHECK((cs.Q.ctx()->level() == 0) == cs.base_field);
      auto c = companion(cs.Q);
      CHECK(charpoly(c * c) == p.lift(cs.Q.ctx()));
    }
  }
}

TEST_CASE("companion square root rejects reducible or singular inputs") {
  auto F7 = FieldCtx::prime_field(7);
  CHECK_THROWS_AS(sqrt_companion(UniPoly::from_ints(F7, {-1, 0, 1})), ReduciblePolynomial);
  CHECK_THROWS_AS(sqrt_companion(UniPoly::x(F7)), SingularMatrix);
  auto F2 = FieldCtx::prime_field(2);
  CHECK_THROWS_AS(sqrt_companion(UniPoly::from_ints(F2, {1, 1})), UnsupportedKind);
}

TEST_CASE("large jordan blocks route to the companion construction") {
  auto F3 = FieldCtx::prime_field(3);
  MatrixF z = jblock(F3->one(), 4);  // size above the characteristic
  for (auto backend : {SqrtBackend::Jordan, SqrtBackend::Companion}) {
    auto r = sqrt_matrix(z, backend);
    CHECK(r.field_level == 0);
    CHECK(r.W * r.W == z);
    REQUIRE(r.as_polynomial.has_value());
    CHECK(eval_poly_at(*r.as_polynomial, z) == r.W);
  }
}

TEST_CASE("repeated irreducible factors work in the companion backend") {
  auto F3 = FieldCtx::prime_field(3);
  auto p = UniPoly::from_ints(F3, {1, 0, 1});
  MatrixF z = companion(p * p);  // one elementary divisor (x^2+1)^2
  auto r = sqrt_matrix(z, SqrtBackend::Companion);
  MatrixF zl = z.lift(r.W.ctx());
  CHECK(r.W * r.W == zl);
  REQUIRE(r.as_polynomial.has_value());
  CHECK(eval_poly_at(*r.as_polynomial, zl) == r.W);
}

TEST_CASE("both backends agree on squaring for random inputs") {
  auto F7 = FieldCtx::prime_field(7);
  Rng rng(4242);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 1 + (int)rng.below(4);
    MatrixF z = MatrixF::random_invertible(F7, n, rng);
    for (auto backend : {SqrtBackend::Jordan, SqrtBackend::Companion}) {
      auto r = sqrt_matrix(z, backend);
      CHECK(r.W * r.W == z.lift(r.W.ctx()));
      REQUIRE(r.as_polynomial.has_value());
    }
  }
}

TEST_CASE("characteristic-2 scalar square roots are frobenius preimages") {
  auto F4 = f4();
  auto t = F4->gen();
  MatrixF z(F4, 1, 1);
  z.at(0, 0) = t;
  auto out = sqrt_char2(z);
  REQUIRE(out.exists());
  CHECK(out.value->W.at(0, 0) == t * t);
  REQUIRE(out.value->as_polynomial.has_value());
  CHECK(out.value->field_level == 1);
}

TEST_CASE("characteristic-2 diagonalizable square root stays over the base field") {
  auto F2 = FieldCtx::prime_field(2);
  auto p = UniPoly::from_ints(F2, {1, 1, 1});
  MatrixF z = companion(p);
  auto out = sqrt_char2(z);
  REQUIRE(out.exists());
  CHECK(out.value->W == MatrixF::from_ints(F2, {{1, 1}, {1, 0}}));
  REQUIRE(out.value->as_polynomial.has_value());
  CHECK(*out.value->as_polynomial == UniPoly::from_ints(F2, {1, 1}));
  CHECK(out.value->field_level == 0);
}

TEST_CASE("characteristic-2 verdicts on the unpairable block patterns") {
  auto F2 = FieldCtx::prime_field(2);
  auto one = F2->one();

  // sizes 3 and 1: the gap is too wide
  auto bad31 = sqrt_char2(blockdiag({jblock(one, 3), jblock(one, 1)}));
  CHECK_FALSE(bad31.exists());
  REQUIRE(bad31.violations.size() == 1);
  CHECK(bad31.violations[0] == std::vector<int>{3, 1});

  // three blocks of size 2: one stays unpaired with no size-1 partner
  auto bad222 = sqrt_char2(blockdiag({jblock(one, 2), jblock(one, 2), jblock(one, 2)}));
  CHECK_FALSE(bad222.exists());
  REQUIRE(bad222.violations.size() == 1);
  CHECK(bad222.violations[0] == std::vector<int>{2, 2, 2});

  // a single nilpotent block of size 2
  auto bad2 = sqrt_char2(jblock(F2->zero(), 2));
  CHECK_FALSE(bad2.exists());
  REQUIRE(bad2.violations.size() == 1);
  CHECK(bad2.violations[0] == std::vector<int>{2});
}

TEST_CASE("characteristic-2 pairable patterns produce roots") {
  auto F2 = FieldCtx::prime_field(2);
  auto one = F2->one();

  // two blocks of size 2 pair up; the root is not polynomial in z
  MatrixF z22 = blockdiag({jblock(one, 2), jblock(one, 2)});
  auto r22 = sqrt_char2(z22);
  REQUIRE(r22.exists());
  CHECK(r22.value->W * r22.value->W == z22.lift(r22.value->W.ctx()));
  CHECK_FALSE(r22.value->as_polynomial.has_value());

  // a size-2 block consumes a size-1 partner
  MatrixF z21 = blockdiag({jblock(one, 2), jblock(one, 1)});
  auto r21 = sqrt_char2(z21);
  REQUIRE(r21.exists());
  CHECK(r21.value->W * r21.value->W == z21.lift(r21.value->W.ctx()));

  // nilpotent pair (2,1)
  MatrixF z0 = blockdiag({jblock(F2->zero(), 2), jblock(F2->zero(), 1)});
  auto r0 = sqrt_char2(z0);
  REQUIRE(r0.exists());
  CHECK(r0.value->W * r0.value->W == z0.lift(r0.value->W.ctx()));

  // the zero matrix is diagonalizable
  MatrixF zz(F2, 2, 2);
  auto rz = sqrt_char2(zz);
  REQUIRE(rz.exists());
  CHECK(rz.value->W.is_zero());
}

TEST_CASE("characteristic-2 square root called in odd characteristic is rejected") {
  auto F7 = FieldCtx::prime_field(7);
  CHECK_THROWS_AS(sqrt_char2(MatrixF::identity(F7, 2)), UnsupportedKind);
}

TEST_CASE("characteristic-2 verdict agrees with exhaustive search for tiny sizes") {
  auto F2 = FieldCtx::prime_field(2);
  for (int n = 1; n <= 3; ++n) {
    const int bits = n * n;
    std::vector<MatrixF> all;
    all.reserve((size_t)1 << bits);
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << bits); ++mask) {
      MatrixF m(F2, n, n);
      for (int k = 0; k < bits; ++k)
        if ((mask >> k) & 1) m.at(k / n, k % n) = F2->one();
      all.push_back(std::move(m));
    }
    int mismatches = 0;
    for (const auto& z : all) {
      bool brute = false;
      for (const auto& w : all)
        if (w * w == z) {
          brute = true;
          break;
        }
      auto out = sqrt_char2(z);
      if (out.exists() != brute) ++mismatches;
      if (out.exists()) {
        const auto& r = *out.value;
        if (!(r.W * r.W == z.lift(r.W.ctx()))) ++mismatches;
      }
    }
    CHECK(mismatches == 0);
  }
}

TEST_CASE("squaring a characteristic-2 jordan block splits it in half") {
  auto F4 = f4();
  auto t = F4->gen();
  for (int d = 2; d <= 5; ++d) {
    MatrixF j = jblock(t, d);
    auto jd = jordan_form(j * j);
    std::vector<int> sizes;
    for (const auto& b : jd.blocks) {
      sizes.push_back(b.size);
      CHECK(jd.ext->embed(b.eigenvalue) == jd.ext->embed(t * t));
    }
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    CHECK(sizes == std::vector<int>{(d + 1) / 2, d / 2});
  }
}

TEST_CASE("characteristic-2 roots exist for random conjugates of pairable forms") {
  auto F4 = f4();
  Rng rng(99);
  for (int trial = 0; trial < 6; ++trial) {
    MatrixF base = blockdiag({jblock(F4->gen(), 2), jblock(F4->gen(), 2), jblock(F4->one(), 1)});
    MatrixF a = MatrixF::random_invertible(F4, base.rows(), rng);
    MatrixF z = a * base * inverse(a);
    auto out = sqrt_char2(z);
    REQUIRE(out.exists());
    CHECK(out.value->W * out.value->W == z.lift(out.value->W.ctx()));
  }
}
