#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ip1s/quadform.hpp"

using namespace ip1s;

namespace {

FieldPtr f7() { return FieldCtx::prime_field(7); }
FieldPtr f2() { return FieldCtx::prime_field(2); }

FieldPtr f9() {
  auto f3 = FieldCtx::prime_field(3);
  return FieldCtx::extension_unchecked(f3, {f3->one(), f3->zero()});  // i^2 = -1
}

FieldPtr f4() {
  auto base = f2();
  return FieldCtx::extension_unchecked(base, {base->one(), base->one()});  // t^2 = t+1
}

QuadSystem one_form(const FieldPtr& ctx, const std::vector<std::vector<std::int64_t>>& rows) {
  return QuadSystem(ctx, (std::uint64_t)rows.size(), {MatrixF::from_ints(ctx, rows)});
}

}  // namespace

TEST_CASE("symmetrized matrices in both characteristics") {
  auto F = f7();
  QuadSystem xy = one_form(F, {{0, 1}, {0, 0}});
  CHECK(hessian(xy, 0) == MatrixF::from_ints(F, {{0, 1}, {1, 0}}));
  QuadSystem sq = one_form(F, {{1, 0}, {0, 0}});
  CHECK(hessian(sq, 0) == MatrixF::from_ints(F, {{2, 0}, {0, 0}}));

  auto B = f2();
  QuadSystem xy2 = one_form(B, {{0, 1}, {0, 0}});
  CHECK(hessian(xy2, 0) == MatrixF::from_ints(B, {{0, 1}, {1, 0}}));
  CHECK(delta_diag(xy2, 0).is_zero());
  QuadSystem mix = one_form(B, {{1, 1}, {0, 1}});
  CHECK(delta_diag(mix, 0) == MatrixF::identity(B, 2));
}

TEST_CASE("evaluation and substitution") {
  auto F = f7();
  QuadSystem xy = one_form(F, {{0, 1}, {0, 0}});
  CHECK(xy.evaluate_one(0, {F->from_int(3), F->from_int(4)}) == F->from_int(5));

  QuadSystem sq(F, 1, {MatrixF::from_ints(F, {{1}})});
  QuadSystem scaled = sq.substitute(MatrixF::from_ints(F, {{2}}));
  CHECK(scaled.mat(0) == MatrixF::from_ints(F, {{4}}));

  // functoriality, including affine parts
  Rng rng(11);
  QuadSystem f(F, 3,
               {MatrixF::from_ints(F, {{1, 2, 0}, {0, 3, 4}, {0, 0, 5}}),
                MatrixF::from_ints(F, {{0, 1, 1}, {0, 2, 0}, {0, 0, 6}})},
               {{F->from_int(1), F->from_int(0), F->from_int(2)},
                {F->from_int(3), F->from_int(5), F->from_int(0)}},
               {F->from_int(4), F->from_int(6)});
  CHECK(!f.homogeneous());
  MatrixF a = MatrixF::random_invertible(F, 3, rng);
  Vec b = {F->sample(rng), F->sample(rng), F->sample(rng)};
  QuadSystem g = f.substitute_affine(a, b);
  for (int trial = 0; trial < 20; ++trial) {
    Vec pt = {F->sample(rng), F->sample(rng), F->sample(rng)};
    Vec apb = a.mul_vec(pt);
    for (size_t i = 0; i < 3; ++i) apb[i] += b[i];
    CHECK(g.evaluate(pt) == f.evaluate(apb));
  }
}

TEST_CASE("homogenization and its inverse") {
  auto F = f7();
  // x1^2 + x1 + 1
  QuadSystem f(F, 1, {MatrixF::from_ints(F, {{1}})}, {{F->one()}}, {F->one()});
  QuadSystem fs = homogenize_one(f);
  CHECK(fs.n() == 2);
  CHECK(fs.m() == 2);
  CHECK(fs.homogeneous());
  CHECK(fs.mat(0) == MatrixF::from_ints(F, {{1, 0}, {0, 0}}));
  CHECK(fs.mat(1) == MatrixF::from_ints(F, {{1, 1}, {0, 1}}));
  CHECK(dehomogenize_one(fs) == f);

  QuadSystem xy = one_form(F, {{0, 1}, {0, 0}});
  QuadSystem xys = homogenize_one(xy);
  CHECK(xys.n() == 3);
  CHECK(xys.mat(0).at(0, 0).is_one());
  CHECK(xys.mat(1).at(1, 2).is_one());

  // affine equivalence g(x) = f(Ax + b) maps to the block matrix [[1,0],[b,A]]
  Rng rng(5);
  QuadSystem base(F, 3,
                  {MatrixF::from_ints(F, {{1, 2, 0}, {0, 0, 4}, {0, 0, 5}}),
                   MatrixF::from_ints(F, {{2, 1, 1}, {0, 2, 0}, {0, 0, 1}})},
                  {{F->from_int(1), F->from_int(2), F->from_int(0)},
                   {F->from_int(0), F->from_int(1), F->from_int(1)}},
                  {F->from_int(3), F->from_int(0)});
  MatrixF a = MatrixF::random_invertible(F, 3, rng);
  Vec b = {F->sample(rng), F->sample(rng), F->sample(rng)};
  QuadSystem g = base.substitute_affine(a, b);
  auto [fstar, gstar] = homogenize(base, g);
  MatrixF aprime(F, 4, 4);
  aprime.at(0, 0) = F->one();
  for (int r = 0; r < 3; ++r) {
    aprime.at(r + 1, 0) = b[(size_t)r];
    for (int c = 0; c < 3; ++c) aprime.at(r + 1, c + 1) = a.at(r, c);
  }
  CHECK(fstar.substitute(aprime) == gstar);
}

TEST_CASE("essential variable counts match known forms") {
  auto F = f7();
  // (x1+x2)^2 = x1^2 + 2 x1 x2 + x2^2
  QuadSystem sq1 = one_form(F, {{1, 2}, {0, 1}});
  auto r1 = essential_reduce(sq1);
  CHECK(r1.s == 1);
  CHECK(!det(r1.M).is_zero());
  CHECK(sq1.substitute(r1.M) == r1.reduced.pad_vars(2));

  QuadSystem pair(F, 3,
                  {MatrixF::from_ints(F, {{0, 0, 1}, {0, 0, 0}, {0, 0, 0}}),
                   MatrixF::from_ints(F, {{0, 0, 0}, {0, 0, 1}, {0, 0, 0}})});
  CHECK(essential_reduce(pair).s == 3);

  QuadSystem diag(F, 3,
                  {MatrixF::from_ints(F, {{1, 0, 0}, {0, 0, 0}, {0, 0, 0}}),
                   MatrixF::from_ints(F, {{0, 0, 0}, {0, 1, 0}, {0, 0, 0}}),
                   MatrixF::from_ints(F, {{0, 0, 0}, {0, 0, 0}, {0, 0, 1}})});
  auto r3 = essential_reduce(diag);
  CHECK(r3.s == 3);
  CHECK(r3.M.is_identity());
}

TEST_CASE("essential reduction sees characteristic-2 square terms") {
  auto B = f2();
  // x1x2 + x1x3 + x2x3 needs all three variables even though the mixed part
  // has rank 2
  QuadSystem tri = one_form(B, {{0, 1, 1}, {0, 0, 1}, {0, 0, 0}});
  CHECK(essential_reduce(tri).s == 3);

  // x1^2 + x2^2 = (x1 + x2)^2
  QuadSystem sumsq = one_form(B, {{1, 0}, {0, 1}});
  auto r = essential_reduce(sumsq);
  CHECK(r.s == 1);
  CHECK(r.reduced == one_form(B, {{1}}));
  CHECK(sumsq.substitute(r.M) == r.reduced.pad_vars(2));

  // x1^2 + t x2^2 = (x1 + sqrt(t) x2)^2 over F4
  auto F4 = f4();
  MatrixF h(F4, 2, 2);
  h.at(0, 0) = F4->one();
  h.at(1, 1) = F4->gen();
  QuadSystem twisted(F4, 2, {h});
  auto r2 = essential_reduce(twisted);
  CHECK(r2.s == 1);
  CHECK(twisted.substitute(r2.M) == r2.reduced.pad_vars(2));

  // padded random system keeps its essential count under conjugation
  Rng rng(77);
  QuadSystem small = QuadSystem::random_homogeneous(B, 2, 2, rng);
  QuadSystem padded = small.pad_vars(4);
  MatrixF rmat = MatrixF::random_invertible(B, 4, rng);
  auto rr = essential_reduce(padded.substitute(rmat));
  CHECK(rr.s == essential_reduce(padded).s);
}

TEST_CASE("regular combinations and certified irregularity") {
  auto F = f7();
  QuadSystem f(F, 2,
               {MatrixF::from_ints(F, {{1, 0}, {0, 0}}), MatrixF::from_ints(F, {{0, 0}, {0, 1}})});
  auto rc = regular_combination(f, f);
  REQUIRE(rc.status == ComboStatus::Found);
  MatrixF acc(F, 2, 2);
  for (size_t i = 0; i < 2; ++i) acc = acc + hessian(f, i).scaled(rc.lambda[i]);
  CHECK(!det(acc).is_zero());
  CHECK(!rc.lambda[rc.pivot].is_zero());

  QuadSystem ivanyos(F, 3,
                     {MatrixF::from_ints(F, {{0, 0, 1}, {0, 0, 0}, {0, 0, 0}}),
                      MatrixF::from_ints(F, {{0, 0, 0}, {0, 0, 1}, {0, 0, 0}})});
  CHECK(regular_combination(ivanyos, ivanyos).status == ComboStatus::Irregular);

  auto f3 = FieldCtx::prime_field(3);
  QuadSystem p3(f3, 4,
                {MatrixF::from_ints(f3, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 0}}),
                 MatrixF::from_ints(f3, {{0, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 2, 0}, {0, 0, 0, 1}})});
  CHECK(regular_combination(p3, p3).status == ComboStatus::Irregular);

  auto F9 = f9();
  std::vector<MatrixF> lifted;
  for (std::uint64_t i = 0; i < 2; ++i) lifted.push_back(p3.mat(i).lift(F9));
  QuadSystem p9(F9, 4, std::move(lifted));
  CHECK(regular_combination(p9, p9).status == ComboStatus::Found);

  // a pair that can never be equivalent: the g side is degenerate everywhere
  QuadSystem g(F, 2,
               {MatrixF::from_ints(F, {{1, 0}, {0, 0}}), MatrixF::from_ints(F, {{1, 0}, {0, 0}})});
  CHECK(regular_combination(f, g).status == ComboStatus::GSideSingular);

  // odd variable count in characteristic 2 is rejected up front
  auto B = f2();
  QuadSystem odd = one_form(B, {{0, 1, 0}, {0, 0, 1}, {0, 0, 0}});
  CHECK(regular_combination(odd, odd).status == ComboStatus::Irregular);

  // an equivalent pair built from a regular system stays regular
  Rng rng(9);
  QuadSystem reg(F, 3,
                 {MatrixF::from_ints(F, {{1, 0, 0}, {0, 0, 1}, {0, 0, 0}}),
                  MatrixF::from_ints(F, {{0, 1, 0}, {0, 0, 0}, {0, 0, 0}})});
  MatrixF a = MatrixF::random_invertible(F, 3, rng);
  CHECK(regular_combination(reg, reg.substitute(a)).status == ComboStatus::Found);
}

TEST_CASE("diagonal reduction in odd characteristic") {
  auto F = f7();
  QuadSystem xy = one_form(F, {{0, 1}, {0, 0}});
  auto red = gauss_reduce(hessian(xy, 0));
  CHECK(red.D == MatrixF::from_ints(F, {{1, 0}, {0, 3}}));
  CHECK(red.P.transpose() * hessian(xy, 0) * red.P == red.D);

  auto red2 = gauss_reduce(MatrixF::from_ints(F, {{2, 0}, {0, 2}}));
  CHECK(red2.D == MatrixF::identity(F, 2));

  auto f5 = FieldCtx::prime_field(5);
  auto red3 = gauss_reduce(MatrixF::from_ints(f5, {{1}}));
  CHECK(red3.D == MatrixF::identity(f5, 1));
  CHECK(red3.P == MatrixF::identity(f5, 1));

  CHECK_THROWS_AS(gauss_reduce(MatrixF::from_ints(F, {{1, 0}, {0, 0}})), DegenerateForm);
  CHECK_THROWS_AS(gauss_reduce(MatrixF::identity(f2(), 2)), UnsupportedKind);

  // property: P^T phi P = D with entries 1 or the canonical nonsquare
  for (auto ctx : {f7(), FieldCtx::prime_field(101), f9()}) {
    Rng rng(31);
    const FieldElem ns = ctx->canonical_nonsquare();
    for (int trial = 0; trial < 10; ++trial) {
      MatrixF r = MatrixF::random_invertible(ctx, 4, rng);
      MatrixF phi = r.transpose() * r;  // symmetric invertible
      auto gr = gauss_reduce(phi);
      CHECK(gr.P.transpose() * phi * gr.P == gr.D);
      for (int k = 0; k < 4; ++k) {
        const bool ok = gr.D.at(k, k).is_one() || gr.D.at(k, k) == ns;
        CHECK(ok);
        for (int l = k + 1; l < 4; ++l) CHECK(gr.D.at(k, l).is_zero());
      }
    }
  }
}

TEST_CASE("nonsquare pairs collapse to ones") {
  auto F = f7();
  MatrixF phi = MatrixF::from_ints(F, {{3, 0}, {0, 3}});
  auto red = gauss_reduce(phi);
  collapse_nonsquares(red);
  CHECK(red.D == MatrixF::identity(F, 2));
  CHECK(red.P.transpose() * phi * red.P == red.D);

  MatrixF phi2 = MatrixF::from_ints(F, {{1, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 3}});
  auto red2 = gauss_reduce(phi2);
  collapse_nonsquares(red2);
  CHECK(red2.D == MatrixF::from_ints(F, {{1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 3}}));
  CHECK(red2.P.transpose() * phi2 * red2.P == red2.D);

  // a nonsquare that is not in the last slot moves there
  auto f5 = FieldCtx::prime_field(5);
  MatrixF phi3 = MatrixF::from_ints(f5, {{2, 0}, {0, 1}});
  auto red3 = gauss_reduce(phi3);
  collapse_nonsquares(red3);
  CHECK(red3.D == MatrixF::from_ints(f5, {{1, 0}, {0, 2}}));
  CHECK(red3.P.transpose() * phi3 * red3.P == red3.D);
}

TEST_CASE("characteristic-2 normal forms") {
  auto B = f2();
  auto hyper = canonical_char2(MatrixF::from_ints(B, {{0, 1}, {0, 0}}));
  CHECK(hyper.type == Char2Type::Hyperbolic);
  CHECK(hyper.P.is_identity());
  CHECK(hyper.delta == MatrixF::from_ints(B, {{0, 1}, {0, 0}}));

  auto ell = canonical_char2(MatrixF::from_ints(B, {{1, 1}, {0, 1}}));
  CHECK(ell.type == Char2Type::Elliptic);
  CHECK(ell.d.is_one());
  CHECK(ell.delta == MatrixF::from_ints(B, {{1, 1}, {0, 1}}));

  auto two = canonical_char2(
      MatrixF::from_ints(B, {{0, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 0, 0}}));
  CHECK(two.type == Char2Type::Hyperbolic);
  MatrixF sig = two.delta + two.delta.transpose();
  CHECK(sig == MatrixF::from_ints(B, {{0, 1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, 1, 0}}));

  // the sum of two elliptic planes is hyperbolic
  auto merged = canonical_char2(
      MatrixF::from_ints(B, {{1, 1, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 1}, {0, 0, 0, 1}}));
  CHECK(merged.type == Char2Type::Hyperbolic);

  CHECK_THROWS_AS(canonical_char2(MatrixF::from_ints(B, {{1, 0}, {0, 0}})), DegenerateForm);
  CHECK_THROWS_AS(canonical_char2(MatrixF::from_ints(B, {{0, 1, 0}, {0, 0, 0}, {0, 0, 1}})),
                  DegenerateForm);

  auto F4 = f4();
  CHECK(canonical_trace_one(B).is_one());
  CHECK(canonical_trace_one(F4) == F4->gen());
}

TEST_CASE("characteristic-2 type is a congruence invariant") {
  for (auto ctx : {f2(), f4()}) {
    Rng rng(123);
    int both = 0;
    for (int trial = 0; trial < 40; ++trial) {
      MatrixF u(ctx, 4, 4);
      for (int i = 0; i < 4; ++i)
        for (int j = i; j < 4; ++j) u.at(i, j) = ctx->sample(rng);
      if (det(u + u.transpose()).is_zero()) continue;
      auto c1 = canonical_char2(u);
      MatrixF r = MatrixF::random_invertible(ctx, 4, rng);
      QuadSystem moved = QuadSystem(ctx, 4, {u}).substitute(r);
      auto c2 = canonical_char2(moved.mat(0));
      CHECK(c1.type == c2.type);
      CHECK(c1.delta == c2.delta);
      both |= c1.type == Char2Type::Elliptic ? 1 : 2;
    }
    CHECK(both == 3);  // both types actually appeared
  }
}

TEST_CASE("odd-dimension symmetrized matrices are singular in characteristic 2") {
  for (auto ctx : {f2(), f4()}) {
    Rng rng(7);
    for (std::uint64_t n : {3ull, 5ull}) {
      QuadSystem sys = QuadSystem::random_homogeneous(ctx, n, 1, rng);
      CHECK(det(hessian(sys, 0)).is_zero());
    }
  }
}

TEST_CASE("shifts make every matrix invertible") {
  auto F = f7();
  CanonicalInstance inst;
  inst.ctx = F;
  inst.D = MatrixF::identity(F, 2);
  inst.hs = {inst.D, MatrixF::from_ints(F, {{1, 0}, {0, 0}})};
  inst.hs2 = inst.hs;
  shift_invertible(inst);
  CHECK(inst.shifts[0].is_zero());
  CHECK(inst.shifts[1] == F->from_int(2));  // 0 and 1 are eigenvalues of the pencil
  CHECK(!det(inst.hs[1]).is_zero());
  CHECK(inst.hs[1] == MatrixF::from_ints(F, {{1, 0}, {0, 0}}) - inst.D.scaled(F->from_int(2)));

  CanonicalInstance ok;
  ok.ctx = F;
  ok.D = MatrixF::identity(F, 2);
  ok.hs = {ok.D, MatrixF::from_ints(F, {{0, 1}, {1, 0}})};
  ok.hs2 = ok.hs;
  shift_invertible(ok);
  CHECK(ok.shifts[1].is_zero());

  auto f3 = FieldCtx::prime_field(3);
  CanonicalInstance bad;
  bad.ctx = f3;
  bad.D = MatrixF::identity(f3, 3);
  bad.hs = {bad.D, MatrixF::from_ints(f3, {{0, 0, 0}, {0, 1, 0}, {0, 0, 2}})};
  bad.hs2 = bad.hs;
  CHECK_THROWS_AS(shift_invertible(bad), FieldTooSmall);

  // characteristic 2 judges invertibility through the symmetrized view
  auto B = f2();
  CanonicalInstance c2;
  c2.ctx = B;
  c2.D = MatrixF::from_ints(B, {{0, 1}, {0, 0}});
  c2.hs = {c2.D, MatrixF::identity(B, 2)};  // sigma of the identity is zero
  c2.hs2 = c2.hs;
  shift_invertible(c2);
  CHECK(c2.shifts[1].is_one());
  CHECK(!det(c2.hs[1] + c2.hs[1].transpose()).is_zero());
}

TEST_CASE("instance files round-trip") {
  auto F9 = f9();
  Rng rng(42);
  QuadSystem f = QuadSystem::random_homogeneous(F9, 3, 2, rng);
  QuadSystem g = QuadSystem::random_homogeneous(F9, 3, 2, rng);
  std::string text = write_instance(f, g);
  auto [f2p, g2p] = parse_instance(text);
  CHECK(f2p == f);
  CHECK(g2p == g);

  CHECK_THROWS_AS(parse_instance("IP1S v2\n"), ParseError);
  CHECK_THROWS_AS(parse_instance("IP1S v1\np=7\nn=2 m=1\n1 0\n0 1\n"), ParseError);
  std::string bad = text;
  bad.replace(bad.find("n=3"), 3, "n=4");
  CHECK_THROWS_AS(parse_instance(bad), ParseError);
}
