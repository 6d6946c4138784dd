#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "ip1s/ippow.hpp"

using namespace ip1s;

namespace {

FieldPtr f3() { return FieldCtx::prime_field(3); }
FieldPtr f7() { return FieldCtx::prime_field(7); }
FieldPtr f13() { return FieldCtx::prime_field(13); }
FieldPtr f101() { return FieldCtx::prime_field(101); }

FieldPtr f4() {
  auto f2 = FieldCtx::prime_field(2);
  return FieldCtx::extension_unchecked(f2, {f2->one(), f2->one()});  // x^2+x+1
}

FieldPtr f9() {
  auto base = f3();
  return FieldCtx::extension_unchecked(base, {base->one(), base->zero()});  // x^2+1
}

FieldPtr f81() {
  auto base = f3();
  return adjoin_root(UniPoly::from_ints(base, {2, 1, 0, 0, 1}));  // x^4+x+2, checked
}

DensePoly mono(const FieldPtr& k, DensePoly::Exps e, std::int64_t c) {
  int nvars = (int)e.size();
  return DensePoly::monomial(k, nvars, std::move(e), k->from_int(c));
}

// row content of a matrix as a set of integer-index tuples, for
// order-insensitive comparisons of recovered forms
std::set<std::vector<std::string>> row_set(const MatrixF& m) {
  std::set<std::vector<std::string>> out;
  for (int i = 0; i < m.rows(); ++i) {
    std::vector<std::string> row;
    for (int j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j).to_string());
    out.insert(std::move(row));
  }
  return out;
}

std::vector<std::string> int_row(const FieldPtr& k, const std::vector<std::int64_t>& v) {
  std::vector<std::string> out;
  for (auto x : v) out.push_back(k->from_int(x).to_string());
  return out;
}

}  // namespace

TEST_CASE("dense polynomial arithmetic round trips") {
  auto k = f13();
  DensePoly x = DensePoly::variable(k, 2, 0);
  DensePoly y = DensePoly::variable(k, 2, 1);

  DensePoly s = (x + y).pow(2);
  CHECK(s == mono(k, {2, 0}, 1) + mono(k, {1, 1}, 2) + mono(k, {0, 2}, 1));
  CHECK(s.total_degree() == 2);
  CHECK(s.is_homogeneous());
  CHECK_FALSE((s + DensePoly::constant(k, 2, k->one())).is_homogeneous());

  auto q = s.divided_by(x + y);
  REQUIRE(q.has_value());
  CHECK(*q == x + y);
  CHECK_FALSE(s.divided_by(x - y).has_value());

  CHECK(s.partial(0) == (x + y).scaled(k->from_int(2)));
  CHECK(s.eval({k->from_int(3), k->from_int(4)}) == k->from_int(49 % 13));

  // restriction to the line (t, 2t+1) of x*y: t*(2t+1)
  UniPoly r = (x * y).restrict_line({k->zero(), k->one()}, {k->one(), k->from_int(2)});
  CHECK(r == UniPoly::from_ints(k, {0, 1, 2}));

  auto k9 = f9();
  DensePoly cube = DensePoly::linear_form(k9, {k9->gen(), k9->one()}).pow(3);
  auto back = cube.pth_root();
  REQUIRE(back.has_value());
  CHECK(*back == DensePoly::linear_form(k9, {k9->gen(), k9->one()}));
  CHECK((*back * *back * *back) == cube);
  CHECK_FALSE((cube + mono(k9, {1, 0}, 1)).pth_root().has_value());

  CHECK(x.inflate(3) == mono(k, {3, 0}, 1));
}

TEST_CASE("polynomial text form parses back") {
  auto k = f13();
  DensePoly p = mono(k, {2, 0}, 1) + mono(k, {0, 2}, 5);
  CHECK(p.to_string() == "(2,0):1 (0,2):5");
  CHECK(DensePoly::parse(k, 2, p.to_string()) == p);
  CHECK(DensePoly::parse(k, 2, "0").is_zero());
  CHECK_THROWS_AS(DensePoly::parse(k, 2, "(2):1"), ParseError);

  auto sys = DensePolySystem::make(k, 2, 2, {p, mono(k, {1, 1}, 3)});
  std::string text = sys.to_text();
  DensePolySystem again = DensePolySystem::parse_text(text);
  CHECK(again.n == 2);
  CHECK(again.d == 2);
  CHECK(again.homogeneous);
  CHECK(again.polys.size() == 2);
  CHECK(again.polys[0] == sys.polys[0]);
  CHECK(again.polys[1] == sys.polys[1]);
  CHECK(again.to_text() == text);

  auto k81 = f81();
  DensePoly q = DensePoly::linear_form(k81, {k81->gen(), k81->one()}).pow(2);
  auto esys = DensePolySystem::make(k81, 2, 2, {q});
  CHECK(DensePolySystem::parse_text(esys.to_text()).polys[0] == q);
}

TEST_CASE("jacobian determinant matches hand expansions") {
  auto k = f13();
  // diagonal squares
  auto g = DensePolySystem::make(k, 2, 2, {mono(k, {2, 0}, 1), mono(k, {0, 2}, 1)});
  CHECK(jacobian_det(g) == mono(k, {1, 1}, 4));

  // sheared squares: det of [[2x1+2x2, 2x1+2x2], [0, 2x2]]
  DensePoly shear = DensePoly::linear_form(k, {k->one(), k->one()}).pow(2);
  auto g2 = DensePolySystem::make(k, 2, 2, {shear, mono(k, {0, 2}, 1)});
  CHECK(jacobian_det(g2) == mono(k, {1, 1}, 4) + mono(k, {0, 2}, 4));

  auto bad = DensePolySystem::make(k, 2, 2, {shear});
  CHECK_THROWS_AS(jacobian_det(bad), ShapeMismatch);
}

TEST_CASE("power system jacobian determinant is diagonal") {
  for (auto k : {f101(), f13()}) {
    for (int n = 1; n <= 4; ++n) {
      for (int d = 2; d <= 5; ++d) {
        if ((std::uint64_t)d % k->characteristic() == 0) continue;
        std::vector<DensePoly> polys;
        for (int i = 0; i < n; ++i) {
          DensePoly::Exps e(n, 0);
          e[i] = (std::uint32_t)d;
          polys.push_back(mono(k, e, 1));
        }
        auto pow_sys = DensePolySystem::make(k, n, d, polys);
        DensePoly::Exps all(n, (std::uint32_t)(d - 1));
        DensePoly expect =
            DensePoly::monomial(k, n, all, k->from_int(d).pow((std::uint64_t)n));
        CHECK(jacobian_det(pow_sys) == expect);
      }
    }
  }
}

TEST_CASE("jacobian of a composed system obeys the chain rule") {
  auto k = f101();
  Rng rng(0x77aa11);
  for (int n : {2, 3}) {
    // dense random quadratic-cubic mix
    std::vector<DensePoly> f;
    for (int i = 0; i < n; ++i) {
      DensePoly poly(k, n);
      for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
          DensePoly::Exps e(n, 0);
          e[a] += 1;
          e[b] += 1;
          poly = poly + DensePoly::monomial(k, n, e, k->sample(rng));
        }
      DensePoly::Exps cube(n, 0);
      cube[i] = 3;
      poly = poly + DensePoly::monomial(k, n, cube, k->sample(rng));
      f.push_back(poly);
    }
    MatrixF A = MatrixF::random_invertible(k, n, rng);
    MatrixF B = MatrixF::random_invertible(k, n, rng);

    std::vector<DensePoly> g;
    for (int i = 0; i < n; ++i) {
      DensePoly acc(k, n);
      for (int j = 0; j < n; ++j) acc = acc + f[j].compose_linear(A).scaled(B.at(i, j));
      g.push_back(acc);
    }

    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        DensePoly lhs = g[i].partial(j);
        DensePoly rhs(k, n);
        for (int kk = 0; kk < n; ++kk)
          for (int l = 0; l < n; ++l)
            rhs = rhs + f[kk].partial(l).compose_linear(A).scaled(B.at(i, kk) * A.at(l, j));
        CHECK(lhs == rhs);
      }
  }
}

TEST_CASE("frobenius descent splits off the p-power part of the degree") {
  auto k4 = f4();
  auto g = DensePolySystem::make(k4, 2, 2, {mono(k4, {2, 0}, 1) + mono(k4, {0, 2}, 1)});
  DescentResult dec = frobenius_descent(g);
  CHECK(dec.r == 1);
  CHECK(dec.e == 1);
  CHECK(dec.reduced.polys[0] == mono(k4, {1, 0}, 1) + mono(k4, {0, 1}, 1));

  auto k9 = f9();
  auto stuck =
      DensePolySystem::make(k9, 2, 6, {mono(k9, {3, 3}, 1) + mono(k9, {1, 1}, 1)});
  CHECK_THROWS_AS(frobenius_descent(stuck), NotAPthPower);

  auto k = f7();
  auto plain = DensePolySystem::make(k, 2, 3, {mono(k, {3, 0}, 2)});
  DescentResult same = frobenius_descent(plain);
  CHECK(same.r == 0);
  CHECK(same.e == 3);
  CHECK(same.reduced.polys[0] == plain.polys[0]);

  // descent inverts inflation
  Rng rng(0xfeed);
  DensePoly h(k9, 2);
  for (int a = 0; a <= 2; ++a)
    for (int b = 0; a + b <= 2; ++b) {
      DensePoly::Exps e{(std::uint32_t)a, (std::uint32_t)b};
      h = h + DensePoly::monomial(k9, 2, e, k9->sample(rng));
    }
  auto inflated = DensePolySystem::make(k9, 2, 6, {h.inflate(3)});
  DescentResult back = frobenius_descent(inflated);
  CHECK(back.r == 1);
  CHECK(back.e == 2);
  CHECK(back.reduced.polys[0] == h);
}

TEST_CASE("linear factor extraction recovers planted forms") {
  auto k = f13();
  ExtractedForms lf = extract_linear_factors(mono(k, {1, 1}, 4), 2, 2);
  CHECK(lf.c == k->from_int(4));
  CHECK(row_set(lf.rows) ==
        std::set<std::vector<std::string>>{int_row(k, {1, 0}), int_row(k, {0, 1})});

  ExtractedForms lf2 =
      extract_linear_factors(mono(k, {1, 1}, 4) + mono(k, {0, 2}, 4), 2, 2);
  CHECK(row_set(lf2.rows) ==
        std::set<std::vector<std::string>>{int_row(k, {1, 1}), int_row(k, {0, 1})});
  DensePoly rebuilt = DensePoly::constant(k, 2, lf2.c);
  for (int i = 0; i < 2; ++i)
    rebuilt = rebuilt * DensePoly::linear_form(k, lf2.rows.row(i));
  CHECK(rebuilt == mono(k, {1, 1}, 4) + mono(k, {0, 2}, 4));
}

TEST_CASE("linear factor extraction handles repeated factors and powers") {
  auto k = f101();
  MatrixF A = MatrixF::from_ints(k, {{1, 2, 3}, {0, 1, 4}, {5, 0, 1}});
  REQUIRE_FALSE(det(A).is_zero());
  DensePoly delta = DensePoly::constant(k, 3, k->from_int(7));
  for (int i = 0; i < 3; ++i)
    delta = delta * DensePoly::linear_form(k, A.row(i)).pow(2);

  ExtractedForms lf = extract_linear_factors(delta, 3, 3);
  CHECK(row_set(lf.rows) == std::set<std::vector<std::string>>{
                                int_row(k, {1, 2, 3}), int_row(k, {0, 1, 4}),
                                int_row(k, {1, 0, 81})});  // (5,0,1) scaled by 1/5
  DensePoly rebuilt = DensePoly::constant(k, 3, lf.c);
  for (int i = 0; i < 3; ++i)
    rebuilt = rebuilt * DensePoly::linear_form(k, lf.rows.row(i)).pow(2);
  CHECK(rebuilt == delta);

  // multiplicity divisible by p forces a p-th-power peel first
  auto k81 = f81();
  DensePoly x = DensePoly::variable(k81, 2, 0);
  DensePoly xy = DensePoly::linear_form(k81, {k81->one(), k81->one()});
  DensePoly cube = (x * xy).pow(3).scaled(k81->gen());
  ExtractedForms lf3 = extract_linear_factors(cube, 2, 4);
  CHECK(row_set(lf3.rows) == std::set<std::vector<std::string>>{
                                 int_row(k81, {1, 0}),
                                 {k81->one().to_string(), k81->one().to_string()}});
  DensePoly rebuilt3 = DensePoly::constant(k81, 2, lf3.c);
  for (int i = 0; i < 2; ++i)
    rebuilt3 = rebuilt3 * DensePoly::linear_form(k81, lf3.rows.row(i)).pow(3);
  CHECK(rebuilt3 == cube);
}

TEST_CASE("irreducible quadratic content defeats extraction") {
  auto k = f7();  // -1 is a nonsquare mod 7, so x1^2+x2^2 has no linear factor
  DensePoly delta = mono(k, {2, 0}, 1) + mono(k, {0, 2}, 1);
  CHECK_THROWS_AS(extract_linear_factors(delta, 2, 2), NotAProduct);
}

TEST_CASE("solve recovers the classic small examples") {
  auto k = f13();

  auto pow22 = DensePolySystem::make(k, 2, 2, {mono(k, {2, 0}, 1), mono(k, {0, 2}, 1)});
  auto sol = solve_pow(pow22, 2, 0xabc);
  REQUIRE(sol.has_value());
  CHECK(verify_pow(*sol, pow22, 2));
  CHECK(sol->r == 0);
  CHECK(sol->e == 2);

  DensePoly shear = DensePoly::linear_form(k, {k->one(), k->one()}).pow(2);
  auto g2 = DensePolySystem::make(k, 2, 2, {shear, mono(k, {0, 2}, 1)});
  auto sol2 = solve_pow(g2, 2, 0xabc);
  REQUIRE(sol2.has_value());
  CHECK(verify_pow(*sol2, g2, 2));
  CHECK(row_set(sol2->A) ==
        std::set<std::vector<std::string>>{int_row(k, {1, 1}), int_row(k, {0, 1})});

  // (x1^2+x2^2, x1x2) looks asymmetric but is equivalent: its Jacobian
  // determinant is 2(x1-x2)(x1+x2) and B can mix the two squares back
  auto g3 = DensePolySystem::make(k, 2, 2,
                                  {mono(k, {2, 0}, 1) + mono(k, {0, 2}, 1), mono(k, {1, 1}, 1)});
  auto sol3 = solve_pow(g3, 2, 0xabc);
  REQUIRE(sol3.has_value());
  CHECK(verify_pow(*sol3, g3, 2));
  CHECK(row_set(sol3->A) ==
        std::set<std::vector<std::string>>{int_row(k, {1, 1}), int_row(k, {1, 12})});
}

TEST_CASE("solve rejects inequivalent systems") {
  auto k = f13();

  // irreducible Jacobian content: det J = -2(x1^2 + 2x2^2), and -2 = 11 is
  // not a square mod 13
  auto g = DensePolySystem::make(
      k, 2, 2, {mono(k, {1, 1}, 1), mono(k, {2, 0}, 1) + mono(k, {0, 2}, -2)});
  CHECK_FALSE(solve_pow(g, 2, 0x5).has_value());

  // dependent rows: identical polynomials kill the Jacobian determinant
  auto flat = DensePolySystem::make(k, 2, 2, {mono(k, {2, 0}, 1), mono(k, {2, 0}, 1)});
  CHECK_FALSE(solve_pow(flat, 2, 0x5).has_value());

  // forms extract fine but no B reproduces the system
  auto k101 = f101();
  DensePoly s12 = DensePoly::linear_form(k101, {k101->one(), k101->one(), k101->zero()}).pow(2);
  auto g2 = DensePolySystem::make(
      k101, 3, 2,
      {mono(k101, {2, 0, 0}, 1) + mono(k101, {0, 0, 2}, 1),
       mono(k101, {0, 2, 0}, 1) + mono(k101, {0, 0, 2}, -1), s12});
  CHECK_FALSE(solve_pow(g2, 2, 0x5).has_value());

  // shape rejections: inhomogeneous, wrong degree, zero member
  auto inhom = DensePolySystem::make(k, 2, 2, {mono(k, {2, 0}, 1) + mono(k, {1, 0}, 1),
                                               mono(k, {0, 2}, 1)});
  CHECK_FALSE(solve_pow(inhom, 2, 0x5).has_value());
  auto linear = DensePolySystem::make(k, 2, 1, {mono(k, {1, 0}, 1), mono(k, {0, 1}, 1)});
  CHECK_FALSE(solve_pow(linear, 2, 0x5).has_value());
  auto with_zero = DensePolySystem::make(k, 2, 2, {DensePoly(k, 2), mono(k, {0, 2}, 1)});
  CHECK_FALSE(solve_pow(with_zero, 2, 0x5).has_value());
}

TEST_CASE("planted power instances are recovered") {
  auto k = f101();
  Rng rng(2025);
  for (auto [n, d] : std::vector<std::pair<int, int>>{{2, 2}, {3, 3}, {2, 4}, {4, 2}}) {
    for (int trial = 0; trial < 3; ++trial) {
      MatrixF A = MatrixF::random_invertible(k, n, rng);
      MatrixF B = MatrixF::random_invertible(k, n, rng);
      DensePolySystem g = pow_compose(A, B, d);
      auto sol = solve_pow(g, d, rng.u64());
      REQUIRE(sol.has_value());
      CHECK(verify_pow(*sol, g, d));
      CHECK(sol->r == 0);
      CHECK(sol->e == d);
    }
  }
}

TEST_CASE("characteristic dividing the degree descends and lifts back") {
  auto k = f81();
  Rng rng(77);
  for (int trial = 0; trial < 3; ++trial) {
    MatrixF A = MatrixF::random_invertible(k, 2, rng);
    MatrixF B = MatrixF::random_invertible(k, 2, rng);

    DensePolySystem g6 = pow_compose(A, B, 6);  // 6 = 3 * 2
    auto sol6 = solve_pow(g6, 6, rng.u64());
    REQUIRE(sol6.has_value());
    CHECK(verify_pow(*sol6, g6, 6));
    CHECK(sol6->r == 1);
    CHECK(sol6->e == 2);

    DensePolySystem g3 = pow_compose(A, B, 3);  // 3 = 3 * 1: linear after descent
    auto sol3 = solve_pow(g3, 3, rng.u64());
    REQUIRE(sol3.has_value());
    CHECK(verify_pow(*sol3, g3, 3));
    CHECK(sol3->r == 1);
    CHECK(sol3->e == 1);
  }

  // a monomial blocking the descent proves there is no solution
  auto k9 = f9();
  auto stuck = DensePolySystem::make(
      k9, 2, 6, {mono(k9, {3, 3}, 1) + mono(k9, {5, 1}, 1), mono(k9, {0, 6}, 1)});
  CHECK_FALSE(solve_pow(stuck, 6, 0x5).has_value());
}
