#include "ip1s/unipoly.hpp"

#include <algorithm>
#include <map>

namespace ip1s {

// ====== construction and ring operations ======

void UniPoly::trim() {
  while (!c_.empty() && c_.back().is_zero()) c_.pop_back();
}

UniPoly UniPoly::from_coeffs(const FieldPtr& ctx, std::vector<FieldElem> coeffs) {
  UniPoly p(ctx);
  for (auto& c : coeffs) p.c_.push_back(ctx->embed(c));
  p.trim();
  return p;
}

UniPoly UniPoly::from_ints(const FieldPtr& ctx, const std::vector<std::int64_t>& coeffs) {
  std::vector<FieldElem> cs;
  cs.reserve(coeffs.size());
  for (auto v : coeffs) cs.push_back(ctx->from_int(v));
  return from_coeffs(ctx, std::move(cs));
}

UniPoly UniPoly::one(const FieldPtr& ctx) { return constant(ctx->one()); }

UniPoly UniPoly::x(const FieldPtr& ctx) { return monomial(ctx->one(), 1); }

UniPoly UniPoly::constant(const FieldElem& c) {
  UniPoly p(c.ctx());
  if (!c.is_zero()) p.c_.push_back(c);
  return p;
}

UniPoly UniPoly::monomial(const FieldElem& c, std::uint64_t e) {
  UniPoly p(c.ctx());
  if (!c.is_zero()) {
    p.c_.assign(e, c.ctx()->zero());
    p.c_.push_back(c);
  }
  return p;
}

UniPoly UniPoly::operator-() const {
  UniPoly r(ctx_);
  r.c_.reserve(c_.size());
  for (const auto& c : c_) r.c_.push_back(-c);
  return r;
}

UniPoly operator+(const UniPoly& a, const UniPoly& b) {
  const auto& ctx = a.ctx_ ? a.ctx_ : b.ctx_;
  UniPoly r(ctx);
  const size_t n = std::max(a.c_.size(), b.c_.size());
  r.c_.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    if (i < a.c_.size() && i < b.c_.size())
      r.c_.push_back(a.c_[i] + b.c_[i]);
    else
      r.c_.push_back(i < a.c_.size() ? ctx->embed(a.c_[i]) : ctx->embed(b.c_[i]));
  }
  r.trim();
  return r;
}

UniPoly operator-(const UniPoly& a, const UniPoly& b) { return a + (-b); }

UniPoly operator*(const UniPoly& a, const UniPoly& b) {
  const auto& ctx = a.ctx_ ? a.ctx_ : b.ctx_;
  UniPoly r(ctx);
  if (a.is_zero() || b.is_zero()) return r;
  r.c_.assign(a.c_.size() + b.c_.size() - 1, ctx->zero());
  for (size_t i = 0; i < a.c_.size(); ++i) {
    if (a.c_[i].is_zero()) continue;
    for (size_t j = 0; j < b.c_.size(); ++j) r.c_[i + j] += a.c_[i] * b.c_[j];
  }
  r.trim();
  return r;
}

UniPoly UniPoly::scaled(const FieldElem& c) const {
  UniPoly r(ctx_);
  if (c.is_zero()) return r;
  r.c_.reserve(c_.size());
  for (const auto& x : c_) r.c_.push_back(x * c);
  r.trim();
  return r;
}

UniPoly UniPoly::shifted(std::uint64_t k) const {
  if (is_zero()) return *this;
  UniPoly r(ctx_);
  r.c_.assign(k, ctx_->zero());
  r.c_.insert(r.c_.end(), c_.begin(), c_.end());
  return r;
}

bool operator==(const UniPoly& a, const UniPoly& b) {
  if (a.c_.size() != b.c_.size()) return false;
  for (size_t i = 0; i < a.c_.size(); ++i)
    if (a.c_[i] != b.c_[i]) return false;
  return true;
}

std::pair<UniPoly, UniPoly> UniPoly::divmod(const UniPoly& d) const {
  if (d.is_zero()) throw DivisionByZero("polynomial division by zero");
  UniPoly q(ctx_), r = *this;
  if (degree() < d.degree()) return {q, r};
  q.c_.assign(degree() - d.degree() + 1, ctx_->zero());
  FieldElem dlin = d.lead().inv();
  while (!r.is_zero() && r.degree() >= d.degree()) {
    FieldElem f = r.lead() * dlin;
    int shift = r.degree() - d.degree();
    q.c_[shift] = f;
    for (int j = 0; j <= d.degree(); ++j) r.c_[j + shift] -= f * d.c_[j];
    r.trim();
  }
  q.trim();
  return {q, r};
}

UniPoly UniPoly::make_monic() const {
  if (is_zero()) return *this;
  return scaled(lead().inv());
}

UniPoly UniPoly::derivative() const {
  UniPoly r(ctx_);
  for (size_t i = 1; i < c_.size(); ++i) r.c_.push_back(c_[i] * ctx_->from_int((std::int64_t)i));
  r.trim();
  return r;
}

FieldElem UniPoly::eval(const FieldElem& x) const {
  FieldElem acc = x.ctx()->zero();
  for (size_t i = c_.size(); i-- > 0;) acc = acc * x + c_[i];
  return acc;
}

UniPoly UniPoly::lift(const FieldPtr& ext) const {
  UniPoly r(ext);
  for (const auto& c : c_) r.c_.push_back(ext->embed(c));
  return r;
}

std::string UniPoly::to_string(const std::string& var) const {
  if (is_zero()) return "0";
  std::string s;
  for (size_t i = c_.size(); i-- > 0;) {
    if (c_[i].is_zero()) continue;
    if (!s.empty()) s += " + ";
    if (i == 0 || !c_[i].is_one()) s += c_[i].to_string();
    if (i > 0) {
      if (!c_[i].is_one()) s += "*";
      s += var;
      if (i > 1) s += "^" + std::to_string(i);
    }
  }
  return s;
}

// ====== gcds and modular arithmetic ======

UniPoly gcd_poly(const UniPoly& a, const UniPoly& b) {
  UniPoly x = a, y = b;
  while (!y.is_zero()) {
    UniPoly r = x % y;
    x = y;
    y = r;
  }
  return x.make_monic();
}

void ext_gcd_poly(const UniPoly& a, const UniPoly& b, UniPoly& g, UniPoly& u, UniPoly& v) {
  const auto& ctx = a.ctx() ? a.ctx() : b.ctx();
  UniPoly r0 = a, r1 = b;
  UniPoly s0 = UniPoly::one(ctx), s1 = UniPoly::zero(ctx);
  UniPoly t0 = UniPoly::zero(ctx), t1 = UniPoly::one(ctx);
  while (!r1.is_zero()) {
    auto [q, r] = r0.divmod(r1);
    r0 = r1;
    r1 = r;
    UniPoly s = s0 - q * s1;
    s0 = s1;
    s1 = s;
    UniPoly t = t0 - q * t1;
    t0 = t1;
    t1 = t;
  }
  if (r0.is_zero()) {
    g = r0;
    u = s0;
    v = t0;
    return;
  }
  FieldElem lin = r0.lead().inv();
  g = r0.scaled(lin);
  u = s0.scaled(lin);
  v = t0.scaled(lin);
}

UniPoly mul_mod(const UniPoly& a, const UniPoly& b, const UniPoly& mod) { return (a * b) % mod; }

UniPoly pow_mod(const UniPoly& a, const mpz_class& e, const UniPoly& mod) {
  UniPoly r = UniPoly::one(mod.ctx()) % mod;
  UniPoly base = a % mod;
  if (e == 0) return r;
  size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
  for (size_t i = bits; i-- > 0;) {
    r = mul_mod(r, r, mod);
    if (mpz_tstbit(e.get_mpz_t(), i)) r = mul_mod(r, base, mod);
  }
  return r;
}

UniPoly compose_mod(const UniPoly& f, const UniPoly& g, const UniPoly& h) {
  UniPoly acc = UniPoly::zero(h.ctx());
  for (int i = f.degree(); i >= 0; --i) {
    acc = mul_mod(acc, g, h);
    acc = acc + UniPoly::constant(f.coeff((std::uint64_t)i));
  }
  return acc % h;
}

UniPoly frobenius_power_x(const UniPoly& f, std::uint64_t k) {
  const auto& ctx = f.ctx();
  if (k == 0) return UniPoly::x(ctx) % f;
  // x^q directly, then iterate by composition: valid because every
  // coefficient c of x^q mod f satisfies c^q = c, so (x^q mod f)^q
  // really is the composition with itself.
  UniPoly xq = pow_mod(UniPoly::x(ctx), ctx->order(), f);
  UniPoly acc = xq;
  for (std::uint64_t i = 1; i < k; ++i) acc = compose_mod(acc, xq, f);
  return acc;
}

// ====== squarefree decomposition ======

namespace {

// coefficient-wise p-th root of a polynomial in x^p
UniPoly poly_pth_root(const UniPoly& f) {
  const auto& ctx = f.ctx();
  const std::uint64_t p = ctx->characteristic();
  std::vector<FieldElem> cs;
  for (int i = 0; i <= f.degree(); i += (int)p) {
    FieldElem c = f.coeff((std::uint64_t)i);
    // p-th root in F_q: apply Frobenius total_degree-1 times
    for (std::uint64_t j = 1; j < ctx->total_degree(); ++j) c = c.pow(p);
    cs.push_back(c);
  }
  return UniPoly::from_coeffs(ctx, std::move(cs));
}

void squarefree_decomp(const UniPoly& f, int outer_mult, std::vector<std::pair<UniPoly, int>>& out) {
  const auto& ctx = f.ctx();
  const std::uint64_t p = ctx->characteristic();
  if (f.degree() <= 0) return;
  UniPoly fp = f.derivative();
  if (fp.is_zero()) {
    squarefree_decomp(poly_pth_root(f), outer_mult * (int)p, out);
    return;
  }
  UniPoly c = gcd_poly(f, fp);
  UniPoly w = f / c;
  int i = 1;
  while (w.degree() > 0) {
    UniPoly y = gcd_poly(w, c);
    UniPoly z = w / y;
    if (z.degree() > 0) out.emplace_back(z.make_monic(), i * outer_mult);
    ++i;
    w = y;
    c = c / y;
  }
  if (c.degree() > 0) squarefree_decomp(poly_pth_root(c), outer_mult * (int)p, out);
}

}  // namespace

UniPoly squarefree_part(const UniPoly& f) {
  std::vector<std::pair<UniPoly, int>> parts;
  squarefree_decomp(f.make_monic(), 1, parts);
  UniPoly r = UniPoly::one(f.ctx());
  for (auto& [g, m] : parts) r = r * g;
  return r;
}

// ====== irreducibility and factorization ======

bool is_irreducible(const UniPoly& f) {
  if (f.degree() <= 0) return false;
  if (f.degree() == 1) return true;
  const auto& ctx = f.ctx();
  UniPoly fm = f.make_monic();
  const std::uint64_t d = (std::uint64_t)fm.degree();
  // Rabin: x^(q^d) == x mod f, and x^(q^(d/l)) - x coprime to f for prime l | d
  std::vector<std::uint64_t> prime_divs;
  std::uint64_t dd = d;
  for (std::uint64_t q = 2; q * q <= dd; ++q)
    while (dd % q == 0) {
      if (prime_divs.empty() || prime_divs.back() != q) prime_divs.push_back(q);
      dd /= q;
    }
  if (dd > 1) prime_divs.push_back(dd);

  UniPoly xq = frobenius_power_x(fm);  // x^q mod f
  // build x^(q^k) incrementally and check at the required exponents
  std::vector<UniPoly> cache(d + 1);
  cache[1] = xq;
  auto frob_iter = [&](std::uint64_t k) {
    if (cache[k].degree() >= 0 || k == 0) return cache[k];
    UniPoly acc = xq;
    for (std::uint64_t i = 1; i < k; ++i) acc = compose_mod(acc, xq, fm);
    cache[k] = acc;
    return acc;
  };
  UniPoly xx = UniPoly::x(ctx) % fm;
  if (frob_iter(d) != xx) return false;
  for (std::uint64_t l : prime_divs) {
    UniPoly h = frob_iter(d / l) - xx;
    if (gcd_poly(h, fm).degree() != 0) return false;
  }
  return true;
}

namespace {

// distinct-degree stage: returns (product of irreducibles of degree d, d)
std::vector<std::pair<UniPoly, int>> distinct_degree(const UniPoly& f) {
  std::vector<std::pair<UniPoly, int>> out;
  UniPoly rest = f;
  const auto& ctx = f.ctx();
  UniPoly xq = frobenius_power_x(rest);
  UniPoly h = xq;  // x^(q^d) mod rest, recomputed as rest shrinks
  int d = 0;
  while (rest.degree() > 0) {
    ++d;
    if (2 * d > rest.degree()) {
      out.emplace_back(rest, rest.degree());
      break;
    }
    UniPoly g = gcd_poly(h - UniPoly::x(ctx), rest);
    if (g.degree() > 0) {
      out.emplace_back(g, d);
      rest = rest / g;
      if (rest.degree() == 0) break;
      h = h % rest;
      xq = xq % rest;
    }
    h = compose_mod(h, xq, rest);
  }
  return out;
}

UniPoly random_poly_below(const FieldPtr& ctx, int deg, Rng& rng) {
  std::vector<FieldElem> cs;
  for (int i = 0; i < deg; ++i) cs.push_back(ctx->sample(rng));
  return UniPoly::from_coeffs(ctx, std::move(cs));
}

void equal_degree_split(const UniPoly& f, int d, Rng& rng, std::vector<UniPoly>& out) {
  if (f.degree() == d) {
    out.push_back(f.make_monic());
    return;
  }
  const auto& ctx = f.ctx();
  const std::uint64_t p = ctx->characteristic();
  UniPoly g(ctx);
  for (int tries = 0; tries < 256; ++tries) {
    UniPoly a = random_poly_below(ctx, f.degree(), rng);
    if (a.degree() < 1) continue;
    UniPoly b(ctx);
    if (p == 2) {
      // trace map sum_{i < k*d} a^(2^i) mod f
      UniPoly acc = a % f, cur = a % f;
      std::uint64_t steps = ctx->total_degree() * (std::uint64_t)d;
      for (std::uint64_t i = 1; i < steps; ++i) {
        cur = mul_mod(cur, cur, f);
        acc = acc + cur;
      }
      b = acc;
    } else {
      mpz_class e;
      mpz_pow_ui(e.get_mpz_t(), ctx->order().get_mpz_t(), (unsigned long)d);
      e = (e - 1) / 2;
      b = pow_mod(a, e, f) - UniPoly::one(ctx);
    }
    UniPoly g1 = gcd_poly(b, f);
    if (g1.degree() > 0 && g1.degree() < f.degree()) {
      g = g1;
      break;
    }
  }
  if (g.is_zero()) throw InternalError("equal-degree splitting failed to find a factor");
  equal_degree_split(g, d, rng, out);
  equal_degree_split(f / g, d, rng, out);
}

// deterministic Berlekamp for small fields
void berlekamp_split(const UniPoly& f, std::vector<UniPoly>& out) {
  const auto& ctx = f.ctx();
  const mpz_class q = ctx->order();
  if (q > 4096) throw Error("Berlekamp splitting requires a small field (order <= 4096)");
  const int n = f.degree();
  // matrix rows: x^(iq) mod f for i = 0..n-1, as coefficient vectors
  UniPoly xq = frobenius_power_x(f);
  std::vector<std::vector<FieldElem>> M(n, std::vector<FieldElem>(n, ctx->zero()));
  UniPoly cur = UniPoly::one(ctx);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= cur.degree(); ++j) M[i][j] = cur.coeff((std::uint64_t)j);
    M[i][i] -= ctx->one();  // subtract identity: kernel of (Q - I)
    cur = mul_mod(cur, xq, f);
  }
  // kernel basis of M^T acting on row vectors v: v*(Q - I) = 0, i.e. rows here
  // span the image; kernel via elimination on columns. Transpose and eliminate.
  std::vector<std::vector<FieldElem>> A(n, std::vector<FieldElem>(n, ctx->zero()));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A[i][j] = M[j][i];
  std::vector<int> pivot_of_col(n, -1);
  int rank = 0;
  for (int c = 0; c < n && rank < n; ++c) {
    int r = rank;
    while (r < n && A[r][c].is_zero()) ++r;
    if (r == n) continue;
    std::swap(A[r], A[rank]);
    FieldElem inv = A[rank][c].inv();
    for (int j = 0; j < n; ++j) A[rank][j] = A[rank][j] * inv;
    for (int i = 0; i < n; ++i) {
      if (i == rank || A[i][c].is_zero()) continue;
      FieldElem m = A[i][c];
      for (int j = 0; j < n; ++j) A[i][j] -= m * A[rank][j];
    }
    pivot_of_col[c] = rank;
    ++rank;
  }
  std::vector<UniPoly> basis;
  for (int c = 0; c < n; ++c) {
    if (pivot_of_col[c] >= 0) continue;
    std::vector<FieldElem> v(n, ctx->zero());
    v[c] = ctx->one();
    for (int cc = 0; cc < n; ++cc)
      if (pivot_of_col[cc] >= 0) v[cc] = -A[pivot_of_col[cc]][c];
    basis.push_back(UniPoly::from_coeffs(ctx, v));
  }
  std::vector<UniPoly> parts{f.make_monic()};
  for (const auto& b : basis) {
    if (b.degree() < 1) continue;
    if ((int)parts.size() == (int)basis.size()) break;
    std::vector<UniPoly> next;
    for (const auto& part : parts) {
      if (part.degree() == 1) {
        next.push_back(part);
        continue;
      }
      UniPoly rest = part;
      for (mpz_class idx = 0; idx < q && rest.degree() > 0; ++idx) {
        UniPoly g = gcd_poly(b - UniPoly::constant(ctx->element_at(idx)), rest);
        if (g.degree() > 0 && g.degree() <= rest.degree()) {
          next.push_back(g);
          rest = rest / g;
        }
      }
      if (rest.degree() > 0) next.push_back(rest);
    }
    parts = std::move(next);
  }
  for (auto& p : parts) out.push_back(p.make_monic());
}

}  // namespace

std::vector<FactorPiece> factor_univariate(const UniPoly& f, std::uint64_t seed, FactorAlgo algo) {
  if (f.is_zero()) throw Error("factoring the zero polynomial");
  std::vector<FactorPiece> out;
  UniPoly fm = f.make_monic();
  if (fm.degree() == 0) return out;
  Rng rng(seed);

  std::vector<std::pair<UniPoly, int>> sqf;
  squarefree_decomp(fm, 1, sqf);
  for (auto& [part, mult] : sqf) {
    if (algo == FactorAlgo::Berlekamp) {
      std::vector<UniPoly> irr;
      berlekamp_split(part, irr);
      for (auto& g : irr) out.push_back({g, mult});
      continue;
    }
    for (auto& [g, d] : distinct_degree(part)) {
      std::vector<UniPoly> irr;
      equal_degree_split(g, d, rng, irr);
      for (auto& h : irr) out.push_back({h, mult});
    }
  }
  const auto& ctx = fm.ctx();
  std::sort(out.begin(), out.end(), [&ctx](const FactorPiece& a, const FactorPiece& b) {
    if (a.factor.degree() != b.factor.degree()) return a.factor.degree() < b.factor.degree();
    for (int i = a.factor.degree(); i >= 0; --i) {
      const FieldElem ca = a.factor.coeff((std::uint64_t)i), cb = b.factor.coeff((std::uint64_t)i);
      if (ca != cb) return ctx->index_of(ca) < ctx->index_of(cb);
    }
    return false;
  });
  return out;
}

std::vector<FieldElem> roots_in_field(const UniPoly& f, std::uint64_t seed) {
  const auto& ctx = f.ctx();
  UniPoly fm = f.make_monic();
  UniPoly xq = frobenius_power_x(fm);
  UniPoly lin = gcd_poly(xq - UniPoly::x(ctx), fm);
  std::vector<FieldElem> roots;
  if (lin.degree() <= 0) return roots;
  for (auto& piece : factor_univariate(lin, seed)) {
    if (piece.factor.degree() != 1) throw InternalError("nonlinear factor in root extraction");
    roots.push_back(-piece.factor.coeff(0));
  }
  return roots;
}

FieldPtr adjoin_root(const UniPoly& minpoly, const TowerLimits& limits) {
  if (!minpoly.is_monic()) throw ReduciblePolynomial("minimal polynomial must be monic");
  if (minpoly.degree() < 2) throw ReduciblePolynomial("minimal polynomial must have degree >= 2");
  if (!is_irreducible(minpoly)) throw ReduciblePolynomial("minimal polynomial is reducible");
  std::vector<FieldElem> low(minpoly.coeffs().begin(), minpoly.coeffs().end() - 1);
  return FieldCtx::extension_unchecked(minpoly.ctx(), low, limits);
}

UniPoly random_irreducible(const FieldPtr& ctx, int degree, Rng& rng) {
  if (degree < 1) throw ShapeMismatch("irreducible polynomials have degree >= 1");
  // a fraction ~1/degree of monic polynomials is irreducible, so this ends fast
  for (int tries = 0; tries < 256 * degree; ++tries) {
    std::vector<FieldElem> c;
    c.reserve((size_t)degree + 1);
    for (int i = 0; i < degree; ++i) c.push_back(ctx->sample(rng));
    c.push_back(ctx->one());
    UniPoly f = UniPoly::from_coeffs(ctx, c);
    if (is_irreducible(f)) return f;
  }
  throw InternalError("rejection sampling failed to hit an irreducible polynomial");
}

}  // namespace ip1s
