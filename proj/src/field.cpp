#include "ip1s/field.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <sstream>

namespace ip1s {

// ====== word-level arithmetic mod p ======

namespace {

using u64 = std::uint64_t;
using u128 = unsigned __uint128_t;

inline u64 addmod(u64 a, u64 b, u64 p) {
  u64 s = a + b;
  return s >= p ? s - p : s;
}
inline u64 submod(u64 a, u64 b, u64 p) { return a >= b ? a - b : a + p - b; }
inline u64 mulmod(u64 a, u64 b, u64 p) { return (u64)(((u128)a * b) % p); }

u64 powmod_u64(u64 a, u64 e, u64 p) {
  u64 r = 1 % p;
  while (e) {
    if (e & 1) r = mulmod(r, a, p);
    a = mulmod(a, a, p);
    e >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 p) {
  if (a == 0) throw DivisionByZero("division by zero in F_p");
  // extended euclid on (a, p)
  std::int64_t t = 0, newt = 1;
  u64 r = p, newr = a;
  while (newr != 0) {
    u64 q = r / newr;
    std::int64_t tt = t - (std::int64_t)q * newt;
    t = newt;
    newt = tt;
    u64 rr = r - q * newr;
    r = newr;
    newr = rr;
  }
  if (r != 1) throw DivisionByZero("not invertible mod p");
  return t < 0 ? (u64)(t + (std::int64_t)p) : (u64)t;
}

}  // namespace

bool is_prime_u64(std::uint64_t n) {
  if (n < 2) return false;
  for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % q == 0) return n == q;
  }
  u64 d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (u64 a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    u64 x = powmod_u64(a % n, d, n);
    if (x == 0 || x == 1 || x == n - 1) continue;
    bool witness = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        witness = false;
        break;
      }
    }
    if (witness) return false;
  }
  return true;
}

// ====== flat tower kernels ======
//
// An element of a level-k context occupies ctx->total_degree() words, laid out
// as degree() blocks of parent-sized words. All kernels stay allocation-light;
// level 1 over a prime field (the hot case in practice) has a direct path.

namespace {

void span_zero(u64* o, u64 n) { std::memset(o, 0, n * sizeof(u64)); }
void span_copy(u64* o, const u64* a, u64 n) { std::memcpy(o, a, n * sizeof(u64)); }

bool span_is_zero(const u64* a, u64 n) {
  for (u64 i = 0; i < n; ++i)
    if (a[i]) return false;
  return true;
}

void span_add(const u64* a, const u64* b, u64* o, u64 n, u64 p) {
  for (u64 i = 0; i < n; ++i) o[i] = addmod(a[i], b[i], p);
}
void span_sub(const u64* a, const u64* b, u64* o, u64 n, u64 p) {
  for (u64 i = 0; i < n; ++i) o[i] = submod(a[i], b[i], p);
}
void span_neg(const u64* a, u64* o, u64 n, u64 p) {
  for (u64 i = 0; i < n; ++i) o[i] = a[i] ? p - a[i] : 0;
}

void f_mul(const FieldCtx* c, const u64* a, const u64* b, u64* o);

// o -= x * y at the parent level of c, with scratch provided by caller.
void f_submul(const FieldCtx* par, const u64* x, const u64* y, u64* o, u64* scratch) {
  f_mul(par, x, y, scratch);
  span_sub(o, scratch, o, par->total_degree(), par->characteristic());
}

void mul_level1(u64 p, u64 d, const u64* minflat, const u64* a, const u64* b, u64* o) {
  if (d == 2) {
    // common quadratic extension
    u64 c0 = mulmod(a[0], b[0], p);
    u64 c1 = addmod(mulmod(a[0], b[1], p), mulmod(a[1], b[0], p), p);
    u64 c2 = mulmod(a[1], b[1], p);
    if (c2) {
      c0 = submod(c0, mulmod(c2, minflat[0], p), p);
      c1 = submod(c1, mulmod(c2, minflat[1], p), p);
    }
    o[0] = c0;
    o[1] = c1;
    return;
  }
  std::vector<u64> acc(2 * d - 1, 0);
  for (u64 i = 0; i < d; ++i) {
    if (!a[i]) continue;
    u128 ai = a[i];
    for (u64 j = 0; j < d; ++j) acc[i + j] = (u64)((acc[i + j] + ai * b[j]) % p);
  }
  for (u64 t = 2 * d - 2; t >= d; --t) {
    u64 ct = acc[t];
    if (ct) {
      for (u64 j = 0; j < d; ++j) acc[t - d + j] = submod(acc[t - d + j], mulmod(ct, minflat[j], p), p);
    }
    if (t == d) break;
  }
  span_copy(o, acc.data(), d);
}

void f_mul(const FieldCtx* c, const u64* a, const u64* b, u64* o) {
  const u64 p = c->characteristic();
  if (c->level() == 0) {
    o[0] = mulmod(a[0], b[0], p);
    return;
  }
  const u64 d = c->degree();
  const FieldCtx* par = c->parent().get();
  const u64 ws = par->total_degree();
  const u64* mf = c->minpoly_flat().data();
  if (c->level() == 1) {
    mul_level1(p, d, mf, a, b, o);
    return;
  }
  std::vector<u64> acc((2 * d - 1) * ws, 0);
  std::vector<u64> tmp(ws);
  for (u64 i = 0; i < d; ++i) {
    if (span_is_zero(a + i * ws, ws)) continue;
    for (u64 j = 0; j < d; ++j) {
      f_mul(par, a + i * ws, b + j * ws, tmp.data());
      span_add(acc.data() + (i + j) * ws, tmp.data(), acc.data() + (i + j) * ws, ws, p);
    }
  }
  for (u64 t = 2 * d - 2; t >= d; --t) {
    u64* ct = acc.data() + t * ws;
    if (!span_is_zero(ct, ws)) {
      std::vector<u64> cc(ct, ct + ws);
      for (u64 j = 0; j < d; ++j) f_submul(par, cc.data(), mf + j * ws, acc.data() + (t - d + j) * ws, tmp.data());
    }
    if (t == d) break;
  }
  span_copy(o, acc.data(), d * ws);
}

// Polynomial helpers over the parent level, used by inversion. A polynomial is
// stored as contiguous coefficient blocks; deg is tracked by the caller.

int pdeg(const u64* a, int cap, u64 ws) {
  for (int i = cap; i >= 0; --i)
    if (!span_is_zero(a + (u64)i * ws, ws)) return i;
  return -1;
}

void f_inv(const FieldCtx* c, const u64* a, u64* o);

// q = a / b in the parent field, scratch-free interface
void f_div(const FieldCtx* par, const u64* a, const u64* b, u64* o) {
  std::vector<u64> ib(par->total_degree());
  f_inv(par, b, ib.data());
  f_mul(par, a, ib.data(), o);
}

void f_inv(const FieldCtx* c, const u64* a, u64* o) {
  const u64 p = c->characteristic();
  if (c->level() == 0) {
    o[0] = invmod(a[0], p);
    return;
  }
  const FieldCtx* par = c->parent().get();
  const u64 ws = par->total_degree();
  const int d = (int)c->degree();
  if (span_is_zero(a, c->total_degree())) throw DivisionByZero("division by zero in extension field");

  // extended euclid between the minimal polynomial and a
  std::vector<u64> r0((u64)(d + 1) * ws, 0), r1((u64)(d + 1) * ws, 0);
  span_copy(r0.data(), c->minpoly_flat().data(), (u64)d * ws);
  r0[(u64)d * ws] = 1;  // monic leading coefficient lives in the parent's constant slot
  span_copy(r1.data(), a, (u64)d * ws);
  std::vector<u64> t0((u64)(d + 1) * ws, 0), t1((u64)(d + 1) * ws, 0);
  t1[0] = 1;

  std::vector<u64> q(ws), tmp(ws);
  int deg0 = d, deg1 = pdeg(r1.data(), d, ws);
  int tdeg0 = -1, tdeg1 = 0;  // cofactor degrees grow while remainder degrees shrink
  while (deg1 > 0) {
    // one long-division step per loop: r0 -= (lead0/lead1) x^(deg0-deg1) r1
    f_div(par, r0.data() + (u64)deg0 * ws, r1.data() + (u64)deg1 * ws, q.data());
    int shift = deg0 - deg1;
    for (int j = 0; j <= deg1; ++j)
      f_submul(par, q.data(), r1.data() + (u64)j * ws, r0.data() + (u64)(j + shift) * ws, tmp.data());
    for (int j = 0; j <= tdeg1 && j + shift <= d; ++j)
      f_submul(par, q.data(), t1.data() + (u64)j * ws, t0.data() + (u64)(j + shift) * ws, tmp.data());
    if (tdeg1 + shift > tdeg0) tdeg0 = std::min(tdeg1 + shift, d);
    deg0 = pdeg(r0.data(), deg0, ws);
    if (deg0 < deg1) {
      std::swap(r0, r1);
      std::swap(t0, t1);
      std::swap(deg0, deg1);
      std::swap(tdeg0, tdeg1);
    }
  }
  if (deg1 < 0) {
    // gcd is r0; minimal polynomial irreducible means this cannot happen for a != 0
    throw DivisionByZero("non-invertible element (reducible modulus?)");
  }
  // r1 is a nonzero constant; o = t1 / r1
  std::vector<u64> ic(ws);
  f_inv(par, r1.data(), ic.data());
  for (int j = 0; j < d; ++j) f_mul(par, t1.data() + (u64)j * ws, ic.data(), o + (u64)j * ws);
}

void f_pow(const FieldCtx* c, const u64* a, const mpz_class& e, u64* o) {
  const u64 n = c->total_degree();
  span_zero(o, n);
  o[0] = 1 % c->characteristic();
  if (e == 0) return;
  std::vector<u64> base(a, a + n), tmp(n);
  mpz_class ee = e;
  if (ee < 0) throw Error("negative exponent");
  size_t bits = mpz_sizeinbase(ee.get_mpz_t(), 2);
  for (size_t i = bits; i-- > 0;) {
    f_mul(c, o, o, tmp.data());
    span_copy(o, tmp.data(), n);
    if (mpz_tstbit(ee.get_mpz_t(), i)) {
      f_mul(c, o, base.data(), tmp.data());
      span_copy(o, tmp.data(), n);
    }
  }
}

}  // namespace

// ====== FieldCtx ======

FieldPtr FieldCtx::prime_field(std::uint64_t p) {
  if (!is_prime_u64(p)) throw NotPrime("characteristic must be prime, got " + std::to_string(p));
  if (p >= (std::uint64_t{1} << 62)) throw Error("characteristic too large");
  auto ctx = std::shared_ptr<FieldCtx>(new FieldCtx());
  ctx->p_ = p;
  return ctx;
}

FieldPtr FieldCtx::extension_unchecked(const FieldPtr& parent, const std::vector<FieldElem>& minpoly_low,
                                       const TowerLimits& limits) {
  if (!parent) throw Error("null parent context");
  if (minpoly_low.size() < 2) throw Error("extension degree must be >= 2");
  const u64 d = minpoly_low.size();
  if (parent->level() + 1 > limits.max_levels)
    throw TowerDepthExceeded("tower depth limit " + std::to_string(limits.max_levels) + " exceeded");
  if (parent->total_degree() * d > limits.max_total_degree)
    throw TowerDepthExceeded("tower total degree limit exceeded");
  auto ctx = std::shared_ptr<FieldCtx>(new FieldCtx());
  ctx->p_ = parent->characteristic();
  ctx->parent_ = parent;
  ctx->level_ = parent->level() + 1;
  ctx->deg_ = d;
  ctx->words_ = parent->total_degree() * d;
  ctx->minflat_.assign(ctx->words_, 0);
  const u64 ws = parent->total_degree();
  for (u64 i = 0; i < d; ++i) {
    const FieldElem& coef = minpoly_low[i];
    if (!coef.valid() || !coef.ctx()->same_field(*parent))
      throw IncompatibleContexts("minimal polynomial coefficients must live in the parent field");
    span_copy(ctx->minflat_.data() + i * ws, coef.words().data(), ws);
  }
  return ctx;
}

mpz_class FieldCtx::order() const {
  mpz_class q;
  mpz_ui_pow_ui(q.get_mpz_t(), p_, words_);
  return q;
}

FieldElem FieldCtx::zero() const { return FieldElem(shared_from_this(), std::vector<u64>(words_, 0)); }

FieldElem FieldCtx::one() const { return from_int(1); }

FieldElem FieldCtx::from_int(std::int64_t v) const {
  std::vector<u64> w(words_, 0);
  std::int64_t m = v % (std::int64_t)p_;
  if (m < 0) m += (std::int64_t)p_;
  w[0] = (u64)m;
  return FieldElem(shared_from_this(), std::move(w));
}

FieldElem FieldCtx::from_words(std::vector<std::uint64_t> w) const {
  if (w.size() != words_) throw ShapeMismatch("coordinate vector has wrong length");
  for (auto& x : w)
    if (x >= p_) x %= p_;
  return FieldElem(shared_from_this(), std::move(w));
}

FieldElem FieldCtx::from_coeffs(const std::vector<FieldElem>& coeffs) const {
  if (level_ == 0) throw Error("from_coeffs requires an extension level");
  if (coeffs.size() > deg_) throw ShapeMismatch("too many coefficients for this level");
  std::vector<u64> w(words_, 0);
  const u64 ws = parent_->total_degree();
  for (size_t i = 0; i < coeffs.size(); ++i) {
    FieldElem c = parent_->embed(coeffs[i]);
    span_copy(w.data() + i * ws, c.words().data(), ws);
  }
  return FieldElem(shared_from_this(), std::move(w));
}

FieldElem FieldCtx::gen() const {
  if (level_ == 0) throw Error("prime field has no adjoined generator");
  std::vector<u64> w(words_, 0);
  w[parent_->total_degree()] = 1;
  return FieldElem(shared_from_this(), std::move(w));
}

FieldElem FieldCtx::embed(const FieldElem& a) const {
  if (!a.valid()) throw Error("embedding an invalid element");
  if (a.ctx()->same_field(*this)) return FieldElem(shared_from_this(), a.words());
  if (!a.ctx()->is_ancestor_of(*this))
    throw IncompatibleContexts("element does not live in an ancestor of the target context");
  std::vector<u64> w(words_, 0);
  span_copy(w.data(), a.words().data(), a.words().size());
  return FieldElem(shared_from_this(), std::move(w));
}

FieldElem FieldCtx::element_at(const mpz_class& index) const {
  std::vector<u64> w(words_, 0);
  mpz_class rest = index;
  for (u64 i = 0; i < words_ && rest != 0; ++i) {
    w[i] = mpz_fdiv_ui(rest.get_mpz_t(), p_);
    mpz_fdiv_q_ui(rest.get_mpz_t(), rest.get_mpz_t(), p_);
  }
  if (rest != 0) throw Error("enumeration index out of range");
  return FieldElem(shared_from_this(), std::move(w));
}

mpz_class FieldCtx::index_of(const FieldElem& a) const {
  mpz_class idx = 0;
  for (u64 i = words_; i-- > 0;) {
    idx *= p_;
    idx += (unsigned long)a.words()[i];
  }
  return idx;
}

FieldElem FieldCtx::sample(Rng& rng) const {
  std::vector<u64> w(words_);
  for (auto& x : w) x = rng.below(p_);
  return FieldElem(shared_from_this(), std::move(w));
}

FieldElem FieldCtx::canonical_nonsquare() const {
  if (p_ == 2) throw Error("no nonsquares in characteristic 2");
  if (!nonsquare_cache_) {
    const mpz_class q = order();
    for (mpz_class idx = 2; idx < q; ++idx) {
      FieldElem e = element_at(idx);
      if (!is_square(e)) {
        nonsquare_cache_ = e.words();
        break;
      }
    }
    if (!nonsquare_cache_) throw InternalError("no nonsquare found");
  }
  return FieldElem(shared_from_this(), *nonsquare_cache_);
}

std::vector<FieldElem> FieldCtx::minpoly_low() const {
  if (level_ == 0) throw Error("prime field has no minimal polynomial");
  std::vector<FieldElem> out;
  const u64 ws = parent_->total_degree();
  for (u64 i = 0; i < deg_; ++i)
    out.push_back(FieldElem(parent_, std::vector<u64>(minflat_.begin() + i * ws, minflat_.begin() + (i + 1) * ws)));
  return out;
}

bool FieldCtx::same_field(const FieldCtx& other) const {
  if (this == &other) return true;
  if (p_ != other.p_ || level_ != other.level_ || deg_ != other.deg_ || words_ != other.words_) return false;
  if (minflat_ != other.minflat_) return false;
  if (level_ == 0) return true;
  return parent_->same_field(*other.parent_);
}

bool FieldCtx::is_ancestor_of(const FieldCtx& other) const {
  const FieldCtx* cur = &other;
  while (cur) {
    if (same_field(*cur)) return true;
    cur = cur->parent_.get();
  }
  return false;
}

// ====== FieldElem ======

namespace {

// Lifts operands into a common context; returns that context.
const FieldPtr& align(const FieldElem& a, const FieldElem& b, FieldElem& la, FieldElem& lb) {
  if (!a.valid() || !b.valid()) throw Error("operation on invalid element");
  if (a.ctx() == b.ctx() || a.ctx()->same_field(*b.ctx())) {
    la = a;
    lb = b;
    return la.ctx();
  }
  if (a.ctx()->is_ancestor_of(*b.ctx())) {
    la = b.ctx()->embed(a);
    lb = b;
    return la.ctx();
  }
  if (b.ctx()->is_ancestor_of(*a.ctx())) {
    la = a;
    lb = a.ctx()->embed(b);
    return la.ctx();
  }
  throw IncompatibleContexts("elements live in unrelated field towers");
}

}  // namespace

bool FieldElem::is_zero() const { return span_is_zero(w_.data(), w_.size()); }

bool FieldElem::is_one() const {
  if (w_[0] != 1) return false;
  return span_is_zero(w_.data() + 1, w_.size() - 1);
}

FieldElem FieldElem::operator-() const {
  std::vector<u64> w(w_.size());
  span_neg(w_.data(), w.data(), w_.size(), ctx_->characteristic());
  return FieldElem(ctx_, std::move(w));
}

FieldElem FieldElem::inv() const {
  std::vector<u64> w(w_.size());
  f_inv(ctx_.get(), w_.data(), w.data());
  return FieldElem(ctx_, std::move(w));
}

FieldElem FieldElem::pow(std::uint64_t e) const { return pow(mpz_class((unsigned long)e)); }

FieldElem FieldElem::pow(const mpz_class& e) const {
  std::vector<u64> w(w_.size());
  f_pow(ctx_.get(), w_.data(), e, w.data());
  return FieldElem(ctx_, std::move(w));
}

FieldElem FieldElem::frobenius(std::uint64_t k) const {
  mpz_class e;
  mpz_ui_pow_ui(e.get_mpz_t(), ctx_->characteristic(), k);
  return pow(e);
}

FieldElem operator+(const FieldElem& a, const FieldElem& b) {
  FieldElem la, lb;
  const FieldPtr& c = align(a, b, la, lb);
  std::vector<u64> w(la.words().size());
  span_add(la.words().data(), lb.words().data(), w.data(), w.size(), c->characteristic());
  return FieldElem(c, std::move(w));
}

FieldElem operator-(const FieldElem& a, const FieldElem& b) {
  FieldElem la, lb;
  const FieldPtr& c = align(a, b, la, lb);
  std::vector<u64> w(la.words().size());
  span_sub(la.words().data(), lb.words().data(), w.data(), w.size(), c->characteristic());
  return FieldElem(c, std::move(w));
}

FieldElem operator*(const FieldElem& a, const FieldElem& b) {
  FieldElem la, lb;
  const FieldPtr& c = align(a, b, la, lb);
  std::vector<u64> w(la.words().size());
  f_mul(c.get(), la.words().data(), lb.words().data(), w.data());
  return FieldElem(c, std::move(w));
}

FieldElem operator/(const FieldElem& a, const FieldElem& b) { return a * b.inv(); }

bool operator==(const FieldElem& a, const FieldElem& b) {
  if (!a.valid() || !b.valid()) return a.valid() == b.valid();
  FieldElem la, lb;
  align(a, b, la, lb);
  return la.words() == lb.words();
}

bool FieldElem::lex_less(const FieldElem& b) const { return w_ < b.w_; }

std::vector<FieldElem> FieldElem::coeffs() const {
  if (ctx_->level() == 0) throw Error("prime field element has no coefficient split");
  const FieldPtr& par = ctx_->parent();
  const u64 ws = par->total_degree();
  std::vector<FieldElem> out;
  for (u64 i = 0; i < ctx_->degree(); ++i)
    out.push_back(FieldElem(par, std::vector<u64>(w_.begin() + i * ws, w_.begin() + (i + 1) * ws)));
  return out;
}

std::string FieldElem::to_string() const {
  if (ctx_->level() == 0) return std::to_string(w_[0]);
  std::string s = "(";
  auto cs = coeffs();
  for (size_t i = 0; i < cs.size(); ++i) {
    if (i) s += ",";
    s += cs[i].to_string();
  }
  return s + ")";
}

// ====== squares and square roots ======

bool is_square(const FieldElem& a) {
  if (!a.valid()) throw Error("is_square on invalid element");
  if (a.ctx()->characteristic() == 2) return true;
  if (a.is_zero()) return true;
  mpz_class e = (a.ctx()->order() - 1) / 2;
  return a.pow(e).is_one();
}

FieldElem sqrt(const FieldElem& a) {
  const FieldPtr& ctx = a.ctx();
  const u64 p = ctx->characteristic();
  if (a.is_zero()) return ctx->zero();
  if (p == 2) {
    // Frobenius inverse: a^(q/2), i.e. total_degree-1 squarings
    FieldElem r = a;
    for (u64 i = 1; i < ctx->total_degree(); ++i) r = r * r;
    return r;
  }
  mpz_class q = ctx->order();
  mpz_class t = q - 1;
  unsigned long s = mpz_scan1(t.get_mpz_t(), 0);
  mpz_fdiv_q_2exp(t.get_mpz_t(), t.get_mpz_t(), s);

  FieldElem x = a.pow((t + 1) / 2);
  FieldElem b = a.pow(t);
  if (!b.is_one()) {
    FieldElem g = ctx->canonical_nonsquare().pow(t);
    unsigned long m = s;
    while (!b.is_one()) {
      FieldElem bb = b;
      unsigned long i = 0;
      while (!bb.is_one()) {
        bb = bb * bb;
        ++i;
        if (i >= m) throw NonSquareElement("element has no square root in its field");
      }
      FieldElem e = g;
      for (unsigned long j = 0; j + i + 1 < m; ++j) e = e * e;
      m = i;
      g = e * e;
      x = x * e;
      b = b * g;
    }
  }
  FieldElem neg = -x;
  return x.lex_less(neg) ? x : neg;
}

int trace_to_f2(const FieldElem& a) {
  if (a.ctx()->characteristic() != 2) throw Error("trace_to_f2 requires characteristic 2");
  FieldElem acc = a, cur = a;
  for (u64 i = 1; i < a.ctx()->total_degree(); ++i) {
    cur = cur * cur;
    acc = acc + cur;
  }
  if (acc.is_zero()) return 0;
  if (acc.is_one()) return 1;
  throw InternalError("absolute trace landed outside F_2");
}

std::optional<FieldElem> artin_schreier_root(const FieldElem& d) {
  const FieldPtr& ctx = d.ctx();
  if (ctx->characteristic() != 2) throw Error("artin_schreier_root requires characteristic 2");
  const u64 k = ctx->total_degree();
  // matrix of x -> x^2 + x on the F_2 coordinate basis, columns stacked
  std::vector<std::vector<u64>> col(k);
  for (u64 j = 0; j < k; ++j) {
    std::vector<u64> w(k, 0);
    w[j] = 1;
    FieldElem e = ctx->from_words(w);
    col[j] = (e * e + e).words();
  }
  // solve col * x = d by dense F_2 elimination
  std::vector<std::vector<u64>> m(k, std::vector<u64>(k + 1));
  for (u64 i = 0; i < k; ++i) {
    for (u64 j = 0; j < k; ++j) m[i][j] = col[j][i];
    m[i][k] = d.words()[i];
  }
  std::vector<int> pivot_col(k, -1);
  u64 row = 0;
  for (u64 c = 0; c < k && row < k; ++c) {
    u64 r = row;
    while (r < k && !m[r][c]) ++r;
    if (r == k) continue;
    std::swap(m[r], m[row]);
    for (u64 i = 0; i < k; ++i)
      if (i != row && m[i][c])
        for (u64 j = c; j <= k; ++j) m[i][j] ^= m[row][j];
    pivot_col[row] = (int)c;
    ++row;
  }
  for (u64 i = row; i < k; ++i)
    if (m[i][k]) return std::nullopt;
  std::vector<u64> x(k, 0);
  for (u64 i = 0; i < row; ++i) x[pivot_col[i]] = m[i][k];
  return ctx->from_words(std::move(x));
}

// ====== text form ======

namespace {

void skip_ws(const std::string& s, size_t& i) {
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
}

// parses an element recursively: integer or (e,e,...)
FieldElem parse_elem_rec(const FieldPtr& ctx, const std::string& s, size_t& i) {
  skip_ws(s, i);
  if (i < s.size() && s[i] == '(') {
    if (ctx->level() == 0) throw ParseError("tuple syntax in a prime field");
    ++i;
    std::vector<FieldElem> cs;
    skip_ws(s, i);
    if (i < s.size() && s[i] == ')') {
      ++i;
    } else {
      while (true) {
        cs.push_back(parse_elem_rec(ctx->parent(), s, i));
        skip_ws(s, i);
        if (i < s.size() && s[i] == ',') {
          ++i;
          continue;
        }
        if (i < s.size() && s[i] == ')') {
          ++i;
          break;
        }
        throw ParseError("expected ',' or ')' in element tuple");
      }
    }
    return ctx->from_coeffs(cs);
  }
  bool neg = false;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) {
    neg = s[i] == '-';
    ++i;
  }
  if (i >= s.size() || !isdigit((unsigned char)s[i])) throw ParseError("expected integer element");
  std::uint64_t v = 0;
  while (i < s.size() && isdigit((unsigned char)s[i])) {
    v = v * 10 + (s[i] - '0');
    v %= ctx->characteristic();  // keep small while reading
    ++i;
  }
  std::int64_t sv = (std::int64_t)v;
  return ctx->from_int(neg ? -sv : sv);
}

}  // namespace

FieldElem FieldCtx::parse_elem(const std::string& text) const {
  size_t i = 0;
  FieldElem e = parse_elem_rec(shared_from_this(), text, i);
  skip_ws(text, i);
  if (i != text.size()) throw ParseError("trailing characters after element");
  return e;
}

std::string FieldCtx::spec_string() const {
  // collect the chain root-first
  std::vector<const FieldCtx*> chain;
  for (const FieldCtx* c = this; c; c = c->parent_.get()) chain.push_back(c);
  std::reverse(chain.begin(), chain.end());
  std::string s = "p=" + std::to_string(p_);
  if (chain.size() > 1) {
    s += "; ext=";
    for (size_t li = 1; li < chain.size(); ++li) {
      if (li > 1) s += ",";
      s += "[";
      auto low = chain[li]->minpoly_low();
      for (size_t i = 0; i < low.size(); ++i) {
        if (i) s += ",";
        s += low[i].to_string();
      }
      s += ",1]";
    }
  }
  return s;
}

FieldPtr FieldCtx::parse_spec(const std::string& text) {
  size_t i = 0;
  skip_ws(text, i);
  if (text.compare(i, 2, "p=") != 0) throw ParseError("field spec must start with p=");
  i += 2;
  std::uint64_t p = 0;
  if (i >= text.size() || !isdigit((unsigned char)text[i])) throw ParseError("expected prime after p=");
  while (i < text.size() && isdigit((unsigned char)text[i])) {
    p = p * 10 + (text[i] - '0');
    ++i;
  }
  FieldPtr ctx = prime_field(p);
  skip_ws(text, i);
  if (i == text.size()) return ctx;
  if (text[i] != ';') throw ParseError("expected ';' before ext=");
  ++i;
  skip_ws(text, i);
  if (text.compare(i, 4, "ext=") != 0) throw ParseError("expected ext= after ';'");
  i += 4;
  TowerLimits limits;
  limits.max_levels = 64;  // parsing an existing spec should not re-apply build limits
  limits.max_total_degree = std::uint64_t{1} << 20;
  while (true) {
    skip_ws(text, i);
    if (i >= text.size() || text[i] != '[') throw ParseError("expected '[' starting a minimal polynomial");
    ++i;
    std::vector<FieldElem> coeffs;
    while (true) {
      coeffs.push_back(parse_elem_rec(ctx, text, i));
      skip_ws(text, i);
      if (i < text.size() && text[i] == ',') {
        ++i;
        continue;
      }
      if (i < text.size() && text[i] == ']') {
        ++i;
        break;
      }
      throw ParseError("expected ',' or ']' in minimal polynomial");
    }
    if (coeffs.size() < 3) throw ParseError("minimal polynomial must have degree >= 2");
    if (!coeffs.back().is_one()) throw ParseError("minimal polynomial must be monic (trailing coefficient 1)");
    coeffs.pop_back();
    ctx = extension_unchecked(ctx, coeffs, limits);
    skip_ws(text, i);
    if (i < text.size() && text[i] == ',') {
      ++i;
      continue;
    }
    break;
  }
  skip_ws(text, i);
  if (i != text.size()) throw ParseError("trailing characters in field spec");
  return ctx;
}

}  // namespace ip1s
