#include "ip1s/sqrtmat.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <utility>

#include "ip1s/errors.hpp"
#include "ip1s/rng.hpp"

namespace ip1s {

namespace {

using u64 = std::uint64_t;

// ---- polynomial helpers ----

// P(z^2)
UniPoly subst_z_squared(const UniPoly& p) {
  const FieldPtr& ctx = p.ctx();
  std::vector<FieldElem> c(2 * (size_t)std::max(p.degree(), 0) + 1, ctx->zero());
  for (int i = 0; i <= p.degree(); ++i) c[2 * (size_t)i] = p.coeff((u64)i);
  return UniPoly::from_coeffs(ctx, c);
}

// Q(-z)
UniPoly negate_arg(const UniPoly& q) {
  std::vector<FieldElem> c = q.coeffs();
  for (size_t i = 1; i < c.size(); i += 2) c[i] = -c[i];
  return UniPoly::from_coeffs(q.ctx(), c);
}

UniPoly poly_pow(const UniPoly& p, int e) {
  UniPoly r = UniPoly::one(p.ctx());
  for (int i = 0; i < e; ++i) r = r * p;
  return r;
}

// x with x = r1 mod m1, x = r2 mod m2 for coprime moduli.
UniPoly crt_pair(const UniPoly& r1, const UniPoly& m1, const UniPoly& r2, const UniPoly& m2) {
  UniPoly g, a, b;
  ext_gcd_poly(m1, m2, g, a, b);
  if (g.degree() != 0) throw InternalError("crt moduli are not coprime");
  UniPoly inv = a.scaled(g.coeff(0).inv());
  UniPoly t = (inv * ((r2 - r1) % m2)) % m2;
  return r1 + m1 * t;
}

// binom(1/2, k) for k = 0..count-1; the k-th term needs k! invertible, so the
// characteristic bounds the usable block size.
std::vector<FieldElem> binom_half_series(const FieldPtr& ctx, int count) {
  std::vector<FieldElem> c{ctx->one()};
  if (count <= 1) return c;
  const u64 p = ctx->characteristic();
  const FieldElem half = ctx->from_int(2).inv();
  for (int k = 1; k < count; ++k) {
    if ((u64)k % p == 0)
      throw BlockTooLarge("square-root series needs block size below the characteristic");
    c.push_back(c.back() * (half - ctx->from_int(k - 1)) * ctx->from_int(k).inv());
  }
  return c;
}

// Upper triangular Toeplitz square root of J_{zeta,d}: entry on the k-th
// superdiagonal is binom(1/2,k) * omega^(1-2k).
MatrixF toeplitz_root(const FieldElem& omega, const FieldElem& zeta, int d) {
  const FieldPtr& ctx = omega.ctx();
  auto series = binom_half_series(ctx, d);
  MatrixF g(ctx, d, d);
  const FieldElem zinv = zeta.inv();
  FieldElem band = omega;  // omega * zeta^-k, so omega^(1-2k) after the series factor
  for (int k = 0; k < d; ++k) {
    const FieldElem v = series[(size_t)k] * band;
    for (int i = 0; i + k < d; ++i) g.at(i, i + k) = v;
    band = band * zinv;
  }
  return g;
}

// ---- matrix helpers ----

// Companion matrix: subdiagonal ones, last column -coefficients. Matches the
// block layout used by the rational canonical form.
MatrixF companion_of(const UniPoly& p) {
  const FieldPtr& ctx = p.ctx();
  const int d = p.degree();
  MatrixF c(ctx, d, d);
  for (int t = 0; t + 1 < d; ++t) c.at(t + 1, t) = ctx->one();
  for (int t = 0; t < d; ++t) c.at(t, d - 1) = -p.coeff((u64)t);
  return c;
}

// e linked copies of C(p): ones in the bottom-left corner of each
// superdiagonal block, as in the primary rational canonical form.
MatrixF linked_block(const UniPoly& p, int e) {
  const FieldPtr& ctx = p.ctx();
  const int d = p.degree();
  MatrixF g(ctx, e * d, e * d);
  for (int j = 0; j < e; ++j) {
    const int off = j * d;
    for (int t = 0; t + 1 < d; ++t) g.at(off + t + 1, off + t) = ctx->one();
    for (int t = 0; t < d; ++t) g.at(off + t, off + d - 1) = -p.coeff((u64)t);
    if (j + 1 < e) g.at(off + d - 1, off + d) = ctx->one();
  }
  return g;
}

// Columns v, m v, ..., m^(len-1) v.
MatrixF krylov_cols(const MatrixF& m, const std::vector<FieldElem>& v, int len) {
  MatrixF x(m.ctx(), (int)v.size(), len);
  std::vector<FieldElem> cur = v;
  for (int k = 0; k < len; ++k) {
    x.set_col(k, cur);
    if (k + 1 < len) cur = m.mul_vec(cur);
  }
  return x;
}

// Basis in which a cyclic matrix becomes the companion matrix of its minimal
// polynomial. The start vector of the last linked copy is usually cyclic; the
// fallbacks cover the rest.
MatrixF cyclic_change(const MatrixF& b, int d, int e) {
  const FieldPtr& ctx = b.ctx();
  const int span = b.rows();
  auto attempt = [&](const std::vector<FieldElem>& v) -> std::optional<MatrixF> {
    MatrixF x = krylov_cols(b, v, span);
    if (det(x).is_zero()) return std::nullopt;
    return x;
  };
  std::vector<FieldElem> v((size_t)span, ctx->zero());
  v[(size_t)((e - 1) * d)] = ctx->one();
  if (auto x = attempt(v)) return *x;
  for (int i = 0; i < span; ++i) {
    std::fill(v.begin(), v.end(), ctx->zero());
    v[(size_t)i] = ctx->one();
    if (auto x = attempt(v)) return *x;
  }
  Rng rng(0xc0c1c11cULL);
  for (int t = 0; t < 64; ++t) {
    for (auto& c : v) c = ctx->sample(rng);
    if (auto x = attempt(v)) return *x;
  }
  throw InternalError("no cyclic vector found for a linked companion block");
}

// Least-degree Q with Q(z) = w, if w lies in the algebra generated by z.
std::optional<UniPoly> poly_rep_of(const MatrixF& z, const MatrixF& w) {
  const FieldPtr& ctx = z.ctx();
  const int n = z.rows();
  MatrixF a(ctx, n * n, n);
  std::vector<FieldElem> rhs((size_t)n * n, ctx->zero());
  MatrixF pw = MatrixF::identity(ctx, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) a.at(i * n + j, k) = pw.at(i, j);
    if (k + 1 < n) pw = pw * z;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) rhs[(size_t)(i * n + j)] = w.at(i, j);
  auto sol = solve(a, rhs);
  if (!sol) return std::nullopt;
  UniPoly q = UniPoly::from_coeffs(ctx, sol->particular);
  if (eval_poly_at(q, z) != w) return std::nullopt;
  return q;
}

TowerLimits grow_limits(const FieldPtr& ctx, u64 size_factor) {
  return {ctx->level() + 2,
          std::max<u64>(u64{1} << 16, ctx->total_degree() * std::max<u64>(size_factor, 2))};
}

SqrtResult sqrt_via_companion(const MatrixF& z);

}  // namespace

MatrixF sqrt_jordan_block(const FieldElem& zeta, int d) {
  const FieldPtr& ctx = zeta.ctx();
  if (ctx->characteristic() == 2)
    throw UnsupportedKind("the square-root series needs odd characteristic");
  if (d <= 0) throw ShapeMismatch("Jordan block size must be positive");
  if (zeta.is_zero()) throw ZeroEigenvalue("nilpotent Jordan blocks have no square root here");
  FieldPtr ext = ctx;
  FieldElem omega = ctx->zero();
  if (is_square(zeta)) {
    omega = sqrt(zeta);
  } else {
    ext = FieldCtx::extension_unchecked(ctx, {-zeta, ctx->zero()}, grow_limits(ctx, 4));
    omega = ext->gen();
  }
  return toeplitz_root(omega, ext->embed(zeta), d);
}

MatrixF jordan_block_root(const FieldElem& omega, const FieldElem& zeta, int d) {
  const FieldPtr& ctx = omega.ctx();
  if (ctx->characteristic() == 2)
    throw UnsupportedKind("the square-root series needs odd characteristic");
  if (d <= 0) throw ShapeMismatch("Jordan block size must be positive");
  const FieldElem z = ctx->embed(zeta);
  if (z.is_zero()) throw ZeroEigenvalue("nilpotent Jordan blocks have no square root here");
  if (omega * omega != z) throw InternalError("omega is not a square root of zeta");
  return toeplitz_root(omega, z, d);
}

SqrtResult sqrt_poly(const MatrixF& z) {
  const FieldPtr& ctx = z.ctx();
  if (ctx->characteristic() == 2)
    throw UnsupportedKind("use the characteristic-2 entry point");
  if (!z.is_square()) throw ShapeMismatch("square root of a non-square matrix");
  if (det(z).is_zero()) throw SingularMatrix("matrix square root needs an invertible input");

  JordanData jd = jordan_form(z);
  FieldPtr ext = jd.ext;

  // one root determination per distinct eigenvalue, fixed before anything is
  // assembled so that equal eigenvalues always share their omega
  struct EigData {
    FieldElem zeta, omega;  // at the tower level where omega was determined
    int dmax = 0;
  };
  std::vector<std::pair<int, int>> order;
  std::map<std::pair<int, int>, EigData> eig;
  for (const auto& b : jd.blocks) {
    const std::pair<int, int> key{b.factor_index, b.conjugate_index};
    auto it = eig.find(key);
    if (it == eig.end()) {
      EigData ed;
      ed.zeta = ext->embed(b.eigenvalue);
      if (is_square(ed.zeta)) {
        ed.omega = sqrt(ed.zeta);
      } else {
        ext = FieldCtx::extension_unchecked(ext, {-ed.zeta, ext->zero()}, grow_limits(ext, 4));
        ed.omega = ext->gen();
      }
      ed.dmax = b.size;
      order.push_back(key);
      eig.emplace(key, std::move(ed));
    } else {
      it->second.dmax = std::max(it->second.dmax, b.size);
    }
  }

  int dtop = 1;
  for (const auto& [k, ed] : eig) dtop = std::max(dtop, ed.dmax);
  auto series = binom_half_series(ext, dtop);

  // truncated series per eigenvalue, glued into one polynomial by CRT
  UniPoly q, modulus;
  bool first = true;
  for (const auto& key : order) {
    const EigData& ed = eig.at(key);
    const FieldElem zl = ext->embed(ed.zeta);
    const FieldElem wl = ext->embed(ed.omega);
    const FieldElem zinv = zl.inv();
    const UniPoly lin = UniPoly::from_coeffs(ext, {-zl, ext->one()});
    UniPoly taylor = UniPoly::zero(ext);
    UniPoly pw = UniPoly::one(ext);
    FieldElem band = wl;
    for (int k = 0; k < ed.dmax; ++k) {
      taylor = taylor + pw.scaled(series[(size_t)k] * band);
      band = band * zinv;
      pw = pw * lin;
    }
    if (first) {
      q = taylor;
      modulus = pw;  // lin^dmax
      first = false;
    } else {
      q = crt_pair(q, modulus, taylor, pw);
      modulus = modulus * pw;
    }
  }

  MatrixF g(ext, z.rows(), z.rows());
  int off = 0;
  for (const auto& b : jd.blocks) {
    const EigData& ed = eig.at({b.factor_index, b.conjugate_index});
    MatrixF blk = toeplitz_root(ext->embed(ed.omega), ext->embed(ed.zeta), b.size);
    for (int i = 0; i < b.size; ++i)
      for (int j = 0; j < b.size; ++j) g.at(off + i, off + j) = blk.at(i, j);
    off += b.size;
  }

  const MatrixF t = jd.T.lift(ext), tinv = jd.T_inv.lift(ext), zl = z.lift(ext);
  MatrixF w = t * g * tinv;
  if (w * w != zl) throw InternalError("matrix square root does not square back");
  if (eval_poly_at(q, zl) != w) throw InternalError("square-root polynomial does not evaluate to the root");
  return {std::move(w), std::move(q), ext->level()};
}

CompanionSqrt sqrt_companion(const UniPoly& p_in) {
  const FieldPtr& ctx = p_in.ctx();
  if (ctx->characteristic() == 2)
    throw UnsupportedKind("companion square roots need odd characteristic");
  if (p_in.degree() < 1) throw ReduciblePolynomial("expected a nonconstant irreducible polynomial");
  const UniPoly p = p_in.make_monic();
  if (!is_irreducible(p)) throw ReduciblePolynomial("companion square root of a reducible polynomial");
  if (p.coeff(0).is_zero()) throw SingularMatrix("companion matrix with zero constant term is singular");

  const int d = p.degree();
  const mpz_class q = ctx->order();
  CompanionSqrt out;

  if (d == 1) {
    const FieldElem alpha = -p.coeff(0);
    if (is_square(alpha)) {
      out.Q = UniPoly::from_coeffs(ctx, {-sqrt(alpha), ctx->one()});
      out.base_field = true;
      out.field_level = ctx->level();
    } else {
      FieldPtr e2 = FieldCtx::extension_unchecked(ctx, {-alpha, ctx->zero()}, grow_limits(ctx, 4));
      out.Q = UniPoly::from_coeffs(e2, {-e2->gen(), e2->one()});
      out.base_field = false;
      out.resid = {UniPoly::one(ctx), -UniPoly::one(ctx)};
      out.field_level = e2->level();
    }
  } else {
    FieldPtr fl = adjoin_root(p, grow_limits(ctx, (u64)d * 2));
    const FieldElem xh = fl->gen();
    if (is_square(xh)) {
      // the conjugates of sqrt(x) are closed under Frobenius, so the product
      // of (z - beta_i) drops to the base field
      UniPoly ql = UniPoly::one(fl);
      FieldElem b = sqrt(xh);
      for (int i = 0; i < d; ++i) {
        ql = ql * UniPoly::from_coeffs(fl, {-b, fl->one()});
        b = b.pow(q);
      }
      std::vector<FieldElem> cs;
      for (const auto& c : ql.coeffs()) {
        auto cc = c.coeffs();
        for (size_t t = 1; t < cc.size(); ++t)
          if (!cc[t].is_zero()) throw InternalError("expected base-field coefficients");
        cs.push_back(cc[0]);
      }
      out.Q = UniPoly::from_coeffs(ctx, cs);
      out.base_field = true;
      out.field_level = ctx->level();
    } else {
      // roots are y * u_i with u_i = x^((q^i-1)/2) and y^2 = x; even and odd
      // coefficients of the product separate into K[x] and y K[x] parts
      std::vector<FieldElem> us{fl->one()};
      const FieldElem u1 = xh.pow(mpz_class((q - 1) / 2));
      FieldElem cur = fl->one();
      for (int i = 1; i < d; ++i) {
        cur = u1 * cur.pow(q);
        us.push_back(cur);
      }
      UniPoly qt = UniPoly::one(fl);
      for (const auto& u : us) qt = qt * UniPoly::from_coeffs(fl, {-u, fl->one()});
      out.resid.assign((size_t)d + 1, UniPoly());
      out.resid[0] = UniPoly::one(ctx);
      for (int j = 1; j <= d; ++j) {
        const FieldElem v = qt.coeff((u64)(d - j)) * xh.pow((u64)(j / 2));
        out.resid[(size_t)j] = UniPoly::from_coeffs(ctx, v.coeffs());
      }
      FieldPtr l2 = FieldCtx::extension_unchecked(fl, {-xh, fl->zero()}, grow_limits(fl, 4));
      const FieldElem y = l2->gen(), xi = l2->embed(xh);
      std::vector<FieldElem> qc((size_t)d + 1, l2->zero());
      for (int j = 0; j <= d; ++j) {
        FieldElem v = out.resid[(size_t)j].lift(l2).eval(xi);
        if (j % 2) v = v * y;
        qc[(size_t)(d - j)] = v;
      }
      out.Q = UniPoly::from_coeffs(l2, qc);
      out.base_field = false;
      out.field_level = l2->level();
    }
  }

  UniPoly lhs = out.Q * negate_arg(out.Q);
  if (d % 2) lhs = -lhs;
  if (lhs != subst_z_squared(p).lift(out.Q.ctx()))
    throw InternalError("companion square root identity failed");
  return out;
}

namespace {

// Q rebuilt over another field from a root xi of P and eta with eta^2 = xi.
UniPoly rebuild_q(const CompanionSqrt& cs, const FieldPtr& ext, const FieldElem& xi,
                  const FieldElem& eta) {
  const int d = (int)cs.resid.size() - 1;
  std::vector<FieldElem> c((size_t)d + 1, ext->zero());
  for (int j = 0; j <= d; ++j) {
    FieldElem v = cs.resid[(size_t)j].lift(ext).eval(xi);
    if (j % 2) v = v * eta;
    c[(size_t)(d - j)] = v;
  }
  return UniPoly::from_coeffs(ext, c);
}

SqrtResult sqrt_via_companion(const MatrixF& z) {
  const FieldPtr& ctx = z.ctx();
  if (ctx->characteristic() == 2)
    throw UnsupportedKind("use the characteristic-2 entry point");
  if (!z.is_square()) throw ShapeMismatch("square root of a non-square matrix");
  if (det(z).is_zero()) throw SingularMatrix("matrix square root needs an invertible input");

  const int n = z.rows();
  RationalCanonicalData rcf = rational_canonical_form(z);

  // one group of linked companion copies per elementary divisor P^e
  struct Group {
    UniPoly p;
    int e, off, plan;
  };
  std::vector<Group> groups;
  {
    int off = 0;
    size_t i = 0;
    while (i < rcf.blocks.size()) {
      int e = 1;
      while (rcf.blocks[i + (size_t)e - 1].link_to_next) ++e;
      groups.push_back({rcf.blocks[i].poly, e, off, -1});
      off += rcf.blocks[i].size * e;
      i += (size_t)e;
    }
  }

  // square-root data per distinct factor; factors whose root is not a square
  // get a root xi and a square root eta of it in a shared tower
  struct Plan {
    CompanionSqrt cs;
    std::optional<FieldElem> xi, eta;
  };
  std::vector<Plan> plans;
  std::map<std::string, int> seen;
  FieldPtr ext = ctx;
  for (auto& g : groups) {
    const std::string key = g.p.to_string();
    if (auto it = seen.find(key); it != seen.end()) {
      g.plan = it->second;
      continue;
    }
    Plan pl{sqrt_companion(g.p), {}, {}};
    if (!pl.cs.base_field) {
      auto fac = factor_univariate(g.p.lift(ext));
      const UniPoly& f1 = fac.front().factor;
      FieldElem xi = ext->zero();
      if (f1.degree() == 1) {
        xi = -f1.coeff(0);
      } else {
        ext = adjoin_root(f1, grow_limits(ext, (u64)f1.degree() * 2));
        xi = ext->gen();
      }
      if (is_square(xi)) {
        pl.eta = sqrt(xi);
      } else {
        ext = FieldCtx::extension_unchecked(ext, {-xi, ext->zero()}, grow_limits(ext, 4));
        pl.eta = ext->gen();
      }
      pl.xi = xi;
    }
    g.plan = (int)plans.size();
    seen[key] = g.plan;
    plans.push_back(std::move(pl));
  }

  MatrixF bigw(ext, n, n);
  for (const auto& g : groups) {
    const Plan& pl = plans[(size_t)g.plan];
    const int d = g.p.degree(), span = d * g.e;

    UniPoly qe = pl.cs.base_field
                     ? pl.cs.Q.lift(ext)
                     : rebuild_q(pl.cs, ext, ext->embed(*pl.xi), ext->embed(*pl.eta));
    MatrixF r = companion_of(poly_pow(qe, g.e));
    MatrixF m2 = r * r;
    // e_0 is cyclic for R^2 because Q(z) and Q(-z) are coprime
    std::vector<FieldElem> e0((size_t)span, ext->zero());
    e0[0] = ext->one();
    MatrixF y = krylov_cols(m2, e0, span);
    MatrixF s = inverse(y) * r * y;
    MatrixF cfull = companion_of(poly_pow(g.p, g.e)).lift(ext);
    if (s * s != cfull) throw InternalError("companion backend block does not square back");

    MatrixF x = cyclic_change(linked_block(g.p, g.e), d, g.e).lift(ext);
    MatrixF wg = x * s * inverse(x);
    for (int i = 0; i < span; ++i)
      for (int j = 0; j < span; ++j) bigw.at(g.off + i, g.off + j) = wg.at(i, j);
  }

  const MatrixF t = rcf.T.lift(ext), tinv = rcf.T_inv.lift(ext), zl = z.lift(ext);
  MatrixF w = t * bigw * tinv;
  if (w * w != zl) throw InternalError("matrix square root does not square back");
  auto q = poly_rep_of(zl, w);
  if (!q) throw InternalError("companion square root is not polynomial in the input");
  return {std::move(w), std::move(*q), ext->level()};
}

}  // namespace

SqrtResult sqrt_matrix(const MatrixF& z, SqrtBackend backend) {
  if (backend == SqrtBackend::Jordan) {
    try {
      return sqrt_poly(z);
    } catch (const BlockTooLarge&) {
      // series breaks down: fall through to the companion construction
    }
  }
  return sqrt_via_companion(z);
}

Char2Sqrt sqrt_char2(const MatrixF& z) {
  const FieldPtr& ctx = z.ctx();
  if (ctx->characteristic() != 2)
    throw UnsupportedKind("characteristic-2 square root called in odd characteristic");
  if (!z.is_square()) throw ShapeMismatch("square root of a non-square matrix");

  Char2Sqrt out;
  const UniPoly m = minpoly(z);
  if (gcd_poly(m, m.derivative()).degree() == 0) {
    // diagonalizable: x -> x^(q^d/2) on each factor, glued by CRT; everything
    // stays over the base field
    const mpz_class q = ctx->order();
    UniPoly acc, mod;
    bool first = true;
    for (const auto& f : factor_univariate(m)) {
      mpz_class qd;
      mpz_pow_ui(qd.get_mpz_t(), q.get_mpz_t(), (unsigned long)f.factor.degree());
      const UniPoly r = pow_mod(UniPoly::x(ctx), qd / 2, f.factor);
      if (first) {
        acc = r;
        mod = f.factor;
        first = false;
      } else {
        acc = crt_pair(acc, mod, r, f.factor);
        mod = mod * f.factor;
      }
    }
    MatrixF w = eval_poly_at(acc, z);
    if (w * w != z) throw InternalError("characteristic-2 square root does not square back");
    out.value = SqrtResult{std::move(w), std::move(acc), ctx->level()};
    return out;
  }

  JordanData jd = jordan_form(z);
  const FieldPtr& ext = jd.ext;

  struct Grp {
    FieldElem zeta;
    std::vector<int> sizes;  // descending
  };
  std::vector<Grp> grps;
  int lastf = -1, lastc = -1;
  for (const auto& b : jd.blocks) {
    if (b.factor_index != lastf || b.conjugate_index != lastc) {
      grps.push_back({ext->embed(b.eigenvalue), {}});
      lastf = b.factor_index;
      lastc = b.conjugate_index;
    }
    grps.back().sizes.push_back(b.size);
  }

  // blocks of size >= 2 must pair up with a size gap of at most one; size-1
  // blocks may stay single
  struct Piece {
    FieldElem zeta;
    int da, db;  // db = 0 for a single block
  };
  std::vector<Piece> pieces;
  for (const auto& g : grps) {
    size_t i = 0;
    bool bad = false;
    while (i < g.sizes.size()) {
      if (g.sizes[i] == 1) {
        pieces.push_back({g.zeta, 1, 0});
        ++i;
        continue;
      }
      if (i + 1 == g.sizes.size() || g.sizes[i] - g.sizes[i + 1] >= 2) {
        bad = true;
        break;
      }
      pieces.push_back({g.zeta, g.sizes[i], g.sizes[i + 1]});
      i += 2;
    }
    if (bad) out.violations.push_back(g.sizes);
  }
  if (!out.violations.empty()) return out;

  const int n = z.rows();
  MatrixF g(ext, n, n);
  int off = 0;
  for (const auto& pc : pieces) {
    const FieldElem omega = sqrt(pc.zeta);
    if (pc.db == 0) {
      g.at(off, off) = omega;
      ++off;
      continue;
    }
    // J_{omega,da+db} squared is ambient-similar to J_{zeta,da} + J_{zeta,db}
    // via the even/odd interleaving of the basis
    const int s = pc.da + pc.db;
    MatrixF jb(ext, s, s);
    for (int i = 0; i < s; ++i) jb.at(i, i) = omega;
    for (int i = 0; i + 1 < s; ++i) jb.at(i, i + 1) = ext->one();
    MatrixF v(ext, s, s);
    const int h = (s + 1) / 2;
    for (int c = 0; c < s; ++c) v.at(c < h ? 2 * c : 2 * (c - h) + 1, c) = ext->one();
    MatrixF wp = v.transpose() * jb * v;
    MatrixF chk(ext, s, s);
    for (int i = 0; i < s; ++i) chk.at(i, i) = pc.zeta;
    for (int i = 0; i + 1 < s; ++i)
      if (i + 1 != pc.da) chk.at(i, i + 1) = ext->one();
    if (wp * wp != chk) throw InternalError("characteristic-2 pair construction failed");
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) g.at(off + i, off + j) = wp.at(i, j);
    off += s;
  }

  MatrixF w = jd.T * g * jd.T_inv;
  if (w * w != z.lift(ext)) throw InternalError("characteristic-2 square root does not square back");
  out.value = SqrtResult{std::move(w), std::nullopt, ext->level()};
  return out;
}

}  // namespace ip1s
