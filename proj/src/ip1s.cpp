#include "ip1s/ip1s.hpp"

#include <algorithm>
#include <map>
#include <utility>

#include "ip1s/sqrtmat.hpp"
#include "ip1s/unipoly.hpp"

namespace ip1s {

namespace {

using u64 = std::uint64_t;

QuadSystem lift_system(const QuadSystem& sys, const FieldPtr& ext) {
  if (sys.ctx()->same_field(*ext)) return sys;
  std::vector<MatrixF> mats;
  std::vector<Vec> lin;
  std::vector<FieldElem> cs;
  for (u64 i = 0; i < sys.m(); ++i) {
    mats.push_back(sys.mat(i).lift(ext));
    Vec l;
    l.reserve(sys.n());
    for (const auto& e : sys.linear(i)) l.push_back(ext->embed(e));
    lin.push_back(std::move(l));
    cs.push_back(ext->embed(sys.constant(i)));
  }
  return QuadSystem(ext, sys.n(), std::move(mats), std::move(lin), std::move(cs));
}

MatrixF symmetrize(const MatrixF& m) { return m + m.transpose(); }

/// Symmetric matrix S with x^T S x = f_i, odd characteristic only.
MatrixF half_hessian(const QuadSystem& sys, u64 i) {
  const FieldPtr& ctx = sys.ctx();
  return hessian(sys, i).scaled(ctx->from_int(2).inv());
}

/// diag(x, I) embedded in dimension n.
MatrixF corner_block(const MatrixF& x, int n) {
  MatrixF e = MatrixF::identity(x.ctx(), n);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) e.at(i, j) = x.at(i, j);
  return e;
}

/// Strip tower levels whose coordinates are unused, never going below floor.
MatrixF descend_fully(const MatrixF& a, int floor_level) {
  MatrixF cur = a;
  while (cur.ctx()->level() > floor_level) {
    const FieldPtr par = cur.ctx()->parent();
    MatrixF down(par, cur.rows(), cur.cols());
    bool ok = true;
    for (int i = 0; i < cur.rows() && ok; ++i)
      for (int j = 0; j < cur.cols() && ok; ++j) {
        std::vector<FieldElem> co = cur.at(i, j).coeffs();
        for (size_t t = 1; t < co.size(); ++t)
          if (!co[t].is_zero()) {
            ok = false;
            break;
          }
        if (ok) down.at(i, j) = co[0];
      }
    if (!ok) break;
    cur = std::move(down);
  }
  return cur;
}

TowerLimits room_for(const FieldPtr& ctx, int extra_levels, u64 degree_factor) {
  TowerLimits lim;
  lim.max_levels = ctx->level() + extra_levels;
  lim.max_total_degree =
      std::max<u64>(u64{1} << 16, ctx->total_degree() * std::max<u64>(degree_factor, 2));
  return lim;
}

// ===== intertwiner space {Y : a Y = Y b} =====

bool nonderogatory(const MatrixF& a, const UniPoly& cp) {
  // squarefree charpoly settles it without a minimal polynomial
  if (gcd_poly(cp, cp.derivative()).degree() == 0) return true;
  return minpoly(a).degree() == a.rows();
}

/// Krylov matrix [v, a v, ..., a^{n-1} v] for some cyclic v, if one is found.
std::optional<MatrixF> krylov_from_cyclic(const MatrixF& a) {
  const FieldPtr& ctx = a.ctx();
  const int n = a.rows();
  auto build = [&](const Vec& v) -> std::optional<MatrixF> {
    MatrixF k(ctx, n, n);
    Vec cur = v;
    for (int j = 0; j < n; ++j) {
      k.set_col(j, cur);
      if (j + 1 < n) cur = a.mul_vec(cur);
    }
    if (det(k).is_zero()) return std::nullopt;
    return k;
  };
  for (int i = 0; i < n; ++i) {
    Vec v(n, ctx->zero());
    v[(size_t)i] = ctx->one();
    if (auto k = build(v)) return k;
  }
  Rng rng(0x5eedc9c11cULL);
  for (int t = 0; t < 64; ++t) {
    Vec v;
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back(ctx->sample(rng));
    if (auto k = build(v)) return k;
  }
  return std::nullopt;
}

/// Cyclic-module route: both matrices nonderogatory. The space is spanned by
/// Y_k = [z_k, ..., z_{k+n-1}] W^{-1} with z_t = a^t (f/d)(a) v, where f and
/// f2 are the characteristic polynomials, d their gcd, v a cyclic vector of
/// a and W a cyclic (Krylov) basis of b. Dimension is deg d.
std::optional<std::vector<MatrixF>> intertwiner_cyclic(const MatrixF& a, const MatrixF& b) {
  const FieldPtr& ctx = a.ctx();
  const int n = a.rows();
  UniPoly f = charpoly(a), f2 = charpoly(b);
  if (!nonderogatory(a, f) || !nonderogatory(b, f2)) return std::nullopt;
  UniPoly d = gcd_poly(f, f2);
  if (d.degree() == 0) return std::vector<MatrixF>{};
  auto va = krylov_from_cyclic(a);
  auto wb = krylov_from_cyclic(b);
  if (!va || !wb) return std::nullopt;

  const UniPoly fd = f / d;
  const int dim = (int)d.degree();
  Vec v = va->col(0);
  Vec u(v.size(), ctx->zero());
  for (std::int64_t t = (std::int64_t)fd.degree(); t >= 0; --t) {
    u = a.mul_vec(u);
    const FieldElem c = fd.coeff((u64)t);
    if (!c.is_zero())
      for (int i = 0; i < n; ++i) u[(size_t)i] += c * v[(size_t)i];
  }
  std::vector<Vec> z;
  z.reserve((size_t)(n + dim - 1));
  z.push_back(u);
  for (int t = 1; t < n + dim - 1; ++t) z.push_back(a.mul_vec(z.back()));

  MatrixF winv = inverse(*wb);
  std::vector<MatrixF> out;
  out.reserve((size_t)dim);
  for (int k = 0; k < dim; ++k) {
    MatrixF cols(ctx, n, n);
    for (int j = 0; j < n; ++j) cols.set_col(j, z[(size_t)(k + j)]);
    out.push_back(cols * winv);
  }
  if (a * out[0] != out[0] * b) throw InternalError("cyclic intertwiner basis fails its equation");
  return out;
}

/// Shared kernel extraction once a coefficient matrix is in reduced row
/// echelon form. pivots[r] is the pivot column of row r.
template <typename GetEntryNeg>
std::vector<std::vector<u64>> kernel_from_rref(int ncols, const std::vector<int>& pivots,
                                               GetEntryNeg neg_entry) {
  std::vector<char> is_pivot((size_t)ncols, 0);
  for (int c : pivots) is_pivot[(size_t)c] = 1;
  std::vector<std::vector<u64>> out;
  for (int fc = 0; fc < ncols; ++fc) {
    if (is_pivot[(size_t)fc]) continue;
    std::vector<u64> v((size_t)ncols, 0);
    v[(size_t)fc] = 1;
    for (size_t r = 0; r < pivots.size(); ++r) v[(size_t)pivots[r]] = neg_entry(r, fc);
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<MatrixF> reshape_kernel_u64(const FieldPtr& ctx, int n,
                                        const std::vector<std::vector<u64>>& ker) {
  std::vector<MatrixF> out;
  out.reserve(ker.size());
  for (const auto& v : ker) {
    MatrixF y(ctx, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) y.at(i, j) = ctx->from_words({v[(size_t)i * n + j]});
    out.push_back(std::move(y));
  }
  return out;
}

/// Dense kernel over F_2, one row of the n^2 x n^2 system per machine-word
/// block. Elimination is word-wide XOR.
std::vector<MatrixF> intertwiner_dense_f2(const MatrixF& a, const MatrixF& b) {
  const FieldPtr& ctx = a.ctx();
  const int n = a.rows();
  const int nn = n * n;
  const int words = (nn + 63) / 64;
  std::vector<std::vector<u64>> rows((size_t)nn, std::vector<u64>((size_t)words, 0));
  auto flip = [&](std::vector<u64>& row, int c) { row[(size_t)c >> 6] ^= u64{1} << (c & 63); };
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      auto& row = rows[(size_t)r * n + c];
      for (int t = 0; t < n; ++t) {
        if (a.at(r, t).is_one()) flip(row, t * n + c);
        if (b.at(t, c).is_one()) flip(row, r * n + t);
      }
    }
  auto get = [&](const std::vector<u64>& row, int c) -> bool {
    return (row[(size_t)c >> 6] >> (c & 63)) & 1;
  };
  std::vector<int> pivots;
  size_t rr = 0;
  for (int c = 0; c < nn && rr < rows.size(); ++c) {
    size_t sel = rr;
    while (sel < rows.size() && !get(rows[sel], c)) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[rr], rows[sel]);
    for (size_t r2 = 0; r2 < rows.size(); ++r2) {
      if (r2 == rr || !get(rows[r2], c)) continue;
      for (int w = 0; w < words; ++w) rows[r2][(size_t)w] ^= rows[rr][(size_t)w];
    }
    pivots.push_back(c);
    ++rr;
  }
  auto ker = kernel_from_rref(nn, pivots, [&](size_t r, int fc) -> u64 {
    return get(rows[r], fc) ? 1 : 0;
  });
  return reshape_kernel_u64(ctx, n, ker);
}

/// Dense kernel over an odd prime field in machine words.
std::vector<MatrixF> intertwiner_dense_u64(const MatrixF& a, const MatrixF& b) {
  const FieldPtr& ctx = a.ctx();
  const u64 p = ctx->characteristic();
  const int n = a.rows();
  const int nn = n * n;
  auto val = [](const FieldElem& e) { return e.words()[0]; };
  auto mulmod = [p](u64 x, u64 y) { return (u64)(((unsigned __int128)x * y) % p); };
  std::vector<std::vector<u64>> rows((size_t)nn, std::vector<u64>((size_t)nn, 0));
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) {
      auto& row = rows[(size_t)r * n + c];
      for (int t = 0; t < n; ++t) {
        row[(size_t)t * n + c] = (row[(size_t)t * n + c] + val(a.at(r, t))) % p;
        row[(size_t)r * n + t] = (row[(size_t)r * n + t] + p - val(b.at(t, c))) % p;
      }
    }
  auto invmod = [&](u64 x) {
    // p is prime so x^(p-2) works
    u64 r = 1, base = x % p, e = p - 2;
    while (e) {
      if (e & 1) r = mulmod(r, base);
      base = mulmod(base, base);
      e >>= 1;
    }
    return r;
  };
  std::vector<int> pivots;
  size_t rr = 0;
  for (int c = 0; c < nn && rr < rows.size(); ++c) {
    size_t sel = rr;
    while (sel < rows.size() && rows[sel][(size_t)c] == 0) ++sel;
    if (sel == rows.size()) continue;
    std::swap(rows[rr], rows[sel]);
    const u64 inv = invmod(rows[rr][(size_t)c]);
    for (int j = c; j < nn; ++j) rows[rr][(size_t)j] = mulmod(rows[rr][(size_t)j], inv);
    for (size_t r2 = 0; r2 < rows.size(); ++r2) {
      if (r2 == rr) continue;
      const u64 factor = rows[r2][(size_t)c];
      if (factor == 0) continue;
      for (int j = c; j < nn; ++j) {
        const u64 sub = mulmod(factor, rows[rr][(size_t)j]);
        rows[r2][(size_t)j] = (rows[r2][(size_t)j] + p - sub) % p;
      }
    }
    pivots.push_back(c);
    ++rr;
  }
  auto ker = kernel_from_rref(nn, pivots, [&](size_t r, int fc) -> u64 {
    const u64 e = rows[r][(size_t)fc];
    return e == 0 ? 0 : p - e;
  });
  return reshape_kernel_u64(ctx, n, ker);
}

/// Generic dense kernel for extension fields.
std::vector<MatrixF> intertwiner_dense_generic(const MatrixF& a, const MatrixF& b) {
  const FieldPtr& ctx = a.ctx();
  const int n = a.rows();
  const int nn = n * n;
  MatrixF big(ctx, nn, nn);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c)
      for (int t = 0; t < n; ++t) {
        big.at(r * n + c, t * n + c) += a.at(r, t);
        big.at(r * n + c, r * n + t) -= b.at(t, c);
      }
  std::vector<MatrixF> out;
  for (const auto& v : kernel_basis(big)) {
    MatrixF y(ctx, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) y.at(i, j) = v[(size_t)i * n + j];
    out.push_back(std::move(y));
  }
  return out;
}

/// Cut a basis down by one more simultaneous-conjugacy equation.
std::vector<MatrixF> filter_intertwiners(const std::vector<MatrixF>& basis, const MatrixF& k1,
                                         const MatrixF& k2) {
  if (basis.empty()) return {};
  const FieldPtr& ctx = basis[0].ctx();
  const int n = basis[0].rows();
  const int cnt = (int)basis.size();
  MatrixF sys(ctx, n * n, cnt);
  for (int c = 0; c < cnt; ++c) {
    MatrixF r = k1 * basis[(size_t)c] - basis[(size_t)c] * k2;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) sys.at(i * n + j, c) = r.at(i, j);
  }
  std::vector<MatrixF> out;
  for (const auto& combo : kernel_basis(sys)) {
    MatrixF y(ctx, n, n);
    for (int c = 0; c < cnt; ++c)
      if (!combo[(size_t)c].is_zero()) y = y + basis[(size_t)c].scaled(combo[(size_t)c]);
    out.push_back(std::move(y));
  }
  return out;
}

bool exhaustible(const ConjugacySpaceBasis& space) {
  if (space.basis.size() <= 1) return true;
  mpz_class total = 1;
  for (size_t i = 0; i < space.basis.size(); ++i) {
    total *= space.ctx->order();
    if (total > 4096) return false;
  }
  return true;
}

MatrixF combine(const ConjugacySpaceBasis& space, const std::vector<FieldElem>& coeff) {
  MatrixF y(space.ctx, space.basis[0].rows(), space.basis[0].cols());
  for (size_t i = 0; i < coeff.size(); ++i)
    if (!coeff[i].is_zero()) y = y + space.basis[i].scaled(coeff[i]);
  return y;
}

/// Walk every nonzero coefficient tuple of the span (only called when the
/// member count is small). Returns false from the visitor to keep going.
template <typename Visit>
bool enumerate_span(const ConjugacySpaceBasis& space, Visit visit) {
  const mpz_class q = space.ctx->order();
  mpz_class total = 1;
  for (size_t i = 0; i < space.basis.size(); ++i) total *= q;
  for (mpz_class idx = 1; idx < total; ++idx) {
    mpz_class rest = idx;
    std::vector<FieldElem> coeff;
    coeff.reserve(space.basis.size());
    for (size_t i = 0; i < space.basis.size(); ++i) {
      coeff.push_back(space.ctx->element_at(rest % q));
      rest /= q;
    }
    if (visit(combine(space, coeff))) return true;
  }
  return false;
}

std::string nosol_reason(const ConjugacySpaceBasis& space) {
  if (space.basis.empty()) return "the conjugacy equations force Y = 0";
  if (space.basis.size() == 1) return "the one-dimensional conjugacy space is singular";
  if (exhaustible(space)) return "every member of the conjugacy space is singular";
  return "no invertible intertwiner found within the sampling budget";
}

}  // namespace

std::vector<MatrixF> intertwiner_basis(const MatrixF& m, const MatrixF& m2) {
  if (!m.is_square() || !m2.is_square() || m.rows() != m2.rows())
    throw ShapeMismatch("intertwiner spaces need square matrices of equal size");
  if (!m.ctx()->same_field(*m2.ctx()))
    throw IncompatibleContexts("intertwiner spaces need one common field");
  if (m.rows() == 0) return {};
  if (auto fast = intertwiner_cyclic(m, m2)) return *fast;
  if (m.ctx()->is_prime_field())
    return m.ctx()->characteristic() == 2 ? intertwiner_dense_f2(m, m2)
                                          : intertwiner_dense_u64(m, m2);
  return intertwiner_dense_generic(m, m2);
}

MatrixF SolutionRepr::matrix() const {
  if (mode == Mode::Assembled) return A;
  return S * inverse(T);
}

CanonicalizeOutcome canonicalize(const QuadSystem& f_in, const QuadSystem& g_in, u64 seed) {
  if (!f_in.ctx()->same_field(*g_in.ctx()))
    throw IncompatibleContexts("both systems must live over one field");
  if (f_in.n() != g_in.n() || f_in.m() != g_in.m() || f_in.m() == 0)
    throw ShapeMismatch("systems of a candidate pair must match in n and m");

  const FieldPtr& ctx = f_in.ctx();
  const bool char2 = ctx->characteristic() == 2;

  QuadSystem f = f_in, g = g_in;
  bool homogenized = false;
  if (!f.homogeneous() || !g.homogeneous()) {
    std::tie(f, g) = homogenize(f_in, g_in);
    homogenized = true;
  }
  const int n = (int)f.n();

  // an all-zero side has no essential variables and cannot be reduced; the
  // homogenization guard makes every affine input nonzero, so this only
  // happens for genuinely zero homogeneous systems
  auto all_zero = [](const QuadSystem& side) {
    for (u64 i = 0; i < side.m(); ++i)
      if (!side.mat(i).is_zero()) return false;
    return true;
  };
  const bool zf = all_zero(f), zg = all_zero(g);
  if (zf && zg)
    return {Verdict::Irregular, std::nullopt, "every form on both sides is identically zero"};
  if (zf || zg)
    return {Verdict::NoSolution, std::nullopt,
            "the sides keep different numbers of essential variables"};

  EssentialReduction ef = essential_reduce(f);
  EssentialReduction eg = essential_reduce(g);
  if (ef.s != eg.s)
    return {Verdict::NoSolution, std::nullopt,
            "the sides keep different numbers of essential variables"};
  if (ef.s == 0)
    return {Verdict::Irregular, std::nullopt, "every form on both sides is identically zero"};
  const int s = (int)ef.s;

  RegularCombo combo = regular_combination(ef.reduced, eg.reduced, seed);
  switch (combo.status) {
    case ComboStatus::Found:
      break;
    case ComboStatus::GSideSingular:
      return {Verdict::NoSolution, std::nullopt,
              "a combination invertible on one side is singular on the other"};
    case ComboStatus::Irregular:
      return {Verdict::Irregular, std::nullopt,
              "no combination of the forms is invertible (exhaustively certified)"};
    case ComboStatus::ProbablyIrregular:
      return {Verdict::Irregular, std::nullopt,
              "no invertible combination of the forms found within the sampling budget"};
  }

  // move the invertible combination into slot 0; the change of equation list
  // is the same invertible recombination on both sides
  auto recombined = [&](const QuadSystem& side) {
    std::vector<MatrixF> mats;
    MatrixF phi(ctx, s, s);
    for (u64 i = 0; i < side.m(); ++i)
      if (!combo.lambda[i].is_zero()) phi = phi + side.mat(i).scaled(combo.lambda[i]);
    mats.push_back(std::move(phi));
    for (u64 i = 0; i < side.m(); ++i)
      if (i != combo.pivot) mats.push_back(side.mat(i));
    return QuadSystem(ctx, (u64)s, std::move(mats));
  };
  QuadSystem frec = recombined(ef.reduced);
  QuadSystem grec = recombined(eg.reduced);

  CanonicalInstance inst;
  inst.ctx = ctx;
  inst.lambda = combo.lambda;
  inst.pivot = combo.pivot;
  inst.homogenized = homogenized;

  MatrixF pf(ctx, s, s), qg(ctx, s, s);
  if (char2) {
    Char2Canon cf = canonical_char2(frec.mat(0));
    Char2Canon cg = canonical_char2(grec.mat(0));
    if (cf.type != cg.type)
      return {Verdict::NoSolution, std::nullopt, "the canonical quadratic types differ"};
    if (cf.delta != cg.delta) throw InternalError("matching types produced different normal forms");
    inst.type = cf.type;
    inst.D = cf.delta;
    pf = cf.P;
    qg = cg.P;
  } else {
    DiagReduction rf = gauss_reduce(half_hessian(frec, 0));
    DiagReduction rg = gauss_reduce(half_hessian(grec, 0));
    collapse_nonsquares(rf);
    collapse_nonsquares(rg);
    if (rf.D != rg.D)
      return {Verdict::NoSolution, std::nullopt, "the canonical diagonal forms differ"};
    inst.D = rf.D;
    pf = rf.P;
    qg = rg.P;
  }

  QuadSystem fcan = frec.substitute(pf);
  QuadSystem gcan = grec.substitute(qg);
  for (u64 i = 0; i < fcan.m(); ++i) {
    inst.hs.push_back(char2 ? fcan.mat(i) : half_hessian(fcan, i));
    inst.hs2.push_back(char2 ? gcan.mat(i) : half_hessian(gcan, i));
  }
  if (inst.hs[0] != inst.D || inst.hs2[0] != inst.D)
    throw InternalError("leading forms did not land on the canonical matrix");

  inst.P = ef.M * corner_block(pf, n);
  inst.Q = eg.M * corner_block(qg, n);
  // the shifts replace H_i by H_i - nu_i H_1 with the same nu_i on both
  // sides, which leaves the conjugacy equations and the congruence checks
  // unchanged; tiny fields may not admit an invertible shift for every
  // index, and the solver works with the singular matrices directly
  try {
    shift_invertible(inst);
  } catch (const FieldTooSmall&) {
    if (inst.shifts.size() != inst.hs.size()) inst.shifts.assign(inst.hs.size(), ctx->zero());
  }
  return {Verdict::Solved, std::move(inst), ""};
}

ConjugacySpaceBasis conjugacy_space(const CanonicalInstance& inst) {
  const FieldPtr& ctx = inst.ctx;
  const bool char2 = ctx->characteristic() == 2;
  const int s = inst.D.rows();
  ConjugacySpaceBasis space;
  space.ctx = ctx;

  const u64 m = inst.hs.size();
  if (m <= 1) {
    // a single form constrains nothing beyond orthogonality
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) {
        MatrixF e(ctx, s, s);
        e.at(i, j) = ctx->one();
        space.basis.push_back(std::move(e));
      }
    return space;
  }

  MatrixF lead_inv = inverse(char2 ? symmetrize(inst.D) : inst.D);
  std::vector<std::pair<MatrixF, MatrixF>> pairs;
  for (u64 i = 1; i < m; ++i) {
    MatrixF ka = lead_inv * (char2 ? symmetrize(inst.hs[i]) : inst.hs[i]);
    MatrixF kb = lead_inv * (char2 ? symmetrize(inst.hs2[i]) : inst.hs2[i]);
    pairs.emplace_back(std::move(ka), std::move(kb));
  }
  space.basis = intertwiner_basis(pairs[0].first, pairs[0].second);
  for (size_t t = 1; t < pairs.size() && !space.basis.empty(); ++t)
    space.basis = filter_intertwiners(space.basis, pairs[t].first, pairs[t].second);
  return space;
}

std::optional<MatrixF> sample_invertible(const ConjugacySpaceBasis& space, u64 seed,
                                         bool allow_extension) {
  if (space.basis.empty()) return std::nullopt;
  const FieldPtr& ctx = space.ctx;
  const size_t dim = space.basis.size();
  if (dim == 1) {
    // scaling cannot fix a singular ray, extensions included
    if (!det(space.basis[0]).is_zero()) return space.basis[0];
    return std::nullopt;
  }

  if (exhaustible(space)) {
    std::optional<MatrixF> hit;
    enumerate_span(space, [&](MatrixF y) {
      if (det(y).is_zero()) return false;
      hit = std::move(y);
      return true;
    });
    if (hit) return hit;
  } else {
    Rng rng(seed);
    for (int t = 0; t < 64; ++t) {
      std::vector<FieldElem> coeff;
      coeff.reserve(dim);
      for (size_t i = 0; i < dim; ++i) coeff.push_back(ctx->sample(rng));
      MatrixF y = combine(space, coeff);
      if (!det(y).is_zero()) return y;
    }
  }
  if (!allow_extension) return std::nullopt;

  // retry over an extension large enough that random points miss the
  // determinant hypersurface with good probability
  const mpz_class target = mpz_class(1024) * space.basis[0].rows();
  int e = 1;
  mpz_class reach = ctx->order();
  while (reach < target) {
    reach *= ctx->order();
    ++e;
  }
  if (e < 2) e = 2;
  Rng erng(seed ^ 0x9e3779b97f4a7c15ULL);
  UniPoly minp = random_irreducible(ctx, e, erng);
  FieldPtr ext = adjoin_root(minp, room_for(ctx, 2, (u64)e * 2));
  ConjugacySpaceBasis lifted;
  lifted.ctx = ext;
  for (const auto& y : space.basis) lifted.basis.push_back(y.lift(ext));
  Rng rng(seed ^ 0xda3e39cb94b95bdbULL);
  for (int t = 0; t < 64; ++t) {
    std::vector<FieldElem> coeff;
    coeff.reserve(dim);
    for (size_t i = 0; i < dim; ++i) coeff.push_back(ext->sample(rng));
    MatrixF y = combine(lifted, coeff);
    if (!det(y).is_zero()) return y;
  }
  return std::nullopt;
}

SolutionRepr orthogonalize(const MatrixF& y, const CanonicalInstance& inst) {
  if (inst.ctx->characteristic() == 2)
    throw UnsupportedKind("the binomial-series orthogonalization needs odd characteristic");
  const FieldPtr yctx = y.ctx();
  const int s = y.rows();
  MatrixF dl = inst.D.lift(yctx);
  MatrixF z = inverse(dl) * y.transpose() * dl * y;

  JordanData jd = jordan_form(z);
  FieldPtr cur = jd.ext;
  const mpz_class q = yctx->order();

  // one square-root determination per characteristic factor; conjugate
  // eigenvalues inherit Frobenius powers of it so equal levels stay equal
  std::map<int, FieldElem> omega0;
  std::map<int, int> found_level;
  for (const auto& b : jd.blocks) {
    if (b.conjugate_index != 0 || omega0.count(b.factor_index)) continue;
    const FieldElem zeta = b.eigenvalue;
    if (is_square(zeta)) {
      // the root lives inside the Jordan field, whatever the eigenvalue's
      // own level: factors resolved there share one assembly level
      omega0.emplace(b.factor_index, sqrt(zeta));
      found_level.emplace(b.factor_index, jd.ext->level());
      continue;
    }
    FieldElem ztop = cur->embed(zeta);
    if (is_square(ztop)) {
      omega0.emplace(b.factor_index, sqrt(ztop));
      found_level.emplace(b.factor_index, cur->level());
      continue;
    }
    TowerLimits lim;
    lim.max_levels = jd.ext->level() + 4;
    lim.max_total_degree = u64{1} << 16;
    cur = FieldCtx::extension_unchecked(cur, {-ztop, cur->zero()}, lim);
    omega0.emplace(b.factor_index, cur->gen());
    found_level.emplace(b.factor_index, cur->level());
  }

  bool single_level = true;
  for (const auto& [fi, lvl] : found_level)
    single_level = single_level && lvl == found_level.begin()->second;

  std::map<std::pair<int, int>, FieldElem> omega;
  for (const auto& b : jd.blocks) {
    const std::pair<int, int> key{b.factor_index, b.conjugate_index};
    if (omega.count(key)) continue;
    if (b.conjugate_index == 0) {
      omega.emplace(key, omega0.at(b.factor_index));
    } else {
      const auto& prev = omega.at({b.factor_index, b.conjugate_index - 1});
      omega.emplace(key, prev.pow(q));
    }
  }

  MatrixF g(cur, s, s);
  int off = 0;
  for (const auto& b : jd.blocks) {
    const FieldElem w = cur->embed(omega.at({b.factor_index, b.conjugate_index}));
    const FieldElem zeta = cur->embed(b.eigenvalue);
    MatrixF blk = jordan_block_root(w, zeta, b.size);
    for (int i = 0; i < b.size; ++i)
      for (int j = 0; j < b.size; ++j) g.at(off + i, off + j) = blk.at(i, j);
    off += b.size;
  }
  if (g * g != jd.assembled().lift(cur))
    throw InternalError("blockwise square root does not square to the Jordan form");

  MatrixF tl = jd.T.lift(cur), tinv = jd.T_inv.lift(cur), yl = y.lift(cur);
  SolutionRepr sol;
  sol.P = MatrixF::identity(inst.ctx, s);
  sol.Q = MatrixF::identity(inst.ctx, s);
  if (single_level) {
    sol.mode = SolutionRepr::Mode::Assembled;
    MatrixF w = tl * g * tinv;
    sol.A = descend_fully(yl * inverse(w), inst.ctx->level());
    sol.field_level = sol.A.ctx()->level() - inst.ctx->level();
  } else {
    sol.mode = SolutionRepr::Mode::Factored;
    sol.S = yl * tl;
    sol.T = tl * g;
    sol.field_level = cur->level() - inst.ctx->level();
  }
  return sol;
}

bool verify(const SolutionRepr& sol, const CanonicalInstance& inst) {
  MatrixF a;
  try {
    a = sol.matrix();
  } catch (const SingularMatrix&) {
    return false;
  }
  if (!a.is_square() || a.rows() != inst.D.rows()) return false;
  if (det(a).is_zero()) return false;
  const FieldPtr& actx = a.ctx();
  const bool char2 = inst.ctx->characteristic() == 2;
  for (size_t i = 0; i < inst.hs.size(); ++i) {
    MatrixF u = inst.hs[i].lift(actx);
    MatrixF u2 = inst.hs2[i].lift(actx);
    MatrixF t = a.transpose() * u * a;
    if (char2) {
      if (t + t.transpose() != u2 + u2.transpose()) return false;
      for (int k = 0; k < t.rows(); ++k)
        if (t.at(k, k) != u2.at(k, k)) return false;
    } else if (t != u2) {
      return false;
    }
  }
  return true;
}

namespace {

/// Map a canonical-coordinates solution back to the input coordinates,
/// normalizing the homogenization guard sign when present.
SolutionRepr compose_back(const SolutionRepr& can, const CanonicalInstance& inst) {
  const int n = inst.P.rows();
  SolutionRepr out;
  out.P = inst.P;
  out.Q = inst.Q;
  out.lambda = inst.lambda;
  out.nu = inst.shifts;

  const FieldPtr actx =
      can.mode == SolutionRepr::Mode::Assembled ? can.A.ctx() : can.S.ctx();
  MatrixF pl = inst.P.lift(actx);
  MatrixF ql = inst.Q.lift(actx);

  if (inst.homogenized || can.mode == SolutionRepr::Mode::Assembled) {
    MatrixF a = can.mode == SolutionRepr::Mode::Assembled ? can.A : can.matrix();
    MatrixF full = pl * corner_block(a.lift(actx), n) * inverse(ql);
    if (inst.homogenized) {
      if (full.at(0, 0) == -actx->one()) full = -full;
      if (full.at(0, 0) != actx->one())
        throw InternalError("homogenized solution lost the guard coefficient");
      for (int j = 1; j < n; ++j)
        if (!full.at(0, j).is_zero())
          throw InternalError("homogenized solution lost the guard row");
    }
    out.mode = SolutionRepr::Mode::Assembled;
    out.A = descend_fully(full, inst.ctx->level());
    out.field_level = out.A.ctx()->level() - inst.ctx->level();
  } else {
    out.mode = SolutionRepr::Mode::Factored;
    out.S = pl * corner_block(can.S, n);
    out.T = ql * corner_block(can.T, n);
    out.field_level = actx->level() - inst.ctx->level();
  }
  return out;
}

SolveOutcome odd_core(const QuadSystem& f, const QuadSystem& g, const CanonicalInstance& inst,
                      u64 seed, const SolveOptions& opts) {
  auto finish = [&](SolutionRepr can) -> SolveOutcome {
    SolutionRepr full = compose_back(can, inst);
    if (!check_equivalence(f, g, full.matrix()))
      throw InternalError("canonical solution fails on the original systems");
    return {Verdict::Solved, std::move(full), ""};
  };

  // identical canonical sides are solved by the identity; this covers every
  // single-form instance past the leading-form gate
  bool same_sides = true;
  for (size_t i = 0; i < inst.hs.size() && same_sides; ++i)
    same_sides = inst.hs[i] == inst.hs2[i];
  if (same_sides) {
    SolutionRepr can;
    can.mode = SolutionRepr::Mode::Assembled;
    can.A = MatrixF::identity(inst.ctx, inst.D.rows());
    can.P = can.A;
    can.Q = can.A;
    return finish(std::move(can));
  }

  ConjugacySpaceBasis space = conjugacy_space(inst);
  std::uint64_t mix = seed;
  auto y = sample_invertible(space, splitmix64(mix), opts.allow_extension);
  if (!y) return {Verdict::NoSolution, std::nullopt, nosol_reason(space)};
  SolutionRepr can = orthogonalize(*y, inst);
  if (!verify(can, inst))
    throw InternalError("orthogonalized intertwiner fails the canonical congruences");

  // a base-field solution turns up as Y with Z = I up to squares, so when
  // the first sample only produced an extension witness, look for a rational
  // one: exhaustively over small spans (a miss then proves no base-field
  // solution exists), by redrawing otherwise
  if (can.field_level > 0 && space.dim() > 1 && y->ctx()->same_field(*inst.ctx)) {
    auto consider = [&](MatrixF cand) -> bool {
      if (det(cand).is_zero()) return false;
      SolutionRepr redo = orthogonalize(cand, inst);
      if (!verify(redo, inst))
        throw InternalError("orthogonalized intertwiner fails the canonical congruences");
      if (redo.field_level < can.field_level) can = std::move(redo);
      return can.field_level == 0;
    };
    if (exhaustible(space)) {
      enumerate_span(space, consider);
    } else {
      u64 restate = mix ^ 0xa0761d6478bd642fULL;
      Rng retry(splitmix64(restate));
      for (int t = 0; t < 24 && can.field_level > 0; ++t) {
        std::vector<FieldElem> coeff;
        coeff.reserve(space.basis.size());
        for (size_t i = 0; i < space.basis.size(); ++i) coeff.push_back(inst.ctx->sample(retry));
        consider(combine(space, coeff));
      }
    }
  }
  return finish(std::move(can));
}

SolveOutcome char2_core(const QuadSystem& f, const QuadSystem& g, const CanonicalInstance& inst,
                        u64 seed, const SolveOptions& opts) {
  const FieldPtr& ctx = inst.ctx;

  bool same_sides = true;
  for (size_t i = 0; i < inst.hs.size() && same_sides; ++i)
    same_sides = inst.hs[i] == inst.hs2[i];

  ConjugacySpaceBasis space;
  if (!same_sides) {
    space = conjugacy_space(inst);
    if (space.basis.empty())
      return {Verdict::NoSolution, std::nullopt, nosol_reason(space)};
  }

  MatrixF sd = symmetrize(inst.D);
  MatrixF sdinv = inverse(sd);
  auto attempt = [&](const MatrixF& cand) -> std::optional<MatrixF> {
    if (det(cand).is_zero()) return std::nullopt;
    MatrixF z = sdinv * cand.transpose() * sd * cand;
    UniPoly mp = minpoly(z);
    if (gcd_poly(mp, mp.derivative()).degree() != 0) return std::nullopt;
    Char2Sqrt sq = sqrt_char2(z);
    if (!sq.value || !sq.value->as_polynomial) return std::nullopt;
    MatrixF a = cand * inverse(sq.value->W);
    for (size_t i = 0; i < inst.hs.size(); ++i) {
      MatrixF t = a.transpose() * inst.hs[i] * a;
      if (t + t.transpose() != symmetrize(inst.hs2[i])) return std::nullopt;
      for (int k = 0; k < t.rows(); ++k)
        if (t.at(k, k) != inst.hs2[i].at(k, k)) return std::nullopt;
    }
    return a;
  };

  std::optional<MatrixF> found;
  if (same_sides) {
    found = MatrixF::identity(ctx, inst.D.rows());
  } else if (exhaustible(space)) {
    enumerate_span(space, [&](MatrixF cand) {
      if (auto a = attempt(cand)) {
        found = std::move(a);
        return true;
      }
      return false;
    });
    if (!found)
      return {Verdict::NoSolution, std::nullopt,
              "no member of the enumerable conjugacy space solves the instance"};
  } else {
    Rng rng(seed ^ 0xbf58476d1ce4e5b9ULL);
    for (int t = 0; t < opts.resample_budget && !found; ++t) {
      std::vector<FieldElem> coeff;
      coeff.reserve(space.basis.size());
      for (size_t i = 0; i < space.basis.size(); ++i) coeff.push_back(ctx->sample(rng));
      found = attempt(combine(space, coeff));
    }
    if (!found)
      throw LoopBudgetExceeded("no candidate produced a usable square root within the budget");
  }

  SolutionRepr can;
  can.mode = SolutionRepr::Mode::Assembled;
  can.A = *found;
  can.P = MatrixF::identity(ctx, inst.D.rows());
  can.Q = MatrixF::identity(ctx, inst.D.rows());
  if (!verify(can, inst))
    throw InternalError("characteristic-2 candidate fails the canonical congruences");
  SolutionRepr full = compose_back(can, inst);
  if (!check_equivalence(f, g, full.matrix()))
    throw InternalError("canonical solution fails on the original systems");
  return {Verdict::Solved, std::move(full), ""};
}

}  // namespace

SolveOutcome solve(const QuadSystem& f, const QuadSystem& g, u64 seed, const SolveOptions& opts) {
  CanonicalizeOutcome canon = canonicalize(f, g, seed);
  if (canon.verdict != Verdict::Solved)
    return {canon.verdict, std::nullopt, canon.reason};
  if (f.ctx()->characteristic() == 2) return char2_core(f, g, *canon.instance, seed, opts);
  return odd_core(f, g, *canon.instance, seed, opts);
}

SolveOutcome solve_char2(const QuadSystem& f, const QuadSystem& g, u64 seed,
                         const SolveOptions& opts) {
  if (f.ctx()->characteristic() != 2)
    throw UnsupportedKind("this entry point expects characteristic 2");
  return solve(f, g, seed, opts);
}

SolveOutcome solve_generic(const QuadSystem& f, const QuadSystem& g, u64 seed) {
  if (!f.ctx()->same_field(*g.ctx()))
    throw IncompatibleContexts("both systems must live over one field");
  if (f.n() != g.n() || f.m() != g.m())
    throw ShapeMismatch("systems of a candidate pair must match in n and m");
  const FieldPtr& ctx = f.ctx();
  if (ctx->characteristic() == 2)
    throw UnsupportedKind("the generic path needs odd characteristic");
  if (!f.homogeneous() || !g.homogeneous())
    throw ShapeMismatch("the generic path expects homogeneous systems");
  if (f.m() < 2) throw GenericityFailure("one form cannot pin a candidate ray");
  const int n = (int)f.n();

  MatrixF h1 = hessian(f, 0), h1g = hessian(g, 0);
  if (det(h1).is_zero() || det(h1g).is_zero())
    throw DegenerateForm("the leading form of each side must be invertible");
  MatrixF h1i = inverse(h1), h1gi = inverse(h1g);

  std::vector<MatrixF> basis =
      intertwiner_basis(h1i * hessian(f, 1), h1gi * hessian(g, 1));
  for (u64 i = 2; i < f.m() && !basis.empty(); ++i)
    basis = filter_intertwiners(basis, h1i * hessian(f, i), h1gi * hessian(g, i));
  if (basis.empty())
    return {Verdict::NoSolution, std::nullopt, "the intertwiner equations only admit Y = 0"};
  if (basis.size() > 1)
    throw GenericityFailure("the intertwiner space has dimension " +
                            std::to_string(basis.size()));

  const MatrixF& y0 = basis[0];
  if (det(y0).is_zero())
    return {Verdict::NoSolution, std::nullopt, "the unique candidate ray is singular"};

  MatrixF c = y0.transpose() * h1 * y0;
  FieldElem ratio = ctx->zero();
  bool picked = false;
  for (int i = 0; i < n && !picked; ++i)
    for (int j = 0; j < n && !picked; ++j)
      if (!c.at(i, j).is_zero()) {
        ratio = h1g.at(i, j) / c.at(i, j);
        picked = true;
      }
  if (!picked || ratio.is_zero() || c.scaled(ratio) != h1g)
    return {Verdict::NoSolution, std::nullopt,
            "no scaling of the candidate matches the leading forms"};

  FieldPtr actx = ctx;
  FieldElem lam = ctx->zero();
  int level = 0;
  if (is_square(ratio)) {
    lam = sqrt(ratio);
  } else {
    actx = FieldCtx::extension_unchecked(ctx, {-ratio, ctx->zero()}, room_for(ctx, 2, 4));
    lam = actx->gen();
    level = 1;
  }
  MatrixF a = y0.lift(actx).scaled(lam);

  // fast probabilistic screen, then the exact comparison
  Rng rng(seed);
  Vec point;
  point.reserve(n);
  for (int i = 0; i < n; ++i) point.push_back(actx->sample(rng));
  QuadSystem fl = lift_system(f, actx), gl = lift_system(g, actx);
  if (fl.evaluate(a.mul_vec(point)) != gl.evaluate(point))
    return {Verdict::NoSolution, std::nullopt, "the scaled candidate fails a spot check"};
  if (!check_equivalence(f, g, a))
    return {Verdict::NoSolution, std::nullopt, "the scaled candidate fails the remaining forms"};

  // of the two valid signs report the lexicographically smaller matrix
  MatrixF neg = -a;
  for (int i = 0; i < n; ++i) {
    bool done = false;
    for (int j = 0; j < n; ++j)
      if (!a.at(i, j).is_zero()) {
        if (neg.at(i, j).lex_less(a.at(i, j))) a = neg;
        done = true;
        break;
      }
    if (done) break;
  }

  SolutionRepr sol;
  sol.mode = SolutionRepr::Mode::Assembled;
  sol.A = a;
  sol.field_level = level;
  sol.P = MatrixF::identity(ctx, n);
  sol.Q = MatrixF::identity(ctx, n);
  return {Verdict::Solved, std::move(sol),
          level == 0 ? "" : "equivalent only over a quadratic extension"};
}

bool check_equivalence(const QuadSystem& f, const QuadSystem& g, const MatrixF& a) {
  if (!f.ctx()->same_field(*g.ctx()) || f.n() != g.n() || f.m() != g.m())
    throw ShapeMismatch("systems of a candidate pair must match in field, n and m");
  const FieldPtr& actx = a.ctx();
  if (!f.ctx()->same_field(*actx) && !f.ctx()->is_ancestor_of(*actx))
    throw IncompatibleContexts("the change of variables must extend the systems' field");
  const int n = (int)f.n();
  QuadSystem fl = lift_system(f, actx), gl = lift_system(g, actx);
  if (a.rows() == n && a.cols() == n) return fl.substitute(a) == gl;
  if (a.rows() == n + 1 && a.cols() == n + 1) {
    // homogenized-space encoding of an affine map
    if (a.at(0, 0) != actx->one()) return false;
    for (int j = 1; j <= n; ++j)
      if (!a.at(0, j).is_zero()) return false;
    MatrixF c(actx, n, n);
    Vec b;
    b.reserve(n);
    for (int i = 1; i <= n; ++i) {
      b.push_back(a.at(i, 0));
      for (int j = 1; j <= n; ++j) c.at(i - 1, j - 1) = a.at(i, j);
    }
    return fl.substitute_affine(c, b) == gl;
  }
  throw ShapeMismatch("the change of variables has incompatible dimensions");
}

}  // namespace ip1s
