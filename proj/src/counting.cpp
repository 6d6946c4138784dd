#include "ip1s/counting.hpp"

#include <algorithm>
#include <map>

#include "ip1s/ip1s.hpp"
#include "ip1s/unipoly.hpp"

namespace ip1s {

namespace {

using u64 = std::uint64_t;

/// Blocks grouped per distinct eigenvalue, sizes ascending.
std::vector<std::pair<std::string, std::vector<int>>> grouped_blocks(const JordanData& jd) {
  std::map<std::pair<int, int>, std::vector<int>> groups;
  std::map<std::pair<int, int>, std::string> names;
  for (const auto& b : jd.blocks) {
    const std::pair<int, int> key{b.factor_index, b.conjugate_index};
    groups[key].push_back(b.size);
    names.emplace(key, b.eigenvalue.to_string());
  }
  std::vector<std::pair<std::string, std::vector<int>>> out;
  for (auto& [key, sizes] : groups) {
    std::sort(sizes.begin(), sizes.end());
    out.emplace_back(names.at(key), sizes);
  }
  return out;
}

u64 dim_of_groups(const std::vector<std::pair<std::string, std::vector<int>>>& groups) {
  u64 dim = 0;
  for (const auto& [name, sizes] : groups) {
    const u64 d = sizes.size();
    for (u64 j = 1; j <= d; ++j) dim += (2 * d - 2 * j + 1) * (u64)sizes[(size_t)j - 1];
  }
  return dim;
}

void guard_enumeration(const mpz_class& q, int cells) {
  mpz_class total = 1;
  const mpz_class cap = mpz_class(1) << 24;
  for (int i = 0; i < cells; ++i) {
    total *= q;
    if (total > cap) throw TooLarge("enumeration space exceeds 2^24 candidates");
  }
}

/// Odometer over all length-`cells` digit vectors in [0, q).
struct Odometer {
  mpz_class q;
  std::vector<u64> digits;  // valid while q fits small; general path uses mpz
  std::vector<mpz_class> big;
  bool small;
  explicit Odometer(const mpz_class& q_, int cells)
      : q(q_), small(q_.fits_ulong_p()) {
    if (small)
      digits.assign((size_t)cells, 0);
    else
      big.assign((size_t)cells, 0);
  }
  std::size_t size() const { return small ? digits.size() : big.size(); }
  mpz_class at(std::size_t i) const { return small ? mpz_class(digits[i]) : big[i]; }
  bool advance() {
    for (std::size_t i = 0; i < size(); ++i) {
      if (small) {
        if (++digits[i] < q.get_ui()) return true;
        digits[i] = 0;
      } else {
        if (++big[i] < q) return true;
        big[i] = 0;
      }
    }
    return false;
  }
};

}  // namespace

std::uint64_t jordan_centralizer_dim(const MatrixF& h) {
  return dim_of_groups(grouped_blocks(jordan_form(h)));
}

std::uint64_t commutant_dimension(const MatrixF& h) {
  return intertwiner_basis(h, h).size();
}

CountBound count_bound(const QuadSystem& f) {
  const FieldPtr& ctx = f.ctx();
  const u64 m = f.m();
  MatrixF d = hessian(f, 0);
  if (det(d).is_zero()) throw DegenerateForm("the first form must have an invertible matrix");

  CountBound out;
  out.alpha_degree = m > 1 ? m : 1;
  out.heuristic_even_char = ctx->characteristic() == 2;

  MatrixF pencil;
  if (m == 1) {
    pencil = MatrixF::identity(ctx, d.rows());
  } else {
    Rng rng(0x5eedc0317ULL);
    UniPoly minp = random_irreducible(ctx, (int)m, rng);
    TowerLimits lim;
    lim.max_levels = ctx->level() + 2;
    lim.max_total_degree = std::max<u64>(u64{1} << 16, ctx->total_degree() * m * 2);
    FieldPtr big = adjoin_root(minp, lim);
    const FieldElem alpha = big->gen();
    MatrixF h = hessian(f, 0).lift(big);
    FieldElem coeff = big->one();
    for (u64 i = 1; i < m; ++i) {
      coeff = coeff * alpha;
      h = h + hessian(f, i).lift(big).scaled(coeff);
    }
    pencil = inverse(d.lift(big)) * h;
  }

  out.jordan_summary = grouped_blocks(jordan_form(pencil));
  out.dim = dim_of_groups(out.jordan_summary);
  mpz_pow_ui(out.bound.get_mpz_t(), ctx->order().get_mpz_t(), out.dim);
  out.bound -= 1;
  return out;
}

std::uint64_t brute_force_centralizer(const MatrixF& h, bool restrict_to_base) {
  const FieldPtr& hctx = h.ctx();
  const FieldPtr enum_ctx =
      (restrict_to_base && hctx->level() > 0) ? hctx->parent() : hctx;
  const int n = h.rows();
  guard_enumeration(enum_ctx->order(), n * n);

  const bool lift_needed = !enum_ctx->same_field(*hctx);
  u64 count = 0;
  Odometer odo(enum_ctx->order(), n * n);
  do {
    MatrixF x(enum_ctx, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x.at(i, j) = enum_ctx->element_at(odo.at((size_t)i * n + j));
    if (det(x).is_zero()) continue;
    MatrixF xl = lift_needed ? x.lift(hctx) : x;
    if (xl * h == h * xl) ++count;
  } while (odo.advance());
  return count;
}

BruteForceResult brute_force_equivalence(const QuadSystem& f, const QuadSystem& g,
                                         std::uint64_t witness_cap, bool stop_at_first) {
  if (!f.ctx()->same_field(*g.ctx()) || f.n() != g.n() || f.m() != g.m())
    throw ShapeMismatch("systems of a candidate pair must match in field, n and m");
  if (!f.homogeneous() || !g.homogeneous())
    throw ShapeMismatch("exhaustive equivalence search expects homogeneous systems");
  const FieldPtr& ctx = f.ctx();
  const int n = (int)f.n();
  const u64 m = f.m();
  guard_enumeration(ctx->order(), n * n);

  BruteForceResult res;

  if (ctx->is_prime_field() && ctx->characteristic() < (u64{1} << 16)) {
    // machine-word scan: compare the folded coefficient matrix of f(Ax)
    // with g's, which is exact in every characteristic
    const u64 p = ctx->characteristic();
    std::vector<std::vector<u64>> uf((size_t)m), ug((size_t)m);
    for (u64 i = 0; i < m; ++i) {
      uf[i].assign((size_t)n * n, 0);
      ug[i].assign((size_t)n * n, 0);
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
          uf[i][(size_t)r * n + c] = f.mat(i).at(r, c).words()[0];
          ug[i][(size_t)r * n + c] = g.mat(i).at(r, c).words()[0];
        }
    }
    std::vector<u64> a((size_t)n * n, 0);
    std::vector<u64> b((size_t)n * n, 0), t((size_t)n * n, 0);
    auto matches = [&]() {
      for (u64 i = 0; i < m; ++i) {
        const auto& u = uf[i];
        // b = U A, then t = A^T b
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) {
            u64 acc = 0;
            for (int k = 0; k < n; ++k) acc += u[(size_t)r * n + k] * a[(size_t)k * n + c];
            b[(size_t)r * n + c] = acc % p;
          }
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < n; ++c) {
            u64 acc = 0;
            for (int k = 0; k < n; ++k) acc += a[(size_t)k * n + r] * b[(size_t)k * n + c];
            t[(size_t)r * n + c] = acc % p;
          }
        const auto& u2 = ug[i];
        for (int r = 0; r < n; ++r) {
          if (t[(size_t)r * n + r] != u2[(size_t)r * n + r]) return false;
          for (int c = r + 1; c < n; ++c)
            if ((t[(size_t)r * n + c] + t[(size_t)c * n + r]) % p != u2[(size_t)r * n + c])
              return false;
        }
      }
      return true;
    };
    auto build = [&]() {
      MatrixF w(ctx, n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) w.at(i, j) = ctx->from_words({a[(size_t)i * n + j]});
      return w;
    };
    while (true) {
      if (matches()) {
        MatrixF w = build();
        if (!det(w).is_zero()) {
          ++res.count;
          res.equivalent = true;
          if (res.witnesses.size() < witness_cap) res.witnesses.push_back(std::move(w));
          if (stop_at_first) return res;
        }
      }
      std::size_t i = 0;
      for (; i < a.size(); ++i) {
        if (++a[i] < p) break;
        a[i] = 0;
      }
      if (i == a.size()) break;
    }
    return res;
  }

  Odometer odo(ctx->order(), n * n);
  do {
    MatrixF w(ctx, n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w.at(i, j) = ctx->element_at(odo.at((size_t)i * n + j));
    if (det(w).is_zero()) continue;
    if (f.substitute(w) == g) {
      ++res.count;
      res.equivalent = true;
      if (res.witnesses.size() < witness_cap) res.witnesses.push_back(std::move(w));
      if (stop_at_first) return res;
    }
  } while (odo.advance());
  return res;
}

}  // namespace ip1s
