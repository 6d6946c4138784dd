#include "ip1s/matrix.hpp"

#include <algorithm>
#include <sstream>

namespace ip1s {

namespace {

using Vec = std::vector<FieldElem>;
using VecList = std::vector<Vec>;

// Incremental echelon span. add() reduces against the stored rows; when the
// vector is dependent it returns its coefficients over the original added
// vectors, otherwise it stores the reduced row and returns nullopt.
class SpanRep {
 public:
  explicit SpanRep(bool track = false) : track_(track) {}

  size_t dim() const { return rows_.size(); }

  bool contains(const Vec& v) const {
    Vec r = v;
    reduce(r);
    for (const auto& x : r)
      if (!x.is_zero()) return false;
    return true;
  }

  std::optional<Vec> add(const Vec& v) {
    Vec r = v;
    Vec combo;
    if (track_) combo.assign(added_, v[0].ctx()->zero());
    for (size_t i = 0; i < rows_.size(); ++i) {
      const auto& x = r[pivots_[i]];
      if (x.is_zero()) continue;
      FieldElem f = x / rows_[i][pivots_[i]];
      for (size_t j = 0; j < r.size(); ++j) r[j] -= f * rows_[i][j];
      if (track_)
        for (size_t j = 0; j < reps_[i].size(); ++j) combo[j] += f * reps_[i][j];
    }
    int piv = -1;
    for (size_t j = 0; j < r.size(); ++j)
      if (!r[j].is_zero()) {
        piv = (int)j;
        break;
      }
    ++added_;
    if (piv < 0) {
      if (!track_) return Vec{};  // dependent marker; coefficients untracked
      return combo;
    }
    rows_.push_back(std::move(r));
    pivots_.push_back(piv);
    if (track_) {
      combo.resize(added_, v[0].ctx()->zero());
      // stored row = original minus the reductions applied above
      Vec rep = combo;
      for (auto& c : rep) c = -c;
      rep[added_ - 1] = v[0].ctx()->one();
      reps_.push_back(std::move(rep));
    }
    return std::nullopt;
  }

 private:
  void reduce(Vec& r) const {
    for (size_t i = 0; i < rows_.size(); ++i) {
      const auto& x = r[pivots_[i]];
      if (x.is_zero()) continue;
      FieldElem f = x / rows_[i][pivots_[i]];
      for (size_t j = 0; j < r.size(); ++j) r[j] -= f * rows_[i][j];
    }
  }

  bool track_;
  size_t added_ = 0;
  VecList rows_;
  std::vector<int> pivots_;
  VecList reps_;  // stored row i as combination of original vectors
};

// Row echelon in place. Returns pivot column per pivot row; optionally runs
// full reduction (entries above pivots cleared, pivots normalized to 1).
std::vector<int> echelonize(std::vector<Vec>& a, bool reduced) {
  const int nr = (int)a.size();
  const int nc = nr ? (int)a[0].size() : 0;
  std::vector<int> pivot_cols;
  int r = 0;
  for (int c = 0; c < nc && r < nr; ++c) {
    int pr = -1;
    for (int i = r; i < nr; ++i)
      if (!a[i][c].is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    std::swap(a[pr], a[r]);
    if (reduced) {
      FieldElem inv = a[r][c].inv();
      for (int j = c; j < nc; ++j) a[r][j] *= inv;
    }
    for (int i = 0; i < nr; ++i) {
      if (i == r || a[i][c].is_zero()) continue;
      if (!reduced && i < r) continue;
      FieldElem f = a[i][c] / a[r][c];
      for (int j = c; j < nc; ++j) a[i][j] -= f * a[r][j];
    }
    pivot_cols.push_back(c);
    ++r;
  }
  return pivot_cols;
}

std::vector<Vec> matrix_rows(const MatrixF& m) {
  std::vector<Vec> rows;
  rows.reserve(m.rows());
  for (int i = 0; i < m.rows(); ++i) rows.push_back(m.row(i));
  return rows;
}

}  // namespace

// ====== MatrixF basics ======

MatrixF::MatrixF(FieldPtr ctx, int rows, int cols) : ctx_(std::move(ctx)), rows_(rows), cols_(cols) {
  if (rows <= 0 || cols <= 0) throw ShapeMismatch("matrix dimensions must be positive");
  e_.assign((size_t)rows * cols, ctx_->zero());
}

MatrixF MatrixF::identity(const FieldPtr& ctx, int n) {
  MatrixF m(ctx, n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = ctx->one();
  return m;
}

MatrixF MatrixF::from_rows(const FieldPtr& ctx, const std::vector<std::vector<FieldElem>>& rows) {
  if (rows.empty() || rows[0].empty()) throw ShapeMismatch("empty row list");
  MatrixF m(ctx, (int)rows.size(), (int)rows[0].size());
  for (int i = 0; i < m.rows_; ++i) {
    if ((int)rows[i].size() != m.cols_) throw ShapeMismatch("ragged row list");
    for (int j = 0; j < m.cols_; ++j) m.at(i, j) = ctx->embed(rows[i][j]);
  }
  return m;
}

MatrixF MatrixF::from_ints(const FieldPtr& ctx, const std::vector<std::vector<std::int64_t>>& rows) {
  if (rows.empty() || rows[0].empty()) throw ShapeMismatch("empty row list");
  MatrixF m(ctx, (int)rows.size(), (int)rows[0].size());
  for (int i = 0; i < m.rows_; ++i) {
    if ((int)rows[i].size() != m.cols_) throw ShapeMismatch("ragged row list");
    for (int j = 0; j < m.cols_; ++j) m.at(i, j) = ctx->from_int(rows[i][j]);
  }
  return m;
}

MatrixF MatrixF::random(const FieldPtr& ctx, int rows, int cols, Rng& rng) {
  MatrixF m(ctx, rows, cols);
  for (auto& x : m.e_) x = ctx->sample(rng);
  return m;
}

MatrixF MatrixF::random_invertible(const FieldPtr& ctx, int n, Rng& rng) {
  for (int tries = 0; tries < 4096; ++tries) {
    MatrixF m = random(ctx, n, n, rng);
    if (!det(m).is_zero()) return m;
  }
  throw InternalError("random invertible matrix sampling exhausted its budget");
}

std::vector<FieldElem> MatrixF::row(int i) const {
  return Vec(e_.begin() + (size_t)i * cols_, e_.begin() + (size_t)(i + 1) * cols_);
}

std::vector<FieldElem> MatrixF::col(int j) const {
  Vec v;
  v.reserve(rows_);
  for (int i = 0; i < rows_; ++i) v.push_back(at(i, j));
  return v;
}

void MatrixF::set_col(int j, const std::vector<FieldElem>& v) {
  if ((int)v.size() != rows_) throw ShapeMismatch("column length mismatch");
  for (int i = 0; i < rows_; ++i) at(i, j) = ctx_->embed(v[i]);
}

MatrixF MatrixF::operator-() const {
  MatrixF r = *this;
  for (auto& x : r.e_) x = -x;
  return r;
}

MatrixF operator+(const MatrixF& a, const MatrixF& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw ShapeMismatch("matrix addition shape mismatch");
  MatrixF r = a;
  for (size_t k = 0; k < r.e_.size(); ++k) r.e_[k] += b.e_[k];
  return r;
}

MatrixF operator-(const MatrixF& a, const MatrixF& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) throw ShapeMismatch("matrix subtraction shape mismatch");
  MatrixF r = a;
  for (size_t k = 0; k < r.e_.size(); ++k) r.e_[k] -= b.e_[k];
  return r;
}

MatrixF operator*(const MatrixF& a, const MatrixF& b) {
  if (a.cols_ != b.rows_) throw ShapeMismatch("matrix product shape mismatch");
  const auto& ctx = a.ctx_;
  MatrixF r(ctx, a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i)
    for (int k = 0; k < a.cols_; ++k) {
      const FieldElem& aik = a.at(i, k);
      if (aik.is_zero()) continue;
      for (int j = 0; j < b.cols_; ++j) r.at(i, j) += aik * b.at(k, j);
    }
  return r;
}

MatrixF MatrixF::scaled(const FieldElem& c) const {
  MatrixF r = *this;
  for (auto& x : r.e_) x *= c;
  return r;
}

std::vector<FieldElem> MatrixF::mul_vec(const std::vector<FieldElem>& v) const {
  if ((int)v.size() != cols_) throw ShapeMismatch("matrix-vector shape mismatch");
  Vec r(rows_, ctx_->zero());
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r[i] += at(i, j) * v[j];
  return r;
}

MatrixF MatrixF::transpose() const {
  MatrixF r(ctx_, cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

MatrixF MatrixF::lift(const FieldPtr& ext) const {
  MatrixF r(ext, rows_, cols_);
  for (size_t k = 0; k < e_.size(); ++k) r.e_[k] = ext->embed(e_[k]);
  return r;
}

MatrixF MatrixF::entrywise_pow(const mpz_class& e) const {
  MatrixF r = *this;
  for (auto& x : r.e_) x = x.pow(e);
  return r;
}

bool operator==(const MatrixF& a, const MatrixF& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
  for (size_t k = 0; k < a.e_.size(); ++k)
    if (a.e_[k] != b.e_[k]) return false;
  return true;
}

bool MatrixF::is_zero() const {
  for (const auto& x : e_)
    if (!x.is_zero()) return false;
  return true;
}

bool MatrixF::is_identity() const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j)
      if (i == j ? !at(i, j).is_one() : !at(i, j).is_zero()) return false;
  return true;
}

FieldElem MatrixF::trace() const {
  if (!is_square()) throw ShapeMismatch("trace of a non-square matrix");
  FieldElem t = ctx_->zero();
  for (int i = 0; i < rows_; ++i) t += at(i, i);
  return t;
}

std::string MatrixF::to_text() const {
  std::string s = std::to_string(rows_) + " " + std::to_string(cols_) + "\n";
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) {
      if (j) s += " ";
      s += at(i, j).to_string();
    }
    s += "\n";
  }
  return s;
}

MatrixF MatrixF::parse_text(const FieldPtr& ctx, const std::string& text) {
  std::istringstream in(text);
  int r = 0, c = 0;
  if (!(in >> r >> c)) throw ParseError("matrix header must be 'rows cols'");
  if (r <= 0 || c <= 0) throw ParseError("matrix dimensions must be positive");
  MatrixF m(ctx, r, c);
  std::string tok;
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) {
      if (!(in >> tok)) throw ParseError("matrix body ended early");
      m.at(i, j) = ctx->parse_elem(tok);
    }
  return m;
}

// ====== elimination tasks ======

int rank(const MatrixF& m) {
  auto rows = matrix_rows(m);
  return (int)echelonize(rows, false).size();
}

FieldElem det(const MatrixF& m) {
  if (!m.is_square()) throw ShapeMismatch("determinant of a non-square matrix");
  auto a = matrix_rows(m);
  const int n = (int)a.size();
  FieldElem d = m.ctx()->one();
  for (int c = 0; c < n; ++c) {
    int pr = -1;
    for (int i = c; i < n; ++i)
      if (!a[i][c].is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) return m.ctx()->zero();
    if (pr != c) {
      std::swap(a[pr], a[c]);
      d = -d;
    }
    d *= a[c][c];
    FieldElem inv = a[c][c].inv();
    for (int i = c + 1; i < n; ++i) {
      if (a[i][c].is_zero()) continue;
      FieldElem f = a[i][c] * inv;
      for (int j = c; j < n; ++j) a[i][j] -= f * a[c][j];
    }
  }
  return d;
}

MatrixF inverse(const MatrixF& m) {
  if (!m.is_square()) throw ShapeMismatch("inverse of a non-square matrix");
  const int n = m.rows();
  auto a = matrix_rows(m);
  for (int i = 0; i < n; ++i) {
    a[i].resize(2 * n, m.ctx()->zero());
    a[i][n + i] = m.ctx()->one();
  }
  auto pivots = echelonize(a, true);
  if ((int)pivots.size() < n || pivots[n - 1] >= n)
    throw SingularMatrix("matrix is not invertible");
  MatrixF r(m.ctx(), n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) r.at(i, j) = a[i][n + j];
  return r;
}

std::vector<std::vector<FieldElem>> kernel_basis(const MatrixF& m) {
  auto a = matrix_rows(m);
  auto pivots = echelonize(a, true);
  const int nc = m.cols();
  std::vector<bool> is_pivot(nc, false);
  for (int c : pivots) is_pivot[c] = true;
  std::vector<Vec> basis;
  for (int c = 0; c < nc; ++c) {
    if (is_pivot[c]) continue;
    Vec v(nc, m.ctx()->zero());
    v[c] = m.ctx()->one();
    for (size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -a[r][c];
    basis.push_back(std::move(v));
  }
  return basis;
}

std::optional<SolveResult> solve(const MatrixF& m, const std::vector<FieldElem>& b) {
  if ((int)b.size() != m.rows()) throw ShapeMismatch("solve rhs length mismatch");
  const int nc = m.cols();
  auto a = matrix_rows(m);
  for (int i = 0; i < m.rows(); ++i) a[i].push_back(m.ctx()->embed(b[i]));
  auto pivots = echelonize(a, true);
  if (!pivots.empty() && pivots.back() == nc) return std::nullopt;
  SolveResult res;
  res.particular.assign(nc, m.ctx()->zero());
  for (size_t r = 0; r < pivots.size(); ++r) res.particular[pivots[r]] = a[r][nc];
  res.kernel = kernel_basis(m);
  return res;
}

// ====== characteristic and minimal polynomials ======

UniPoly charpoly(const MatrixF& m) {
  if (!m.is_square()) throw ShapeMismatch("charpoly of a non-square matrix");
  const auto& ctx = m.ctx();
  const int n = m.rows();
  auto h = matrix_rows(m);

  // similarity reduction to upper Hessenberg
  for (int j = 0; j + 2 < n; ++j) {
    int pr = -1;
    for (int i = j + 1; i < n; ++i)
      if (!h[i][j].is_zero()) {
        pr = i;
        break;
      }
    if (pr < 0) continue;
    if (pr != j + 1) {
      std::swap(h[pr], h[j + 1]);
      for (int i = 0; i < n; ++i) std::swap(h[i][pr], h[i][j + 1]);
    }
    FieldElem inv = h[j + 1][j].inv();
    for (int i = j + 2; i < n; ++i) {
      if (h[i][j].is_zero()) continue;
      FieldElem f = h[i][j] * inv;
      for (int c = j; c < n; ++c) h[i][c] -= f * h[j + 1][c];
      for (int r = 0; r < n; ++r) h[r][j + 1] += f * h[r][i];
    }
  }

  // p_m = (x - h_mm) p_{m-1} - sum_i h_im (prod of subdiagonals) p_{i-1}
  std::vector<UniPoly> p(n + 1);
  p[0] = UniPoly::one(ctx);
  for (int mi = 1; mi <= n; ++mi) {
    p[mi] = (UniPoly::x(ctx) - UniPoly::constant(h[mi - 1][mi - 1])) * p[mi - 1];
    FieldElem prod = ctx->one();
    for (int i = mi - 1; i >= 1; --i) {
      prod *= h[i][i - 1];
      if (prod.is_zero()) break;
      p[mi] = p[mi] - (p[i - 1] * UniPoly::constant(h[i - 1][mi - 1] * prod));
    }
  }
  return p[n];
}

UniPoly minpoly(const MatrixF& m) {
  if (!m.is_square()) throw ShapeMismatch("minpoly of a non-square matrix");
  const auto& ctx = m.ctx();
  const int n = m.rows();
  UniPoly mp = UniPoly::one(ctx);
  SpanRep all(false);
  for (int b = 0; b < n && mp.degree() < n; ++b) {
    Vec e(n, ctx->zero());
    e[b] = ctx->one();
    if (all.contains(e)) continue;  // already annihilated by mp
    SpanRep local(true);
    Vec v = e;
    std::optional<Vec> dep;
    while (!(dep = local.add(v))) {
      all.add(v);
      v = m.mul_vec(v);
    }
    // v = M^t e_b depends on earlier Krylov vectors with coefficients *dep
    std::vector<FieldElem> cs(dep->size() + 1, ctx->zero());
    for (size_t j = 0; j < dep->size(); ++j) cs[j] = -(*dep)[j];
    cs.back() = ctx->one();
    UniPoly local_min = UniPoly::from_coeffs(ctx, cs);
    mp = (mp * local_min) / gcd_poly(mp, local_min);
  }
  return mp.make_monic();
}

MatrixF eval_poly_at(const UniPoly& p, const MatrixF& m) {
  if (!m.is_square()) throw ShapeMismatch("polynomial evaluation needs a square matrix");
  const auto& ctx = m.ctx();
  const int n = m.rows();
  MatrixF r(ctx, n, n);
  if (p.is_zero()) return r;
  for (int t = p.degree(); t >= 0; --t) {
    if (t != p.degree()) r = r * m;
    FieldElem c = ctx->embed(p.coeff((std::uint64_t)t));
    for (int i = 0; i < n; ++i) r.at(i, i) += c;
  }
  return r;
}

// ====== Jordan normal form ======

namespace {

struct EigChains {
  FieldElem zeta;              // representative eigenvalue
  std::vector<VecList> chains;  // each chain: [h, Nh, N^2 h, ...], size desc
};

// Chains for one eigenvalue over its own field; mult is the algebraic
// multiplicity, so kernel dimensions of (M - zeta I)^k stabilize there.
EigChains build_chains(const MatrixF& m, const FieldElem& zeta, int mult) {
  const auto& L = zeta.ctx();
  const int n = m.rows();
  MatrixF ml = m.lift(L);
  MatrixF nmat = ml;
  for (int i = 0; i < n; ++i) nmat.at(i, i) -= zeta;

  std::vector<VecList> kerbasis{{}};  // kerbasis[k] = basis of ker N^k
  MatrixF npow = nmat;
  while ((int)kerbasis.back().size() < mult) {
    kerbasis.push_back(kernel_basis(npow));
    if ((int)kerbasis.size() > n + 1) throw InternalError("kernel chain failed to stabilize");
    npow = npow * nmat;
  }
  const int smax = (int)kerbasis.size() - 1;
  if ((int)kerbasis[smax].size() != mult)
    throw InternalError("generalized eigenspace dimension mismatch");

  EigChains out;
  out.zeta = zeta;
  for (int k = smax; k >= 1; --k) {
    SpanRep span(false);
    for (const auto& v : kerbasis[k - 1]) span.add(v);
    for (const auto& chain : out.chains) span.add(chain[chain.size() - k]);
    for (const auto& v : kerbasis[k]) {
      if (span.add(v)) continue;  // dependent
      VecList chain{v};
      for (int t = 1; t < k; ++t) chain.push_back(nmat.mul_vec(chain.back()));
      out.chains.push_back(std::move(chain));
    }
  }
  size_t total = 0;
  for (const auto& c : out.chains) total += c.size();
  if ((int)total != mult) throw InternalError("Jordan chain sizes do not sum to the multiplicity");
  return out;
}

}  // namespace

MatrixF JordanData::assembled() const {
  int n = 0;
  for (const auto& b : blocks) n += b.size;
  MatrixF j(ext, n, n);
  int off = 0;
  for (const auto& b : blocks) {
    FieldElem z = ext->embed(b.eigenvalue);
    for (int t = 0; t < b.size; ++t) {
      j.at(off + t, off + t) = z;
      if (t + 1 < b.size) j.at(off + t, off + t + 1) = ext->one();
    }
    off += b.size;
  }
  return j;
}

JordanData jordan_form(const MatrixF& m) {
  if (!m.is_square()) throw ShapeMismatch("Jordan form of a non-square matrix");
  const auto& base = m.ctx();
  const int n = m.rows();
  const mpz_class q = base->order();

  UniPoly cp = charpoly(m);
  auto factors = factor_univariate(cp);

  TowerLimits lim;
  lim.max_levels = std::max<std::uint64_t>(8, (std::uint64_t)base->level() + (std::uint64_t)n + 2);
  lim.max_total_degree = std::max<std::uint64_t>(std::uint64_t{1} << 16, base->total_degree() * 32768);

  struct FactorEig {
    FieldElem zeta;  // representative root, in `level_field`
    int degree;      // degree over the base field = number of conjugates
    int mult;
    int level;
  };

  FieldPtr top = base;
  std::vector<FactorEig> eigs;
  for (const auto& piece : factors) {
    FactorEig fe;
    fe.degree = piece.factor.degree();
    fe.mult = piece.multiplicity;
    if (fe.degree == 1) {
      fe.zeta = -piece.factor.coeff(0);  // stays in the base field
    } else {
      UniPoly lifted = top->same_field(*base) ? piece.factor : piece.factor.lift(top);
      auto sub = factor_univariate(lifted);
      if (sub[0].factor.degree() == 1) {
        fe.zeta = -sub[0].factor.coeff(0);
      } else {
        top = adjoin_root(sub[0].factor, lim);
        fe.zeta = top->gen();
      }
    }
    fe.level = fe.zeta.ctx()->level();
    eigs.push_back(fe);
  }

  JordanData jd;
  jd.ext = top;
  std::vector<Vec> tcols;
  for (size_t fi = 0; fi < eigs.size(); ++fi) {
    const auto& fe = eigs[fi];
    EigChains rep = build_chains(m, fe.zeta, fe.mult);
    for (int conj = 0; conj < fe.degree; ++conj) {
      if (conj > 0) {
        rep.zeta = rep.zeta.pow(q);
        for (auto& chain : rep.chains)
          for (auto& v : chain)
            for (auto& x : v) x = x.pow(q);
      }
      for (const auto& chain : rep.chains) {
        JordanBlock b;
        b.eigenvalue = rep.zeta;
        b.size = (int)chain.size();
        b.factor_index = (int)fi;
        b.conjugate_index = conj;
        b.field_level = fe.level;
        jd.blocks.push_back(b);
        for (size_t t = chain.size(); t-- > 0;) {
          Vec cvec;
          cvec.reserve(n);
          for (const auto& x : chain[t]) cvec.push_back(top->embed(x));
          tcols.push_back(std::move(cvec));
        }
      }
    }
  }

  jd.T = MatrixF(top, n, n);
  if ((int)tcols.size() != n) throw InternalError("Jordan basis column count mismatch");
  for (int j = 0; j < n; ++j) jd.T.set_col(j, tcols[j]);
  jd.T_inv = inverse(jd.T);
  return jd;
}

// ====== primary rational canonical form ======

namespace {

// kd x kd block: companion copies of P on the diagonal, a 1 in the
// bottom-left corner of each superdiagonal block.
MatrixF generalized_block(const UniPoly& p, int k) {
  const auto& ctx = p.ctx();
  const int d = p.degree();
  MatrixF g(ctx, k * d, k * d);
  for (int j = 0; j < k; ++j) {
    const int off = j * d;
    for (int t = 0; t + 1 < d; ++t) g.at(off + t + 1, off + t) = ctx->one();
    for (int t = 0; t < d; ++t) g.at(off + t, off + d - 1) = -p.coeff((std::uint64_t)t);
    if (j + 1 < k) g.at(off + d - 1, off + d) = ctx->one();
  }
  return g;
}

}  // namespace

MatrixF RationalCanonicalData::assembled() const {
  int n = 0;
  for (const auto& b : blocks) n += b.size;
  const auto& ctx = blocks.front().poly.ctx();
  MatrixF r(ctx, n, n);
  int off = 0;
  for (const auto& b : blocks) {
    for (int t = 0; t + 1 < b.size; ++t) r.at(off + t + 1, off + t) = ctx->one();
    for (int t = 0; t < b.size; ++t) r.at(off + t, off + b.size - 1) = -b.poly.coeff((std::uint64_t)t);
    if (b.link_to_next) r.at(off + b.size - 1, off + b.size) = ctx->one();
    off += b.size;
  }
  return r;
}

RationalCanonicalData rational_canonical_form(const MatrixF& m, std::uint64_t seed) {
  if (!m.is_square()) throw ShapeMismatch("canonical form of a non-square matrix");
  const auto& ctx = m.ctx();
  const int n = m.rows();
  Rng rng(seed);

  UniPoly cp = charpoly(m);
  auto factors = factor_univariate(cp);

  RationalCanonicalData out;
  std::vector<Vec> tcols;

  for (const auto& piece : factors) {
    const UniPoly& p = piece.factor;
    const int d = p.degree();
    const int e = piece.multiplicity;

    MatrixF q = eval_poly_at(p, m);
    std::vector<MatrixF> qpow{MatrixF::identity(ctx, n), q};
    std::vector<int> ranks{n, rank(q)};
    while (ranks.back() != ranks[ranks.size() - 2] && (int)ranks.size() <= e) {
      qpow.push_back(qpow.back() * q);
      ranks.push_back(rank(qpow.back()));
    }
    // count of elementary divisors with exponent >= t
    std::vector<int> cnt_geq{0};
    for (size_t t = 1; t < ranks.size(); ++t) {
      int drop = ranks[t - 1] - ranks[t];
      if (drop % d != 0) throw InternalError("rank drop not divisible by factor degree");
      cnt_geq.push_back(drop / d);
    }
    std::vector<int> exps;
    for (int j = 1; j <= cnt_geq[1]; ++j) {
      int k = 0;
      for (size_t t = 1; t < cnt_geq.size(); ++t)
        if (cnt_geq[t] >= j) k = (int)t;
      exps.push_back(k);
    }
    std::sort(exps.rbegin(), exps.rend());

    std::vector<VecList> kerbasis(exps.empty() ? 1 : exps[0] + 1);
    for (int k = 1; k < (int)kerbasis.size(); ++k)
      kerbasis[k] = kernel_basis(k < (int)qpow.size() ? qpow[k] : qpow.back());

    SpanRep chosen(false);
    for (int k : exps) {
      bool found = false;
      const auto& cand_basis = kerbasis[k];
      for (int attempt = 0; attempt < 500 + (int)cand_basis.size() && !found; ++attempt) {
        Vec v;
        if (attempt < (int)cand_basis.size()) {
          v = cand_basis[attempt];
        } else {
          v.assign(n, ctx->zero());
          for (const auto& bvec : cand_basis) {
            FieldElem c = ctx->sample(rng);
            for (int i = 0; i < n; ++i) v[i] += c * bvec[i];
          }
        }
        // annihilator must be exactly P^k
        bool exact = k == 0;
        if (k >= 1) {
          Vec w = qpow[k - 1].mul_vec(v);
          for (const auto& x : w) exact = exact || !x.is_zero();
        }
        if (!exact) continue;
        SpanRep trial = chosen;
        Vec w = v;
        bool indep = true;
        for (int t = 0; t < k * d && indep; ++t) {
          indep = !trial.add(w).has_value();
          if (t + 1 < k * d) w = m.mul_vec(w);
        }
        if (!indep) continue;
        chosen = std::move(trial);
        found = true;

        // basis of the cyclic subspace realizing the generalized block
        MatrixF g = generalized_block(p, k);
        MatrixF kry(ctx, n, k * d);
        Vec col = v;
        for (int t = 0; t < k * d; ++t) {
          kry.set_col(t, col);
          if (t + 1 < k * d) col = m.mul_vec(col);
        }
        MatrixF conv(ctx, 1, 1);
        bool have_conv = false;
        for (int ci = -1; ci < k * d + 64 && !have_conv; ++ci) {
          Vec w0(k * d, ctx->zero());
          if (ci < 0) {
            w0[(k - 1) * d] = ctx->one();
          } else if (ci < k * d) {
            w0[ci] = ctx->one();
          } else {
            for (auto& x : w0) x = ctx->sample(rng);
          }
          MatrixF kg(ctx, k * d, k * d);
          Vec gc = w0;
          for (int t = 0; t < k * d; ++t) {
            kg.set_col(t, gc);
            if (t + 1 < k * d) gc = g.mul_vec(gc);
          }
          try {
            conv = inverse(kg);
            have_conv = true;
          } catch (const SingularMatrix&) {
          }
        }
        if (!have_conv) throw InternalError("no cyclic vector found for the target block");
        MatrixF basis = kry * conv;
        for (int t = 0; t < k * d; ++t) tcols.push_back(basis.col(t));
        for (int j = 0; j < k; ++j) out.blocks.push_back({p, d, j + 1 < k});
      }
      if (!found) throw InternalError("cyclic generator search exhausted its budget");
    }
  }

  if ((int)tcols.size() != n) throw InternalError("canonical basis column count mismatch");
  out.T = MatrixF(ctx, n, n);
  for (int j = 0; j < n; ++j) out.T.set_col(j, tcols[j]);
  out.T_inv = inverse(out.T);
  return out;
}

}  // namespace ip1s
