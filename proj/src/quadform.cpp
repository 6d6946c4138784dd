#include "ip1s/quadform.hpp"

#include <algorithm>
#include <sstream>

#include "ip1s/errors.hpp"

namespace ip1s {

namespace {

// Fold a full coefficient matrix into the upper-triangular convention:
// coefficient of x_i x_j (i < j) is B_ij + B_ji, of x_i^2 is B_ii.
MatrixF fold_upper(const MatrixF& b) {
  const int n = b.rows();
  MatrixF u(b.ctx(), n, n);
  for (int i = 0; i < n; ++i) {
    u.at(i, i) = b.at(i, i);
    for (int j = i + 1; j < n; ++j) u.at(i, j) = b.at(i, j) + b.at(j, i);
  }
  return u;
}

bool strictly_upper_ok(const MatrixF& m) {
  for (int i = 1; i < m.rows(); ++i)
    for (int j = 0; j < i; ++j)
      if (!m.at(i, j).is_zero()) return false;
  return true;
}

}  // namespace

QuadSystem::QuadSystem(FieldPtr ctx, std::uint64_t n, std::vector<MatrixF> mats)
    : QuadSystem(std::move(ctx), n, std::move(mats), {}, {}) {}

QuadSystem::QuadSystem(FieldPtr ctx, std::uint64_t n, std::vector<MatrixF> mats,
                       std::vector<Vec> linear, std::vector<FieldElem> consts)
    : ctx_(std::move(ctx)), n_(n), mats_(std::move(mats)), linear_(std::move(linear)),
      consts_(std::move(consts)) {
  if (!ctx_) throw ShapeMismatch("quadratic system needs a field context");
  for (const auto& m : mats_) {
    if (m.rows() != (int)n_ || m.cols() != (int)n_)
      throw ShapeMismatch("coefficient matrix is not n x n");
    if (!m.ctx()->same_field(*ctx_)) throw ShapeMismatch("coefficient matrix over a different field");
    if (!strictly_upper_ok(m)) throw ShapeMismatch("coefficient matrix must be upper triangular");
  }
  if (linear_.empty()) linear_.assign(mats_.size(), Vec((size_t)n_, ctx_->zero()));
  if (consts_.empty()) consts_.assign(mats_.size(), ctx_->zero());
  if (linear_.size() != mats_.size() || consts_.size() != mats_.size())
    throw ShapeMismatch("affine part count differs from polynomial count");
  homogeneous_ = true;
  for (const auto& l : linear_) {
    if (l.size() != (size_t)n_) throw ShapeMismatch("linear part has wrong length");
    for (const auto& e : l)
      if (!e.is_zero()) homogeneous_ = false;
  }
  for (const auto& c : consts_)
    if (!c.is_zero()) homogeneous_ = false;
}

QuadSystem QuadSystem::zero(const FieldPtr& ctx, std::uint64_t n, std::uint64_t m) {
  return QuadSystem(ctx, n, std::vector<MatrixF>((size_t)m, MatrixF(ctx, (int)n, (int)n)));
}

QuadSystem QuadSystem::random_homogeneous(const FieldPtr& ctx, std::uint64_t n, std::uint64_t m,
                                          Rng& rng) {
  std::vector<MatrixF> mats;
  mats.reserve((size_t)m);
  for (std::uint64_t k = 0; k < m; ++k) {
    MatrixF h(ctx, (int)n, (int)n);
    for (int i = 0; i < (int)n; ++i)
      for (int j = i; j < (int)n; ++j) h.at(i, j) = ctx->sample(rng);
    mats.push_back(std::move(h));
  }
  return QuadSystem(ctx, n, std::move(mats));
}

FieldElem QuadSystem::evaluate_one(std::uint64_t i, const Vec& point) const {
  if (point.size() != (size_t)n_) throw ShapeMismatch("evaluation point has wrong length");
  const MatrixF& h = mats_.at(i);
  FieldElem acc = consts_.at(i);
  for (int r = 0; r < (int)n_; ++r) {
    for (int c = r; c < (int)n_; ++c) {
      const FieldElem& coef = h.at(r, c);
      if (!coef.is_zero()) acc += coef * point[(size_t)r] * point[(size_t)c];
    }
    if (!linear_[i][(size_t)r].is_zero()) acc += linear_[i][(size_t)r] * point[(size_t)r];
  }
  return acc;
}

Vec QuadSystem::evaluate(const Vec& point) const {
  Vec out;
  out.reserve(m());
  for (std::uint64_t i = 0; i < m(); ++i) out.push_back(evaluate_one(i, point));
  return out;
}

QuadSystem QuadSystem::substitute(const MatrixF& a) const {
  return substitute_affine(a, Vec((size_t)n_, ctx_->zero()));
}

QuadSystem QuadSystem::substitute_affine(const MatrixF& a, const Vec& b) const {
  if (a.rows() != (int)n_ || a.cols() != (int)n_ || b.size() != (size_t)n_)
    throw ShapeMismatch("substitution shape mismatch");
  const MatrixF at = a.transpose();
  std::vector<MatrixF> mats;
  std::vector<Vec> lins;
  std::vector<FieldElem> consts;
  for (std::uint64_t i = 0; i < m(); ++i) {
    const MatrixF& h = mats_[i];
    mats.push_back(fold_upper(at * h * a));
    // row vector b^T (H + H^T) A + L A; the symmetrized matrix eats the transpose
    Vec sym = (h + h.transpose()).mul_vec(b);
    Vec lin((size_t)n_, ctx_->zero());
    for (int cidx = 0; cidx < (int)n_; ++cidx) {
      FieldElem s = ctx_->zero();
      for (int r = 0; r < (int)n_; ++r) {
        s += sym[(size_t)r] * a.at(r, cidx);
        s += linear_[i][(size_t)r] * a.at(r, cidx);
      }
      lin[(size_t)cidx] = s;
    }
    FieldElem c = consts_[i];
    for (int r = 0; r < (int)n_; ++r) {
      for (int cc = r; cc < (int)n_; ++cc) c += h.at(r, cc) * b[(size_t)r] * b[(size_t)cc];
      c += linear_[i][(size_t)r] * b[(size_t)r];
    }
    lins.push_back(std::move(lin));
    consts.push_back(c);
  }
  return QuadSystem(ctx_, n_, std::move(mats), std::move(lins), std::move(consts));
}

QuadSystem QuadSystem::poly_slice(std::uint64_t i) const {
  return QuadSystem(ctx_, n_, {mats_.at(i)}, {linear_.at(i)}, {consts_.at(i)});
}

QuadSystem QuadSystem::restrict_vars(std::uint64_t s) const {
  if (s > n_) throw ShapeMismatch("cannot restrict to more variables than present");
  std::vector<MatrixF> mats;
  std::vector<Vec> lins;
  for (std::uint64_t i = 0; i < m(); ++i) {
    for (int r = 0; r < (int)n_; ++r)
      for (int c = r; c < (int)n_; ++c)
        if ((r >= (int)s || c >= (int)s) && !mats_[i].at(r, c).is_zero())
          throw InternalError("restriction drops a nonzero coefficient");
    for (std::uint64_t r = s; r < n_; ++r)
      if (!linear_[i][(size_t)r].is_zero())
        throw InternalError("restriction drops a nonzero linear coefficient");
    MatrixF h(ctx_, (int)s, (int)s);
    for (int r = 0; r < (int)s; ++r)
      for (int c = r; c < (int)s; ++c) h.at(r, c) = mats_[i].at(r, c);
    mats.push_back(std::move(h));
    lins.emplace_back(linear_[i].begin(), linear_[i].begin() + (long)s);
  }
  return QuadSystem(ctx_, s, std::move(mats), std::move(lins), consts_);
}

QuadSystem QuadSystem::pad_vars(std::uint64_t n_total) const {
  if (n_total < n_) throw ShapeMismatch("padding cannot shrink the system");
  std::vector<MatrixF> mats;
  std::vector<Vec> lins;
  for (std::uint64_t i = 0; i < m(); ++i) {
    MatrixF h(ctx_, (int)n_total, (int)n_total);
    for (int r = 0; r < (int)n_; ++r)
      for (int c = r; c < (int)n_; ++c) h.at(r, c) = mats_[i].at(r, c);
    mats.push_back(std::move(h));
    Vec l = linear_[i];
    l.resize((size_t)n_total, ctx_->zero());
    lins.push_back(std::move(l));
  }
  return QuadSystem(ctx_, n_total, std::move(mats), std::move(lins), consts_);
}

bool QuadSystem::operator==(const QuadSystem& other) const {
  if (!ctx_->same_field(*other.ctx_) || n_ != other.n_ || m() != other.m()) return false;
  for (std::uint64_t i = 0; i < m(); ++i) {
    if (!(mats_[i] == other.mats_[i])) return false;
    for (std::uint64_t r = 0; r < n_; ++r)
      if (linear_[i][(size_t)r] != other.linear_[i][(size_t)r]) return false;
    if (consts_[i] != other.consts_[i]) return false;
  }
  return true;
}

std::string QuadSystem::to_text() const {
  std::ostringstream os;
  os << "n=" << n_ << " m=" << m() << "\n";
  for (std::uint64_t i = 0; i < m(); ++i) {
    for (int r = 0; r < (int)n_; ++r) {
      for (int c = 0; c < (int)n_; ++c) {
        if (c) os << ' ';
        os << mats_[i].at(r, c).to_string();
      }
      os << "\n";
    }
    if (!homogeneous_) {
      os << "L";
      for (std::uint64_t r = 0; r < n_; ++r) os << ' ' << linear_[i][(size_t)r].to_string();
      os << "\nc " << consts_[i].to_string() << "\n";
    }
    os << "\n";
  }
  return os.str();
}

MatrixF hessian(const QuadSystem& sys, std::uint64_t i) {
  const MatrixF& h = sys.mat(i);
  return h + h.transpose();
}

MatrixF delta_diag(const QuadSystem& sys, std::uint64_t i) {
  const MatrixF& h = sys.mat(i);
  MatrixF d(sys.ctx(), h.rows(), h.rows());
  for (int k = 0; k < h.rows(); ++k) d.at(k, k) = h.at(k, k);
  return d;
}

QuadSystem homogenize_one(const QuadSystem& f) {
  const FieldPtr& ctx = f.ctx();
  const int n = (int)f.n();
  std::vector<MatrixF> mats;
  MatrixF guard(ctx, n + 1, n + 1);
  guard.at(0, 0) = ctx->one();
  mats.push_back(std::move(guard));
  for (std::uint64_t i = 0; i < f.m(); ++i) {
    MatrixF h(ctx, n + 1, n + 1);
    h.at(0, 0) = f.constant(i);
    for (int j = 0; j < n; ++j) h.at(0, j + 1) = f.linear(i)[(size_t)j];
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) h.at(r + 1, c + 1) = f.mat(i).at(r, c);
    mats.push_back(std::move(h));
  }
  return QuadSystem(ctx, (std::uint64_t)n + 1, std::move(mats));
}

QuadSystem dehomogenize_one(const QuadSystem& fstar) {
  const FieldPtr& ctx = fstar.ctx();
  if (!fstar.homogeneous() || fstar.n() < 1 || fstar.m() < 1)
    throw ShapeMismatch("not a homogenized system");
  const int n = (int)fstar.n() - 1;
  MatrixF guard(ctx, n + 1, n + 1);
  guard.at(0, 0) = ctx->one();
  if (!(fstar.mat(0) == guard)) throw ShapeMismatch("guard polynomial is not x0^2");
  std::vector<MatrixF> mats;
  std::vector<Vec> lins;
  std::vector<FieldElem> consts;
  for (std::uint64_t i = 1; i < fstar.m(); ++i) {
    const MatrixF& h = fstar.mat(i);
    MatrixF core(ctx, n, n);
    Vec lin((size_t)n, ctx->zero());
    for (int r = 0; r < n; ++r)
      for (int c = r; c < n; ++c) core.at(r, c) = h.at(r + 1, c + 1);
    for (int j = 0; j < n; ++j) lin[(size_t)j] = h.at(0, j + 1);
    mats.push_back(std::move(core));
    lins.push_back(std::move(lin));
    consts.push_back(h.at(0, 0));
  }
  return QuadSystem(ctx, (std::uint64_t)n, std::move(mats), std::move(lins), std::move(consts));
}

std::pair<QuadSystem, QuadSystem> homogenize(const QuadSystem& f, const QuadSystem& g) {
  if (!f.ctx()->same_field(*g.ctx()) || f.n() != g.n() || f.m() != g.m())
    throw ShapeMismatch("systems of a pair must match in field, n and m");
  return {homogenize_one(f), homogenize_one(g)};
}

EssentialReduction essential_reduce(const QuadSystem& sys) {
  const FieldPtr& ctx = sys.ctx();
  const int n = (int)sys.n();
  const std::uint64_t m = sys.m();

  // common kernel of the symmetrized matrices
  MatrixF stacked(ctx, std::max<int>(1, (int)m * n), n);
  for (std::uint64_t i = 0; i < m; ++i) {
    MatrixF h = hessian(sys, i);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) stacked.at((int)i * n + r, c) = h.at(r, c);
  }
  std::vector<Vec> v0 = kernel_basis(stacked);

  std::vector<Vec> vk;
  if (ctx->characteristic() == 2 && !v0.empty() && m > 0) {
    // on the common kernel every f_i is additive, and sqrt(f_i(.)) is linear;
    // the square terms cut the kernel further
    MatrixF phi(ctx, (int)m, (int)v0.size());
    for (std::uint64_t i = 0; i < m; ++i)
      for (size_t j = 0; j < v0.size(); ++j) phi.at((int)i, (int)j) = sqrt(sys.evaluate_one(i, v0[j]));
    for (const Vec& c : kernel_basis(phi)) {
      Vec v((size_t)n, ctx->zero());
      for (size_t j = 0; j < v0.size(); ++j)
        for (int r = 0; r < n; ++r) v[(size_t)r] += c[j] * v0[j][(size_t)r];
      vk.push_back(std::move(v));
    }
  } else {
    vk = std::move(v0);
  }

  const std::uint64_t s = (std::uint64_t)n - vk.size();

  // complete a basis in front of the kernel vectors with standard basis vectors
  std::vector<Vec> cols = vk;
  auto cols_rank = [&]() {
    MatrixF probe(ctx, n, (int)cols.size());
    for (size_t j = 0; j < cols.size(); ++j) probe.set_col((int)j, cols[j]);
    return rank(probe);
  };
  std::vector<int> kept;
  int cur = cols.empty() ? 0 : cols_rank();
  for (int t = 0; t < n && kept.size() < (size_t)s; ++t) {
    Vec et((size_t)n, ctx->zero());
    et[(size_t)t] = ctx->one();
    cols.push_back(et);
    if (cols_rank() > cur) {
      kept.push_back(t);
      ++cur;
    } else {
      cols.pop_back();
    }
  }
  if (kept.size() != (size_t)s) throw InternalError("essential basis completion failed");

  MatrixF mmat(ctx, n, n);
  for (size_t j = 0; j < kept.size(); ++j) {
    Vec et((size_t)n, ctx->zero());
    et[(size_t)kept[j]] = ctx->one();
    mmat.set_col((int)j, et);
  }
  for (size_t j = 0; j < vk.size(); ++j) mmat.set_col((int)(s + j), vk[j]);

  QuadSystem reduced = sys.substitute(mmat).restrict_vars(s);
  return {s, std::move(mmat), std::move(reduced)};
}

namespace {

FieldElem combo_det(const std::vector<MatrixF>& hs, const std::vector<FieldElem>& lambda) {
  MatrixF acc(hs[0].ctx(), hs[0].rows(), hs[0].cols());
  for (size_t i = 0; i < hs.size(); ++i)
    if (!lambda[i].is_zero()) acc = acc + hs[i].scaled(lambda[i]);
  return det(acc);
}

}  // namespace

RegularCombo regular_combination(const QuadSystem& f, const QuadSystem& g, std::uint64_t seed) {
  if (!f.homogeneous() || !g.homogeneous())
    throw ShapeMismatch("regular combination expects homogeneous systems");
  if (!f.ctx()->same_field(*g.ctx()) || f.n() != g.n() || f.m() != g.m())
    throw ShapeMismatch("systems of a pair must match in field, n and m");
  const FieldPtr& ctx = f.ctx();
  const std::uint64_t m = f.m();
  if (m == 0) throw ShapeMismatch("empty system");
  if (ctx->characteristic() == 2 && f.n() % 2 == 1)
    return {ComboStatus::Irregular, {}, 0};  // alternating matrices of odd size are singular

  std::vector<MatrixF> fh, gh;
  for (std::uint64_t i = 0; i < m; ++i) {
    fh.push_back(hessian(f, i));
    gh.push_back(hessian(g, i));
  }

  auto finish = [&](std::vector<FieldElem> lambda) -> RegularCombo {
    std::uint64_t pivot = 0;
    while (pivot < m && lambda[pivot].is_zero()) ++pivot;
    ComboStatus st =
        combo_det(gh, lambda).is_zero() ? ComboStatus::GSideSingular : ComboStatus::Found;
    return {st, std::move(lambda), pivot};
  };

  Rng rng(seed);
  for (int trial = 0; trial < 32; ++trial) {
    std::vector<FieldElem> lambda;
    bool allzero = true;
    for (std::uint64_t i = 0; i < m; ++i) {
      lambda.push_back(ctx->sample(rng));
      allzero = allzero && lambda.back().is_zero();
    }
    if (allzero) continue;
    if (!combo_det(fh, lambda).is_zero()) return finish(std::move(lambda));
  }

  mpz_class total;
  mpz_pow_ui(total.get_mpz_t(), ctx->order().get_mpz_t(), (unsigned long)m);
  if (total <= 65536) {
    for (mpz_class idx = 1; idx < total; ++idx) {
      std::vector<FieldElem> lambda;
      mpz_class rest = idx;
      for (std::uint64_t i = 0; i < m; ++i) {
        mpz_class digit = rest % ctx->order();
        rest /= ctx->order();
        lambda.push_back(ctx->element_at(digit));
      }
      if (!combo_det(fh, lambda).is_zero()) return finish(std::move(lambda));
    }
    return {ComboStatus::Irregular, {}, 0};
  }
  return {ComboStatus::ProbablyIrregular, {}, 0};
}

namespace {

// congruence column operations: the matrix is kept symmetric, P tracks the
// accumulated change of basis so P^T phi P equals the working matrix
struct CongruenceOps {
  MatrixF& a;
  MatrixF& p;

  void col_add(int dst, int src, const FieldElem& c) {
    const int n = a.rows();
    for (int i = 0; i < n; ++i) a.at(i, dst) += c * a.at(i, src);
    for (int j = 0; j < n; ++j) a.at(dst, j) += c * a.at(src, j);
    for (int i = 0; i < p.rows(); ++i) p.at(i, dst) += c * p.at(i, src);
  }
  void col_scale(int j, const FieldElem& c) {
    const int n = a.rows();
    for (int i = 0; i < n; ++i) a.at(i, j) *= c;
    for (int i = 0; i < n; ++i) a.at(j, i) *= c;
    for (int i = 0; i < p.rows(); ++i) p.at(i, j) *= c;
  }
  void col_swap(int i, int j) {
    if (i == j) return;
    const int n = a.rows();
    for (int r = 0; r < n; ++r) std::swap(a.at(r, i), a.at(r, j));
    for (int c = 0; c < n; ++c) std::swap(a.at(i, c), a.at(j, c));
    for (int r = 0; r < p.rows(); ++r) std::swap(p.at(r, i), p.at(r, j));
  }
};

}  // namespace

DiagReduction gauss_reduce(const MatrixF& phi) {
  const FieldPtr& ctx = phi.ctx();
  if (!phi.is_square()) throw ShapeMismatch("quadratic form matrix must be square");
  if (ctx->characteristic() == 2) throw UnsupportedKind("diagonal reduction needs odd characteristic");
  if (!(phi == phi.transpose())) throw ShapeMismatch("quadratic form matrix must be symmetric");
  const int n = phi.rows();
  if (det(phi).is_zero()) throw DegenerateForm("quadratic form is singular");

  MatrixF a = phi;
  MatrixF p = MatrixF::identity(ctx, n);
  CongruenceOps ops{a, p};
  for (int k = 0; k < n; ++k) {
    if (a.at(k, k).is_zero()) {
      int good = -1;
      for (int l = k + 1; l < n; ++l)
        if (!a.at(l, l).is_zero()) {
          good = l;
          break;
        }
      if (good >= 0) {
        ops.col_swap(k, good);
      } else {
        int off = -1;
        for (int l = k + 1; l < n; ++l)
          if (!a.at(k, l).is_zero()) {
            off = l;
            break;
          }
        if (off < 0) throw InternalError("nonsingular form lost rank during reduction");
        ops.col_add(k, off, ctx->one());  // diagonal becomes 2 a_kl != 0
      }
    }
    const FieldElem d = a.at(k, k);
    for (int l = k + 1; l < n; ++l)
      if (!a.at(k, l).is_zero()) ops.col_add(l, k, -(a.at(k, l) / d));
  }
  for (int k = 0; k < n; ++k) {
    const FieldElem d = a.at(k, k);
    if (is_square(d)) {
      ops.col_scale(k, sqrt(d).inv());
    } else {
      const FieldElem ns = ctx->canonical_nonsquare();
      ops.col_scale(k, sqrt(d / ns).inv());
    }
  }
  return {std::move(a), std::move(p)};
}

void collapse_nonsquares(DiagReduction& red) {
  const FieldPtr& ctx = red.D.ctx();
  const int n = red.D.rows();
  const FieldElem ns = ctx->canonical_nonsquare();
  std::vector<int> idx;
  for (int k = 0; k < n; ++k)
    if (red.D.at(k, k) == ns) idx.push_back(k);

  if (idx.size() >= 2) {
    // u^2 + v^2 = 1/ns is solvable; scan the enumeration for the first u
    FieldElem u = ctx->zero(), v = ctx->zero();
    const FieldElem target = ns.inv();
    bool found = false;
    for (mpz_class t = 0; t < ctx->order(); ++t) {
      u = ctx->element_at(t);
      const FieldElem rest = target - u * u;
      if (is_square(rest)) {
        v = sqrt(rest);
        found = true;
        break;
      }
    }
    if (!found) throw InternalError("no representation of 1/ns as a sum of two squares");

    CongruenceOps ops{red.D, red.P};
    for (size_t t = 0; t + 1 < idx.size(); t += 2) {
      const int a = idx[t], b = idx[t + 1];
      // c1 = u e_a + v e_b has value ns(u^2+v^2) = 1
      MatrixF trans = MatrixF::identity(ctx, n);
      trans.at(a, a) = u;
      trans.at(b, a) = v;
      // orthogonalize e_b against c1 under diag(ns, ns): c2 = e_b - (v ns) c1
      const FieldElem w = v * ns;
      trans.at(a, b) = -(w * u);
      trans.at(b, b) = ctx->one() - w * v;
      red.D = trans.transpose() * red.D * trans;
      red.P = red.P * trans;
      const FieldElem val2 = red.D.at(b, b);
      if (!red.D.at(a, a).is_one() || !red.D.at(a, b).is_zero() || !is_square(val2))
        throw InternalError("nonsquare pair collapse produced a wrong block");
      ops.col_scale(b, sqrt(val2).inv());
    }
  }
  if (idx.size() % 2 == 1) {
    const int last = idx.back();
    if (last != n - 1) {
      CongruenceOps ops{red.D, red.P};
      ops.col_swap(last, n - 1);
    }
  }
}

FieldElem canonical_trace_one(const FieldPtr& ctx) {
  if (ctx->characteristic() != 2)
    throw UnsupportedKind("trace-one constants are a characteristic-2 device");
  for (mpz_class t = 0; t < ctx->order(); ++t) {
    FieldElem d = ctx->element_at(t);
    if (trace_to_f2(d) == 1) return d;
  }
  throw InternalError("no trace-one element found");
}

namespace {

// characteristic-2 working state: alternating matrix s of the mixed
// coefficients, diagonal vector dv of the square coefficients, accumulated P
struct QuadC2 {
  MatrixF s;
  Vec dv;
  MatrixF p;

  void col_swap(int i, int j) {
    if (i == j) return;
    const int n = s.rows();
    for (int r = 0; r < n; ++r) std::swap(s.at(r, i), s.at(r, j));
    for (int c = 0; c < n; ++c) std::swap(s.at(i, c), s.at(j, c));
    std::swap(dv[(size_t)i], dv[(size_t)j]);
    for (int r = 0; r < n; ++r) std::swap(p.at(r, i), p.at(r, j));
  }
  void col_scale(int j, const FieldElem& c) {
    const int n = s.rows();
    for (int i = 0; i < n; ++i) s.at(i, j) *= c;
    for (int i = 0; i < n; ++i) s.at(j, i) *= c;
    dv[(size_t)j] *= c * c;
    for (int i = 0; i < n; ++i) p.at(i, j) *= c;
  }
  // col_dst += c * col_src as a substitution of variables
  void col_add(int dst, int src, const FieldElem& c) {
    const int n = s.rows();
    const FieldElem cross = s.at(src, dst);
    for (int i = 0; i < n; ++i) s.at(i, dst) += c * s.at(i, src);
    for (int i = 0; i < n; ++i) s.at(dst, i) += c * s.at(src, i);
    s.at(dst, dst) = s.ctx()->zero();
    dv[(size_t)dst] += c * c * dv[(size_t)src] + c * cross;
    for (int i = 0; i < n; ++i) p.at(i, dst) += c * p.at(i, src);
  }

  // assumes the plane (k, k+1) pairs to 1 and is orthogonal to the rest;
  // turns its form a x^2 + xy + b y^2 hyperbolic when tr(ab) = 0, else into
  // the normal elliptic block x^2 + xy + d0 y^2. Returns true if elliptic.
  bool normalize_plane(int k, const FieldElem& d0) {
    FieldElem a = dv[(size_t)k], b = dv[(size_t)k + 1];
    if (a.is_zero() && b.is_zero()) return false;
    if (!a.is_zero() && !b.is_zero()) {
      if (trace_to_f2(a * b) == 0) {
        auto w = artin_schreier_root(a * b);
        if (!w) throw InternalError("trace-zero product without an Artin-Schreier root");
        col_add(k, k + 1, *w / b);  // kills the x^2 term
        a = dv[(size_t)k];
      } else {
        const FieldElem sc = sqrt(a);
        col_scale(k, sc.inv());
        col_scale(k + 1, sc);
        auto u = artin_schreier_root(dv[(size_t)k + 1] + d0);
        if (!u) throw InternalError("elliptic constants differ by a trace-one element");
        if (!u->is_zero()) col_add(k + 1, k, *u);
        return true;
      }
    }
    a = dv[(size_t)k];
    b = dv[(size_t)k + 1];
    if (a.is_zero() && !b.is_zero()) col_add(k + 1, k, b);
    else if (!a.is_zero() && b.is_zero()) col_add(k, k + 1, a);
    if (!dv[(size_t)k].is_zero() || !dv[(size_t)k + 1].is_zero() || !s.at(k, k + 1).is_one())
      throw InternalError("hyperbolic normalization failed");
    return false;
  }
};

}  // namespace

Char2Canon canonical_char2(const MatrixF& upper_tri_form) {
  const FieldPtr& ctx = upper_tri_form.ctx();
  if (ctx->characteristic() != 2) throw UnsupportedKind("this normal form lives in characteristic 2");
  if (!upper_tri_form.is_square()) throw ShapeMismatch("form matrix must be square");
  if (!strictly_upper_ok(upper_tri_form)) throw ShapeMismatch("form matrix must be upper triangular");
  const int n = upper_tri_form.rows();
  if (n % 2 == 1) throw DegenerateForm("mixed-coefficient matrix is singular in odd dimension");
  MatrixF sigma = upper_tri_form + upper_tri_form.transpose();
  if (det(sigma).is_zero()) throw DegenerateForm("mixed-coefficient matrix is singular");

  const FieldElem d0 = canonical_trace_one(ctx);
  QuadC2 st{sigma, Vec(), MatrixF::identity(ctx, n)};
  st.dv.reserve((size_t)n);
  for (int k = 0; k < n; ++k) st.dv.push_back(upper_tri_form.at(k, k));

  int elliptic_at = -1;
  for (int k = 0; k < n; k += 2) {
    int l = -1;
    for (int j = k + 1; j < n; ++j)
      if (!st.s.at(k, j).is_zero()) {
        l = j;
        break;
      }
    if (l < 0) throw InternalError("nondegenerate pairing ran out of partners");
    st.col_swap(k + 1, l);
    st.col_scale(k + 1, st.s.at(k, k + 1).inv());
    for (int j = k + 2; j < n; ++j) {
      const FieldElem alpha = st.s.at(k + 1, j), beta = st.s.at(k, j);
      if (!alpha.is_zero()) st.col_add(j, k, alpha);
      if (!beta.is_zero()) st.col_add(j, k + 1, beta);
    }
    if (st.normalize_plane(k, d0)) {
      if (elliptic_at >= 0) {
        // two elliptic planes make two hyperbolic ones
        st.col_add(elliptic_at, k, ctx->one());
        st.col_add(k + 1, elliptic_at + 1, ctx->one());
        if (st.normalize_plane(elliptic_at, d0) || st.normalize_plane(k, d0))
          throw InternalError("elliptic pair did not merge to hyperbolic planes");
        elliptic_at = -1;
      } else {
        elliptic_at = k;
      }
    }
  }
  if (elliptic_at >= 0 && elliptic_at != n - 2) {
    st.col_swap(elliptic_at, n - 2);
    st.col_swap(elliptic_at + 1, n - 1);
    elliptic_at = n - 2;
  }

  MatrixF delta(ctx, n, n);
  for (int k = 0; k < n; k += 2) delta.at(k, k + 1) = ctx->one();
  if (elliptic_at >= 0) {
    delta.at(n - 2, n - 2) = ctx->one();
    delta.at(n - 1, n - 1) = d0;
  }
  MatrixF check = fold_upper(st.p.transpose() * upper_tri_form * st.p);
  if (!(check == delta)) throw InternalError("normal form does not match its certificate");
  return {std::move(delta), std::move(st.p),
          elliptic_at >= 0 ? Char2Type::Elliptic : Char2Type::Hyperbolic, d0};
}

void shift_invertible(CanonicalInstance& inst) {
  const FieldPtr& ctx = inst.ctx;
  const bool char2 = ctx->characteristic() == 2;
  const std::uint64_t m = inst.hs.size();
  if (m == 0 || inst.hs2.size() != m) throw ShapeMismatch("instance sides differ in length");
  const int n = inst.hs[0].rows();
  auto view_det = [&](const MatrixF& h) {
    return char2 ? det(h + h.transpose()) : det(h);
  };
  if (view_det(inst.hs[0]).is_zero() || view_det(inst.hs2[0]).is_zero())
    throw ShapeMismatch("leading matrices must be invertible before shifting");

  inst.shifts.assign(m, ctx->zero());
  mpz_class scan = std::min(ctx->order(), mpz_class(2 * n + 1));
  for (std::uint64_t i = 1; i < m; ++i) {
    bool done = false;
    for (mpz_class t = 0; t < scan && !done; ++t) {
      const FieldElem nu = ctx->element_at(t);
      MatrixF hf = inst.hs[i] - inst.hs[0].scaled(nu);
      MatrixF hg = inst.hs2[i] - inst.hs2[0].scaled(nu);
      if (!view_det(hf).is_zero() && !view_det(hg).is_zero()) {
        inst.shifts[i] = nu;
        inst.hs[i] = std::move(hf);
        inst.hs2[i] = std::move(hg);
        done = true;
      }
    }
    if (!done) throw FieldTooSmall("no shift makes both sides invertible");
  }
}

std::string write_instance(const QuadSystem& f, const QuadSystem& g) {
  if (!f.ctx()->same_field(*g.ctx()) || f.n() != g.n() || f.m() != g.m())
    throw ShapeMismatch("systems of a pair must match in field, n and m");
  if (!f.homogeneous() || !g.homogeneous())
    throw ShapeMismatch("instance files hold homogeneous systems; homogenize first");
  std::ostringstream os;
  os << "IP1S v1\n" << f.ctx()->spec_string() << "\n";
  os << "n=" << f.n() << " m=" << f.m() << "\n";
  for (const QuadSystem* side : {&f, &g}) {
    os << "\n";
    for (std::uint64_t i = 0; i < side->m(); ++i) {
      for (int r = 0; r < (int)side->n(); ++r) {
        for (int c = 0; c < (int)side->n(); ++c) {
          if (c) os << ' ';
          os << side->mat(i).at(r, c).to_string();
        }
        os << "\n";
      }
      os << "\n";
    }
  }
  return os.str();
}

std::pair<QuadSystem, QuadSystem> parse_instance(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != "IP1S v1") throw ParseError("missing IP1S v1 header");
  if (!std::getline(is, line)) throw ParseError("missing field specification");
  FieldPtr ctx;
  try {
    ctx = FieldCtx::parse_spec(line);
  } catch (const Error& e) {
    throw ParseError(std::string("bad field specification: ") + e.what());
  }
  if (!std::getline(is, line)) throw ParseError("missing size line");
  std::uint64_t n = 0, m = 0;
  {
    std::istringstream ls(line);
    std::string ntok, mtok;
    ls >> ntok >> mtok;
    if (ntok.rfind("n=", 0) != 0 || mtok.rfind("m=", 0) != 0)
      throw ParseError("size line must look like 'n=<..> m=<..>'");
    try {
      n = std::stoull(ntok.substr(2));
      m = std::stoull(mtok.substr(2));
    } catch (const std::exception&) {
      throw ParseError("unreadable sizes");
    }
  }
  if (n == 0 || m == 0) throw ParseError("sizes must be positive");

  std::vector<std::string> rows;
  while (std::getline(is, line)) {
    std::istringstream probe(line);
    std::string tok;
    if (probe >> tok) rows.push_back(line);
  }
  if (rows.size() != 2 * m * n) throw ParseError("wrong number of matrix rows");

  auto read_side = [&](size_t offset) {
    std::vector<MatrixF> mats;
    for (std::uint64_t i = 0; i < m; ++i) {
      MatrixF h(ctx, (int)n, (int)n);
      for (std::uint64_t r = 0; r < n; ++r) {
        std::istringstream ls(rows[offset + (size_t)(i * n + r)]);
        std::string tok;
        for (std::uint64_t c = 0; c < n; ++c) {
          if (!(ls >> tok)) throw ParseError("matrix row is too short");
          try {
            h.at((int)r, (int)c) = ctx->parse_elem(tok);
          } catch (const Error& e) {
            throw ParseError(std::string("bad matrix entry: ") + e.what());
          }
        }
        std::string extra;
        if (ls >> extra) throw ParseError("matrix row is too long");
      }
      mats.push_back(std::move(h));
    }
    try {
      return QuadSystem(ctx, n, std::move(mats));
    } catch (const Error& e) {
      throw ParseError(std::string("bad system: ") + e.what());
    }
  };
  QuadSystem f = read_side(0);
  QuadSystem g = read_side((size_t)(m * n));
  return {std::move(f), std::move(g)};
}

}  // namespace ip1s
