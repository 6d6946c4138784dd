#include "ip1s/ippow.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <unordered_map>

namespace ip1s {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw ShapeMismatch(what);
}

UniPoly upow(const UniPoly& base, std::uint64_t k) {
  UniPoly acc = UniPoly::one(base.ctx());
  UniPoly sq = base;
  while (k) {
    if (k & 1) acc = acc * sq;
    k >>= 1;
    if (k) sq = sq * sq;
  }
  return acc;
}

}  // namespace

DensePoly DensePoly::constant(const FieldPtr& ctx, int nvars, const FieldElem& c) {
  DensePoly p(ctx, nvars);
  p.add_term(Exps(nvars, 0), c);
  return p;
}

DensePoly DensePoly::variable(const FieldPtr& ctx, int nvars, int j) {
  require(0 <= j && j < nvars, "variable index out of range");
  Exps e(nvars, 0);
  e[j] = 1;
  return monomial(ctx, nvars, std::move(e), ctx->one());
}

DensePoly DensePoly::monomial(const FieldPtr& ctx, int nvars, Exps e, const FieldElem& c) {
  require((int)e.size() == nvars, "exponent tuple length must match the variable count");
  DensePoly p(ctx, nvars);
  p.add_term(e, c);
  return p;
}

DensePoly DensePoly::linear_form(const FieldPtr& ctx, const std::vector<FieldElem>& coeffs) {
  DensePoly p(ctx, (int)coeffs.size());
  for (size_t j = 0; j < coeffs.size(); ++j) {
    Exps e(coeffs.size(), 0);
    e[j] = 1;
    p.add_term(e, coeffs[j]);
  }
  return p;
}

void DensePoly::add_term(const Exps& e, const FieldElem& c) {
  if (c.is_zero()) return;
  auto it = terms_.find(e);
  if (it == terms_.end()) {
    terms_.emplace(e, c);
    return;
  }
  it->second += c;
  if (it->second.is_zero()) terms_.erase(it);
}

int DensePoly::total_degree() const {
  int best = -1;
  for (const auto& [e, c] : terms_) {
    int deg = 0;
    for (auto x : e) deg += (int)x;
    best = std::max(best, deg);
  }
  return best;
}

bool DensePoly::is_homogeneous() const {
  int seen = -1;
  for (const auto& [e, c] : terms_) {
    int deg = 0;
    for (auto x : e) deg += (int)x;
    if (seen < 0) seen = deg;
    else if (deg != seen) return false;
  }
  return true;
}

FieldElem DensePoly::coeff(const Exps& e) const {
  auto it = terms_.find(e);
  return it == terms_.end() ? ctx_->zero() : it->second;
}

DensePoly DensePoly::operator-() const {
  DensePoly out(ctx_, nvars_);
  for (const auto& [e, c] : terms_) out.terms_.emplace(e, -c);
  return out;
}

DensePoly operator+(const DensePoly& a, const DensePoly& b) {
  require(a.nvars_ == b.nvars_, "polynomial variable counts differ");
  DensePoly out = a;
  for (const auto& [e, c] : b.terms_) out.add_term(e, c);
  return out;
}

DensePoly operator-(const DensePoly& a, const DensePoly& b) {
  require(a.nvars_ == b.nvars_, "polynomial variable counts differ");
  DensePoly out = a;
  for (const auto& [e, c] : b.terms_) out.add_term(e, -c);
  return out;
}

DensePoly operator*(const DensePoly& a, const DensePoly& b) {
  require(a.nvars_ == b.nvars_, "polynomial variable counts differ");
  DensePoly out(a.ctx_ ? a.ctx_ : b.ctx_, a.nvars_);
  DensePoly::Exps e(a.nvars_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      for (int j = 0; j < a.nvars_; ++j) e[j] = ea[j] + eb[j];
      out.add_term(e, ca * cb);
    }
  return out;
}

DensePoly DensePoly::scaled(const FieldElem& c) const {
  DensePoly out(ctx_, nvars_);
  if (c.is_zero()) return out;
  for (const auto& [e, v] : terms_) out.terms_.emplace(e, v * c);
  return out;
}

DensePoly DensePoly::pow(std::uint64_t k) const {
  DensePoly acc = constant(ctx_, nvars_, ctx_->one());
  DensePoly sq = *this;
  while (k) {
    if (k & 1) acc = acc * sq;
    k >>= 1;
    if (k) sq = sq * sq;
  }
  return acc;
}

bool operator==(const DensePoly& a, const DensePoly& b) {
  return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
}

DensePoly DensePoly::partial(int j) const {
  require(0 <= j && j < nvars_, "derivative variable out of range");
  DensePoly out(ctx_, nvars_);
  for (const auto& [e, c] : terms_) {
    if (e[j] == 0) continue;
    Exps ne = e;
    ne[j] -= 1;
    out.add_term(ne, c * ctx_->from_int((std::int64_t)e[j]));
  }
  return out;
}

FieldElem DensePoly::eval(const std::vector<FieldElem>& point) const {
  require((int)point.size() == nvars_, "evaluation point has the wrong arity");
  FieldElem acc = ctx_->zero();
  for (const auto& [e, c] : terms_) {
    FieldElem t = c;
    for (int j = 0; j < nvars_; ++j)
      if (e[j]) t *= point[j].pow((std::uint64_t)e[j]);
    acc += t;
  }
  return acc;
}

UniPoly DensePoly::restrict_line(const std::vector<FieldElem>& u,
                                 const std::vector<FieldElem>& w) const {
  require((int)u.size() == nvars_ && (int)w.size() == nvars_, "line vectors have the wrong arity");
  std::vector<UniPoly> lines;
  lines.reserve(nvars_);
  for (int j = 0; j < nvars_; ++j) lines.push_back(UniPoly::from_coeffs(ctx_, {u[j], w[j]}));
  UniPoly acc = UniPoly::zero(ctx_);
  for (const auto& [e, c] : terms_) {
    UniPoly t = UniPoly::constant(c);
    for (int j = 0; j < nvars_; ++j)
      if (e[j]) t = t * upow(lines[j], e[j]);
    acc = acc + t;
  }
  return acc;
}

DensePoly DensePoly::compose_linear(const MatrixF& a) const {
  require(a.rows() == nvars_ && a.cols() == nvars_, "substitution matrix must be n x n");
  require(a.ctx() && ctx_ && a.ctx()->same_field(*ctx_), "substitution matrix field mismatch");
  std::vector<DensePoly> images;
  images.reserve(nvars_);
  for (int j = 0; j < nvars_; ++j) images.push_back(linear_form(ctx_, a.row(j)));
  DensePoly acc(ctx_, nvars_);
  for (const auto& [e, c] : terms_) {
    DensePoly t = constant(ctx_, nvars_, c);
    for (int j = 0; j < nvars_; ++j)
      if (e[j]) t = t * images[j].pow(e[j]);
    acc = acc + t;
  }
  return acc;
}

std::optional<DensePoly> DensePoly::divided_by(const DensePoly& divisor) const {
  require(divisor.nvars_ == nvars_, "polynomial variable counts differ");
  if (divisor.is_zero()) throw DivisionByZero("polynomial division by zero");
  DensePoly rem = *this;
  DensePoly quot(ctx_, nvars_);
  const auto& dlead = *divisor.terms_.rbegin();
  while (!rem.is_zero()) {
    const auto& rlead = *rem.terms_.rbegin();
    Exps diff(nvars_);
    for (int j = 0; j < nvars_; ++j) {
      if (rlead.first[j] < dlead.first[j]) return std::nullopt;
      diff[j] = rlead.first[j] - dlead.first[j];
    }
    FieldElem q = rlead.second / dlead.second;
    quot.add_term(diff, q);
    rem = rem - divisor * monomial(ctx_, nvars_, diff, q);
  }
  return quot;
}

DensePoly DensePoly::inflate(std::uint64_t k) const {
  DensePoly out(ctx_, nvars_);
  for (const auto& [e, c] : terms_) {
    Exps ne(nvars_);
    for (int j = 0; j < nvars_; ++j) ne[j] = (std::uint32_t)(e[j] * k);
    out.terms_.emplace(std::move(ne), c);
  }
  return out;
}

std::optional<DensePoly> DensePoly::pth_root() const {
  const std::uint64_t p = ctx_->characteristic();
  const std::uint64_t k = ctx_->total_degree();
  DensePoly out(ctx_, nvars_);
  for (const auto& [e, c] : terms_) {
    Exps ne(nvars_);
    for (int j = 0; j < nvars_; ++j) {
      if (e[j] % p) return std::nullopt;
      ne[j] = (std::uint32_t)(e[j] / p);
    }
    // x -> x^p is an automorphism of order k, so the p-th root of the
    // coefficient is its (k-1)-th Frobenius power
    out.terms_.emplace(std::move(ne), c.frobenius(k - 1));
  }
  return out;
}

std::string DensePoly::to_string() const {
  if (terms_.empty()) return "0";
  std::string out;
  for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {  // leading term first
    const auto& [e, c] = *it;
    if (!out.empty()) out += ' ';
    out += '(';
    for (int j = 0; j < nvars_; ++j) {
      if (j) out += ',';
      out += std::to_string(e[j]);
    }
    out += "):";
    out += c.to_string();
  }
  return out;
}

DensePoly DensePoly::parse(const FieldPtr& ctx, int nvars, const std::string& text) {
  DensePoly out(ctx, nvars);
  std::istringstream in(text);
  std::string entry;
  while (in >> entry) {
    if (entry == "0") continue;
    auto colon = entry.find("):");
    if (entry.empty() || entry.front() != '(' || colon == std::string::npos)
      throw ParseError("expected '(e_1,...,e_n):coefficient', got '" + entry + "'");
    Exps e;
    std::string body = entry.substr(1, colon - 1);
    std::istringstream nums(body);
    std::string piece;
    while (std::getline(nums, piece, ','))
      e.push_back((std::uint32_t)std::strtoul(piece.c_str(), nullptr, 10));
    if ((int)e.size() != nvars) throw ParseError("exponent tuple arity mismatch in '" + entry + "'");
    out.add_term(e, ctx->parse_elem(entry.substr(colon + 2)));
  }
  return out;
}

DensePolySystem DensePolySystem::make(const FieldPtr& ctx, int n, int d,
                                      std::vector<DensePoly> polys) {
  require(ctx != nullptr && n >= 1 && d >= 0, "system needs a field, variables, and a degree bound");
  DensePolySystem out;
  out.ctx = ctx;
  out.n = n;
  out.d = d;
  out.homogeneous = true;
  for (const auto& p : polys) {
    require(p.nvars() == n, "member polynomial has the wrong variable count");
    require(p.ctx() && p.ctx()->same_field(*ctx), "member polynomial lives in a different field");
    require(p.total_degree() <= d, "member polynomial exceeds the degree bound");
    if (p.is_zero() || !p.is_homogeneous() || p.total_degree() != d) out.homogeneous = false;
  }
  out.polys = std::move(polys);
  return out;
}

std::string DensePolySystem::to_text() const {
  std::string out = ctx->spec_string();
  out += '\n';
  out += "n=" + std::to_string(n) + '\n';
  for (const auto& p : polys) {
    out += p.to_string();
    out += '\n';
  }
  return out;
}

DensePolySystem DensePolySystem::parse_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty polynomial system text");
  FieldPtr ctx = FieldCtx::parse_spec(line);
  if (!std::getline(in, line) || line.rfind("n=", 0) != 0)
    throw ParseError("expected an 'n=<int>' line");
  int n = (int)std::strtol(line.c_str() + 2, nullptr, 10);
  if (n < 1) throw ParseError("variable count must be positive");
  std::vector<DensePoly> polys;
  while (std::getline(in, line)) {
    bool blank = line.find_first_not_of(" \t\r") == std::string::npos;
    if (blank) continue;
    polys.push_back(DensePoly::parse(ctx, n, line));
  }
  if (polys.empty()) throw ParseError("no polynomial lines");
  int d = 0;
  for (const auto& p : polys) d = std::max(d, p.total_degree());
  return make(ctx, n, d, std::move(polys));
}

DensePoly jacobian_det(const DensePolySystem& g) {
  require(g.ctx != nullptr, "jacobian needs a field");
  const int n = g.n;
  require((int)g.polys.size() == n, "jacobian determinant needs as many polynomials as variables");
  if (n > 20) throw TooLarge("minor expansion memoizes one entry per column subset");

  // dense size estimate before any expansion
  std::uint64_t dsum = 0;
  for (const auto& p : g.polys) {
    int deg = p.total_degree();
    if (deg > 1) dsum += (std::uint64_t)deg - 1;
  }
  mpz_class count;
  mpz_bin_uiui(count.get_mpz_t(), dsum + (std::uint64_t)n, (std::uint64_t)n);
  if (count > 1048576) throw TooLarge("Jacobian determinant would exceed 2^20 monomials");

  std::vector<std::vector<DensePoly>> jac(n, std::vector<DensePoly>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) jac[i][j] = g.polys[i].partial(j);

  // Laplace expansion over the first undecided row; minors keyed by the set
  // of still-available columns
  std::unordered_map<std::uint32_t, DensePoly> memo;
  auto minor = [&](auto&& self, std::uint32_t mask) -> DensePoly {
    if (mask == 0) return DensePoly::constant(g.ctx, n, g.ctx->one());
    auto it = memo.find(mask);
    if (it != memo.end()) return it->second;
    int row = n - __builtin_popcount(mask);
    DensePoly acc(g.ctx, n);
    bool flip = false;
    for (int j = 0; j < n; ++j) {
      if (!(mask & (1u << j))) continue;
      if (!jac[row][j].is_zero()) {
        DensePoly term = jac[row][j] * self(self, mask & ~(1u << j));
        acc = flip ? acc - term : acc + term;
      }
      flip = !flip;
    }
    memo.emplace(mask, acc);
    return acc;
  };
  return minor(minor, (1u << n) - 1);
}

DescentResult frobenius_descent(const DensePolySystem& g) {
  require(g.ctx != nullptr, "descent needs a field");
  const std::uint64_t p = g.ctx->characteristic();
  int e = g.d, r = 0;
  while (e > 0 && e % (int)p == 0) {
    e /= (int)p;
    ++r;
  }
  if (r == 0) return {g, 0, e};
  std::uint64_t pr = 1;
  for (int i = 0; i < r; ++i) pr *= p;

  std::vector<DensePoly> reduced;
  reduced.reserve(g.polys.size());
  for (const auto& poly : g.polys) {
    DensePoly out(g.ctx, g.n);
    for (const auto& [exps, c] : poly.terms()) {
      DensePoly::Exps ne(g.n);
      for (int j = 0; j < g.n; ++j) {
        if (exps[j] % pr)
          throw NotAPthPower("exponent " + std::to_string(exps[j]) + " is not divisible by " +
                             std::to_string(pr));
        ne[j] = (std::uint32_t)(exps[j] / pr);
      }
      out = out + DensePoly::monomial(g.ctx, g.n, std::move(ne), c);
    }
    reduced.push_back(std::move(out));
  }
  return {DensePolySystem::make(g.ctx, g.n, e, std::move(reduced)), r, e};
}

ExtractedForms extract_linear_factors(const DensePoly& delta, int n, int e, std::uint64_t seed) {
  const FieldPtr& ctx = delta.ctx();
  require(ctx != nullptr && delta.nvars() == n && n >= 1, "factor extraction input shape");
  require(e >= 2, "factor extraction needs degree at least 2 per form");
  require(!delta.is_zero() && delta.is_homogeneous() && delta.total_degree() == n * (e - 1),
          "factor extraction needs a homogeneous input of degree n(e-1)");

  const std::uint64_t p = ctx->characteristic();
  // a product with multiplicities divisible by p is itself a p-th power;
  // peel those layers so the gradient below does not vanish identically
  int mult = e - 1, peeled = 0;
  DensePoly work = delta;
  while (mult % (int)p == 0) {
    auto root = work.pth_root();
    if (!root)
      throw NotAProduct("the polynomial is not the p-th power its multiplicities would force");
    work = std::move(*root);
    mult /= (int)p;
    ++peeled;
  }

  std::vector<DensePoly> grad;
  grad.reserve(n);
  for (int j = 0; j < n; ++j) grad.push_back(work.partial(j));

  Rng rng(seed);
  auto sample_vec = [&] {
    std::vector<FieldElem> v;
    v.reserve(n);
    for (int j = 0; j < n; ++j) v.push_back(ctx->sample(rng));
    return v;
  };

  bool refuted = false;
  for (int attempt = 0; attempt < 16; ++attempt) {
    auto u = sample_vec(), w = sample_vec();
    UniPoly restricted = work.restrict_line(u, w);
    if (restricted.degree() != n * mult) continue;  // the line missed full degree

    auto pieces = factor_univariate(restricted, rng.u64());
    bool shaped = (int)pieces.size() == n;
    for (const auto& piece : pieces)
      shaped = shaped && piece.factor.degree() == 1 && piece.multiplicity == mult;
    if (!shaped) {
      refuted = true;  // a full-degree restriction of a true product always splits
      continue;
    }

    std::vector<UniPoly> grad_lines;
    grad_lines.reserve(n);
    for (int j = 0; j < n; ++j) grad_lines.push_back(grad[j].restrict_line(u, w));

    MatrixF rows(ctx, n, n);
    bool lifted = true;
    for (int i = 0; i < n && lifted; ++i) {
      FieldElem root = -pieces[i].factor.coeff(0);
      UniPoly lin = UniPoly::from_coeffs(ctx, {-root, ctx->one()});
      // around this root the restriction vanishes to order mult and the
      // j-th gradient component to order mult-1, with lowest coefficient
      // proportional to the j-th coefficient of the underlying form
      std::vector<FieldElem> row(n, ctx->zero());
      for (int j = 0; j < n && lifted; ++j) {
        UniPoly q = grad_lines[j];
        for (int s = 0; s + 1 < mult && lifted; ++s) {
          auto [quot, rem] = q.divmod(lin);
          if (!rem.is_zero()) lifted = false;
          q = quot;
        }
        if (lifted) row[j] = q.eval(root);
      }
      if (!lifted) break;
      int pivot = -1;
      for (int j = 0; j < n && pivot < 0; ++j)
        if (!row[j].is_zero()) pivot = j;
      if (pivot < 0) {
        lifted = false;
        break;
      }
      FieldElem scale = row[pivot].inv();
      for (int j = 0; j < n; ++j) rows.at(i, j) = row[j] * scale;
    }
    if (!lifted) {
      refuted = true;
      continue;
    }

    // certify: peel the claimed forms off by exact division
    DensePoly quotient = work;
    bool divides = true;
    for (int i = 0; i < n && divides; ++i) {
      DensePoly form = DensePoly::linear_form(ctx, rows.row(i));
      for (int k = 0; k < mult && divides; ++k) {
        auto next = quotient.divided_by(form);
        if (!next) divides = false;
        else quotient = std::move(*next);
      }
    }
    if (!divides || quotient.total_degree() != 0) {
      refuted = true;
      continue;
    }
    FieldElem c = quotient.terms().begin()->second;
    // undo the peeled p-th powers: delta = (c prod forms^mult)^(p^peeled)
    return {c.frobenius((std::uint64_t)peeled), rows};
  }
  if (refuted)
    throw NotAProduct("the polynomial is not a product of " + std::to_string(n) +
                      " independent linear forms of multiplicity " + std::to_string(e - 1));
  throw UnluckyRestriction("every sampled restriction line was degenerate");
}

DensePolySystem pow_compose(const MatrixF& A, const MatrixF& B, int d) {
  require(A.is_square() && B.is_square() && A.rows() == B.rows() && A.rows() >= 1,
          "pow_compose needs square matrices of equal size");
  require(A.ctx() && A.ctx()->same_field(*B.ctx()), "pow_compose matrices live in different fields");
  require(d >= 1, "pow_compose needs a positive degree");
  const FieldPtr& ctx = A.ctx();
  const int n = A.rows();
  std::vector<DensePoly> powers;
  powers.reserve(n);
  for (int i = 0; i < n; ++i)
    powers.push_back(DensePoly::linear_form(ctx, A.row(i)).pow((std::uint64_t)d));
  std::vector<DensePoly> polys;
  polys.reserve(n);
  for (int i = 0; i < n; ++i) {
    DensePoly acc(ctx, n);
    for (int j = 0; j < n; ++j) acc = acc + powers[j].scaled(B.at(i, j));
    polys.push_back(std::move(acc));
  }
  return DensePolySystem::make(ctx, n, d, std::move(polys));
}

bool verify_pow(const PowSolution& sol, const DensePolySystem& g, int d) {
  if (!sol.A.ctx() || !g.ctx || !sol.A.ctx()->same_field(*g.ctx)) return false;
  if (!sol.A.is_square() || !sol.B.is_square()) return false;
  if (sol.A.rows() != g.n || sol.B.rows() != g.n || (int)g.polys.size() != g.n) return false;
  if (det(sol.A).is_zero() || det(sol.B).is_zero()) return false;
  DensePolySystem image = pow_compose(sol.A, sol.B, d);
  for (int i = 0; i < g.n; ++i)
    if (image.polys[i] != g.polys[i]) return false;
  return true;
}

std::optional<PowSolution> solve_pow(const DensePolySystem& g, int d, std::uint64_t seed) {
  require(g.ctx != nullptr && g.n >= 1 && d >= 1, "solve_pow needs a field and a positive degree");
  require((int)g.polys.size() == g.n, "solve_pow needs as many polynomials as variables");
  const FieldPtr& ctx = g.ctx;
  const int n = g.n;

  // any B * POW(A x) with invertible A, B is homogeneous of degree exactly d
  // with no zero component
  for (const auto& gi : g.polys)
    if (gi.is_zero() || !gi.is_homogeneous() || gi.total_degree() != d) return std::nullopt;

  const std::uint64_t p = ctx->characteristic();
  DensePolySystem target = DensePolySystem::make(ctx, n, d, g.polys);
  int r = 0, e = d;
  try {
    DescentResult dec = frobenius_descent(target);
    target = std::move(dec.reduced);
    r = dec.r;
    e = dec.e;
  } catch (const NotAPthPower&) {
    return std::nullopt;
  }

  Rng rng(seed);
  MatrixF a_frob(ctx, n, n);  // rows of A raised entrywise to the p^r
  MatrixF B(ctx, n, n);
  if (e == 1) {
    // after descent the system is linear: target = B * a_frob * x
    MatrixF M(ctx, n, n);
    for (int i = 0; i < n; ++i)
      for (const auto& [exps, c] : target.polys[i].terms())
        for (int j = 0; j < n; ++j)
          if (exps[j]) M.at(i, j) = c;
    if (det(M).is_zero()) return std::nullopt;
    for (int i = 0; i < n; ++i) {
      int pivot = 0;
      while (M.at(i, pivot).is_zero()) ++pivot;
      FieldElem s = M.at(i, pivot);
      B.at(i, i) = s;
      FieldElem si = s.inv();
      for (int j = 0; j < n; ++j) a_frob.at(i, j) = M.at(i, j) * si;
    }
  } else {
    DensePoly delta = jacobian_det(target);
    if (delta.is_zero() || !delta.is_homogeneous() || delta.total_degree() != n * (e - 1))
      return std::nullopt;
    ExtractedForms forms;
    try {
      forms = extract_linear_factors(delta, n, e, rng.u64());
    } catch (const NotAProduct&) {
      return std::nullopt;
    }
    a_frob = forms.rows;
    if (det(a_frob).is_zero()) return std::nullopt;

    // match target against the e-th powers of the recovered forms
    std::vector<DensePoly> powers;
    powers.reserve(n);
    for (int j = 0; j < n; ++j)
      powers.push_back(DensePoly::linear_form(ctx, a_frob.row(j)).pow((std::uint64_t)e));
    std::map<DensePoly::Exps, int> index;
    for (const auto& poly : powers)
      for (const auto& [exps, c] : poly.terms()) index.emplace(exps, 0);
    for (const auto& poly : target.polys)
      for (const auto& [exps, c] : poly.terms()) index.emplace(exps, 0);
    int rows_count = 0;
    for (auto& [exps, pos] : index) pos = rows_count++;
    MatrixF M(ctx, rows_count, n);
    for (int j = 0; j < n; ++j)
      for (const auto& [exps, c] : powers[j].terms()) M.at(index.at(exps), j) = c;
    for (int i = 0; i < n; ++i) {
      std::vector<FieldElem> rhs(rows_count, ctx->zero());
      for (const auto& [exps, c] : target.polys[i].terms()) rhs[index.at(exps)] = c;
      auto sol = solve(M, rhs);
      if (!sol) return std::nullopt;
      for (int j = 0; j < n; ++j) B.at(i, j) = sol->particular[j];
    }
    if (det(B).is_zero()) return std::nullopt;
  }

  MatrixF A = a_frob;
  if (r > 0) {
    // entrywise p^r-th roots: Frobenius has order total_degree, invert it
    std::uint64_t k = ctx->total_degree();
    std::uint64_t back = (k - (std::uint64_t)r % k) % k;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) A.at(i, j) = a_frob.at(i, j).frobenius(back);
  }

  PowSolution out{A, B, p, r, e};
  if (!verify_pow(out, g, d)) return std::nullopt;
  return out;
}

}  // namespace ip1s
