/// @file ip1s_cli.cpp
/// @brief Command-line front end: instance generation, solving, counting,
/// matrix square roots, power-system equivalence, and a benchmark harness.
///
/// Exit codes: 0 solution/success, 1 no solution, 2 irregular instance or
/// unsupported input, 3 internal error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ip1s/counting.hpp"
#include "ip1s/errors.hpp"
#include "ip1s/ip1s.hpp"
#include "ip1s/ippow.hpp"
#include "ip1s/quadform.hpp"
#include "ip1s/sqrtmat.hpp"

namespace {

using json = nlohmann::json;
using namespace ip1s;

constexpr int kExitSolution = 0;
constexpr int kExitNoSolution = 1;
constexpr int kExitUnsupported = 2;
constexpr int kExitInternal = 3;

/// Precondition-style failures are the caller's problem (bad file, bad kind,
/// an algorithm asked to run outside its domain); the rest are ours.
int exit_for(const Error& e) {
  if (dynamic_cast<const ParseError*>(&e) || dynamic_cast<const UnsupportedKind*>(&e) ||
      dynamic_cast<const TooLarge*>(&e) || dynamic_cast<const ShapeMismatch*>(&e) ||
      dynamic_cast<const FieldTooSmall*>(&e) || dynamic_cast<const NotPrime*>(&e) ||
      dynamic_cast<const DegenerateForm*>(&e) || dynamic_cast<const SingularMatrix*>(&e) ||
      dynamic_cast<const GenericityFailure*>(&e) || dynamic_cast<const BlockTooLarge*>(&e))
    return kExitUnsupported;
  return kExitInternal;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

/// F_q for a prime power q. Proper extensions take the lexicographically
/// first monic irreducible of the right degree, so a given q always names
/// the same field and generated files are reproducible byte for byte.
FieldPtr make_field(std::uint64_t q) {
  if (q < 2) throw UnsupportedKind("q must be a prime power >= 2");
  std::uint64_t p = q;
  for (std::uint64_t d = 2; d * d <= q; ++d)
    if (q % d == 0) {
      p = d;
      break;
    }
  int k = 0;
  for (std::uint64_t w = q; w > 1; w /= p) {
    if (w % p != 0) throw UnsupportedKind("q must be a prime power");
    ++k;
  }
  FieldPtr fp = FieldCtx::prime_field(p);
  if (k == 1) return fp;
  for (mpz_class idx = 0;; ++idx) {
    std::vector<FieldElem> coeffs;
    mpz_class t = idx;
    for (int i = 0; i < k; ++i) {
      coeffs.push_back(fp->element_at(t % p));
      t /= p;
    }
    coeffs.push_back(fp->one());
    UniPoly f = UniPoly::from_coeffs(fp, coeffs);
    if (is_irreducible(f)) return adjoin_root(f);
  }
}

json matrix_json(const MatrixF& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(m.at(i, j).to_string());
    rows.push_back(row);
  }
  return rows;
}

// ====== instance generation ======

enum class Kind { Equivalent, EquivalentExtOnly, Inequivalent, Irregular };

Kind parse_kind(const std::string& s) {
  if (s == "equivalent") return Kind::Equivalent;
  if (s == "equivalent_ext_only") return Kind::EquivalentExtOnly;
  if (s == "inequivalent") return Kind::Inequivalent;
  if (s == "irregular") return Kind::Irregular;
  throw UnsupportedKind("unknown kind '" + s + "'");
}

/// f_i = x_{1+(i-1 mod n-1)} * x_n. Every combination of the forms is x_n
/// times a linear form, of rank at most 2, hence singular once n >= 3.
QuadSystem irregular_pattern(const FieldPtr& ctx, std::uint64_t n, std::uint64_t m) {
  if (n < 3) throw UnsupportedKind("the irregular product family needs n >= 3");
  std::vector<MatrixF> mats;
  for (std::uint64_t i = 0; i < m; ++i) {
    MatrixF h(ctx, (int)n, (int)n);
    h.at((int)(i % (n - 1)), (int)n - 1) = ctx->one();
    mats.push_back(std::move(h));
  }
  return QuadSystem(ctx, n, std::move(mats));
}

struct Planted {
  QuadSystem f, g;
  std::optional<MatrixF> a;  // planted base-field witness, when one exists
  json extra;                // kind-specific provenance fields
};

Planted build_instance(const FieldPtr& ctx, Kind kind, std::uint64_t n, std::uint64_t m,
                       Rng& rng) {
  switch (kind) {
    case Kind::Equivalent: {
      QuadSystem f = QuadSystem::random_homogeneous(ctx, n, m, rng);
      MatrixF a = MatrixF::random_invertible(ctx, (int)n, rng);
      QuadSystem g = f.substitute(a);
      return {std::move(f), std::move(g), std::move(a), json::object()};
    }
    case Kind::EquivalentExtOnly: {
      // Scale a base-field change of variables by sqrt(nu), nu a nonsquare:
      // g = nu * f(Ax) stays over F_q while the planted witness sqrt(nu) * A
      // lives in F_{q^2}. For odd n the twist multiplies every discriminant
      // by a nonsquare, so no base-field witness can exist; for even n the
      // twist may collapse to a base-field equivalence (for a single form it
      // always does). Each candidate is checked both ways: the extension
      // witness by direct substitution, the absence of a base witness by the
      // solver, which either proves inequivalence over F_q or places its own
      // witness strictly above the base field.
      if (ctx->characteristic() == 2)
        throw UnsupportedKind(
            "no twist exists: every element of a characteristic-2 field is a square");
      FieldElem nu = ctx->canonical_nonsquare();
      FieldPtr ext = FieldCtx::extension_unchecked(ctx, {-nu, ctx->zero()});
      FieldElem root = ext->gen();  // square root of nu
      for (int attempt = 0; attempt < 16; ++attempt) {
        QuadSystem f = QuadSystem::random_homogeneous(ctx, n, m, rng);
        MatrixF a = MatrixF::random_invertible(ctx, (int)n, rng);
        QuadSystem g0 = f.substitute(a);
        std::vector<MatrixF> mats;
        for (std::uint64_t i = 0; i < m; ++i) mats.push_back(g0.mat(i).scaled(nu));
        QuadSystem g(ctx, n, std::move(mats));
        MatrixF witness = a.lift(ext).scaled(root);
        if (!check_equivalence(f, g, witness))
          throw InternalError("twisted instance lost its extension witness");
        SolveOptions opts;
        opts.allow_extension = true;
        SolveOutcome out = solve(f, g, rng.u64(), opts);
        if (out.verdict == Verdict::NoSolution ||
            (out.verdict == Verdict::Solved && out.solution->field_level > 0)) {
          json extra;
          extra["twist_nonsquare"] = nu.to_string();
          extra["witness_field"] = ext->spec_string();
          extra["witness_note"] =
              "planted_a times the square root of twist_nonsquare solves the pair over "
              "witness_field; no base-field witness exists";
          return {std::move(f), std::move(g), std::move(a), std::move(extra)};
        }
      }
      throw UnsupportedKind(
          "no extension-only instance at this (n, m, q): every twist collapsed to a base-field "
          "equivalence");
    }
    case Kind::Inequivalent: {
      // q^(n^2) candidate matrices; small spaces get the exhaustive oracle,
      // larger ones the solver itself, so accidental equivalences (and, for
      // bench cleanliness, irregular draws) are rejected.
      mpz_class space = 1;
      for (std::uint64_t i = 0; i < n * n; ++i) space *= ctx->order();
      const bool tiny = space <= (1 << 24);
      for (int attempt = 0; attempt < 64; ++attempt) {
        QuadSystem f = QuadSystem::random_homogeneous(ctx, n, m, rng);
        QuadSystem g = QuadSystem::random_homogeneous(ctx, n, m, rng);
        if (f == g) continue;
        json extra;
        if (tiny) {
          RegularCombo combo = regular_combination(f, g, rng.u64());
          if (combo.status != ComboStatus::Found && combo.status != ComboStatus::GSideSingular)
            continue;
          if (brute_force_equivalence(f, g, 1, true).equivalent) continue;
          extra["rejection_oracle"] = "exhaustive";
        } else {
          SolveOptions opts;
          SolveOutcome out = solve(f, g, rng.u64(), opts);
          if (out.verdict != Verdict::NoSolution) continue;
          extra["rejection_oracle"] = "solver";
        }
        return {std::move(f), std::move(g), std::nullopt, std::move(extra)};
      }
      throw UnsupportedKind("could not draw an inequivalent pair at this (n, m, q)");
    }
    case Kind::Irregular: {
      QuadSystem f = irregular_pattern(ctx, n, m);
      MatrixF a = MatrixF::random_invertible(ctx, (int)n, rng);
      QuadSystem g = f.substitute(a);
      return {std::move(f), std::move(g), std::move(a), json::object()};
    }
  }
  throw InternalError("unreachable kind");
}

// ====== solver dispatch shared by solve and bench ======

SolveOutcome dispatch(const std::string& algo, const QuadSystem& f, const QuadSystem& g,
                      std::uint64_t seed, const SolveOptions& opts) {
  if (algo == "auto" || algo == "canonical") return solve(f, g, seed, opts);
  if (algo == "generic") return solve_generic(f, g, seed);
  if (algo == "char2") return solve_char2(f, g, seed, opts);
  throw UnsupportedKind("unknown algo '" + algo + "' (auto, canonical, generic, char2)");
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Solved: return "solution";
    case Verdict::NoSolution: return "nosol";
    case Verdict::Irregular: return "irregular";
  }
  return "error";
}

int verdict_exit(Verdict v) {
  switch (v) {
    case Verdict::Solved: return kExitSolution;
    case Verdict::NoSolution: return kExitNoSolution;
    case Verdict::Irregular: return kExitUnsupported;
  }
  return kExitInternal;
}

// ====== subcommand: gen ======

int cmd_gen(const std::string& out, std::uint64_t n, std::uint64_t m, std::uint64_t q,
            const std::string& kind_str, std::uint64_t seed) {
  FieldPtr ctx = make_field(q);
  if (m == 0) m = n;
  Rng rng(seed);
  Planted inst = build_instance(ctx, parse_kind(kind_str), n, m, rng);
  write_file(out, write_instance(inst.f, inst.g));

  json side;
  side["kind"] = kind_str;
  side["field"] = ctx->spec_string();
  side["q"] = q;
  side["n"] = n;
  side["m"] = m;
  side["seed"] = seed;
  side["planted_a"] = inst.a ? matrix_json(*inst.a) : json();
  for (auto& [key, value] : inst.extra.items()) side[key] = value;
  write_file(out + ".meta.json", side.dump(2) + "\n");
  std::cout << "wrote " << out << " and " << out << ".meta.json\n";
  return kExitSolution;
}

// ====== subcommand: solve ======

int cmd_solve(const std::string& file, std::uint64_t seed, const std::string& algo,
              bool allow_extension, const std::string& format) {
  auto [f, g] = parse_instance(read_file(file));
  SolveOptions opts;
  opts.allow_extension = allow_extension;
  SolveOutcome out = dispatch(algo, f, g, seed, opts);

  bool verified = false;
  int degree = 0;
  std::optional<MatrixF> a;
  if (out.verdict == Verdict::Solved) {
    a = out.solution->matrix();
    verified = check_equivalence(f, g, *a);
    degree = (int)(a->ctx()->total_degree() / f.ctx()->total_degree());
  }

  if (format == "jsonl") {
    json rec;
    rec["verdict"] = verdict_name(out.verdict);
    rec["reason"] = out.reason;
    if (a) {
      rec["matrix"] = matrix_json(*a);
      rec["witness_field"] = a->ctx()->spec_string();
      rec["field_level"] = out.solution->field_level;
      rec["solution_field_degree"] = degree;
      rec["verified"] = verified;
    }
    std::cout << rec.dump() << "\n";
  } else {
    switch (out.verdict) {
      case Verdict::Solved:
        std::cout << "SOLUTION (field extension degree " << degree << ", verified "
                  << (verified ? "yes" : "NO") << ")\n";
        std::cout << "witness field: " << a->ctx()->spec_string() << "\n";
        std::cout << a->to_text();
        break;
      case Verdict::NoSolution:
        std::cout << "NO-SOLUTION";
        if (!out.reason.empty()) std::cout << " (" << out.reason << ")";
        std::cout << "\n";
        break;
      case Verdict::Irregular:
        std::cout << "IRREGULAR";
        if (!out.reason.empty()) std::cout << " (" << out.reason << ")";
        std::cout << "\n";
        break;
    }
  }
  if (out.verdict == Verdict::Solved && !verified) return kExitInternal;
  return verdict_exit(out.verdict);
}

// ====== subcommand: count ======

int cmd_count(const std::string& file, const std::string& format) {
  auto [f, g] = parse_instance(read_file(file));
  CountBound cb = count_bound(f);  // self-equivalences of the first system
  if (format == "jsonl") {
    json rec;
    rec["dim"] = cb.dim;
    rec["bound"] = cb.bound.get_str();
    rec["alpha_degree"] = cb.alpha_degree;
    rec["heuristic_even_char"] = cb.heuristic_even_char;
    json blocks = json::array();
    for (const auto& [eig, sizes] : cb.jordan_summary)
      blocks.push_back({{"eigenvalue", eig}, {"block_sizes", sizes}});
    rec["jordan"] = blocks;
    std::cout << rec.dump() << "\n";
  } else {
    if (f != g)
      std::cout << "note: the bound concerns self-equivalences of the first system of the file\n";
    std::cout << "solution space dimension: " << cb.dim << "\n";
    std::cout << "invertible solution bound: " << cb.bound.get_str() << "\n";
    std::cout << "pencil extension degree: " << cb.alpha_degree << "\n";
    if (cb.heuristic_even_char)
      std::cout << "characteristic 2: bound rests on symmetrized matrices only\n";
    for (const auto& [eig, sizes] : cb.jordan_summary) {
      std::cout << "eigenvalue " << eig << ": blocks";
      for (int s : sizes) std::cout << " " << s;
      std::cout << "\n";
    }
  }
  return kExitSolution;
}

// ====== subcommand: matsqrt ======

int cmd_matsqrt(const std::string& file, const std::string& backend, const std::string& format) {
  std::string text = read_file(file);
  auto nl = text.find('\n');
  if (nl == std::string::npos) throw ParseError("matrix file needs a field spec line, then the matrix");
  FieldPtr ctx = FieldCtx::parse_spec(text.substr(0, nl));
  MatrixF z = MatrixF::parse_text(ctx, text.substr(nl + 1));

  std::optional<SqrtResult> res;
  std::vector<std::vector<int>> violations;
  if (ctx->characteristic() == 2) {
    Char2Sqrt c2 = sqrt_char2(z);
    if (c2.exists())
      res = std::move(c2.value);
    else
      violations = std::move(c2.violations);
  } else {
    SqrtBackend b = SqrtBackend::Jordan;
    if (backend == "companion")
      b = SqrtBackend::Companion;
    else if (backend != "jordan")
      throw UnsupportedKind("unknown backend '" + backend + "' (jordan, companion)");
    res = sqrt_matrix(z, b);
  }

  bool verified = false;
  if (res) verified = (res->W * res->W == z.lift(res->W.ctx()));

  if (format == "jsonl") {
    json rec;
    if (res) {
      rec["verdict"] = "solution";
      rec["matrix"] = matrix_json(res->W);
      rec["witness_field"] = res->W.ctx()->spec_string();
      rec["field_level"] = res->field_level;
      rec["verified"] = verified;
      if (res->as_polynomial) rec["as_polynomial"] = res->as_polynomial->to_string();
    } else {
      rec["verdict"] = "nosol";
      rec["violations"] = violations;
    }
    std::cout << rec.dump() << "\n";
  } else if (res) {
    std::cout << "SQUARE ROOT (field level " << res->field_level << ", verified "
              << (verified ? "yes" : "NO") << ")\n";
    std::cout << "witness field: " << res->W.ctx()->spec_string() << "\n";
    std::cout << res->W.to_text();
    if (res->as_polynomial) std::cout << "as polynomial in the input: " << res->as_polynomial->to_string() << "\n";
  } else {
    std::cout << "NO-SQUARE-ROOT: unpairable Jordan block sizes";
    for (const auto& v : violations) {
      std::cout << " {";
      for (size_t i = 0; i < v.size(); ++i) std::cout << (i ? "," : "") << v[i];
      std::cout << "}";
    }
    std::cout << "\n";
  }
  if (!res) return kExitNoSolution;
  return verified ? kExitSolution : kExitInternal;
}

// ====== subcommand: bench ======

struct TrialResult {
  std::uint64_t n = 0, m = 0, trial_seed = 0;
  double ms = 0.0;
  std::string verdict = "error";
  int solution_field_degree = 0;
  bool verified = false;
  std::string note;
};

TrialResult run_trial(const FieldPtr& ctx, Kind kind, const std::string& algo,
                      const SolveOptions& opts, std::uint64_t n, std::uint64_t m,
                      std::uint64_t master_seed, std::uint64_t index) {
  TrialResult r;
  r.n = n;
  r.m = m;
  r.trial_seed = Rng(master_seed, index).u64();
  Rng rng(r.trial_seed);
  auto t0 = std::chrono::steady_clock::now();
  try {
    Planted inst = build_instance(ctx, kind, n, m, rng);
    std::uint64_t solver_seed = rng.u64();
    t0 = std::chrono::steady_clock::now();
    SolveOutcome out = dispatch(algo, inst.f, inst.g, solver_seed, opts);
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.verdict = verdict_name(out.verdict);
    if (out.verdict == Verdict::Solved) {
      MatrixF a = out.solution->matrix();
      r.verified = check_equivalence(inst.f, inst.g, a);
      r.solution_field_degree = (int)(a.ctx()->total_degree() / ctx->total_degree());
    }
  } catch (const std::exception& e) {
    r.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    r.verdict = "error";
    r.note = e.what();
  }
  return r;
}

int cmd_bench(std::vector<std::uint64_t> ns, std::uint64_t m_opt, std::uint64_t q,
              const std::string& algo, const std::string& kind_str, int trials,
              std::uint64_t seed, const std::string& format, unsigned jobs) {
  if (ns.empty()) throw UnsupportedKind("--n needs at least one size");
  if (trials < 1) throw UnsupportedKind("--trials must be positive");
  FieldPtr ctx = make_field(q);
  Kind kind = parse_kind(kind_str);
  SolveOptions opts;
  opts.allow_extension = true;

  struct Task {
    std::uint64_t n, m;
  };
  std::vector<Task> tasks;
  for (std::uint64_t n : ns)
    for (int t = 0; t < trials; ++t) tasks.push_back({n, m_opt == 0 ? n : m_opt});

  std::vector<TrialResult> results(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      results[i] =
          run_trial(ctx, kind, algo, opts, tasks[i].n, tasks[i].m, seed, (std::uint64_t)i);
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, (unsigned)tasks.size());
  std::vector<std::thread> pool;
  for (unsigned i = 0; i + 1 < jobs; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  const bool jsonl = format == "jsonl";
  for (const TrialResult& r : results) {
    if (jsonl) {
      json rec;
      rec["type"] = "trial";
      rec["n"] = r.n;
      rec["m"] = r.m;
      rec["q"] = q;
      rec["algo"] = algo;
      rec["kind"] = kind_str;
      rec["seed"] = r.trial_seed;
      rec["wall_time_ms"] = r.ms;
      rec["verdict"] = r.verdict;
      rec["solution_field_degree"] = r.solution_field_degree;
      rec["verified"] = r.verified;
      if (!r.note.empty()) rec["note"] = r.note;
      std::cout << rec.dump() << "\n";
    } else {
      std::cout << "trial n=" << r.n << " m=" << r.m << " q=" << q << " algo=" << algo
                << " seed=" << r.trial_seed << " wall_time_ms=" << std::fixed
                << std::setprecision(3) << r.ms << " verdict=" << r.verdict
                << " solution_field_degree=" << r.solution_field_degree
                << " verified=" << (r.verified ? 1 : 0) << "\n";
    }
  }

  // per-size summary rows plus the doubling ratio of median times
  std::vector<double> medians;
  std::ostringstream table;
  table << std::setw(6) << "n" << std::setw(6) << "m" << std::setw(8) << "q" << std::setw(10)
        << algo << std::setw(8) << "trials" << std::setw(10) << "solution" << std::setw(7)
        << "nosol" << std::setw(7) << "irreg" << std::setw(7) << "error" << std::setw(10)
        << "verified" << std::setw(12) << "median_ms" << std::setw(12) << "max_ms" << "\n";
  for (std::size_t s = 0; s < ns.size(); ++s) {
    std::vector<double> times;
    std::uint64_t solved = 0, nosol = 0, irregular = 0, errors = 0, verified = 0, m_used = 0;
    for (std::size_t t = 0; t < (std::size_t)trials; ++t) {
      const TrialResult& r = results[s * trials + t];
      times.push_back(r.ms);
      m_used = r.m;
      if (r.verdict == "solution") ++solved;
      if (r.verdict == "nosol") ++nosol;
      if (r.verdict == "irregular") ++irregular;
      if (r.verdict == "error") ++errors;
      if (r.verified) ++verified;
    }
    std::sort(times.begin(), times.end());
    double median = times[times.size() / 2];
    double maxms = times.back();
    medians.push_back(median);
    if (jsonl) {
      json rec;
      rec["type"] = "summary";
      rec["n"] = ns[s];
      rec["m"] = m_used;
      rec["q"] = q;
      rec["algo"] = algo;
      rec["trials"] = trials;
      rec["solution"] = solved;
      rec["nosol"] = nosol;
      rec["irregular"] = irregular;
      rec["error"] = errors;
      rec["verified"] = verified;
      rec["median_ms"] = median;
      rec["max_ms"] = maxms;
      std::cout << rec.dump() << "\n";
    } else {
      table << std::setw(6) << ns[s] << std::setw(6) << m_used << std::setw(8) << q
            << std::setw(10) << "" << std::setw(8) << trials << std::setw(10) << solved
            << std::setw(7) << nosol << std::setw(7) << irregular << std::setw(7) << errors
            << std::setw(10) << verified << std::setw(12) << std::fixed << std::setprecision(3)
            << median << std::setw(12) << maxms << "\n";
    }
  }
  if (!jsonl) std::cout << table.str();
  for (std::size_t s = 0; s + 1 < ns.size(); ++s) {
    if (ns[s + 1] != 2 * ns[s] || medians[s] <= 0.0) continue;
    double ratio = medians[s + 1] / medians[s];
    if (jsonl) {
      json rec;
      rec["type"] = "ratio";
      rec["n"] = ns[s];
      rec["n2"] = ns[s + 1];
      rec["time_ratio"] = ratio;
      std::cout << rec.dump() << "\n";
    } else {
      std::cout << "growth time(" << ns[s + 1] << ")/time(" << ns[s] << ") = " << std::fixed
                << std::setprecision(2) << ratio << "\n";
    }
  }
  return kExitSolution;
}

// ====== subcommand: ippow solve ======

int cmd_ippow_solve(const std::string& file, int d, std::uint64_t seed,
                    const std::string& format) {
  DensePolySystem sys = DensePolySystem::parse_text(read_file(file));
  std::optional<PowSolution> sol = solve_pow(sys, d, seed);
  if (format == "jsonl") {
    json rec;
    if (sol) {
      rec["verdict"] = "solution";
      rec["A"] = matrix_json(sol->A);
      rec["B"] = matrix_json(sol->B);
      rec["p"] = sol->p;
      rec["r"] = sol->r;
      rec["e"] = sol->e;
      rec["verified"] = verify_pow(*sol, sys, d);
    } else {
      rec["verdict"] = "nosol";
    }
    std::cout << rec.dump() << "\n";
  } else if (sol) {
    std::cout << "SOLUTION (d = " << d << " = " << sol->p << "^" << sol->r << " * " << sol->e
              << ", verified " << (verify_pow(*sol, sys, d) ? "yes" : "NO") << ")\n";
    std::cout << "A:\n" << sol->A.to_text();
    std::cout << "B:\n" << sol->B.to_text();
  } else {
    std::cout << "NO-SOLUTION\n";
  }
  return sol ? kExitSolution : kExitNoSolution;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"exact equivalence toolkit for quadratic and power systems over finite fields"};
  app.require_subcommand(1);

  std::uint64_t n = 0, m = 0, q = 0, seed = 1;
  std::string out, file, kind = "equivalent", algo = "auto", format = "table",
                         backend = "jordan";
  bool allow_extension = false;
  int trials = 5, d = 0;
  unsigned jobs = 0;
  std::vector<std::uint64_t> n_list;

  CLI::App* gen = app.add_subcommand("gen", "generate an instance file plus provenance sidecar");
  gen->add_option("out", out, "instance file to write")->required();
  gen->add_option("--n", n, "number of variables")->required();
  gen->add_option("--m", m, "number of polynomials (default n)");
  gen->add_option("--q", q, "field size (prime power)")->required();
  gen->add_option("--kind", kind,
                  "equivalent, equivalent_ext_only, inequivalent, irregular");
  gen->add_option("--seed", seed, "RNG seed");

  CLI::App* slv = app.add_subcommand("solve", "solve an instance file");
  slv->add_option("file", file, "instance file")->required();
  slv->add_option("--seed", seed, "RNG seed");
  slv->add_option("--algo", algo, "auto, canonical, generic, char2");
  slv->add_flag("--allow-extension", allow_extension,
                "retry intertwiner sampling over a small extension");
  slv->add_option("--format", format, "table or jsonl");

  CLI::App* cnt = app.add_subcommand("count", "bound the self-equivalence count of a system");
  cnt->add_option("file", file, "instance file (first system is used)")->required();
  cnt->add_option("--format", format, "table or jsonl");

  CLI::App* mst = app.add_subcommand("matsqrt", "exact square root of a matrix");
  mst->add_option("file", file, "field spec line, then 'rows cols' and the entries")->required();
  mst->add_option("--backend", backend, "jordan or companion");
  mst->add_option("--format", format, "table or jsonl");

  CLI::App* ben = app.add_subcommand("bench", "timed batches of generated instances");
  ben->add_option("--n", n_list, "sizes, e.g. 10,20,40")->required()->delimiter(',');
  ben->add_option("--m", m, "number of polynomials (default: m = n)");
  ben->add_option("--q", q, "field size (prime power)")->required();
  ben->add_option("--algo", algo, "auto, canonical, generic, char2");
  ben->add_option("--kind", kind, "instance kind per trial");
  ben->add_option("--trials", trials, "trials per size");
  ben->add_option("--seed", seed, "master seed; trial i uses stream (seed, i)");
  ben->add_option("--format", format, "table or jsonl");
  ben->add_option("--jobs", jobs, "worker threads (default: hardware)");

  CLI::App* ipw = app.add_subcommand("ippow", "power-system equivalence");
  CLI::App* ipw_solve = ipw->add_subcommand("solve", "recover (A, B) with B*POW(Ax) = g");
  ipw_solve->add_option("file", file, "polynomial system file")->required();
  ipw_solve->add_option("--d", d, "common degree of the system")->required();
  ipw_solve->add_option("--seed", seed, "RNG seed");
  ipw_solve->add_option("--format", format, "table or jsonl");
  ipw->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen(out, n, m, q, kind, seed);
    if (slv->parsed()) return cmd_solve(file, seed, algo, allow_extension, format);
    if (cnt->parsed()) return cmd_count(file, format);
    if (mst->parsed()) return cmd_matsqrt(file, backend, format);
    if (ben->parsed()) return cmd_bench(n_list, m, q, algo, kind, trials, seed, format, jobs);
    if (ipw->parsed()) return cmd_ippow_solve(file, d, seed, format);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
