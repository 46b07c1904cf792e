#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "../commutator.hpp"
#include "config.hpp"
#include "record.hpp"

namespace martkit {

struct SampleContext {
  const CorpusConfig& cfg;
  std::string suite;
  std::string anchor;
  std::size_t depth;
  std::uint64_t seed;
  std::uint64_t index;
};

class RecordSink {
 public:
  explicit RecordSink(const SampleContext& ctx) : ctx_(ctx) {}

  void add(const std::string& check, double lhs, double rhs, std::optional<double> claimed = std::nullopt,
           double slack = 0.0) {
    records_.push_back(make_record(ctx_.suite, ctx_.anchor, check, lhs, rhs, claimed, slack, ctx_.seed, ctx_.depth));
  }
  // err / scale must not exceed tol
  void exact(const std::string& check, double err, double scale, double tol) { add(check, err, scale, 0.0, tol); }
  // reported ratio, no claimed constant
  void report(const std::string& check, double lhs, double rhs) { add(check, lhs, rhs); }

  std::vector<VerificationRecord> take() { return std::move(records_); }

 private:
  const SampleContext& ctx_;
  std::vector<VerificationRecord> records_;
};

struct Suite {
  std::string name;
  std::string anchor;
  std::size_t default_samples{1};
  std::function<void(const SampleContext&, RecordSink&)> run;
  // depths actually sampled; empty means the config depths
  std::function<std::vector<std::size_t>(const CorpusConfig&)> depths;
  bool fixed_samples{false};  // ignore sample overrides
  std::string op;             // operator the suite certifies, if any
};

namespace detail {

inline double max_abs_gap(std::span<const double> a, std::span<const double> b) {
  double w = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) w = std::max(w, std::abs(a[j] - b[j]));
  return w;
}

inline double max_abs(std::span<const double> a) {
  double w = 0.0;
  for (double x : a) w = std::max(w, std::abs(x));
  return w;
}

// w_n at leaf j from the binary digits directly
inline double paley_walsh(std::size_t depth, std::size_t n, std::size_t j) {
  int parity = 0;
  for (std::size_t k = 0; k < depth; ++k) {
    const std::size_t digit = (j >> (depth - 1 - k)) & 1;
    parity ^= static_cast<int>(((n >> k) & 1) & digit);
  }
  return parity ? -1.0 : 1.0;
}

inline std::vector<std::size_t> fixed(std::initializer_list<std::size_t> d) { return d; }

// Trees for I_alpha grow factorially; map the corpus depths onto 4..7.
inline std::size_t fractional_depth(std::size_t d) { return std::clamp<std::size_t>(d / 2 + 1, 2, 7); }

inline std::vector<std::size_t> operator_depths(const std::string& op, const CorpusConfig& cfg) {
  std::vector<std::size_t> out;
  for (auto d : cfg.depths) {
    const std::size_t x = op == "fractional" ? fractional_depth(d) : d;
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  return out;
}

inline double op_q(const std::string& op, double alpha) { return op == "fractional" ? fractional_exponent(alpha) : 1.0; }

inline AtomSupport single_cell_support(const FiltrationTree& t, Rng& rng) {
  auto s = random_atom_support(t, rng);
  s.cells = {std::uniform_int_distribution<std::size_t>(0, t.cells(s.level) - 1)(rng)};
  return s;
}

// ---- martingale and decomposition suites

inline void product_identity(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  auto f = random_martingale(t, rng, static_cast<SampleProfile>(c.index % 3));
  auto g = Martingale::from_terminal(generate_bmo(t, c.cfg.bmo_profile(c.index), rng()));
  auto pd = product_decompose(f, g);
  out.exact("relative error", product_identity_error(f, g, pd), 1.0, c.cfg.tolerance("product-identity", 1e-10));
}

inline void diagonal_bound(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  auto f = random_martingale(t, rng, static_cast<SampleProfile>(c.index % 3));
  auto g = Martingale::from_terminal(generate_bmo(t, c.cfg.bmo_profile(c.index), rng()));
  out.add("diagonal", diagonal_l1(f, g), h1_norm(f) * bmo_norm(g), std::numbers::sqrt2,
          c.cfg.tolerance("diagonal-bound", 1e-9));
}

inline void maximal_atoms(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  auto a = random_atom(t, AtomKind::simple_s_inf, random_atom_support(*t, rng), rng);
  const double slack = c.cfg.tolerance("maximal-atoms", 1e-9);
  const double pa = a.support_mass();
  auto M = doob_maximal(a.a), S = square_function(a.a), s = cond_square_function(a.a);
  for (double p : {1.0, 1.5, 2.0}) {
    const double rhs = std::pow(pa, 1.0 / p - 1.0);
    const std::string tag = "p=" + std::to_string(p).substr(0, 3);
    out.add("M " + tag, lp_norm(M, p), rhs, 2.0, slack);
    out.add("S " + tag, lp_norm(S, p), rhs, 1.0, slack);
    out.add("s " + tag, lp_norm(s, p), rhs, 1.0, slack);
    out.add("a " + tag, lp_norm(a.a, p), rhs, 1.0, slack);
  }
  // outside A only rounding in the vanishing averages survives
  auto mask = a.support_mask();
  double leak = 0.0;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (!mask[j]) leak = std::max({leak, std::abs(M[j]), std::abs(S[j]), std::abs(s[j])});
  out.exact("support", leak, sup_norm(M), c.cfg.tolerance("support", kMinTolerance));
}

inline Martingale minus_predictable(const Martingale& b, std::size_t n) {
  auto bt = b.terminal();
  if (n == 0) return b;
  return Martingale::from_terminal(bt - conditional_expectation(bt, n - 1));
}

inline void atom_paraproducts(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  auto a = random_atom(t, AtomKind::simple_s_inf, random_atom_support(*t, rng), rng);
  auto g = Martingale::from_terminal(generate_bmo(t, c.cfg.bmo_profile(c.index), rng()));
  auto am = Martingale::from_terminal(a.a);
  const double slack = c.cfg.tolerance("atom-paraproducts", 1e-9);
  out.add("Pi1 in h1", small_h1_norm(product_decompose(am, g).pi1), small_bmo_norm(g), 2.0, slack);
  auto shifted = minus_predictable(g, a.level);
  out.add("Pi2 in H1", h1_norm(product_decompose(am, shifted).pi2), bmo_norm(g), 2.0, slack);
}

inline void jump_paraproduct(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  const std::size_t lvl = std::uniform_int_distribution<std::size_t>(1, c.depth)(rng);
  auto j = random_jump(t, lvl, rng);
  auto f = Martingale::from_terminal(j.a);
  auto g = Martingale::from_terminal(generate_bmo(t, c.cfg.bmo_profile(c.index), rng()));
  out.add("Pi1 in h1", small_h1_norm(product_decompose(f, g).pi1), small_bmo_norm(g) * h1_jump_norm(f), 1.0,
          c.cfg.tolerance("jump-paraproduct", 1e-9));
}

inline void paraproduct_pointwise(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  auto f = random_martingale(t, rng, static_cast<SampleProfile>(c.index % 3));
  auto g = Martingale::from_terminal(generate_bmo(t, c.cfg.bmo_profile(c.index), rng()));
  auto lhs = square_function(product_decompose(f, g).pi2);
  auto rhs = doob_maximal(g) * square_function(f);
  double excess = 0.0;
  for (std::size_t j = 0; j < lhs.size(); ++j) excess = std::max(excess, lhs[j] - rhs[j]);
  out.exact("S(Pi2) - M(g) S(f)", excess, std::max(max_abs(rhs.values()), 1e-300),
            c.cfg.tolerance("paraproduct-pointwise", 1e-12));
}

inline void log_scalar_grid(const SampleContext& c, RecordSink& out) {
  const int n = 200;
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) {
      const double s = std::pow(10.0, -3.0 + 6.0 * i / (n - 1));
      const double t = std::pow(10.0, -3.0 + 6.0 * k / (n - 1));
      worst = std::max(worst, orlicz_log(s * t) / (t + std::exp(s)));
    }
  (void)c;
  out.add("max lhs/rhs on grid", worst, 1.0, 1.0, 0.0);
}

inline void davis_atomic(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = corpus_tree(c.cfg, c.depth, c.index, rng);
  auto f = random_martingale(t, rng, static_cast<SampleProfile>(c.index % 3), true);
  const double scale = 1.0 + sup_norm(f.terminal());
  const double tol = c.cfg.tolerance("davis-atomic", 1e-12);
  auto dd = davis_decompose(f);
  out.exact("f1 + fd = f", max_abs_gap((dd.f1 + dd.fd).terminal().values(), f.terminal().values()), scale, tol);
  auto ad = atomic_decompose(f);
  out.exact("sum mu a = f", reconstruction_error(f.terminal(), ad.reconstruct(t)), scale, tol);
  double bad = 0.0;
  for (auto& a : ad.atoms)
    if (!check_atom(a, 1e-9).ok) bad += 1.0;
  out.exact("invalid atoms", bad, 1.0, 0.0);
  const double H1 = h1_norm(f);
  out.report("f1 in h1", small_h1_norm(dd.f1), H1);
  out.report("fd in h1d", h1_jump_norm(dd.fd), H1);
  out.report("atomic coefficients", ad.coefficient_sum(), small_h1_norm(f));
}

// ---- dyadic Hilbert transform

inline void hilbert_l2_norm(const SampleContext& c, RecordSink& out) {
  HaarSystem sys(build_nondoubling_measure(c.depth));
  out.add("power iteration", power_iteration_norm(sys, 200, c.seed), 1.0, 2.0, c.cfg.tolerance("hilbert-L2-norm", 1e-9));
}

inline void haar_system(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = c.index % 2 == 0 ? build_nondoubling_measure(c.depth) : random_binary_tree(c.depth, rng);
  HaarSystem sys(t);
  const double tol = c.cfg.tolerance("haar-system", 1e-12);
  std::uniform_int_distribution<std::size_t> lvl(0, c.depth - 1);
  auto pick = [&] {
    const std::size_t n = lvl(rng);
    return CellRef{n, std::uniform_int_distribution<std::size_t>(0, t->cells(n) - 1)(rng)};
  };
  double ortho = 0.0, l1 = 0.0;
  for (int k = 0; k < 16; ++k) {
    auto I = pick();
    auto hI = sys.function(I.level, I.index);
    ortho = std::max(ortho, std::abs(l2_inner(hI, hI) - 1.0));
    l1 = std::max(l1, std::abs(lp_norm(hI, 1.0) / (2.0 * std::sqrt(sys.m(I.level, I.index))) - 1.0));
    for (int r = 0; r < 8; ++r) {
      auto J = pick();
      if (J == I) continue;
      ortho = std::max(ortho, std::abs(l2_inner(hI, sys.function(J.level, J.index))));
    }
  }
  out.exact("orthonormality", ortho, 1.0, tol);
  out.exact("L1 norm 2 sqrt(m)", l1, 1.0, tol);
  auto f = random_terminal(t, rng), g = random_terminal(t, rng);
  auto Hf = dyadic_hilbert(sys, f);
  auto Hg = dyadic_hilbert_adjoint(sys, g);
  const double lhs = l2_inner(Hf, g), rhs = l2_inner(f, Hg);
  const double scale = std::sqrt(l2_inner(Hf, Hf) * l2_inner(g, g)) + std::sqrt(l2_inner(f, f) * l2_inner(Hg, Hg));
  out.exact("adjointness", std::abs(lhs - rhs), std::max(scale, 1e-300), tol);
}

inline void hilbert_jumps(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  auto t = build_nondoubling_measure(c.depth);
  HaarSystem sys(t);
  const std::size_t lvl = std::uniform_int_distribution<std::size_t>(1, c.depth)(rng);
  auto g = random_jump(t, lvl, rng);
  auto full = dyadic_hilbert(sys, g.a);
  auto one = hilbert_on_jump(sys, g);
  out.exact("single-level formula", max_abs_gap(full.values(), one.values()), std::max(1.0, sup_norm(full)),
            c.cfg.tolerance("hilbert-jumps", 1e-12));
}

// ---- Walsh system

inline void walsh_dirichlet(const SampleContext& c, RecordSink& out) {
  WalshContext ctx(c.depth);
  double gap = 0.0;
  for (std::size_t m = 0; m <= c.depth; ++m) {
    auto d = dirichlet_kernel(ctx, std::size_t{1} << m);
    const std::size_t cut = ctx.size() >> m;
    for (std::size_t j = 0; j < ctx.size(); ++j)
      gap = std::max(gap, std::abs(d[j] - (j < cut ? std::ldexp(1.0, static_cast<int>(m)) : 0.0)));
  }
  out.exact("D_{2^m} = 2^m 1[0, 2^-m)", gap, 1.0, 0.0);
}

inline void walsh_partial_sums(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  WalshContext ctx(c.depth);
  auto f = random_terminal(ctx.tree(), rng, static_cast<SampleProfile>(c.index % 3));
  double gap = 0.0;
  for (std::size_t m = 0; m <= c.depth; ++m)
    gap = std::max(gap, max_abs_gap(walsh_partial_sum(ctx, std::size_t{1} << m, f).values(),
                                    conditional_expectation(f, m).values()));
  out.exact("S_{2^m} f = E_m f", gap, 1.0 + sup_norm(f), c.cfg.tolerance("walsh-partial-sums", 1e-12));
}

inline void walsh_fwht(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  WalshContext ctx(c.depth);
  auto f = random_terminal(ctx.tree(), rng, static_cast<SampleProfile>(c.index % 3));
  auto fast = fwht(ctx, f);
  const std::size_t L = ctx.size();
  std::vector<double> direct(L, 0.0);
  for (std::size_t n = 0; n < L; ++n) {
    double s = 0.0;
    for (std::size_t j = 0; j < L; ++j) s += f[j] * paley_walsh(c.depth, n, j);
    direct[n] = s / static_cast<double>(L);
  }
  out.exact("fwht vs direct sums", max_abs_gap(fast, direct), 1.0 + sup_norm(f), c.cfg.tolerance("walsh-fwht", 1e-10));
}

inline void cesaro_means(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  WalshContext ctx(c.depth);
  const std::size_t L = ctx.size();
  auto f = random_terminal(ctx.tree(), rng, static_cast<SampleProfile>(c.index % 3));
  double gap = 0.0;
  std::uniform_int_distribution<std::size_t> pick(1, L);
  for (int r = 0; r < 3; ++r) {
    const std::size_t n = pick(rng);
    // K_n = (1/n) sum_{k=1}^n D_k, D_k = sum_{i<k} w_i
    std::vector<double> D(L, 0.0), K(L, 0.0);
    for (std::size_t k = 1; k <= n; ++k)
      for (std::size_t x = 0; x < L; ++x) {
        D[x] += paley_walsh(c.depth, k - 1, x);
        K[x] += D[x] / static_cast<double>(n);
      }
    std::vector<double> conv(L, 0.0);
    for (std::size_t x = 0; x < L; ++x) {
      double s = 0.0;
      for (std::size_t y = 0; y < L; ++y) s += f[y] * K[x ^ y];
      conv[x] = s / static_cast<double>(L);
    }
    gap = std::max(gap, max_abs_gap(cesaro_mean(ctx, n, f).values(), conv));
  }
  out.exact("spectral vs convolution", gap, 1.0 + sup_norm(f), c.cfg.tolerance("cesaro-means", 1e-10));
}

inline void cesaro_atom_bmo(const SampleContext& c, RecordSink& out) {
  Rng rng(c.seed);
  WalshContext ctx(c.depth);
  const auto& t = ctx.tree();
  auto support = single_cell_support(*t, rng);
  auto a = random_atom(t, AtomKind::simple_inf, support, rng);
  auto b = generate_bmo(t, c.cfg.bmo_profile(c.index), rng());
  // average of b over the parent of the atom's cell
  const std::size_t n = support.level;
  const std::size_t parent_level = n == 0 ? 0 : n - 1;
  const std::size_t parent = n == 0 ? 0 : t->parent_index(n, support.cells[0]);
  const double bq = cell_averages(*t, b.values(), parent_level)[parent];
  auto sig = cesaro_maximal(ctx, a.a);
  auto w = (b - StepFunction::constant(t, bq)) * sig;
  out.report("(b - b_parent) sigma(a)", lp_norm(w, 1.0), bmo_norm(b));
}

// ---- commutators and certification

inline void sandwich(const SampleContext& c, RecordSink& out) {
  for (const auto& op : c.cfg.operators) {
    Rng rng(sample_seed(c.seed, op, 0, 0));
    const std::size_t d = op == "fractional" ? fractional_depth(c.depth) : c.depth;
    auto t = operator_tree(op, d, rng);
    auto T = make_operator(op, t, rng, c.cfg.alpha);
    auto f = random_input(t, rng, c.index);
    auto b = generate_bmo(t, c.cfg.bmo_profile(c.index), rng());
    auto chk = sandwich_check(*T, b, f);
    out.exact(op + " sandwich", chk.violation, 1.0, c.cfg.tolerance("sandwich", 1e-9));
    if (T->linear()) out.exact(op + " linear residual", chk.linear_residual, 1.0, c.cfg.tolerance("linear-residual", 1e-10));
  }
}

inline void kq(const std::string& op, const SampleContext& c, RecordSink& out) {
  auto s = kq_sample(op, op_q(op, c.cfg.alpha), c.depth, c.seed, c.cfg.alpha);
  const double slack = c.cfg.tolerance("kq", 1e-9);
  const bool maximal = op == "maximal";
  out.report("h1-lq", s.h1_lq, 1.0);
  out.report("l1-weak", s.l1_weak, 1.0);
  out.add("atom", s.atom, 1.0, maximal ? std::optional(2.0) : std::nullopt, slack);
  out.add("jump", s.jump, 1.0, maximal ? std::optional(1.0) : std::nullopt, slack);
  out.report("atom-commutator", s.atom_commutator, 1.0);
  out.report("jump-commutator", s.jump_commutator, 1.0);
  Rng probe(c.seed);
  auto T = make_operator(op, operator_tree(op, 3, probe), probe, c.cfg.alpha);
  if (T->commutes_with_predictable()) out.exact("commuting defect", s.defect, 1.0, c.cfg.tolerance("commuting", 1e-12));
}

inline void endpoint(const std::string& op, const SampleContext& c, RecordSink& out) {
  auto s = endpoint_sample(op, op_q(op, c.cfg.alpha), c.depth, c.seed, c.cfg.alpha);
  out.report("weak", s.weak, 1.0);
  out.report("strong", s.strong, 1.0);
  out.report("atom-h1b", s.atom_h1b, 1.0);
}

inline std::vector<Suite> build_registry() {
  std::vector<Suite> r;
  auto add = [&](std::string name, std::string anchor, std::size_t samples, auto fn) {
    Suite s;
    s.name = std::move(name);
    s.anchor = std::move(anchor);
    s.default_samples = samples;
    s.run = fn;
    r.push_back(std::move(s));
  };
  add("product-identity", "product splits into two paraproducts and a diagonal term", 1000, product_identity);
  add("diagonal-bound", "diagonal term bounded by sqrt(2) |f|_H1 |g|_BMO", 1000, diagonal_bound);
  add("maximal-atoms", "Lp sizes of M, S, s on simple atoms", 1000, maximal_atoms);
  add("atom-paraproducts", "paraproducts of simple atoms", 1000, atom_paraproducts);
  add("jump-paraproduct", "first paraproduct on a single jump", 1000, jump_paraproduct);
  add("paraproduct-pointwise", "S(Pi2(f,g)) <= M(g) S(f)", 1000, paraproduct_pointwise);
  add("log-scalar-grid", "st / log(e + st) <= t + e^s", 1, log_scalar_grid);
  r.back().depths = [](const CorpusConfig&) { return fixed({0}); };
  r.back().fixed_samples = true;
  add("davis-atomic", "Davis and atomic decompositions", 1000, davis_atomic);
  add("hilbert-L2-norm", "dyadic Hilbert transform on L2 of the non-doubling measure", 3, hilbert_l2_norm);
  r.back().depths = [](const CorpusConfig&) { return fixed({10}); };
  add("haar-system", "Haar system and the Hilbert adjoint", 200, haar_system);
  add("hilbert-jumps", "dyadic Hilbert transform of a single jump", 125, hilbert_jumps);
  add("walsh-dirichlet", "Dirichlet kernels at powers of two", 1, walsh_dirichlet);
  r.back().fixed_samples = true;
  add("walsh-partial-sums", "Walsh partial sums at powers of two", 20, walsh_partial_sums);
  add("walsh-fwht", "fast Walsh transform", 10, walsh_fwht);
  r.back().depths = [](const CorpusConfig&) { return fixed({8}); };
  add("cesaro-means", "Fejer means as Walsh convolutions", 10, cesaro_means);
  r.back().depths = [](const CorpusConfig&) { return fixed({8}); };
  add("cesaro-atom-bmo", "(b - b_parent) sigma(a) in L1 for atoms", 125, cesaro_atom_bmo);
  add("sandwich", "subbilinear commutator sandwich", 20, sandwich);
  for (std::string op : {"maximal", "square", "transform", "maximal-transform", "hilbert", "cesaro", "fractional"}) {
    add("kq-" + op, "K_q certification", 200, [op](const SampleContext& c, RecordSink& out) { kq(op, c, out); });
    r.back().depths = [op](const CorpusConfig& cfg) { return operator_depths(op, cfg); };
    r.back().op = op;
    add("endpoint-" + op, "commutator endpoint bounds", 200,
        [op](const SampleContext& c, RecordSink& out) { endpoint(op, c, out); });
    r.back().depths = [op](const CorpusConfig& cfg) { return operator_depths(op, cfg); };
    r.back().op = op;
  }
  return r;
}

}  // namespace detail

inline const std::vector<Suite>& suite_registry() {
  static const std::vector<Suite> r = detail::build_registry();
  return r;
}

inline const Suite& find_suite(const std::string& name) {
  for (auto& s : suite_registry())
    if (s.name == name) return s;
  throw std::invalid_argument("unknown suite: " + name);
}

// Deterministic order: suite, then seed, then generation order.
inline void sort_records(std::vector<VerificationRecord>& recs) {
  std::stable_sort(recs.begin(), recs.end(), [](const VerificationRecord& a, const VerificationRecord& b) {
    if (a.suite != b.suite) return a.suite < b.suite;
    return a.seed < b.seed;
  });
}

// Runs every sample of a suite; a throwing sample becomes a failed record.
inline std::vector<VerificationRecord> run_suite(const Suite& suite, const CorpusConfig& cfg) {
  cfg.validate();
  const auto depths = suite.depths ? suite.depths(cfg) : cfg.depths;
  const std::size_t n = suite.fixed_samples ? suite.default_samples : cfg.samples_for(suite.name, suite.default_samples);
  struct Task {
    std::size_t depth;
    std::uint64_t index;
  };
  std::vector<Task> tasks;
  for (auto d : depths)
    for (std::uint64_t i = 0; i < n; ++i) tasks.push_back({d, i});
  std::vector<std::vector<VerificationRecord>> slots(tasks.size());

  auto work = [&](std::size_t k) {
    const auto [depth, index] = tasks[k];
    SampleContext ctx{cfg, suite.name, suite.anchor, depth, sample_seed(cfg.seed, suite.name, depth, index), index};
    RecordSink sink(ctx);
    const auto t0 = std::chrono::steady_clock::now();
    try {
      suite.run(ctx, sink);
      slots[k] = sink.take();
    } catch (const std::exception& e) {
      auto r = make_record(suite.name, suite.anchor, std::string("error: ") + e.what(),
                           std::numeric_limits<double>::quiet_NaN(), 1.0, std::nullopt, 0.0, ctx.seed, depth);
      slots[k] = {r};
    }
    if (cfg.timing) {
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      for (auto& r : slots[k]) r.ms = ms;
    }
  };

  const std::size_t workers = std::min(cfg.workers, std::max<std::size_t>(tasks.size(), 1));
  if (workers <= 1) {
    for (std::size_t k = 0; k < tasks.size(); ++k) work(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) work(k);
      });
  }
  std::vector<VerificationRecord> out;
  for (auto& s : slots)
    for (auto& r : s) out.push_back(std::move(r));
  sort_records(out);
  return out;
}

inline std::vector<VerificationRecord> run_suite(const std::string& name, const CorpusConfig& cfg) {
  return run_suite(find_suite(name), cfg);
}

// "all" runs every registered suite whose operator (if any) is in the config.
inline std::vector<VerificationRecord> run_suites(const std::string& which, const CorpusConfig& cfg) {
  if (which != "all") return run_suite(which, cfg);
  std::vector<VerificationRecord> out;
  for (auto& s : suite_registry()) {
    if (!s.op.empty() && std::find(cfg.operators.begin(), cfg.operators.end(), s.op) == cfg.operators.end()) continue;
    auto r = run_suite(s, cfg);
    out.insert(out.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  sort_records(out);
  return out;
}

inline bool all_pass(const std::vector<VerificationRecord>& recs) {
  return std::all_of(recs.begin(), recs.end(), [](const VerificationRecord& r) { return r.pass; });
}

// Per-depth maxima of one check's ratios.
inline std::vector<std::pair<std::size_t, double>> max_by_depth(const std::vector<VerificationRecord>& recs,
                                                                const std::string& check) {
  std::map<std::size_t, double> m;
  for (auto& r : recs)
    if (r.check == check) {
      auto [it, fresh] = m.try_emplace(r.depth, r.ratio);
      if (!fresh) it->second = std::isnan(r.ratio) || std::isnan(it->second) ? std::numeric_limits<double>::quiet_NaN()
                                                                                : std::max(it->second, r.ratio);
    }
  return {m.begin(), m.end()};
}

inline double max_ratio(const std::vector<VerificationRecord>& recs, const std::string& check) {
  double w = 0.0;
  for (auto& r : recs)
    if (r.check == check) w = std::isnan(r.ratio) ? r.ratio : std::max(w, r.ratio);
  return w;
}

}  // namespace martkit
