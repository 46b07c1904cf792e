#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "harness/record.hpp"
#include "norms.hpp"
#include "sublinear.hpp"

namespace martkit {

inline bool is_constant(const StepFunction& b) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, top = 0.0;
  for (double v : b.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    top = std::max(top, std::abs(v));
  }
  return hi - lo < 1e-12 * (1.0 + top);
}

// [T, b](f)(x) = T(b f - b(x) f)(x)
inline StepFunction commutator_apply(const SublinearOp& T, const StepFunction& b, const StepFunction& f) {
  T.check(b);
  T.check(f);
  return T.shifted(b * f, &f, &b);
}

// U(f, b)(x) = T(Pi_2(f, b) - b(x) f)(x)
inline StepFunction operator_U(const SublinearOp& T, const StepFunction& f, const StepFunction& b) {
  T.check(b);
  T.check(f);
  auto pd = product_decompose(f, b);
  return T.shifted(pd.pi2.terminal(), &f, &b);
}

// sup_n |E_n(b f) - b E_n(f)|
inline StepFunction expectation_commutator_max(const StepFunction& b, const StepFunction& f) {
  b.require_same_tree(f);
  const auto& tree = f.filtration();
  auto bf = Martingale::from_terminal(b * f);
  auto fm = Martingale::from_terminal(f);
  std::vector<double> out(tree.leaves(), 0.0);
  for (std::size_t n = 0; n <= tree.depth(); ++n) {
    const std::size_t w = tree.leaves_per_cell(n);
    auto lb = bf.level(n);
    auto lf = fm.level(n);
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = std::max(out[j], std::abs(lb[j / w] - b[j] * lf[j / w]));
  }
  return StepFunction(f.tree(), std::move(out));
}

inline double h1b_norm(const StepFunction& b, const StepFunction& f) {
  return h1_norm(f) * bmo_norm(b) + lp_norm(expectation_commutator_max(b, f), 1.0);
}

// The three comparable sizes of f in H_1^b: the norm itself, |f||b| + |L(f, b)|_H1
// and |f||b| + |[M, b] f|_1.
struct H1bEquivalents {
  double norm{0.0};
  double via_diagonal{0.0};
  double via_maximal{0.0};
};

inline H1bEquivalents h1b_equivalents(const StepFunction& b, const StepFunction& f) {
  const double base = h1_norm(f) * bmo_norm(b);
  auto pd = product_decompose(f, b);
  MaximalOp M(f.tree());
  return {h1b_norm(b, f), base + h1_norm(pd.l.terminal()), base + lp_norm(commutator_apply(M, b, f), 1.0)};
}

// Pointwise pieces of the subbilinear bound |T(L)| - R <= |[T,b] f| <= R + |T(L)|.
struct SandwichCheck {
  double violation{0.0};       // worst excess over either side, relative
  double linear_residual{0.0};  // |[T,b]f - T(L) - T(Pi_1) - U| relative, linear T only
};

inline SandwichCheck sandwich_check(const SublinearOp& T, const StepFunction& b, const StepFunction& f) {
  auto pd = product_decompose(f, b);
  auto comm = commutator_apply(T, b, f);
  auto tl = T.apply(pd.l.terminal());
  auto tp = T.apply(pd.pi1.terminal());
  auto u = T.shifted(pd.pi2.terminal(), &f, &b);
  // linear commutators cancel T(bf) against b T(f); rounding scales with those
  std::vector<double> size(comm.size(), 0.0);
  if (T.linear()) {
    auto tbf = T.apply(b * f), tf = T.apply(f), t2 = T.apply(pd.pi2.terminal());
    for (std::size_t j = 0; j < size.size(); ++j)
      size[j] = std::abs(tbf[j]) + std::abs(b[j] * tf[j]) + std::abs(t2[j]);
  }
  SandwichCheck out;
  for (std::size_t j = 0; j < comm.size(); ++j) {
    const double r = std::abs(u[j]) + std::abs(tp[j]);
    const double c = std::abs(comm[j]), l = std::abs(tl[j]);
    const double scale = 1.0 + r + l + c + size[j];
    out.violation = std::max(out.violation, std::max(c - (r + l), (l - r) - c) / scale);
    if (T.linear())
      out.linear_residual =
          std::max(out.linear_residual, std::abs(comm[j] - tl[j] - tp[j] - u[j]) / scale);
  }
  return out;
}

// sup |T(g a) - g T(a)| relative to sup |g| max(sup |T(a)|, sup |a|), with |g| for
// nonnegative T.
inline double commuting_defect(const SublinearOp& T, const StepFunction& g, const StepFunction& a) {
  auto lhs = T.apply(g * a);
  auto ta = T.apply(a);
  double worst = 0.0;
  for (std::size_t j = 0; j < ta.size(); ++j) {
    const double gj = T.nonnegative() ? std::abs(g[j]) : g[j];
    worst = std::max(worst, std::abs(lhs[j] - gj * ta[j]));
  }
  const double scale = sup_norm(g) * std::max(sup_norm(ta), sup_norm(a));
  return scale > 0.0 ? worst / scale : worst;
}

// Largest observed ratio with its reproducing sample.
struct ConstantEstimate {
  double value{0.0};
  std::uint64_t witness_seed{0};
  std::size_t witness_depth{0};
  std::size_t samples{0};
  std::vector<std::pair<std::size_t, double>> by_depth;

  void observe(double ratio, std::uint64_t seed, std::size_t depth) {
    ++samples;
    if (by_depth.empty() || by_depth.back().first != depth) by_depth.emplace_back(depth, 0.0);
    if (!(ratio <= by_depth.back().second)) by_depth.back().second = ratio;
    if (!(ratio <= value)) {
      value = ratio;
      witness_seed = seed;
      witness_depth = depth;
    }
  }
  bool finite() const { return std::isfinite(value); }
  bool stable(double tol) const { return depth_stable(by_depth, tol); }
};

struct CertifyConfig {
  std::vector<std::size_t> depths{6, 8, 10, 12};
  std::size_t samples{50};
  std::uint64_t seed{1};
  double alpha{0.5};
};

inline std::vector<std::size_t> default_depths(const std::string& op) {
  if (op == "fractional") return {4, 5, 6, 7};
  return {6, 8, 10, 12};
}

struct KqCertificate {
  std::string op;
  double q{1.0};
  ConstantEstimate h1_lq;           // |T f|_q / |f|_H1
  ConstantEstimate l1_weak;         // |T f|_{q,inf} / |f|_1
  ConstantEstimate atom;            // |(b - b_{n-1}) T a|_q / |b|_BMO
  ConstantEstimate atom_commutator;  // |[T, b_{n-1}] a|_q / |b|_BMO
  ConstantEstimate jump;            // |(b - b_{n-1}) T g|_q / (|g|_1 |b|_BMO)
  ConstantEstimate jump_commutator;
  bool commutes{false};
  double commuting_defect{0.0};

  bool all_finite() const {
    return h1_lq.finite() && l1_weak.finite() && atom.finite() && atom_commutator.finite() && jump.finite() &&
           jump_commutator.finite() && std::isfinite(commuting_defect);
  }
};

namespace detail {

inline StepFunction predictable_part(const StepFunction& b, std::size_t n) {
  return n == 0 ? StepFunction::zero(b.tree()) : conditional_expectation(b, n - 1);
}

// Level-n cell (level n-1 parent when parents is set) where the mean of
// |b - b_{n-1}|^2 is largest.
inline std::size_t worst_cell(const StepFunction& b, std::size_t n, std::size_t cell_level) {
  const auto& tree = b.filtration();
  auto bp = predictable_part(b, n);
  auto osc = (b - bp).map([](double x) { return x * x; });
  auto avg = cell_averages(tree, osc.values(), cell_level);
  return static_cast<std::size_t>(std::max_element(avg.begin(), avg.end()) - avg.begin());
}

}  // namespace detail

// Normalized indicator of a random cell: the concentrated inputs that drive
// weak-type ratios.
inline StepFunction random_spike(const TreePtr& tree, Rng& rng) {
  const std::size_t n = std::uniform_int_distribution<std::size_t>(1, tree->depth())(rng);
  const std::size_t c = std::uniform_int_distribution<std::size_t>(0, tree->cells(n) - 1)(rng);
  const double m = tree->mass(n, c);
  return (m > 0.0 ? 1.0 / m : 1.0) * indicator(tree, {n, c});
}

// Test inputs cycle through normal, heavy-tailed, multilevel and spike profiles.
inline StepFunction random_input(const TreePtr& tree, Rng& rng, std::uint64_t pick) {
  if (pick % 4 == 3) return random_spike(tree, rng);
  return random_martingale(tree, rng, static_cast<SampleProfile>(pick % 4)).terminal();
}

struct KqSample {
  double h1_lq, l1_weak, atom, atom_commutator, jump, jump_commutator, defect;
};

// One certification sample, fully determined by its seed.
inline KqSample kq_sample(const std::string& op, double q, std::size_t depth, std::uint64_t seed, double alpha = 0.5) {
  Rng rng(seed);
  auto tree = operator_tree(op, depth, rng);
  auto T = make_operator(op, tree, rng, alpha);
  KqSample s{};
  auto f = random_input(tree, rng, seed);
  auto tf = T->apply(f);
  s.h1_lq = lp_norm(tf, q) / h1_norm(f);
  s.l1_weak = weak_lq_norm(tf, q) / lp_norm(f, 1.0);

  auto b = generate_bmo(tree, random_bmo_profile(rng), rng());
  const double bn = bmo_norm(b);

  // atoms and jumps sit where b - b_{n-1} oscillates most
  auto support = random_atom_support(*tree, rng);
  support.cells = {detail::worst_cell(b, support.level, support.level)};
  auto a = random_atom(tree, AtomKind::simple_s_inf, support, rng);
  auto bp = detail::predictable_part(b, a.level);
  auto ta = T->apply(a.a);
  s.atom = lp_norm((b - bp) * ta, q) / bn;
  s.atom_commutator = lp_norm(T->shifted(bp * a.a, &a.a, &bp), q) / bn;
  s.defect = T->commutes_with_predictable() ? commuting_defect(*T, bp, a.a) : 0.0;

  const std::size_t lvl = std::uniform_int_distribution<std::size_t>(1, depth)(rng);
  auto g = random_jump(tree, lvl, rng, {detail::worst_cell(b, lvl, lvl - 1)});
  auto gp = detail::predictable_part(b, lvl);
  auto tg = T->apply(g.a);
  const double gn = lp_norm(g.a, 1.0) * bn;
  s.jump = lp_norm((b - gp) * tg, q) / gn;
  s.jump_commutator = lp_norm(T->shifted(gp * g.a, &g.a, &gp), q) / gn;
  if (T->commutes_with_predictable()) s.defect = std::max(s.defect, commuting_defect(*T, gp, g.a));
  return s;
}

inline KqCertificate kq_certify(const std::string& op, double q, const CertifyConfig& cfg) {
  KqCertificate cert;
  cert.op = op;
  cert.q = q;
  {
    Rng probe(cfg.seed);
    auto t = operator_tree(op, cfg.depths.empty() ? 4 : cfg.depths.front(), probe);
    cert.commutes = make_operator(op, t, probe, cfg.alpha)->commutes_with_predictable();
  }
  for (std::size_t depth : cfg.depths)
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const auto seed = sample_seed(cfg.seed, "kq:" + op, depth, i);
      auto s = kq_sample(op, q, depth, seed, cfg.alpha);
      cert.h1_lq.observe(s.h1_lq, seed, depth);
      cert.l1_weak.observe(s.l1_weak, seed, depth);
      cert.atom.observe(s.atom, seed, depth);
      cert.atom_commutator.observe(s.atom_commutator, seed, depth);
      cert.jump.observe(s.jump, seed, depth);
      cert.jump_commutator.observe(s.jump_commutator, seed, depth);
      cert.commuting_defect = std::max(cert.commuting_defect, s.defect);
    }
  return cert;
}

// Ratios for one endpoint sample: weak type against |b|_BMO |f|_H1 for a random f,
// and the strong bound against the H_1^b norm for f built from (b, inf)-atoms.
struct EndpointSample {
  double weak{0.0};
  double strong{0.0};
  double atom_h1b{0.0};  // h1b norm of one (b, inf)-atom over |b|_BMO
};

inline EndpointSample endpoint_sample(const std::string& op, double q, std::size_t depth, std::uint64_t seed,
                                      double alpha = 0.5, std::size_t atoms = 3) {
  Rng rng(seed);
  auto tree = operator_tree(op, depth, rng);
  auto T = make_operator(op, tree, rng, alpha);
  auto b = generate_bmo(tree, random_bmo_profile(rng), rng());
  if (is_constant(b)) throw std::invalid_argument("endpoint: b must be non-constant");
  EndpointSample s;
  StepFunction f;
  if (seed % 4 == 3) {
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, depth)(rng);
    const std::size_t c = detail::worst_cell(b, n, n);
    f = (1.0 / tree->mass(n, c)) * indicator(tree, {n, c});
  } else {
    f = random_input(tree, rng, seed);
  }
  const double bn = bmo_norm(b);
  s.weak = weak_lq_norm(commutator_apply(*T, b, f), q) / (bn * h1_norm(f));

  // fallback draws are plain inf-atoms, not (b, inf)-atoms; redraw those
  auto draw = [&](const AtomSupport& support) {
    auto a = random_atom(tree, AtomKind::b_atom, support, rng, &b);
    for (int tries = 0; a.fallback && tries < 16; ++tries) a = random_atom(tree, AtomKind::b_atom, support, rng, &b);
    return a;
  };
  std::vector<double> sum(tree->leaves(), 0.0);
  std::uniform_real_distribution<double> coef(0.2, 1.0);
  for (std::size_t k = 0; k < atoms; ++k) {
    auto support = random_atom_support(*tree, rng);
    if (k == 0) support.cells = {detail::worst_cell(b, support.level, support.level)};
    auto a = draw(support);
    if (a.fallback) continue;
    if (k == 0) {
      s.atom_h1b = h1b_norm(b, a.a) / bn;
      for (int extra = 0; extra < 4; ++extra) {
        auto alt = draw(support);
        if (!alt.fallback) s.atom_h1b = std::max(s.atom_h1b, h1b_norm(b, alt.a) / bn);
      }
    }
    const double lam = coef(rng) * (rng() % 2 ? 1.0 : -1.0);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += lam * a.a[j];
  }
  StepFunction fs(tree, std::move(sum));
  const double denom = h1b_norm(b, fs);
  s.strong = denom > 0.0 ? lp_norm(commutator_apply(*T, b, fs), q) / denom : 0.0;
  return s;
}

struct EndpointReport {
  std::string op;
  double q{1.0};
  ConstantEstimate weak, strong, atom_h1b;
  std::vector<VerificationRecord> records;
};

inline EndpointReport endpoint_report(const std::string& op, double q, const CertifyConfig& cfg) {
  EndpointReport rep;
  rep.op = op;
  rep.q = q;
  for (std::size_t depth : cfg.depths)
    for (std::size_t i = 0; i < cfg.samples; ++i) {
      const auto seed = sample_seed(cfg.seed, "endpoint:" + op, depth, i);
      const auto t0 = std::chrono::steady_clock::now();
      auto s = endpoint_sample(op, q, depth, seed, cfg.alpha);
      const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      rep.weak.observe(s.weak, seed, depth);
      rep.strong.observe(s.strong, seed, depth);
      rep.atom_h1b.observe(s.atom_h1b, seed, depth);
      for (auto [check, val] : {std::pair{"weak", s.weak}, {"strong", s.strong}, {"atom-h1b", s.atom_h1b}}) {
        auto r = make_record("endpoint-" + op, "commutator endpoint bounds", check, val, 1.0, std::nullopt, 0.0,
                             seed, depth);
        r.ms = ms;
        rep.records.push_back(std::move(r));
      }
    }
  return rep;
}

// Endpoint ratios for a caller-supplied b and inputs on T's tree.
inline std::vector<VerificationRecord> endpoint_report(const SublinearOp& T, const StepFunction& b,
                                                       const std::vector<StepFunction>& weak_inputs,
                                                       const std::vector<StepFunction>& strong_inputs) {
  if (is_constant(b)) throw std::invalid_argument("endpoint: b must be non-constant");
  std::vector<VerificationRecord> out;
  for (auto& f : weak_inputs)
    out.push_back(make_record("endpoint-" + T.name(), "commutator endpoint bounds", "weak",
                              weak_lq_norm(commutator_apply(T, b, f), T.q()), h1_norm(f), std::nullopt, 0.0, 0,
                              T.tree()->depth()));
  for (auto& f : strong_inputs)
    out.push_back(make_record("endpoint-" + T.name(), "commutator endpoint bounds", "strong",
                              lp_norm(commutator_apply(T, b, f), T.q()), h1b_norm(b, f), std::nullopt, 0.0, 0,
                              T.tree()->depth()));
  return out;
}

}  // namespace martkit
