#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "decomp.hpp"

namespace martkit {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Seed for one sample, stable across runs and worker counts.
inline std::uint64_t sample_seed(std::uint64_t base, std::string_view stream, std::uint64_t depth, std::uint64_t i) {
  std::uint64_t h = splitmix64(base);
  for (char c : stream) h = splitmix64(h ^ static_cast<unsigned char>(c));
  h = splitmix64(h ^ depth);
  return splitmix64(h ^ i);
}

// Binary tree whose children split their parent's mass with ratio in [0.2, 0.8].
inline TreePtr random_binary_tree(std::size_t depth, Rng& rng, std::size_t max_leaves = kDefaultMaxLeaves) {
  if (depth == 0 || depth >= 63 || (std::size_t{1} << depth) > max_leaves)
    throw std::invalid_argument("random tree: bad depth");
  std::uniform_real_distribution<double> split(0.2, 0.8);
  std::vector<double> mass{1.0};
  for (std::size_t n = 0; n < depth; ++n) {
    std::vector<double> next(mass.size() * 2);
    for (std::size_t c = 0; c < mass.size(); ++c) {
      const double r = split(rng);
      next[2 * c] = mass[c] * r;
      next[2 * c + 1] = mass[c] * (1.0 - r);
    }
    mass = std::move(next);
  }
  double total = 0.0;
  for (double m : mass) total += m;
  for (double& m : mass) m /= total;
  return std::make_shared<const FiltrationTree>(std::vector<std::size_t>(depth, 2), std::move(mass),
                                                MeasureKind::explicit_masses, max_leaves);
}

enum class SampleProfile { normal, heavy, multilevel };

// F_n-measurable values with zero mean on every level-(n-1) cell, supported on
// the listed parent cells (all when empty); normalized to sup 1.
inline std::vector<double> random_jump_values(const FiltrationTree& tree, std::size_t level, Rng& rng,
                                              const std::vector<std::size_t>& parents = {}) {
  std::normal_distribution<double> nd;
  std::vector<double> coarse(tree.cells(level), 0.0);
  if (level == 0) {
    coarse[0] = std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0;
    return coarse;
  }
  const std::size_t b = tree.children_per_cell(level - 1);
  auto m = tree.masses(level);
  auto fill = [&](std::size_t p) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = p * b; j < (p + 1) * b; ++j) {
      coarse[j] = nd(rng);
      num += m[j] * coarse[j];
      den += m[j];
    }
    if (den > 0.0)
      for (std::size_t j = p * b; j < (p + 1) * b; ++j) coarse[j] -= num / den;
  };
  if (parents.empty())
    for (std::size_t p = 0; p < tree.cells(level - 1); ++p) fill(p);
  else
    for (auto p : parents) fill(p);
  double top = 0.0;
  for (double v : coarse) top = std::max(top, std::abs(v));
  if (top > 0.0)
    for (double& v : coarse) v /= top;
  return coarse;
}

inline StepFunction random_terminal(const TreePtr& tree, Rng& rng, SampleProfile profile = SampleProfile::normal) {
  std::vector<double> v(tree->leaves());
  switch (profile) {
    case SampleProfile::normal: {
      std::normal_distribution<double> nd;
      for (double& x : v) x = nd(rng);
      break;
    }
    case SampleProfile::heavy: {
      std::normal_distribution<double> nd;
      std::student_t_distribution<double> td(1.5);
      std::bernoulli_distribution coin(0.5);
      for (double& x : v) x = coin(rng) ? nd(rng) : td(rng);
      break;
    }
    case SampleProfile::multilevel: {
      std::normal_distribution<double> scale;
      std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t n = 1; n <= tree->depth(); ++n) {
        const double c = std::exp(scale(rng));
        auto jump = expand_to_leaves(*tree, random_jump_values(*tree, n, rng), n);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += c * jump[j];
      }
      break;
    }
  }
  return StepFunction(tree, std::move(v));
}

// Random martingale; with zero_start the level-0 value is removed.
inline Martingale random_martingale(const TreePtr& tree, Rng& rng, SampleProfile profile = SampleProfile::normal,
                                    bool zero_start = false) {
  auto f = random_terminal(tree, rng, profile);
  if (zero_start) {
    const double mean = f.integral();
    f = f.map([mean](double x) { return x - mean; });
  }
  return Martingale::from_terminal(f);
}

enum class BmoProfile { haar_mix, log_spike, bounded_random };

inline const char* to_string(BmoProfile p) {
  switch (p) {
    case BmoProfile::haar_mix: return "haar-mix";
    case BmoProfile::log_spike: return "log-spike";
    case BmoProfile::bounded_random: return "bounded-random";
  }
  return "?";
}

inline BmoProfile bmo_profile_from_string(const std::string& s) {
  if (s == "haar-mix") return BmoProfile::haar_mix;
  if (s == "log-spike") return BmoProfile::log_spike;
  if (s == "bounded-random") return BmoProfile::bounded_random;
  throw std::invalid_argument("unknown BMO profile: " + s);
}

// Function with BMO_2 norm in [0.5, 2].
inline StepFunction generate_bmo(const TreePtr& tree, BmoProfile profile, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> v(tree->leaves(), 0.0);
  bool rescale_always = true;
  switch (profile) {
    case BmoProfile::haar_mix: {
      std::normal_distribution<double> nd;
      std::bernoulli_distribution keep(0.7);
      for (std::size_t n = 1; n <= tree->depth(); ++n) {
        if (!keep(rng)) continue;
        const double c = nd(rng);
        auto jump = expand_to_leaves(*tree, random_jump_values(*tree, n, rng), n);
        for (std::size_t j = 0; j < v.size(); ++j) v[j] += c * jump[j];
      }
      break;
    }
    case BmoProfile::log_spike: {
      std::uniform_int_distribution<std::size_t> pick(0, tree->leaves() - 1);
      const std::size_t leaf = pick(rng);
      for (std::size_t n = 1; n <= tree->depth(); ++n) {
        auto [lo, hi] = tree->leaf_range({n, tree->cell_of_leaf(n, leaf)});
        for (std::size_t j = lo; j < hi; ++j) v[j] += 1.0;
      }
      break;
    }
    case BmoProfile::bounded_random: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      for (double& x : v) x = u(rng);
      rescale_always = false;
      break;
    }
  }
  StepFunction b(tree, std::move(v));
  double norm = bmo_norm(b);
  if (norm == 0.0) {
    // degenerate draw: fall back to the first Haar-type jump
    auto jump = expand_to_leaves(*tree, random_jump_values(*tree, 1, rng), 1);
    b = StepFunction(tree, std::move(jump));
    norm = bmo_norm(b);
  }
  if (rescale_always || norm < 0.5 || norm > 2.0) {
    const double target = std::uniform_real_distribution<double>(0.5, 2.0)(rng);
    b = (target / norm) * b;
  }
  return b;
}

inline BmoProfile random_bmo_profile(Rng& rng) {
  return static_cast<BmoProfile>(std::uniform_int_distribution<int>(0, 2)(rng));
}

struct AtomSupport {
  std::size_t level{0};
  std::vector<std::size_t> cells;
};

// Level in [0, depth - 2] (depth >= 2), one cell or a random union of cells.
inline AtomSupport random_atom_support(const FiltrationTree& tree, Rng& rng) {
  const std::size_t top = tree.depth() >= 2 ? tree.depth() - 2 : 0;
  AtomSupport s;
  s.level = std::uniform_int_distribution<std::size_t>(0, top)(rng);
  const std::size_t nc = tree.cells(s.level);
  if (nc == 1 || std::bernoulli_distribution(0.6)(rng)) {
    s.cells.push_back(std::uniform_int_distribution<std::size_t>(0, nc - 1)(rng));
  } else {
    std::bernoulli_distribution take(0.5);
    for (std::size_t c = 0; c < nc; ++c)
      if (take(rng)) s.cells.push_back(c);
    if (s.cells.empty()) s.cells.push_back(std::uniform_int_distribution<std::size_t>(0, nc - 1)(rng));
  }
  return s;
}

// Random atom of the requested kind on A = union of the given level-n cells.
// A b-atom whose orthogonality constraint kills every degree of freedom is
// returned as a simple inf-atom with fallback set.
inline AtomCertificate random_atom(const TreePtr& tree, AtomKind kind, const AtomSupport& support, Rng& rng,
                                   const StepFunction* b = nullptr) {
  const auto& t = *tree;
  const std::size_t n = support.level;
  if (kind == AtomKind::jump) throw std::invalid_argument("random_atom: use random_jump for jumps");
  if (n >= t.depth()) throw std::invalid_argument("random_atom: level must be below the leaves");
  if (kind == AtomKind::b_atom && !b) throw std::invalid_argument("random_atom: b-atom needs b");
  std::normal_distribution<double> nd;
  std::bernoulli_distribution keep(0.7);
  const std::size_t nl = t.leaves();
  std::vector<double> v(nl, 0.0);
  std::vector<std::size_t> parents;
  bool any = false;
  for (std::size_t m = n + 1; m <= t.depth(); ++m) {
    if (!keep(rng) && !(m == t.depth() && !any)) continue;
    any = true;
    const double c = std::exp(nd(rng));
    auto jump = expand_to_leaves(t, random_jump_values(t, m, rng), m);
    for (std::size_t j = 0; j < nl; ++j) v[j] += c * jump[j];
  }
  std::vector<char> in(nl, 0);
  const std::size_t w = t.leaves_per_cell(n);
  for (auto c : support.cells) std::fill_n(in.begin() + c * w, w, 1);
  for (std::size_t j = 0; j < nl; ++j)
    if (!in[j]) v[j] = 0.0;

  auto lm = t.leaf_masses();
  auto project = [&](std::vector<double>& x, const std::vector<double>& u, std::size_t c) {
    double xu = 0.0, uu = 0.0;
    for (std::size_t j = c * w; j < (c + 1) * w; ++j) {
      xu += lm[j] * x[j] * u[j];
      uu += lm[j] * u[j] * u[j];
    }
    if (uu > 0.0)
      for (std::size_t j = c * w; j < (c + 1) * w; ++j) x[j] -= xu / uu * u[j];
  };
  const std::vector<double> ones(nl, 1.0);
  double before = 0.0;
  for (double x : v) before = std::max(before, std::abs(x));
  for (auto c : support.cells) project(v, ones, c);
  AtomKind out_kind = kind;
  bool fallback = false;
  if (kind == AtomKind::b_atom) {
    auto saved = v;
    std::vector<double> u(nl, 0.0);
    for (auto c : support.cells) {
      double num = 0.0, den = 0.0;
      for (std::size_t j = c * w; j < (c + 1) * w; ++j) {
        num += lm[j] * (*b)[j];
        den += lm[j];
      }
      for (std::size_t j = c * w; j < (c + 1) * w; ++j) u[j] = (*b)[j] - num / den;
      project(v, u, c);
      // keep the mean exactly zero after the second projection
      project(v, ones, c);
    }
    double after = 0.0;
    for (double x : v) after = std::max(after, std::abs(x));
    if (after <= 1e-9 * std::max(before, 1e-300)) {
      v = std::move(saved);
      out_kind = AtomKind::simple_inf;
      fallback = true;
    }
  }
  StepFunction a(tree, std::move(v));
  double mass_a = 0.0;
  for (auto c : support.cells) mass_a += t.mass(n, c);
  const double current =
      out_kind == AtomKind::simple_s_inf ? sup_norm(cond_square_function(a)) : sup_norm(a);
  if (current == 0.0) throw std::runtime_error("random_atom: degenerate draw");
  const double scale = 1.0 / (mass_a * current);
  a = scale * a;
  AtomCertificate cert{out_kind, n, support.cells, std::move(a), 1.0, {}, fallback};
  if (kind == AtomKind::b_atom) {
    cert.b = *b;
    if (fallback) cert.kind = AtomKind::simple_inf;
  }
  return cert;
}

// Martingale jump at the given level; parents lists the level-(n-1) cells
// carrying it (all when empty).
inline AtomCertificate random_jump(const TreePtr& tree, std::size_t level, Rng& rng,
                                   const std::vector<std::size_t>& parents = {}) {
  if (level > tree->depth()) throw std::out_of_range("random_jump: level out of range");
  auto coarse = random_jump_values(*tree, level, rng, parents);
  return {AtomKind::jump, level, parents, StepFunction(tree, expand_to_leaves(*tree, coarse, level)), 1.0, {}, false};
}

}  // namespace martkit
