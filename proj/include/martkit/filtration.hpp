#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "rational.hpp"

namespace martkit {

enum class MeasureKind { uniform, nondoubling, explicit_masses };

inline const char* to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::uniform: return "uniform";
    case MeasureKind::nondoubling: return "nondoubling";
    case MeasureKind::explicit_masses: return "explicit";
  }
  return "?";
}

struct CellRef {
  std::size_t level{0};
  std::size_t index{0};
  friend bool operator==(const CellRef&, const CellRef&) = default;
  friend auto operator<=>(const CellRef&, const CellRef&) = default;
};

// Trees deeper than this are rejected unless the caller raises the limit.
inline constexpr std::size_t kDefaultMaxLeaves = std::size_t{1} << 14;

// Finite filtration on [0,1). Level n is generated by P_n = b_0 * ... * b_{n-1}
// equal-length intervals; every level-n cell splits into branching()[n]
// children. Leaves are the level-depth() cells and carry the measure.
//
// Cells are addressed by (level, index). Because branching is constant per
// level, the leaves below cell (n, i) are the contiguous range
// [i * L_n, (i + 1) * L_n) with L_n = leaves_per_cell(n).
class FiltrationTree {
 public:
  FiltrationTree(std::vector<std::size_t> branching, std::vector<double> leaf_masses,
                 MeasureKind kind = MeasureKind::explicit_masses,
                 std::size_t max_leaves = kDefaultMaxLeaves)
      : branching_(std::move(branching)), kind_(kind) {
    if (branching_.empty()) throw std::invalid_argument("filtration: empty branching sequence");
    cells_.assign(branching_.size() + 1, 1);
    for (std::size_t n = 0; n < branching_.size(); ++n) {
      if (branching_[n] < 2) throw std::invalid_argument("filtration: branching factor < 2");
      if (cells_[n] > max_leaves / branching_[n])
        throw std::invalid_argument("filtration: leaf count exceeds configured maximum");
      cells_[n + 1] = cells_[n] * branching_[n];
    }
    const std::size_t n_leaves = cells_.back();
    if (leaf_masses.size() != n_leaves)
      throw std::invalid_argument("filtration: leaf mass count does not match leaf count");

    double total = 0.0;
    for (double m : leaf_masses) {
      if (!std::isfinite(m)) throw std::invalid_argument("filtration: non-finite mass");
      if (m < 0.0) throw std::invalid_argument("filtration: negative mass");
      total += m;
    }
    if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("filtration: masses do not sum to 1");

    span_.resize(cells_.size());
    for (std::size_t n = 0; n < cells_.size(); ++n) span_[n] = n_leaves / cells_[n];

    masses_.resize(cells_.size());
    masses_.back() = std::move(leaf_masses);
    for (std::size_t n = depth(); n-- > 0;) {
      auto& coarse = masses_[n];
      const auto& fine = masses_[n + 1];
      coarse.assign(cells_[n], 0.0);
      const std::size_t b = branching_[n];
      for (std::size_t c = 0; c < cells_[n]; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < b; ++j) s += fine[c * b + j];
        coarse[c] = s;
      }
    }
    if (kind_ == MeasureKind::uniform) {
      for (std::size_t n = 0; n < cells_.size(); ++n)
        std::fill(masses_[n].begin(), masses_[n].end(), 1.0 / static_cast<double>(cells_[n]));
    }
  }

  std::size_t depth() const { return branching_.size(); }
  const std::vector<std::size_t>& branching() const { return branching_; }
  MeasureKind measure_kind() const { return kind_; }

  std::size_t cells(std::size_t level) const { return cells_.at(level); }
  std::size_t leaves() const { return cells_.back(); }
  std::size_t leaves_per_cell(std::size_t level) const { return span_.at(level); }

  // Number of children of a level-n cell, n < depth().
  std::size_t children_per_cell(std::size_t level) const { return branching_.at(level); }

  bool is_binary() const {
    return std::all_of(branching_.begin(), branching_.end(), [](std::size_t b) { return b == 2; });
  }

  double mass(std::size_t level, std::size_t index) const { return masses_[level][index]; }
  double mass(CellRef c) const { return masses_.at(c.level).at(c.index); }
  std::span<const double> masses(std::size_t level) const { return masses_.at(level); }
  std::span<const double> leaf_masses() const { return masses_.back(); }

  bool valid(CellRef c) const { return c.level <= depth() && c.index < cells_[c.level]; }

  std::size_t parent_index(std::size_t level, std::size_t index) const {
    return index / branching_[level - 1];
  }

  CellRef parent(CellRef c) const {
    check(c);
    if (c.level == 0) throw std::out_of_range("filtration: root has no parent");
    return {c.level - 1, parent_index(c.level, c.index)};
  }

  // Children in left-to-right order.
  std::vector<CellRef> children(CellRef c) const {
    check(c);
    std::vector<CellRef> out;
    if (c.level == depth()) return out;
    const std::size_t b = branching_[c.level];
    out.reserve(b);
    for (std::size_t j = 0; j < b; ++j) out.push_back({c.level + 1, c.index * b + j});
    return out;
  }

  std::size_t cell_of_leaf(std::size_t level, std::size_t leaf) const { return leaf / span_[level]; }

  std::pair<std::size_t, std::size_t> leaf_range(CellRef c) const {
    check(c);
    const std::size_t w = span_[c.level];
    return {c.index * w, (c.index + 1) * w};
  }

  std::pair<Rational, Rational> interval(CellRef c) const {
    check(c);
    const auto den = static_cast<std::int64_t>(cells_[c.level]);
    const auto i = static_cast<std::int64_t>(c.index);
    return {Rational(i, den), Rational(i + 1, den)};
  }

  // Exact cell mass when the measure is uniform.
  std::optional<Rational> exact_mass(CellRef c) const {
    check(c);
    if (kind_ != MeasureKind::uniform) return std::nullopt;
    return Rational(1, static_cast<std::int64_t>(cells_[c.level]));
  }

  // Stable identifier derived from structure and leaf-mass bit patterns.
  std::string id() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    auto mix = [&h](std::uint64_t v) {
      for (int i = 0; i < 8; ++i) {
        h ^= (v >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
      }
    };
    mix(branching_.size());
    for (auto b : branching_) mix(b);
    for (double m : masses_.back()) mix(std::bit_cast<std::uint64_t>(m));
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }

  friend bool operator==(const FiltrationTree& a, const FiltrationTree& b) {
    return a.branching_ == b.branching_ && a.masses_.back() == b.masses_.back();
  }

 private:
  void check(CellRef c) const {
    if (!valid(c)) throw std::out_of_range("filtration: invalid cell reference");
  }

  std::vector<std::size_t> branching_;
  std::vector<std::size_t> cells_;
  std::vector<std::size_t> span_;
  std::vector<std::vector<double>> masses_;
  MeasureKind kind_;
};

using TreePtr = std::shared_ptr<const FiltrationTree>;

inline bool same_tree(const TreePtr& a, const TreePtr& b) {
  return a == b || (a && b && *a == *b);
}

struct UniformMeasure {};
using LeafMasses = std::vector<double>;
using MeasureSpec = std::variant<UniformMeasure, LeafMasses>;

// Filtration whose level-n cells are [k/P_n, (k+1)/P_n) with P_n the product of
// the first n branching factors.
inline TreePtr build_pk_filtration(std::vector<std::size_t> p_seq, const MeasureSpec& measure = UniformMeasure{},
                                   std::size_t max_leaves = kDefaultMaxLeaves) {
  if (p_seq.empty()) throw std::invalid_argument("filtration: empty branching sequence");
  if (std::holds_alternative<UniformMeasure>(measure)) {
    std::size_t n = 1;
    for (auto p : p_seq) {
      if (p < 2) throw std::invalid_argument("filtration: branching factor < 2");
      if (n > max_leaves / p) throw std::invalid_argument("filtration: leaf count exceeds configured maximum");
      n *= p;
    }
    return std::make_shared<const FiltrationTree>(std::move(p_seq),
                                                  std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                                  MeasureKind::uniform, max_leaves);
  }
  return std::make_shared<const FiltrationTree>(std::move(p_seq), std::get<LeafMasses>(measure),
                                                MeasureKind::explicit_masses, max_leaves);
}

inline TreePtr build_uniform_dyadic(std::size_t depth, std::size_t max_leaves = kDefaultMaxLeaves) {
  if (depth == 0) throw std::invalid_argument("filtration: depth must be >= 1");
  return build_pk_filtration(std::vector<std::size_t>(depth, 2), UniformMeasure{}, max_leaves);
}

// Binary tree carrying the non-doubling measure: the chain I_k = [0, 2^-k)
// keeps the fraction 1 - 2^{-k^2} of its parent (1/2 at k = 1), the brother
// I_k^b takes the rest and spreads it proportionally to length.
inline double nondoubling_beta(std::size_t k) {
  return k == 1 ? 0.5 : std::ldexp(1.0, -static_cast<int>(k * k));
}
inline double nondoubling_alpha(std::size_t k) { return 1.0 - nondoubling_beta(k); }

inline TreePtr build_nondoubling_measure(std::size_t depth, std::size_t max_leaves = kDefaultMaxLeaves) {
  if (depth == 0) throw std::invalid_argument("filtration: depth must be >= 1");
  if (depth >= 63 || (std::size_t{1} << depth) > max_leaves)
    throw std::invalid_argument("filtration: leaf count exceeds configured maximum");
  const std::size_t n_leaves = std::size_t{1} << depth;
  std::vector<double> leaf(n_leaves, 0.0);
  double chain = 1.0;  // mu(I_{k-1})
  for (std::size_t k = 1; k <= depth; ++k) {
    const double a = nondoubling_alpha(k);
    const double brother = nondoubling_beta(k) * chain;
    const std::size_t lo = std::size_t{1} << (depth - k);
    const std::size_t hi = lo << 1;
    const double per_leaf = brother / static_cast<double>(lo);
    for (std::size_t j = lo; j < hi; ++j) leaf[j] = per_leaf;
    chain *= a;
  }
  leaf[0] = chain;
  // rounding can leave the total a few ulps off 1; absorb it in the largest leaf
  double total = 0.0;
  for (double m : leaf) total += m;
  auto it = std::max_element(leaf.begin(), leaf.end());
  *it += 1.0 - total;
  return std::make_shared<const FiltrationTree>(std::vector<std::size_t>(depth, 2), std::move(leaf),
                                                MeasureKind::nondoubling, max_leaves);
}

// Least C with mu(parent) <= C mu(child) over all non-root cells.
inline double regularity_constant(const FiltrationTree& tree) {
  double worst = 1.0;
  for (std::size_t n = 1; n <= tree.depth(); ++n) {
    auto m = tree.masses(n);
    for (std::size_t c = 0; c < m.size(); ++c) {
      if (m[c] <= 0.0) throw std::domain_error("regularity constant undefined: zero-mass cell");
      worst = std::max(worst, tree.mass(n - 1, tree.parent_index(n, c)) / m[c]);
    }
  }
  return worst;
}

// m(I) = mu(I-) mu(I+) / mu(I) for an internal cell of a binary tree.
inline double harmonic_mass(const FiltrationTree& tree, CellRef c) {
  const double total = tree.mass(c);
  if (total <= 0.0) return 0.0;
  return tree.mass(c.level + 1, 2 * c.index) * tree.mass(c.level + 1, 2 * c.index + 1) / total;
}

namespace detail {

template <class Ratio>
double scan_harmonic_ratios(const FiltrationTree& tree, Ratio ratio) {
  if (!tree.is_binary()) throw std::invalid_argument("m-monotonicity requires a binary tree");
  double worst = 0.0;
  for (std::size_t n = 1; n + 1 <= tree.depth(); ++n) {
    for (std::size_t c = 0; c < tree.cells(n); ++c) {
      const CellRef cell{n, c};
      const CellRef par = tree.parent(cell);
      if (tree.mass(par) <= 0.0) throw std::domain_error("m-monotonicity: zero-mass parent");
      worst = std::max(worst, ratio(harmonic_mass(tree, cell), harmonic_mass(tree, par)));
    }
  }
  return worst;
}

}  // namespace detail

// Least C with m(I) <= C m(parent of I) over internal non-root cells.
inline double m_increasing_constant(const FiltrationTree& tree) {
  return detail::scan_harmonic_ratios(tree, [](double child, double parent) {
    if (parent <= 0.0) {
      if (child <= 0.0) return 0.0;
      throw std::domain_error("m-monotonicity: zero harmonic mass at parent");
    }
    return child / parent;
  });
}

// Least C with m(parent of I) <= C m(I).
inline double m_decreasing_constant(const FiltrationTree& tree) {
  return detail::scan_harmonic_ratios(tree, [](double child, double parent) {
    if (child <= 0.0) {
      if (parent <= 0.0) return 0.0;
      throw std::domain_error("m-monotonicity: zero harmonic mass at child");
    }
    return parent / child;
  });
}

}  // namespace martkit
