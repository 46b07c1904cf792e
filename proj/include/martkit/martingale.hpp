#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "step_function.hpp"

namespace martkit {

// Sequence (h_0, ..., h_N) with h_n constant on level-n cells. Stored coarse:
// level n keeps one value per level-n cell.
class AdaptedSequence {
 public:
  AdaptedSequence() = default;
  AdaptedSequence(TreePtr tree, std::vector<std::vector<double>> levels)
      : tree_(std::move(tree)), levels_(std::move(levels)) {
    if (!tree_) throw std::invalid_argument("adapted sequence: null tree");
    if (levels_.size() != tree_->depth() + 1) throw std::invalid_argument("adapted sequence: wrong level count");
    for (std::size_t n = 0; n < levels_.size(); ++n) {
      if (levels_[n].size() != tree_->cells(n)) throw std::invalid_argument("adapted sequence: wrong cell count");
      for (double v : levels_[n])
        if (!std::isfinite(v)) throw std::invalid_argument("adapted sequence: non-finite value");
    }
  }

  static AdaptedSequence zero(TreePtr tree) {
    std::vector<std::vector<double>> lv(tree->depth() + 1);
    for (std::size_t n = 0; n < lv.size(); ++n) lv[n].assign(tree->cells(n), 0.0);
    return AdaptedSequence(std::move(tree), std::move(lv));
  }

  const TreePtr& tree() const { return tree_; }
  const FiltrationTree& filtration() const { return *tree_; }
  std::size_t depth() const { return tree_->depth(); }

  std::span<const double> level(std::size_t n) const { return levels_.at(n); }
  const std::vector<std::vector<double>>& levels() const { return levels_; }

  double at(std::size_t n, std::size_t leaf) const { return levels_[n][leaf / tree_->leaves_per_cell(n)]; }

  StepFunction level_function(std::size_t n) const {
    return StepFunction(tree_, expand_to_leaves(*tree_, levels_.at(n), n));
  }
  StepFunction terminal() const { return level_function(depth()); }

  // h_n - h_{n-1} on level-n cells, with h_{-1} = 0.
  std::vector<double> difference(std::size_t n) const {
    std::vector<double> d = levels_.at(n);
    if (n == 0) return d;
    const auto& prev = levels_[n - 1];
    const std::size_t b = tree_->children_per_cell(n - 1);
    for (std::size_t c = 0; c < d.size(); ++c) d[c] -= prev[c / b];
    return d;
  }

  StepFunction difference_function(std::size_t n) const {
    return StepFunction(tree_, expand_to_leaves(*tree_, difference(n), n));
  }

  friend bool operator==(const AdaptedSequence& a, const AdaptedSequence& b) {
    return same_tree(a.tree_, b.tree_) && a.levels_ == b.levels_;
  }

 protected:
  TreePtr tree_;
  std::vector<std::vector<double>> levels_;
};

namespace detail {

inline std::vector<std::vector<double>> partial_sums(const FiltrationTree& tree,
                                                     const std::vector<std::vector<double>>& diffs) {
  if (diffs.size() != tree.depth() + 1) throw std::invalid_argument("differences: wrong level count");
  std::vector<std::vector<double>> lv(diffs.size());
  for (std::size_t n = 0; n < diffs.size(); ++n) {
    if (diffs[n].size() != tree.cells(n)) throw std::invalid_argument("differences: wrong cell count");
    lv[n] = diffs[n];
    if (n == 0) continue;
    const std::size_t b = tree.children_per_cell(n - 1);
    for (std::size_t c = 0; c < lv[n].size(); ++c) lv[n][c] += lv[n - 1][c / b];
  }
  return lv;
}

}  // namespace detail

class Martingale : public AdaptedSequence {
 public:
  Martingale() = default;

  // Levels are checked for E_n f_{n+1} = f_n unless check is false.
  Martingale(TreePtr tree, std::vector<std::vector<double>> levels, bool check = true)
      : AdaptedSequence(std::move(tree), std::move(levels)) {
    if (check) validate(1e-12);
  }

  static Martingale from_terminal(const StepFunction& f) {
    const auto& tree = f.filtration();
    std::vector<std::vector<double>> lv(tree.depth() + 1);
    lv.back().assign(f.values().begin(), f.values().end());
    for (std::size_t n = tree.depth(); n-- > 0;) lv[n] = coarsen(tree, lv[n + 1], n);
    return Martingale(f.tree(), std::move(lv), false);
  }

  static Martingale from_levels(TreePtr tree, std::vector<std::vector<double>> levels, bool check = true) {
    return Martingale(std::move(tree), std::move(levels), check);
  }

  // d_0 is a level-0 value; d_n must average to zero over each level-(n-1) cell.
  static Martingale from_differences(TreePtr tree, const std::vector<std::vector<double>>& diffs,
                                     bool check = true) {
    auto lv = detail::partial_sums(*tree, diffs);
    return Martingale(std::move(tree), std::move(lv), check);
  }

  static Martingale zero(TreePtr tree) {
    return Martingale(tree, AdaptedSequence::zero(tree).levels(), false);
  }

  // Largest violation of E_n f_{n+1} = f_n relative to max(1, |f|_inf).
  double martingale_defect() const {
    double scale = 1.0;
    for (auto& l : levels_)
      for (double v : l) scale = std::max(scale, std::abs(v));
    double worst = 0.0;
    for (std::size_t n = 0; n < depth(); ++n) {
      auto avg = coarsen(*tree_, levels_[n + 1], n);
      auto m = tree_->masses(n);
      for (std::size_t c = 0; c < avg.size(); ++c)
        if (m[c] > 0.0) worst = std::max(worst, std::abs(avg[c] - levels_[n][c]));
    }
    return worst / scale;
  }

  friend Martingale operator+(const Martingale& a, const Martingale& b) { return combine(1.0, a, 1.0, b); }
  friend Martingale operator-(const Martingale& a, const Martingale& b) { return combine(1.0, a, -1.0, b); }
  friend Martingale operator*(double c, const Martingale& a) { return combine(c, a, 0.0, a); }

  static Martingale combine(double x, const Martingale& a, double y, const Martingale& b) {
    if (!same_tree(a.tree_, b.tree_)) throw std::invalid_argument("martingales live on different trees");
    auto lv = a.levels_;
    for (std::size_t n = 0; n < lv.size(); ++n)
      for (std::size_t c = 0; c < lv[n].size(); ++c) lv[n][c] = x * lv[n][c] + y * b.levels_[n][c];
    return Martingale(a.tree_, std::move(lv), false);
  }

 private:
  void validate(double tol) const {
    if (martingale_defect() > tol) throw std::invalid_argument("levels do not form a martingale");
  }
};

// Adapted process measured in variation norm.
class BVProcess : public AdaptedSequence {
 public:
  BVProcess() = default;
  BVProcess(TreePtr tree, std::vector<std::vector<double>> levels)
      : AdaptedSequence(std::move(tree), std::move(levels)) {}

  // sum_n ||h_n - h_{n-1}||_1 with h_{-1} = 0.
  double variation_norm() const {
    double total = 0.0;
    for (std::size_t n = 0; n <= depth(); ++n) {
      auto d = difference(n);
      auto m = tree_->masses(n);
      for (std::size_t c = 0; c < d.size(); ++c) total += m[c] * std::abs(d[c]);
    }
    return total;
  }
};

namespace detail {

// Walk the tree top-down carrying an accumulator per cell; returns the leaf
// accumulators. step(n, cell, parent_acc) gives the level-n accumulator.
template <class Step>
std::vector<double> accumulate_down(const FiltrationTree& tree, double root, Step step) {
  std::vector<double> acc{step(0, 0, root)};
  for (std::size_t n = 1; n <= tree.depth(); ++n) {
    const std::size_t b = tree.children_per_cell(n - 1);
    std::vector<double> next(tree.cells(n));
    for (std::size_t c = 0; c < next.size(); ++c) next[c] = step(n, c, acc[c / b]);
    acc = std::move(next);
  }
  return acc;
}

// E_{n-1}|d_n|^2 on level-(n-1) cells, n >= 1.
inline std::vector<double> predictable_variance(const AdaptedSequence& f, std::size_t n) {
  auto d = f.difference(n);
  for (double& v : d) v *= v;
  return coarsen(f.filtration(), d, n - 1);
}

}  // namespace detail

inline StepFunction doob_maximal(const AdaptedSequence& f) {
  auto out = detail::accumulate_down(f.filtration(), 0.0, [&](std::size_t n, std::size_t c, double acc) {
    return std::max(acc, std::abs(f.level(n)[c]));
  });
  return StepFunction(f.tree(), std::move(out));
}

inline StepFunction square_function(const AdaptedSequence& f) {
  std::vector<std::vector<double>> d(f.depth() + 1);
  for (std::size_t n = 0; n <= f.depth(); ++n) d[n] = f.difference(n);
  auto out = detail::accumulate_down(f.filtration(), 0.0, [&](std::size_t n, std::size_t c, double acc) {
    return acc + d[n][c] * d[n][c];
  });
  for (double& v : out) v = std::sqrt(v);
  return StepFunction(f.tree(), std::move(out));
}

inline StepFunction cond_square_function(const AdaptedSequence& f) {
  const auto& tree = f.filtration();
  // var[n] holds E_{n-1}|d_n|^2 indexed by level-n cells' parents
  std::vector<std::vector<double>> var(f.depth() + 1);
  var[0] = f.difference(0);
  for (double& v : var[0]) v *= v;
  for (std::size_t n = 1; n <= f.depth(); ++n) var[n] = detail::predictable_variance(f, n);
  auto out = detail::accumulate_down(tree, 0.0, [&](std::size_t n, std::size_t c, double acc) {
    if (n == 0) return var[0][0];
    return acc + var[n][c / tree.children_per_cell(n - 1)];
  });
  for (double& v : out) v = std::sqrt(v);
  return StepFunction(f.tree(), std::move(out));
}

inline StepFunction doob_maximal(const StepFunction& f) { return doob_maximal(Martingale::from_terminal(f)); }
inline StepFunction square_function(const StepFunction& f) { return square_function(Martingale::from_terminal(f)); }
inline StepFunction cond_square_function(const StepFunction& f) {
  return cond_square_function(Martingale::from_terminal(f));
}

}  // namespace martkit
