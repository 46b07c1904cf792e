#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "filtration.hpp"

namespace martkit {

// Real function constant on the leaves of a tree.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(TreePtr tree, std::vector<double> values) : tree_(std::move(tree)), values_(std::move(values)) {
    if (!tree_) throw std::invalid_argument("step function: null tree");
    if (values_.size() != tree_->leaves()) throw std::invalid_argument("step function: value count != leaf count");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::invalid_argument("step function: non-finite value");
  }

  static StepFunction constant(TreePtr tree, double c) {
    const auto n = tree->leaves();
    return StepFunction(std::move(tree), std::vector<double>(n, c));
  }
  static StepFunction zero(TreePtr tree) { return constant(std::move(tree), 0.0); }

  const TreePtr& tree() const { return tree_; }
  const FiltrationTree& filtration() const { return *tree_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t leaf) const { return values_[leaf]; }
  std::span<const double> values() const& { return values_; }
  std::vector<double> values() && { return std::move(values_); }
  std::vector<double>& mutable_values() { return values_; }

  double integral() const {
    auto m = tree_->leaf_masses();
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += m[i] * values_[i];
    return s;
  }

  // Pointwise map; the result lives on the same tree.
  template <class F>
  StepFunction map(F&& fn) const {
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(values_[i]);
    return StepFunction(tree_, std::move(out));
  }

  template <class F>
  StepFunction zip(const StepFunction& other, F&& fn) const {
    require_same_tree(other);
    std::vector<double> out(values_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = fn(values_[i], other.values_[i]);
    return StepFunction(tree_, std::move(out));
  }

  void require_same_tree(const StepFunction& other) const {
    if (!same_tree(tree_, other.tree_)) throw std::invalid_argument("step functions live on different trees");
  }

  friend StepFunction operator+(const StepFunction& a, const StepFunction& b) { return a.zip(b, std::plus<>{}); }
  friend StepFunction operator-(const StepFunction& a, const StepFunction& b) { return a.zip(b, std::minus<>{}); }
  friend StepFunction operator*(const StepFunction& a, const StepFunction& b) { return a.zip(b, std::multiplies<>{}); }
  friend StepFunction operator*(double c, const StepFunction& a) {
    return a.map([c](double v) { return c * v; });
  }
  friend StepFunction operator-(const StepFunction& a) {
    return a.map([](double v) { return -v; });
  }
  StepFunction abs() const {
    return map([](double v) { return std::abs(v); });
  }

  friend bool operator==(const StepFunction& a, const StepFunction& b) {
    return same_tree(a.tree_, b.tree_) && a.values_ == b.values_;
  }

 private:
  TreePtr tree_;
  std::vector<double> values_;
};

// Averages of the leaf values over the level-n cells (zero-mass cells get 0).
inline std::vector<double> cell_averages(const FiltrationTree& tree, std::span<const double> leaf_values,
                                         std::size_t level) {
  if (level > tree.depth()) throw std::out_of_range("level out of range");
  if (leaf_values.size() != tree.leaves()) throw std::invalid_argument("value count != leaf count");
  const std::size_t w = tree.leaves_per_cell(level);
  auto lm = tree.leaf_masses();
  std::vector<double> out(tree.cells(level), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = c * w; j < (c + 1) * w; ++j) {
      num += lm[j] * leaf_values[j];
      den += lm[j];
    }
    out[c] = den > 0.0 ? num / den : 0.0;
  }
  return out;
}

// One averaging step: values on level n+1 cells -> values on level n cells.
inline std::vector<double> coarsen(const FiltrationTree& tree, std::span<const double> fine, std::size_t level) {
  const std::size_t b = tree.children_per_cell(level);
  auto fm = tree.masses(level + 1);
  std::vector<double> out(tree.cells(level), 0.0);
  for (std::size_t c = 0; c < out.size(); ++c) {
    double num = 0.0, den = 0.0;
    for (std::size_t j = c * b; j < (c + 1) * b; ++j) {
      num += fm[j] * fine[j];
      den += fm[j];
    }
    out[c] = den > 0.0 ? num / den : 0.0;
  }
  return out;
}

// Broadcast level-n cell values to the leaves.
inline std::vector<double> expand_to_leaves(const FiltrationTree& tree, std::span<const double> coarse,
                                            std::size_t level) {
  if (coarse.size() != tree.cells(level)) throw std::invalid_argument("coarse vector has wrong size");
  const std::size_t w = tree.leaves_per_cell(level);
  std::vector<double> out(tree.leaves());
  for (std::size_t c = 0; c < coarse.size(); ++c) std::fill_n(out.begin() + c * w, w, coarse[c]);
  return out;
}

// Broadcast level-n cell values to level-m cells, m >= n.
inline std::vector<double> refine(const FiltrationTree& tree, std::span<const double> coarse, std::size_t from,
                                  std::size_t to) {
  const std::size_t ratio = tree.cells(to) / tree.cells(from);
  std::vector<double> out(tree.cells(to));
  for (std::size_t c = 0; c < coarse.size(); ++c) std::fill_n(out.begin() + c * ratio, ratio, coarse[c]);
  return out;
}

inline StepFunction conditional_expectation(const StepFunction& f, std::size_t level) {
  const auto& tree = f.filtration();
  if (level > tree.depth()) throw std::out_of_range("conditional expectation: level out of range");
  return StepFunction(f.tree(), expand_to_leaves(tree, cell_averages(tree, f.values(), level), level));
}

inline StepFunction conditional_expectation(const FiltrationTree& tree, const StepFunction& f, std::size_t level) {
  if (f.filtration().leaves() != tree.leaves() || !(f.filtration() == tree))
    throw std::invalid_argument("conditional expectation: function lives on another tree");
  return conditional_expectation(f, level);
}

// Indicator of the leaves below a cell.
inline StepFunction indicator(const TreePtr& tree, CellRef c) {
  auto [lo, hi] = tree->leaf_range(c);
  std::vector<double> v(tree->leaves(), 0.0);
  std::fill(v.begin() + lo, v.begin() + hi, 1.0);
  return StepFunction(tree, std::move(v));
}

// Is f constant on level-n cells (exactly)?
inline bool is_measurable(const StepFunction& f, std::size_t level) {
  const std::size_t w = f.filtration().leaves_per_cell(level);
  auto v = f.values();
  for (std::size_t j = 0; j < v.size(); ++j)
    if (v[j] != v[j - j % w]) return false;
  return true;
}

}  // namespace martkit
