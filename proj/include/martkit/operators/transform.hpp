#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "../martingale.hpp"

namespace martkit {

// Predictable multipliers eps_0, ..., eps_{N-1}; eps_k lives on level-k cells
// and multiplies d_{k+1}. |eps_k| <= 1.
class TransformSymbol {
 public:
  TransformSymbol(TreePtr tree, std::vector<std::vector<double>> eps) : tree_(std::move(tree)), eps_(std::move(eps)) {
    if (eps_.size() != tree_->depth()) throw std::invalid_argument("transform symbol: need one multiplier per level");
    for (std::size_t k = 0; k < eps_.size(); ++k) {
      if (eps_[k].size() != tree_->cells(k)) throw std::invalid_argument("transform symbol: multiplier not adapted");
      for (double e : eps_[k])
        if (!(std::abs(e) <= 1.0 + 1e-12)) throw std::invalid_argument("transform symbol: |eps| exceeds 1");
    }
  }

  static TransformSymbol ones(TreePtr tree) {
    std::vector<std::vector<double>> e(tree->depth());
    for (std::size_t k = 0; k < e.size(); ++k) e[k].assign(tree->cells(k), 1.0);
    return TransformSymbol(std::move(tree), std::move(e));
  }

  // Uniform on [-1, 1] or random signs.
  template <class Rng>
  static TransformSymbol random(TreePtr tree, Rng& rng, bool signs_only = false) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> e(tree->depth());
    for (std::size_t k = 0; k < e.size(); ++k) {
      e[k].resize(tree->cells(k));
      for (double& x : e[k]) x = signs_only ? (u(rng) < 0 ? -1.0 : 1.0) : u(rng);
    }
    return TransformSymbol(std::move(tree), std::move(e));
  }

  const TreePtr& tree() const { return tree_; }
  std::span<const double> level(std::size_t k) const { return eps_.at(k); }

 private:
  TreePtr tree_;
  std::vector<std::vector<double>> eps_;
};

// d_k(T f) = eps_{k-1} d_k f, with eps_{-1} = 0.
inline Martingale martingale_transform(const TransformSymbol& eps, const AdaptedSequence& f) {
  if (!same_tree(eps.tree(), f.tree())) throw std::invalid_argument("martingale transform: tree mismatch");
  const auto& tree = f.filtration();
  std::vector<std::vector<double>> d(tree.depth() + 1);
  d[0].assign(1, 0.0);
  for (std::size_t k = 1; k <= tree.depth(); ++k) {
    d[k] = f.difference(k);
    const std::size_t b = tree.children_per_cell(k - 1);
    auto e = eps.level(k - 1);
    for (std::size_t c = 0; c < d[k].size(); ++c) d[k][c] *= e[c / b];
  }
  return Martingale::from_differences(f.tree(), d, false);
}

inline StepFunction martingale_transform(const TransformSymbol& eps, const StepFunction& f) {
  return martingale_transform(eps, Martingale::from_terminal(f)).terminal();
}

inline StepFunction maximal_transform(const TransformSymbol& eps, const AdaptedSequence& f) {
  return doob_maximal(martingale_transform(eps, f));
}

}  // namespace martkit
