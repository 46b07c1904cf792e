#pragma once

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "../decomp.hpp"

namespace martkit {

// Haar basis of a binary tree with positive masses. Internal cell (n, i) has
// children (n+1, 2i) on the left and (n+1, 2i+1) on the right.
class HaarSystem {
 public:
  explicit HaarSystem(TreePtr tree) : tree_(std::move(tree)) {
    if (!tree_->is_binary()) throw std::invalid_argument("haar system: tree must be binary");
    for (std::size_t n = 0; n <= tree_->depth(); ++n)
      for (double m : tree_->masses(n))
        if (!(m > 0.0)) throw std::invalid_argument("haar system: zero-mass cell");
    harmonic_.resize(tree_->depth());
    for (std::size_t n = 0; n < tree_->depth(); ++n) {
      auto up = tree_->masses(n);
      auto down = tree_->masses(n + 1);
      harmonic_[n].resize(up.size());
      for (std::size_t i = 0; i < up.size(); ++i) harmonic_[n][i] = down[2 * i] * down[2 * i + 1] / up[i];
    }
  }

  const TreePtr& tree() const { return tree_; }
  std::size_t depth() const { return tree_->depth(); }

  // m(I) = mu(I-) mu(I+) / mu(I)
  double m(std::size_t level, std::size_t index) const { return harmonic_.at(level).at(index); }
  static double sign(std::size_t index) { return index % 2 == 0 ? 1.0 : -1.0; }

  StepFunction function(std::size_t level, std::size_t index) const {
    if (level >= depth() || index >= tree_->cells(level)) throw std::out_of_range("haar function: not an internal cell");
    const double s = std::sqrt(m(level, index));
    std::vector<double> v(tree_->leaves(), 0.0);
    const std::size_t w = tree_->leaves_per_cell(level + 1);
    std::fill_n(v.begin() + 2 * index * w, w, s / tree_->mass(level + 1, 2 * index));
    std::fill_n(v.begin() + (2 * index + 1) * w, w, -s / tree_->mass(level + 1, 2 * index + 1));
    return StepFunction(tree_, std::move(v));
  }

  // <f, h_I> for every internal cell, grouped by level. A child integral at
  // rounding level relative to the integral of |f| there is treated as zero,
  // so mean-zero inputs keep exact supports.
  std::vector<std::vector<double>> coefficients(const StepFunction& f) const {
    require(f);
    const double noise = 8.0 * static_cast<double>(depth() + 1) * std::numeric_limits<double>::epsilon();
    std::vector<std::vector<double>> c(depth());
    auto lm = tree_->leaf_masses();
    std::vector<double> sum(tree_->leaves()), mag(tree_->leaves());
    for (std::size_t j = 0; j < sum.size(); ++j) {
      sum[j] = lm[j] * f[j];
      mag[j] = std::abs(sum[j]);
    }
    for (std::size_t n = depth(); n-- > 0;) {
      auto down = tree_->masses(n + 1);
      c[n].resize(tree_->cells(n));
      for (std::size_t i = 0; i < c[n].size(); ++i) {
        const std::size_t l = 2 * i, r = 2 * i + 1;
        const double left = std::abs(sum[l]) <= noise * mag[l] ? 0.0 : sum[l] / down[l];
        const double right = std::abs(sum[r]) <= noise * mag[r] ? 0.0 : sum[r] / down[r];
        c[n][i] = std::sqrt(harmonic_[n][i]) * (left - right);
      }
      std::vector<double> s2(c[n].size()), m2(c[n].size());
      for (std::size_t i = 0; i < s2.size(); ++i) {
        s2[i] = sum[2 * i] + sum[2 * i + 1];
        m2[i] = mag[2 * i] + mag[2 * i + 1];
      }
      sum = std::move(s2);
      mag = std::move(m2);
    }
    return c;
  }

  // sum_I coef_I h_I
  StepFunction synthesize(const std::vector<std::vector<double>>& coef) const {
    std::vector<double> acc{0.0};
    for (std::size_t n = 0; n < depth(); ++n) {
      auto down = tree_->masses(n + 1);
      std::vector<double> next(tree_->cells(n + 1));
      for (std::size_t i = 0; i < acc.size(); ++i) {
        const double e = n < coef.size() && !coef[n].empty() ? coef[n][i] * std::sqrt(harmonic_[n][i]) : 0.0;
        next[2 * i] = acc[i] + e / down[2 * i];
        next[2 * i + 1] = acc[i] - e / down[2 * i + 1];
      }
      acc = std::move(next);
    }
    return StepFunction(tree_, std::move(acc));
  }

  void require(const StepFunction& f) const {
    if (!same_tree(f.tree(), tree_)) throw std::invalid_argument("haar system: function lives on another tree");
  }

 private:
  TreePtr tree_;
  std::vector<std::vector<double>> harmonic_;
};

// H f = sum_{I below the root} delta(I) <f, h_parent(I)> h_I
inline StepFunction dyadic_hilbert(const HaarSystem& sys, const StepFunction& f) {
  auto c = sys.coefficients(f);
  std::vector<std::vector<double>> e(sys.depth());
  e[0].assign(1, 0.0);
  for (std::size_t n = 1; n < sys.depth(); ++n) {
    e[n].resize(c[n].size());
    for (std::size_t i = 0; i < e[n].size(); ++i) e[n][i] = HaarSystem::sign(i) * c[n - 1][i / 2];
  }
  return sys.synthesize(e);
}

inline StepFunction dyadic_hilbert_adjoint(const HaarSystem& sys, const StepFunction& f) {
  auto c = sys.coefficients(f);
  std::vector<std::vector<double>> e(sys.depth());
  for (std::size_t n = 0; n < sys.depth(); ++n) {
    e[n].assign(c[n].size(), 0.0);
    if (n + 1 < sys.depth())
      for (std::size_t i = 0; i < e[n].size(); ++i) e[n][i] = c[n + 1][2 * i] - c[n + 1][2 * i + 1];
  }
  return sys.synthesize(e);
}

// A jump at level n only has Haar coefficients on level n-1, so the transform
// reduces to the level-n terms.
inline StepFunction hilbert_on_jump(const HaarSystem& sys, const AtomCertificate& w) {
  if (w.kind != AtomKind::jump) throw std::invalid_argument("hilbert on jump: not a jump");
  sys.require(w.a);
  const std::size_t n = w.level;
  if (n == 0 || n > sys.depth()) {
    if (n == 0) return StepFunction::zero(sys.tree());
    throw std::invalid_argument("hilbert on jump: level out of range");
  }
  const auto& tree = *sys.tree();
  auto fine = cell_averages(tree, w.a.values(), n);
  double scale = 0.0;
  for (double v : fine) scale = std::max(scale, std::abs(v));
  for (double p : coarsen(tree, fine, n - 1))
    if (std::abs(p) > 1e-9 * (1.0 + scale)) throw std::invalid_argument("hilbert on jump: nonzero conditional mean");
  std::vector<std::vector<double>> e(sys.depth());
  if (n < sys.depth()) {
    e[n].resize(tree.cells(n));
    for (std::size_t i = 0; i < e[n].size(); ++i) {
      const std::size_t p = i / 2;
      e[n][i] = HaarSystem::sign(i) * std::sqrt(sys.m(n - 1, p)) * (fine[2 * p] - fine[2 * p + 1]);
    }
  }
  return sys.synthesize(e);
}

inline double l2_inner(const StepFunction& a, const StepFunction& b) { return (a * b).integral(); }

// sqrt of the top eigenvalue of H*H by power iteration in L2(mu).
inline double power_iteration_norm(const HaarSystem& sys, std::size_t steps = 200, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(sys.tree()->leaves());
  for (double& x : v) x = nd(rng);
  StepFunction x(sys.tree(), std::move(v));
  double est = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    const double nx = std::sqrt(l2_inner(x, x));
    if (nx == 0.0) return 0.0;
    x = (1.0 / nx) * x;
    auto hx = dyadic_hilbert(sys, x);
    est = std::sqrt(l2_inner(hx, hx));
    x = dyadic_hilbert_adjoint(sys, hx);
  }
  return est;
}

}  // namespace martkit
