#pragma once

#include <bit>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "../step_function.hpp"

namespace martkit {

// Walsh system on the uniform dyadic tree of depth N. Leaf j is the interval
// [j 2^-N, (j+1) 2^-N); binary digit t_k of its points is bit N-1-k of j.
class WalshContext {
 public:
  explicit WalshContext(std::size_t depth, std::size_t max_leaves = kDefaultMaxLeaves)
      : tree_(build_uniform_dyadic(depth, max_leaves)), depth_(depth), reversed_(std::size_t{1} << depth) {
    for (std::size_t j = 0; j < reversed_.size(); ++j) {
      std::size_t r = 0;
      for (std::size_t b = 0; b < depth; ++b)
        if (j >> b & 1) r |= std::size_t{1} << (depth - 1 - b);
      reversed_[j] = r;
    }
  }

  const TreePtr& tree() const { return tree_; }
  std::size_t depth() const { return depth_; }
  std::size_t size() const { return reversed_.size(); }
  std::size_t reversed(std::size_t j) const { return reversed_[j]; }

  // w_n(leaf j) = prod_k r_k^{n_k}, r_k = (-1)^{t_k}
  double sign(std::size_t n, std::size_t j) const { return std::popcount(n & reversed_[j]) & 1 ? -1.0 : 1.0; }

  // Dyadic addition is XOR of the leaf indices.
  static std::size_t add(std::size_t j, std::size_t t) { return j ^ t; }

  void require(const StepFunction& f) const {
    if (!same_tree(f.tree(), tree_)) throw std::invalid_argument("walsh: function lives on another tree");
  }

 private:
  TreePtr tree_;
  std::size_t depth_;
  std::vector<std::size_t> reversed_;
};

inline StepFunction walsh_function(const WalshContext& ctx, std::size_t n) {
  if (n >= ctx.size()) throw std::out_of_range("walsh function: index out of range");
  std::vector<double> v(ctx.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = ctx.sign(n, j);
  return StepFunction(ctx.tree(), std::move(v));
}

inline StepFunction rademacher(const WalshContext& ctx, std::size_t k) {
  if (k >= ctx.depth()) throw std::out_of_range("rademacher: index out of range");
  return walsh_function(ctx, std::size_t{1} << k);
}

namespace detail {

inline void hadamard(std::vector<double>& a) {
  for (std::size_t h = 1; h < a.size(); h <<= 1)
    for (std::size_t i = 0; i < a.size(); i += 2 * h)
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
}

}  // namespace detail

// Walsh-Fourier coefficients (int f w_k, k < 2^N) in Paley order.
inline std::vector<double> fwht(const WalshContext& ctx, std::span<const double> values) {
  if (values.size() != ctx.size()) throw std::invalid_argument("fwht: wrong length");
  std::vector<double> a(ctx.size());
  for (std::size_t j = 0; j < a.size(); ++j) a[ctx.reversed(j)] = values[j];
  detail::hadamard(a);
  const double inv = 1.0 / static_cast<double>(a.size());
  for (double& x : a) x *= inv;
  return a;
}

inline std::vector<double> fwht(const WalshContext& ctx, const StepFunction& f) {
  ctx.require(f);
  return fwht(ctx, f.values());
}

inline StepFunction inverse_fwht(const WalshContext& ctx, std::vector<double> coef) {
  if (coef.size() != ctx.size()) throw std::invalid_argument("inverse fwht: wrong length");
  detail::hadamard(coef);
  std::vector<double> v(coef.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = coef[ctx.reversed(j)];
  return StepFunction(ctx.tree(), std::move(v));
}

inline std::vector<double> dirichlet_spectrum(const WalshContext& ctx, std::size_t n) {
  if (n < 1) throw std::invalid_argument("dirichlet kernel: n must be >= 1");
  std::vector<double> s(ctx.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = k < n ? 1.0 : 0.0;
  return s;
}

inline std::vector<double> fejer_spectrum(const WalshContext& ctx, std::size_t n) {
  if (n < 1) throw std::invalid_argument("fejer kernel: n must be >= 1");
  std::vector<double> s(ctx.size());
  for (std::size_t k = 0; k < s.size(); ++k) s[k] = k < n ? static_cast<double>(n - k) / static_cast<double>(n) : 0.0;
  return s;
}

inline StepFunction dirichlet_kernel(const WalshContext& ctx, std::size_t n) {
  return inverse_fwht(ctx, dirichlet_spectrum(ctx, n));
}
inline StepFunction fejer_kernel(const WalshContext& ctx, std::size_t n) {
  return inverse_fwht(ctx, fejer_spectrum(ctx, n));
}

inline StepFunction walsh_partial_sum(const WalshContext& ctx, std::size_t n, const StepFunction& f) {
  if (n < 1) throw std::invalid_argument("walsh partial sum: n must be >= 1");
  auto c = fwht(ctx, f);
  for (std::size_t k = std::min(n, c.size()); k < c.size(); ++k) c[k] = 0.0;
  return inverse_fwht(ctx, std::move(c));
}

inline StepFunction cesaro_mean(const WalshContext& ctx, std::size_t n, const StepFunction& f) {
  if (n < 1) throw std::invalid_argument("cesaro mean: n must be >= 1");
  auto c = fwht(ctx, f);
  for (std::size_t k = 0; k < c.size(); ++k)
    c[k] *= k < n ? 1.0 - static_cast<double>(k) / static_cast<double>(n) : 0.0;
  return inverse_fwht(ctx, std::move(c));
}

// Pointwise x -> sup_n |sigma_n(u)(x) - c(x) sigma_n(v)(x)| joined with |u(x) - c(x) v(x)|.
// For n >= 2^N, sigma_n moves monotonically from sigma_{2^N} toward the function
// itself, so those two endpoints cover every n.
inline StepFunction cesaro_maximal_shifted(const WalshContext& ctx, const StepFunction& u, const StepFunction* v,
                                           const StepFunction* c) {
  ctx.require(u);
  const std::size_t L = ctx.size();
  auto cu = fwht(ctx, u);
  std::vector<double> cv(L, 0.0), shift(L, 0.0);
  if (v && c) {
    ctx.require(*v);
    cv = fwht(ctx, *v);
    for (std::size_t j = 0; j < L; ++j) shift[j] = (*c)[j];
  }
  std::vector<double> a(L, 0.0), b(L, 0.0), best(L, 0.0);
  for (std::size_t j = 0; j < L; ++j) best[j] = std::abs(u[j] - (v && c ? shift[j] * (*v)[j] : 0.0));
  for (std::size_t n = 0; n < L; ++n) {
    const double kd = static_cast<double>(n);
    const double inv = 1.0 / (kd + 1.0);
    for (std::size_t j = 0; j < L; ++j) {
      const double coef = cu[n] - shift[j] * cv[n];
      const double s = (std::popcount(n & ctx.reversed(j)) & 1) ? -coef : coef;
      a[j] += s;
      b[j] += kd * s;
      const double val = std::abs(a[j] - b[j] * inv);
      if (val > best[j]) best[j] = val;
    }
  }
  return StepFunction(ctx.tree(), std::move(best));
}

inline StepFunction cesaro_maximal(const WalshContext& ctx, const StepFunction& f) {
  return cesaro_maximal_shifted(ctx, f, nullptr, nullptr);
}

}  // namespace martkit
