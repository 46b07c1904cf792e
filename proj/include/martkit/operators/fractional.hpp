#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "../martingale.hpp"

namespace martkit {

// I_{alpha,n} f = sum_{k<=n} beta_{k-1}^alpha d_k f where beta_k is the mass of
// the level-k cell containing the point and beta_{-1} = beta_0 = 1.
inline Martingale fractional_integral(double alpha, const AdaptedSequence& f,
                                      std::size_t truncate = std::numeric_limits<std::size_t>::max()) {
  if (alpha < 0.0 || !std::isfinite(alpha)) throw std::invalid_argument("fractional integral: alpha must be >= 0");
  const auto& tree = f.filtration();
  std::vector<std::vector<double>> d(tree.depth() + 1);
  for (std::size_t k = 0; k <= tree.depth(); ++k) {
    d[k] = f.difference(k);
    if (k > truncate) {
      std::fill(d[k].begin(), d[k].end(), 0.0);
      continue;
    }
    if (k == 0 || alpha == 0.0) continue;
    const std::size_t b = tree.children_per_cell(k - 1);
    auto m = tree.masses(k - 1);
    for (std::size_t c = 0; c < d[k].size(); ++c) d[k][c] *= std::pow(m[c / b], alpha);
  }
  return Martingale::from_differences(f.tree(), d, false);
}

inline StepFunction fractional_integral(double alpha, const StepFunction& f) {
  return fractional_integral(alpha, Martingale::from_terminal(f)).terminal();
}

// Target exponent 1 / (1 - alpha) for 0 <= alpha < 1.
inline double fractional_exponent(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw std::invalid_argument("fractional exponent: alpha must lie in [0, 1)");
  return 1.0 / (1.0 - alpha);
}

}  // namespace martkit
