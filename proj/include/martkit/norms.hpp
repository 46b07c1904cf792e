#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "martingale.hpp"

namespace martkit {

// t / log(e + t)
inline double orlicz_log(double t) { return t / std::log(std::numbers::e + t); }

// Inverse of orlicz_log on [0, inf).
inline double orlicz_log_inverse(double y) {
  if (y < 0.0) throw std::domain_error("orlicz inverse of a negative value");
  if (y == 0.0) return 0.0;
  double lo = y, hi = 2.0 * y + 2.0;
  while (orlicz_log(hi) < y) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (orlicz_log(mid) < y ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double lp_norm(const StepFunction& f, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("Lp norm requires p >= 1");
  auto m = f.filtration().leaf_masses();
  auto v = f.values();
  if (std::isinf(p)) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (m[i] > 0.0) s = std::max(s, std::abs(v[i]));
    return s;
  }
  double s = 0.0;
  if (p == 1.0) {
    for (std::size_t i = 0; i < v.size(); ++i) s += m[i] * std::abs(v[i]);
    return s;
  }
  if (p == 2.0) {
    for (std::size_t i = 0; i < v.size(); ++i) s += m[i] * v[i] * v[i];
    return std::sqrt(s);
  }
  for (std::size_t i = 0; i < v.size(); ++i) s += m[i] * std::pow(std::abs(v[i]), p);
  return std::pow(s, 1.0 / p);
}

inline double sup_norm(const StepFunction& f) { return lp_norm(f, std::numeric_limits<double>::infinity()); }

// sup_t t * P(|f| > t)^{1/q}, attained as t increases to one of the values of |f|.
inline double weak_lq_norm(const StepFunction& f, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("weak Lq norm requires q >= 1");
  if (std::isinf(q)) return sup_norm(f);
  auto m = f.filtration().leaf_masses();
  auto v = f.values();
  std::vector<std::pair<double, double>> vm;
  vm.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    if (m[i] > 0.0 && v[i] != 0.0) vm.emplace_back(std::abs(v[i]), m[i]);
  std::sort(vm.begin(), vm.end(), [](auto& a, auto& b) { return a.first > b.first; });
  double tail = 0.0, best = 0.0;
  for (std::size_t i = 0; i < vm.size();) {
    const double t = vm[i].first;
    while (i < vm.size() && vm[i].first == t) tail += vm[i++].second;
    best = std::max(best, t * std::pow(std::min(tail, 1.0), 1.0 / q));
  }
  return best;
}

// Luxemburg norm for t / log(e + t).
inline double llog_norm(const StepFunction& f) {
  auto m = f.filtration().leaf_masses();
  auto v = f.values();
  auto modular = [&](double lambda) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (m[i] > 0.0 && v[i] != 0.0) s += m[i] * orlicz_log(std::abs(v[i]) / lambda);
    return s;
  };
  double hi = lp_norm(f, 1.0);
  if (hi == 0.0) return 0.0;
  double lo = 0.5 * hi;
  while (modular(lo) <= 1.0) {
    hi = lo;
    lo *= 0.5;
  }
  const double tol = 1e-10 * std::min(1.0, hi);
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (modular(mid) <= 1.0 ? hi : lo) = mid;
  }
  return hi;
}

inline double exp_bracket_limit() { return 1e300; }

// Luxemburg norm with E exp(|f| / lambda) <= 2; f must be nonnegative.
inline double expl_norm(const StepFunction& f) {
  auto m = f.filtration().leaf_masses();
  auto v = f.values();
  double top = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < 0.0) throw std::domain_error("exp-class norm of a function with negative values");
    if (m[i] > 0.0) top = std::max(top, v[i]);
  }
  if (top == 0.0) return 0.0;
  // log E exp(f / lambda), evaluated stably
  auto log_moment = [&](double lambda) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (m[i] > 0.0) acc += m[i] * std::exp((v[i] - top) / lambda);
    return top / lambda + std::log(acc);
  };
  const double target = std::numbers::ln2;
  double hi = lp_norm(f, 1.0) / target;
  while (log_moment(hi) > target) {
    hi *= 2.0;
    if (hi > exp_bracket_limit()) throw std::overflow_error("exp-class norm exceeds bracket limit");
  }
  double lo = 0.5 * hi;
  while (log_moment(lo) <= target) {
    hi = lo;
    lo *= 0.5;
  }
  const double tol = 1e-10 * std::min(1.0, hi);
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (log_moment(mid) <= target ? hi : lo) = mid;
  }
  return hi;
}

// sup over cells of avg_Q |f - f_Q|, all levels.
inline double osc_norm(const StepFunction& f) {
  const auto& tree = f.filtration();
  auto m = tree.leaf_masses();
  auto v = f.values();
  double worst = 0.0;
  for (std::size_t n = 0; n <= tree.depth(); ++n) {
    auto avg = cell_averages(tree, v, n);
    auto cm = tree.masses(n);
    const std::size_t w = tree.leaves_per_cell(n);
    for (std::size_t c = 0; c < avg.size(); ++c) {
      if (cm[c] <= 0.0) continue;
      double s = 0.0;
      for (std::size_t j = c * w; j < (c + 1) * w; ++j) s += m[j] * std::abs(v[j] - avg[c]);
      worst = std::max(worst, s / cm[c]);
    }
  }
  return worst;
}

namespace detail {

// sup_n sup_cells (E_n |f_N - ref_n|^p)^{1/p}; ref_n supplied per level-n cell.
template <class Ref>
double oscillation_sup(const AdaptedSequence& f, double p, Ref ref) {
  if (!(p >= 1.0) || std::isinf(p)) throw std::invalid_argument("BMO exponent must lie in [1, inf)");
  const auto& tree = f.filtration();
  auto m = tree.leaf_masses();
  auto top = f.level(f.depth());
  double worst = 0.0;
  for (std::size_t n = 0; n <= tree.depth(); ++n) {
    const std::size_t w = tree.leaves_per_cell(n);
    auto cm = tree.masses(n);
    for (std::size_t c = 0; c < tree.cells(n); ++c) {
      if (cm[c] <= 0.0) continue;
      const double r = ref(n, c);
      double s = 0.0;
      for (std::size_t j = c * w; j < (c + 1) * w; ++j) {
        const double d = std::abs(top[j] - r);
        s += m[j] * (p == 2.0 ? d * d : std::pow(d, p));
      }
      worst = std::max(worst, s / cm[c]);
    }
  }
  return p == 2.0 ? std::sqrt(worst) : std::pow(worst, 1.0 / p);
}

}  // namespace detail

// sup_n ||E_n |f - f_{n-1}|^p||_inf^{1/p}, f_{-1} = 0.
inline double bmo_norm(const AdaptedSequence& f, double p = 2.0) {
  const auto& tree = f.filtration();
  return detail::oscillation_sup(f, p, [&](std::size_t n, std::size_t c) {
    return n == 0 ? 0.0 : f.level(n - 1)[c / tree.children_per_cell(n - 1)];
  });
}

// sup_n ||E_n |f - f_n|^p||_inf^{1/p}.
inline double small_bmo_norm(const AdaptedSequence& f, double p = 2.0) {
  return detail::oscillation_sup(f, p, [&](std::size_t n, std::size_t c) { return f.level(n)[c]; });
}

// sup_n ||d_n f||_inf over positive-mass cells.
inline double bmo_jump_norm(const AdaptedSequence& f) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= f.depth(); ++n) {
    auto d = f.difference(n);
    auto cm = f.filtration().masses(n);
    for (std::size_t c = 0; c < d.size(); ++c)
      if (cm[c] > 0.0) worst = std::max(worst, std::abs(d[c]));
  }
  return worst;
}

// Campanato-type norm with weight 1/phi(r) = r * orlicz_log_inverse(1/r).
inline double bmo_log_norm(const AdaptedSequence& f) {
  const auto& tree = f.filtration();
  auto m = tree.leaf_masses();
  auto top = f.level(f.depth());
  double worst = 0.0;
  for (std::size_t n = 0; n <= tree.depth(); ++n) {
    const std::size_t w = tree.leaves_per_cell(n);
    auto cm = tree.masses(n);
    for (std::size_t c = 0; c < tree.cells(n); ++c) {
      if (cm[c] <= 0.0) continue;
      const double r = f.level(n)[c];
      double s = 0.0;
      for (std::size_t j = c * w; j < (c + 1) * w; ++j) s += m[j] * (top[j] - r) * (top[j] - r);
      const double weight = cm[c] * orlicz_log_inverse(1.0 / cm[c]);
      worst = std::max(worst, weight * std::sqrt(s / cm[c]));
    }
  }
  return worst;
}

inline double h1_norm(const AdaptedSequence& f) { return lp_norm(square_function(f), 1.0); }
inline double small_h1_norm(const AdaptedSequence& f) { return lp_norm(cond_square_function(f), 1.0); }
inline double h1_jump_norm(const AdaptedSequence& f) {
  double total = 0.0;
  for (std::size_t n = 0; n <= f.depth(); ++n) {
    auto d = f.difference(n);
    auto cm = f.filtration().masses(n);
    for (std::size_t c = 0; c < d.size(); ++c) total += cm[c] * std::abs(d[c]);
  }
  return total;
}

enum class NormFamily { lp, weak_lq, llog, exp_l, H1, h1, h1d, Hlog, hlog, HMlog, BMO, bmo, bmod, bmolog, osc };

struct NormKind {
  NormFamily family{NormFamily::lp};
  double exponent{2.0};

  static NormKind Lp(double p) { return {NormFamily::lp, p}; }
  static NormKind weak_Lq(double q) { return {NormFamily::weak_lq, q}; }
  static NormKind BMOp(double p) { return {NormFamily::BMO, p}; }
  static NormKind bmop(double p) { return {NormFamily::bmo, p}; }
  static NormKind of(NormFamily f) { return {f, 2.0}; }

  bool needs_martingale() const {
    switch (family) {
      case NormFamily::lp:
      case NormFamily::weak_lq:
      case NormFamily::llog:
      case NormFamily::exp_l:
      case NormFamily::osc: return false;
      default: return true;
    }
  }
};

inline double norm(const StepFunction& f, NormKind kind) {
  switch (kind.family) {
    case NormFamily::lp: return lp_norm(f, kind.exponent);
    case NormFamily::weak_lq: return weak_lq_norm(f, kind.exponent);
    case NormFamily::llog: return llog_norm(f);
    case NormFamily::exp_l: return expl_norm(f);
    case NormFamily::osc: return osc_norm(f);
    default: throw std::invalid_argument("this norm needs a martingale argument");
  }
}

inline double norm(const Martingale& f, NormKind kind) {
  if (!kind.needs_martingale()) return norm(f.terminal(), kind);
  switch (kind.family) {
    case NormFamily::H1: return h1_norm(f);
    case NormFamily::h1: return small_h1_norm(f);
    case NormFamily::h1d: return h1_jump_norm(f);
    case NormFamily::Hlog: return llog_norm(square_function(f));
    case NormFamily::hlog: return llog_norm(cond_square_function(f));
    case NormFamily::HMlog: return llog_norm(doob_maximal(f));
    case NormFamily::BMO: return bmo_norm(f, kind.exponent);
    case NormFamily::bmo: return small_bmo_norm(f, kind.exponent);
    case NormFamily::bmod: return bmo_jump_norm(f);
    case NormFamily::bmolog: return bmo_log_norm(f);
    default: break;
  }
  throw std::invalid_argument("unknown norm");
}

// Convenience wrappers for functions identified with their martingale.
inline double bmo_norm(const StepFunction& b, double p = 2.0) { return bmo_norm(Martingale::from_terminal(b), p); }
inline double small_bmo_norm(const StepFunction& b, double p = 2.0) {
  return small_bmo_norm(Martingale::from_terminal(b), p);
}
inline double h1_norm(const StepFunction& f) { return h1_norm(Martingale::from_terminal(f)); }

}  // namespace martkit
