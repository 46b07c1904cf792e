#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "norms.hpp"

namespace martkit {

struct ProductDecomposition {
  Martingale pi1;     // d_n = f_{n-1} d_n g
  Martingale pi2;     // d_n = g_{n-1} d_n f
  BVProcess l;        // sum_{k<=n} d_k f d_k g
  Martingale g_part;  // pi1 + pi2
};

inline ProductDecomposition product_decompose(const Martingale& f, const Martingale& g) {
  if (!same_tree(f.tree(), g.tree())) throw std::invalid_argument("product decomposition: tree mismatch");
  const auto& tree = f.filtration();
  const std::size_t depth = tree.depth();
  std::vector<std::vector<double>> d1(depth + 1), d2(depth + 1), lv(depth + 1);
  for (std::size_t n = 0; n <= depth; ++n) {
    auto df = f.difference(n);
    auto dg = g.difference(n);
    d1[n].assign(df.size(), 0.0);
    d2[n].assign(df.size(), 0.0);
    lv[n].resize(df.size());
    if (n > 0) {
      const std::size_t b = tree.children_per_cell(n - 1);
      auto fp = f.level(n - 1);
      auto gp = g.level(n - 1);
      for (std::size_t c = 0; c < df.size(); ++c) {
        d1[n][c] = fp[c / b] * dg[c];
        d2[n][c] = gp[c / b] * df[c];
        lv[n][c] = lv[n - 1][c / b] + df[c] * dg[c];
      }
    } else {
      lv[0][0] = df[0] * dg[0];
    }
  }
  auto pi1 = Martingale::from_differences(f.tree(), d1, false);
  auto pi2 = Martingale::from_differences(f.tree(), d2, false);
  auto sum = pi1 + pi2;
  return {std::move(pi1), std::move(pi2), BVProcess(f.tree(), std::move(lv)), std::move(sum)};
}

inline ProductDecomposition product_decompose(const StepFunction& f, const StepFunction& g) {
  return product_decompose(Martingale::from_terminal(f), Martingale::from_terminal(g));
}

// max over levels and cells of |f_n g_n - (pi1 + pi2 + L)_n| relative to the size of the terms.
inline double product_identity_error(const Martingale& f, const Martingale& g, const ProductDecomposition& pd) {
  double worst = 0.0;
  for (std::size_t n = 0; n <= f.depth(); ++n) {
    auto fl = f.level(n), gl = g.level(n), a = pd.pi1.level(n), b = pd.pi2.level(n), l = pd.l.level(n);
    for (std::size_t c = 0; c < fl.size(); ++c) {
      const double prod = fl[c] * gl[c];
      const double scale = std::abs(prod) + std::abs(a[c]) + std::abs(b[c]) + std::abs(l[c]);
      if (scale == 0.0) continue;
      worst = std::max(worst, std::abs(prod - a[c] - b[c] - l[c]) / scale);
    }
  }
  return worst;
}

// sum_k E|d_k f d_k g|
inline double diagonal_l1(const Martingale& f, const Martingale& g) {
  double total = 0.0;
  for (std::size_t n = 0; n <= f.depth(); ++n) {
    auto df = f.difference(n), dg = g.difference(n);
    auto m = f.filtration().masses(n);
    for (std::size_t c = 0; c < df.size(); ++c) total += m[c] * std::abs(df[c] * dg[c]);
  }
  return total;
}

struct DavisDecomposition {
  Martingale f1;  // f1_0 = 0
  Martingale fd;
};

// Predictable truncation: jumps exceeding twice the running maximum go to fd.
inline DavisDecomposition davis_decompose(const Martingale& f) {
  const auto& tree = f.filtration();
  const std::size_t depth = tree.depth();
  std::vector<std::vector<double>> big(depth + 1), small(depth + 1);
  auto d0 = f.difference(0);
  big[0] = d0;
  small[0].assign(1, 0.0);
  std::vector<double> lambda{std::abs(d0[0])};
  for (std::size_t n = 1; n <= depth; ++n) {
    auto d = f.difference(n);
    const std::size_t b = tree.children_per_cell(n - 1);
    std::vector<double> y(d.size(), 0.0), next(d.size());
    for (std::size_t c = 0; c < d.size(); ++c) {
      const double prev = lambda[c / b];
      if (std::abs(d[c]) > 2.0 * prev) y[c] = d[c];
      next[c] = std::max(prev, std::abs(d[c]));
    }
    auto cond = coarsen(tree, y, n - 1);
    big[n].resize(d.size());
    small[n].resize(d.size());
    for (std::size_t c = 0; c < d.size(); ++c) {
      big[n][c] = y[c] - cond[c / b];
      small[n][c] = d[c] - big[n][c];
    }
    lambda = std::move(next);
  }
  return {Martingale::from_differences(f.tree(), small, false), Martingale::from_differences(f.tree(), big, false)};
}

enum class AtomKind { simple_s_inf, simple_inf, b_atom, jump };

inline const char* to_string(AtomKind k) {
  switch (k) {
    case AtomKind::simple_s_inf: return "simple-s-inf";
    case AtomKind::simple_inf: return "simple-inf";
    case AtomKind::b_atom: return "b-atom";
    case AtomKind::jump: return "jump";
  }
  return "?";
}

inline AtomKind atom_kind_from_string(const std::string& s) {
  if (s == "simple-s-inf") return AtomKind::simple_s_inf;
  if (s == "simple-inf") return AtomKind::simple_inf;
  if (s == "b-atom") return AtomKind::b_atom;
  if (s == "jump") return AtomKind::jump;
  throw std::invalid_argument("unknown atom kind: " + s);
}

// Witness that `a` is an atom of the given kind. For atoms, `cells` lists the
// level-n cells forming A; for jumps it lists the level-(n-1) cells carrying
// the jump (empty means all of them).
struct AtomCertificate {
  AtomKind kind{AtomKind::simple_s_inf};
  std::size_t level{0};
  std::vector<std::size_t> cells;
  StepFunction a;
  double coefficient{1.0};
  std::optional<StepFunction> b;
  bool fallback{false};

  double support_mass() const {
    const auto& tree = a.filtration();
    if (kind == AtomKind::jump) return 1.0;
    double s = 0.0;
    for (auto c : cells) s += tree.mass(level, c);
    return s;
  }

  std::vector<char> support_mask() const {
    const auto& tree = a.filtration();
    std::vector<char> mask(tree.leaves(), 0);
    const std::size_t lvl = kind == AtomKind::jump ? (level == 0 ? 0 : level - 1) : level;
    if (kind == AtomKind::jump && (cells.empty() || level == 0)) {
      std::fill(mask.begin(), mask.end(), 1);
      return mask;
    }
    const std::size_t w = tree.leaves_per_cell(lvl);
    for (auto c : cells) std::fill_n(mask.begin() + c * w, w, 1);
    return mask;
  }
};

struct AtomCheck {
  bool ok{true};
  std::string reason;
  double mean_defect{0.0};
  double bound_ratio{0.0};  // observed sup / allowed sup
};

inline AtomCheck check_atom(const AtomCertificate& cert, double tol = 1e-10) {
  AtomCheck out;
  const auto& tree = cert.a.filtration();
  auto v = cert.a.values();
  auto mask = cert.support_mask();
  double scale = std::max(1.0, sup_norm(cert.a));
  for (std::size_t j = 0; j < v.size(); ++j)
    if (!mask[j] && v[j] != 0.0) {
      out.ok = false;
      out.reason = "support leaks outside A";
    }
  if (cert.kind == AtomKind::jump) {
    if (!is_measurable(cert.a, cert.level)) {
      out.ok = false;
      out.reason = "jump not measurable at its level";
    }
    if (cert.level > 0) {
      auto avg = cell_averages(tree, v, cert.level - 1);
      for (double x : avg) out.mean_defect = std::max(out.mean_defect, std::abs(x) / scale);
    }
    if (out.mean_defect > tol) {
      out.ok = false;
      out.reason = "jump has nonzero predictable mean";
    }
    return out;
  }
  auto avg = cell_averages(tree, v, cert.level);
  for (double x : avg) out.mean_defect = std::max(out.mean_defect, std::abs(x) / scale);
  if (cert.kind == AtomKind::b_atom && !cert.fallback) {
    if (!cert.b) throw std::invalid_argument("b-atom certificate without b");
    std::vector<double> ba(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) ba[j] = (*cert.b)[j] * v[j];
    const double bscale = scale * std::max(1.0, sup_norm(*cert.b));
    for (double x : cell_averages(tree, ba, cert.level)) out.mean_defect = std::max(out.mean_defect, std::abs(x) / bscale);
  }
  if (out.mean_defect > tol) {
    out.ok = false;
    out.reason = "conditional mean does not vanish";
  }
  const double allowed = 1.0 / cert.support_mass();
  const double observed =
      cert.kind == AtomKind::simple_s_inf ? sup_norm(cond_square_function(cert.a)) : sup_norm(cert.a);
  out.bound_ratio = observed / allowed;
  if (out.bound_ratio > 1.0 + tol) {
    out.ok = false;
    out.reason = "sup bound exceeded";
  }
  return out;
}

struct AtomicDecomposition {
  std::vector<AtomCertificate> atoms;
  double constant{0.0};  // f_0, not part of any atom

  double coefficient_sum() const {
    double s = 0.0;
    for (auto& a : atoms) s += std::abs(a.coefficient);
    return s;
  }

  StepFunction reconstruct(const TreePtr& tree) const {
    std::vector<double> v(tree->leaves(), constant);
    for (auto& at : atoms)
      for (std::size_t j = 0; j < v.size(); ++j) v[j] += at.coefficient * at.a[j];
    return StepFunction(tree, std::move(v));
  }
};

// Decomposition of f into simple (s,inf)-atoms along the stopping times
// tau_k = inf{n : s_{n+1}(f) > 2^k}.
inline AtomicDecomposition atomic_decompose(const Martingale& f) {
  const auto& tree = f.filtration();
  const TreePtr& tp = f.tree();
  const std::size_t depth = tree.depth();
  const std::size_t nl = tree.leaves();

  // predictable square function s_{n+1}^2 on level-n cells, n < depth
  std::vector<std::vector<double>> pred(depth);
  {
    auto d0 = f.difference(0);
    std::vector<double> acc{d0[0] * d0[0]};
    for (std::size_t n = 0; n < depth; ++n) {
      auto var = detail::predictable_variance(f, n + 1);
      pred[n].resize(tree.cells(n));
      for (std::size_t c = 0; c < pred[n].size(); ++c) pred[n][c] = acc[c] + var[c];
      if (n + 1 < depth) {
        const std::size_t b = tree.children_per_cell(n);
        std::vector<double> next(tree.cells(n + 1));
        for (std::size_t c = 0; c < next.size(); ++c) next[c] = pred[n][c / b];
        acc = std::move(next);
      }
    }
  }
  auto s_full = cond_square_function(f);
  double smax = 0.0, smin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nl; ++j) {
    if (tree.leaf_masses()[j] <= 0.0) continue;
    smax = std::max(smax, s_full[j]);
    if (s_full[j] > 0.0) smin = std::min(smin, s_full[j]);
  }
  AtomicDecomposition out;
  out.constant = f.level(0)[0];
  if (smax == 0.0) return out;
  const int k_hi = static_cast<int>(std::ceil(std::log2(smax)));
  const int k_lo = std::max(static_cast<int>(std::floor(std::log2(smin))) - 1, k_hi - 60);

  auto stop_levels = [&](int k) {
    const double thr = std::ldexp(1.0, 2 * k);  // compare squares
    std::vector<std::size_t> tau(nl, depth);
    for (std::size_t j = 0; j < nl; ++j) {
      for (std::size_t n = 0; n < depth; ++n)
        if (pred[n][j / tree.leaves_per_cell(n)] > thr) {
          tau[j] = n;
          break;
        }
    }
    return tau;
  };
  auto stopped = [&](const std::vector<std::size_t>& tau) {
    std::vector<double> v(nl);
    for (std::size_t j = 0; j < nl; ++j) v[j] = f.at(tau[j], j);
    return v;
  };

  auto tau_lo = stop_levels(k_lo);
  auto base = stopped(tau_lo);
  for (double& x : base) x -= out.constant;
  {
    StepFunction bf(tp, base);
    const double c = sup_norm(cond_square_function(bf));
    if (c > 0.0) {
      AtomCertificate cert{AtomKind::simple_s_inf, 0, {0}, bf.map([c](double x) { return x / c; }), c, {}, false};
      out.atoms.push_back(std::move(cert));
    }
  }
  auto tau_k = std::move(tau_lo);
  auto val_k = stopped(tau_k);
  for (int k = k_lo; k < k_hi; ++k) {
    auto tau_next = stop_levels(k + 1);
    auto val_next = stopped(tau_next);
    std::vector<double> g(nl);
    for (std::size_t j = 0; j < nl; ++j) g[j] = val_next[j] - val_k[j];
    StepFunction gf(tp, g);
    auto sg = cond_square_function(gf);
    // group leaves by the level-tau_k cell containing them
    for (std::size_t j = 0; j < nl;) {
      const std::size_t n = tau_k[j];
      const std::size_t w = tree.leaves_per_cell(n);
      const std::size_t cell = j / w;
      const std::size_t end = (cell + 1) * w;
      if (n < depth) {
        double sup = 0.0;
        bool nonzero = false;
        auto lm = tree.leaf_masses();
        for (std::size_t i = j; i < end; ++i) {
          if (lm[i] > 0.0) sup = std::max(sup, sg[i]);
          nonzero = nonzero || g[i] != 0.0;
        }
        if (nonzero && sup > 0.0) {
          const double coef = tree.mass(n, cell) * sup;
          std::vector<double> a(nl, 0.0);
          for (std::size_t i = j; i < end; ++i) a[i] = g[i] / coef;
          out.atoms.push_back({AtomKind::simple_s_inf, n, {cell}, StepFunction(tp, std::move(a)), coef, {}, false});
        }
      }
      j = end;
    }
    tau_k = std::move(tau_next);
    val_k = std::move(val_next);
  }
  return out;
}

// max over positive-mass leaves of |f - sum mu_k a_k|.
inline double reconstruction_error(const StepFunction& f, const StepFunction& rebuilt) {
  auto m = f.filtration().leaf_masses();
  double worst = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j)
    if (m[j] > 0.0) worst = std::max(worst, std::abs(f[j] - rebuilt[j]));
  return worst;
}

}  // namespace martkit
