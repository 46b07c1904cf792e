#include <catch_amalgamated.hpp>

#include <martkit/generators.hpp>
#include <martkit/norms.hpp>
#include <martkit/operators/fractional.hpp>
#include <martkit/operators/haar.hpp>
#include <martkit/operators/transform.hpp>

#include "oracles.hpp"

using namespace martkit;
using Catch::Approx;

namespace {

oracle::Vec vec(const StepFunction& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

TEST_CASE("martingale transform with eps = 1 telescopes") {
  Rng rng(21);
  auto t = random_binary_tree(7, rng);
  auto f = random_martingale(t, rng);
  auto tf = martingale_transform(TransformSymbol::ones(t), f);
  for (std::size_t j = 0; j < t->leaves(); ++j)
    CHECK(tf.terminal()[j] == Approx(f.terminal()[j] - f.level(0)[0]).margin(1e-12));
  CHECK(tf.level(0)[0] == 0.0);
}

TEST_CASE("martingale transform is dominated in square function") {
  Rng rng(22);
  for (int s = 0; s < 50; ++s) {
    auto t = random_binary_tree(3 + s % 8, rng);
    auto f = random_martingale(t, rng, static_cast<SampleProfile>(s % 3));
    auto eps = TransformSymbol::random(t, rng);
    auto sf = square_function(f);
    auto st = square_function(martingale_transform(eps, f));
    for (std::size_t j = 0; j < sf.size(); ++j) CHECK(st[j] <= sf[j] * (1 + 1e-12) + 1e-300);
    auto mt = maximal_transform(eps, f);
    auto direct = doob_maximal(martingale_transform(eps, f));
    CHECK(mt == direct);
  }
  auto t = build_uniform_dyadic(2);
  CHECK_THROWS_AS(TransformSymbol(t, {{2.0}, {0.5, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(TransformSymbol(t, {{1.0}}), std::invalid_argument);
  Rng r2(1);
  CHECK_THROWS_AS(martingale_transform(TransformSymbol::ones(t), random_martingale(build_uniform_dyadic(3), r2)),
                  std::invalid_argument);
}

TEST_CASE("martingale transform weak type bound") {
  Rng rng(23);
  double worst = 0;
  for (int s = 0; s < 1000; ++s) {
    auto t = random_binary_tree(4 + s % 5, rng);
    auto f = random_martingale(t, rng, SampleProfile::heavy);
    auto tf = martingale_transform(TransformSymbol::random(t, rng, true), f);
    worst = std::max(worst, weak_lq_norm(tf.terminal(), 1.0) / lp_norm(f.terminal(), 1.0));
  }
  WARN("weak (1,1) constant for transforms: " << worst);
  CHECK(std::isfinite(worst));
  CHECK(worst < 10.0);
}

TEST_CASE("fractional integrals") {
  Rng rng(24);
  auto t = build_pk_filtration({2, 3, 4, 5});
  auto f = random_martingale(t, rng);
  auto i0 = fractional_integral(0.0, f);
  for (std::size_t j = 0; j < t->leaves(); ++j) CHECK(i0.terminal()[j] == Approx(f.terminal()[j]).margin(1e-13));
  CHECK_THROWS_AS(fractional_integral(-0.5, f), std::invalid_argument);

  // single difference at level k on the dyadic tree scales by 2^{-(k-1) alpha}
  auto d = build_uniform_dyadic(6);
  for (std::size_t k = 1; k <= 6; ++k) {
    auto j = random_jump(d, k, rng);
    auto g = Martingale::from_terminal(j.a);
    for (double alpha : {0.25, 0.5, 0.9}) {
      auto ig = fractional_integral(alpha, g).terminal();
      const double w = std::pow(2.0, -static_cast<double>(k - 1) * alpha);
      for (std::size_t x = 0; x < d->leaves(); ++x) CHECK(ig[x] == Approx(w * j.a[x]).margin(1e-14));
    }
  }
  // truncation keeps the first n differences
  auto partial = fractional_integral(0.5, f, 2);
  auto full = fractional_integral(0.5, f);
  for (std::size_t n = 3; n <= 4; ++n)
    for (double v : partial.difference(n)) CHECK(v == 0.0);
  for (std::size_t c = 0; c < t->cells(2); ++c) CHECK(partial.level(2)[c] == Approx(full.level(2)[c]));
  CHECK(fractional_exponent(0.5) == 2.0);
}

TEST_CASE("fractional integral weak bound on growing branching") {
  Rng rng(25);
  double worst = 0;
  for (std::size_t depth = 3; depth <= 5; ++depth) {
    std::vector<std::size_t> p;
    for (std::size_t k = 1; k <= depth; ++k) p.push_back(k + 1);
    auto t = build_pk_filtration(p);
    for (int s = 0; s < 50; ++s) {
      auto f = random_martingale(t, rng, SampleProfile::heavy);
      auto i = fractional_integral(0.5, f).terminal();
      worst = std::max(worst, weak_lq_norm(i, 2.0) / lp_norm(f.terminal(), 1.0));
    }
  }
  WARN("weak (1, 2) constant of I_1/2: " << worst);
  CHECK(std::isfinite(worst));
}

TEST_CASE("Haar functions are orthonormal") {
  Rng rng(26);
  for (int s = 0; s < 5; ++s) {
    auto t = s == 0 ? build_nondoubling_measure(6) : random_binary_tree(6, rng);
    HaarSystem sys(t);
    std::vector<StepFunction> hs;
    for (std::size_t n = 0; n < 6; ++n)
      for (std::size_t i = 0; i < t->cells(n); ++i) {
        hs.push_back(sys.function(n, i));
        CHECK(oracle::max_abs_diff(vec(hs.back()), oracle::haar(*t, n, i)) <= 1e-9 * std::abs(hs.back()[0]) + 1e-12);
        CHECK(lp_norm(hs.back(), 1.0) == Approx(2 * std::sqrt(sys.m(n, i))).epsilon(1e-12));
        CHECK(conditional_expectation(hs.back(), n).integral() == Approx(0.0).margin(1e-12));
      }
    for (std::size_t a = 0; a < hs.size(); ++a)
      for (std::size_t b = a; b < hs.size(); ++b)
        CHECK(l2_inner(hs[a], hs[b]) == Approx(a == b ? 1.0 : 0.0).margin(1e-12));
  }
  CHECK_THROWS_AS(HaarSystem(build_pk_filtration({3, 2})), std::invalid_argument);
  CHECK_THROWS_AS(HaarSystem(build_pk_filtration({2}, LeafMasses{1.0, 0.0})), std::invalid_argument);
}

TEST_CASE("dyadic Hilbert transform matches the explicit sum") {
  Rng rng(27);
  for (int s = 0; s < 20; ++s) {
    auto t = s % 4 == 0 ? build_nondoubling_measure(2 + s % 6) : random_binary_tree(2 + s % 7, rng);
    HaarSystem sys(t);
    auto f = random_terminal(t, rng);
    auto h = dyadic_hilbert(sys, f);
    auto ref = oracle::hilbert(*t, vec(f));
    double scale = 1;
    for (double v : ref) scale = std::max(scale, std::abs(v));
    CHECK(oracle::max_abs_diff(vec(h), ref) <= 1e-10 * scale);
    auto ha = dyadic_hilbert_adjoint(sys, f);
    auto refa = oracle::hilbert_adjoint(*t, vec(f));
    for (double v : refa) scale = std::max(scale, std::abs(v));
    CHECK(oracle::max_abs_diff(vec(ha), refa) <= 1e-10 * scale);

    auto g = random_terminal(t, rng);
    const double lhs = l2_inner(dyadic_hilbert(sys, f), g);
    const double rhs = l2_inner(f, dyadic_hilbert_adjoint(sys, g));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * (1 + std::abs(lhs)));
  }
}

TEST_CASE("dyadic Hilbert transform examples") {
  auto t = build_uniform_dyadic(5);
  HaarSystem sys(t);
  auto h = dyadic_hilbert(sys, StepFunction::constant(t, 2.5));
  for (double v : h.values()) CHECK(v == Approx(0.0).margin(1e-14));
  auto root = dyadic_hilbert(sys, sys.function(0, 0));
  auto want = sys.function(1, 0) - sys.function(1, 1);
  for (std::size_t j = 0; j < t->leaves(); ++j) CHECK(root[j] == Approx(want[j]).margin(1e-13));

  auto nd = build_nondoubling_measure(10);
  const double norm = power_iteration_norm(HaarSystem(nd), 200);
  WARN("L2 norm estimate on the non-doubling measure: " << norm);
  CHECK(norm <= 2.0 + 1e-9);
  CHECK(norm >= 1.0);
  CHECK(power_iteration_norm(HaarSystem(build_uniform_dyadic(8)), 200) == Approx(std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("Hilbert transform on jumps and atoms") {
  Rng rng(28);
  double worst = 0;
  for (int s = 0; s < 500; ++s) {
    auto t = s % 2 ? build_nondoubling_measure(3 + s % 8) : random_binary_tree(3 + s % 8, rng);
    HaarSystem sys(t);
    auto w = random_jump(t, 1 + s % t->depth(), rng);
    auto full = dyadic_hilbert(sys, w.a);
    auto single = hilbert_on_jump(sys, w);
    double scale = 1;
    for (double v : full.values()) scale = std::max(scale, std::abs(v));
    worst = std::max(worst, oracle::max_abs_diff(vec(full), vec(single)) / scale);

    // multiplying by a level-(n-1) function commutes with the transform
    if (w.level >= 1) {
      std::vector<double> coarse(t->cells(w.level - 1));
      std::normal_distribution<double> nd;
      for (double& c : coarse) c = nd(rng);
      StepFunction g(t, expand_to_leaves(*t, coarse, w.level - 1));
      auto lhs = dyadic_hilbert(sys, g * w.a);
      auto rhs = g * full;
      double sc = 1;
      for (double v : rhs.values()) sc = std::max(sc, std::abs(v));
      CHECK(oracle::max_abs_diff(vec(lhs), vec(rhs)) <= 1e-12 * sc);
    }
  }
  CHECK(worst <= 1e-12);

  for (int s = 0; s < 200; ++s) {
    auto t = s % 2 ? build_nondoubling_measure(3 + s % 8) : random_binary_tree(3 + s % 8, rng);
    HaarSystem sys(t);
    auto sup = random_atom_support(*t, rng);
    sup.cells.resize(1);
    auto a = random_atom(t, AtomKind::simple_inf, sup, rng);
    auto ha = dyadic_hilbert(sys, a.a);
    auto mask = a.support_mask();
    const double top = sup_norm(ha);
    for (std::size_t j = 0; j < mask.size(); ++j)
      if (!mask[j]) CHECK(std::abs(ha[j]) <= 1e-12 * top);
    const double PA = a.support_mass();
    for (double p : {1.0, 2.0}) CHECK(lp_norm(ha, p) <= 2 * std::pow(PA, 1 / p - 1) * (1 + 1e-9));
  }
  CHECK_THROWS_AS(hilbert_on_jump(HaarSystem(build_uniform_dyadic(3)),
                                  random_atom(build_uniform_dyadic(3), AtomKind::simple_inf, {0, {0}}, rng)),
                  std::invalid_argument);
}

TEST_CASE("Hilbert transform from H1 to L1 on m-increasing measures") {
  Rng rng(29);
  double worst = 0;
  for (int s = 0; s < 100; ++s) {
    auto t = build_nondoubling_measure(4 + s % 7);
    auto f = random_martingale(t, rng, static_cast<SampleProfile>(s % 3));
    auto h = dyadic_hilbert(HaarSystem(t), f.terminal());
    worst = std::max(worst, lp_norm(h, 1.0) / h1_norm(f));
  }
  WARN("H1 -> L1 ratio of the dyadic Hilbert transform: " << worst);
  CHECK(std::isfinite(worst));
}
