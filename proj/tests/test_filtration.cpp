#include <catch_amalgamated.hpp>

#include <martkit/generators.hpp>

#include "oracles.hpp"

using namespace martkit;
using Catch::Approx;

TEST_CASE("pk filtration cell counts and masses") {
  auto t = build_pk_filtration({2, 2});
  CHECK(t->leaves() == 4);
  for (double m : t->leaf_masses()) CHECK(m == 0.25);

  auto t23 = build_pk_filtration({2, 3});
  CHECK(t23->cells(2) == 6);
  for (std::size_t c = 0; c < 6; ++c) CHECK(t23->mass(2, c) == Approx(1.0 / 6).epsilon(1e-15));
  CHECK(t23->cells(0) == 1);
  CHECK(t23->mass(0, 0) == 1.0);
}

TEST_CASE("intervals are exact and contiguous") {
  auto t = build_pk_filtration({2, 3, 5});
  for (std::size_t n = 0; n <= t->depth(); ++n) {
    Rational prev(0, 1);
    for (std::size_t c = 0; c < t->cells(n); ++c) {
      auto [lo, hi] = t->interval({n, c});
      CHECK(lo == prev);
      prev = hi;
    }
    CHECK(prev == Rational(1, 1));
  }
  CHECK(t->interval({2, 3}).first == Rational(1, 2));
  CHECK(t->exact_mass({2, 1}).value() == Rational(1, 6));
}

TEST_CASE("builder errors") {
  CHECK_THROWS_AS(build_pk_filtration({2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(build_pk_filtration({}), std::invalid_argument);
  CHECK_THROWS_AS(build_pk_filtration({2}, LeafMasses{0.7, 0.2}), std::invalid_argument);
  CHECK_THROWS_AS(build_pk_filtration({2}, LeafMasses{1.2, -0.2}), std::invalid_argument);
  CHECK_THROWS_AS(build_uniform_dyadic(15), std::invalid_argument);
  CHECK_NOTHROW(build_uniform_dyadic(15, 1u << 15));
  CHECK_THROWS_AS(build_nondoubling_measure(0), std::invalid_argument);
  auto t = build_uniform_dyadic(2);
  CHECK_THROWS_AS(t->parent({0, 0}), std::out_of_range);
  CHECK_THROWS_AS(t->children({3, 0}), std::out_of_range);
}

TEST_CASE("mass conservation on random trees") {
  Rng rng(11);
  for (int s = 0; s < 20; ++s) {
    auto t = random_binary_tree(8, rng);
    for (std::size_t n = 0; n < t->depth(); ++n)
      for (std::size_t c = 0; c < t->cells(n); ++c) {
        double sum = 0;
        for (auto ch : t->children({n, c})) sum += t->mass(ch);
        CHECK(std::abs(sum - t->mass(n, c)) <= 1e-12 * t->mass(n, c));
      }
    CHECK(t->mass(0, 0) == Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("non-doubling measure values") {
  auto t1 = build_nondoubling_measure(1);
  CHECK(t1->mass(1, 0) == 0.5);
  CHECK(t1->mass(1, 1) == 0.5);
  auto t2 = build_nondoubling_measure(2);
  CHECK(t2->mass(2, 0) == Approx(15.0 / 32).epsilon(1e-15));
  CHECK(t2->mass(2, 1) == Approx(1.0 / 32).epsilon(1e-15));
  CHECK(t2->mass(1, 1) == Approx(0.5).epsilon(1e-15));
  // brother of I_3 carries mu(I_2) * 2^-9, spread over two leaves at depth 4
  auto t4 = build_nondoubling_measure(4);
  CHECK(t4->mass(3, 1) == Approx(15.0 / 32 / 512).epsilon(1e-13));
  CHECK(t4->mass(4, 2) == Approx(t4->mass(4, 3)).epsilon(1e-15));
}

TEST_CASE("regularity constant") {
  CHECK(regularity_constant(*build_uniform_dyadic(5)) == Approx(2.0));
  CHECK(regularity_constant(*build_pk_filtration({2, 2, 2})) == Approx(2.0));
  CHECK(regularity_constant(*build_pk_filtration({2, 3, 4})) == Approx(4.0));
  CHECK(regularity_constant(*build_nondoubling_measure(3)) == Approx(512.0).epsilon(1e-12));
  auto zero = build_pk_filtration({2}, LeafMasses{1.0, 0.0});
  CHECK_THROWS_AS(regularity_constant(*zero), std::domain_error);
}

TEST_CASE("regularity of uniform pk trees equals max branching (scan oracle)") {
  std::vector<std::vector<std::size_t>> seqs{{3, 2}, {2, 5, 3}, {4, 4, 2}, {2, 2, 7}};
  for (auto& s : seqs) {
    auto t = build_pk_filtration(s);
    double scan = 0;
    for (std::size_t n = 1; n <= t->depth(); ++n)
      for (std::size_t c = 0; c < t->cells(n); ++c) {
        auto p = t->parent({n, c});
        scan = std::max(scan, t->mass(p) / t->mass(n, c));
      }
    CHECK(regularity_constant(*t) == Approx(scan));
    CHECK(regularity_constant(*t) == Approx(static_cast<double>(*std::max_element(s.begin(), s.end()))));
  }
}

TEST_CASE("m-increasing constants") {
  CHECK(m_increasing_constant(*build_uniform_dyadic(6)) == Approx(0.5));
  CHECK(m_decreasing_constant(*build_uniform_dyadic(6)) == Approx(2.0));
  auto nd = build_nondoubling_measure(10);
  const double C = m_increasing_constant(*nd);
  CHECK(std::isfinite(C));
  for (std::size_t n = 1; n + 1 <= nd->depth(); ++n)
    for (std::size_t c = 0; c < nd->cells(n); ++c) {
      const double mi = harmonic_mass(*nd, {n, c});
      const double mp = harmonic_mass(*nd, nd->parent({n, c}));
      CHECK(mi / mp <= C * (1 + 1e-12));
    }
  for (std::size_t n = 0; n < nd->depth(); ++n)
    for (std::size_t c = 0; c < nd->cells(n); ++c)
      CHECK(harmonic_mass(*nd, {n, c}) <=
            std::min(nd->mass(n + 1, 2 * c), nd->mass(n + 1, 2 * c + 1)) * (1 + 1e-12));
  CHECK_THROWS_AS(m_increasing_constant(*build_pk_filtration({3, 2})), std::invalid_argument);
}

TEST_CASE("conditional expectation") {
  auto t = build_uniform_dyadic(2);
  StepFunction f(t, {1, 0, 0, 0});
  auto e1 = conditional_expectation(f, 1);
  CHECK(std::vector<double>(e1.values().begin(), e1.values().end()) == std::vector<double>{0.5, 0.5, 0, 0});
  auto c = StepFunction::constant(t, 3.25);
  for (std::size_t n = 0; n <= 2; ++n)
    for (double v : conditional_expectation(c, n).values()) CHECK(v == Approx(3.25));
  CHECK_THROWS_AS(conditional_expectation(f, 3), std::out_of_range);

  auto zero = build_pk_filtration({2, 2}, LeafMasses{0.5, 0.5, 0.0, 0.0});
  StepFunction g(zero, {1, 3, 5, 7});
  auto e = conditional_expectation(g, 1);
  CHECK(e[2] == 0.0);
  CHECK(e[0] == 2.0);
}

TEST_CASE("tower property, positivity and L1 contraction") {
  Rng rng(5);
  for (int s = 0; s < 20; ++s) {
    auto t = random_binary_tree(7, rng);
    auto f = random_terminal(t, rng, SampleProfile::heavy);
    for (std::size_t m = 0; m <= 7; ++m)
      for (std::size_t n = 0; n <= 7; ++n) {
        auto lhs = conditional_expectation(conditional_expectation(f, n), m);
        auto rhs = oracle::cond_exp(*t, {f.values().begin(), f.values().end()}, std::min(m, n));
        CHECK(oracle::max_abs_diff({lhs.values().begin(), lhs.values().end()}, rhs) <=
              1e-12 * (1 + oracle::sup(*t, rhs)));
      }
    auto pos = f.abs();
    for (std::size_t n = 0; n <= 7; ++n) {
      auto e = conditional_expectation(pos, n);
      for (double v : e.values()) CHECK(v >= 0.0);
      auto ef = conditional_expectation(f, n);
      CHECK(oracle::l1(*t, {ef.values().begin(), ef.values().end()}) <=
            oracle::l1(*t, {f.values().begin(), f.values().end()}) + 1e-12);
    }
  }
}

TEST_CASE("tree identity is stable") {
  auto a = build_uniform_dyadic(4);
  auto b = build_uniform_dyadic(4);
  CHECK(a->id() == b->id());
  CHECK(a->id() != build_nondoubling_measure(4)->id());
  CHECK(same_tree(a, b));
}
