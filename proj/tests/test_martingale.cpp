#include <catch_amalgamated.hpp>

#include <martkit/generators.hpp>

#include "oracles.hpp"

using namespace martkit;
using Catch::Approx;

namespace {

oracle::Vec vec(const StepFunction& f) { return {f.values().begin(), f.values().end()}; }

// Haar function of the root on Lebesgue dyadic: +1 left, -1 right.
StepFunction root_haar(const TreePtr& t) {
  std::vector<double> v(t->leaves());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = j < v.size() / 2 ? 1.0 : -1.0;
  return StepFunction(t, v);
}

}  // namespace

TEST_CASE("step function validation") {
  auto t = build_uniform_dyadic(2);
  CHECK_THROWS_AS(StepFunction(t, {1, 2, 3}), std::invalid_argument);
  CHECK_THROWS_AS(StepFunction(t, {1, 2, 3, std::nan("")}), std::invalid_argument);
  StepFunction f(t, {1, 2, 3, 4});
  CHECK(f.integral() == Approx(2.5));
  CHECK_THROWS_AS(f + StepFunction::zero(build_uniform_dyadic(3)), std::invalid_argument);
}

TEST_CASE("martingale construction and property") {
  Rng rng(3);
  auto t = random_binary_tree(6, rng);
  auto f = random_martingale(t, rng);
  CHECK(f.martingale_defect() <= 1e-13);
  auto again = Martingale::from_levels(t, f.levels());
  CHECK(again == f);
  auto bad = f.levels();
  bad[2][0] += 1.0;
  CHECK_THROWS_AS(Martingale::from_levels(t, bad), std::invalid_argument);
  CHECK_NOTHROW(Martingale::from_levels(t, bad, false));

  std::vector<std::vector<double>> diffs(7);
  for (std::size_t n = 0; n <= 6; ++n) diffs[n] = f.difference(n);
  auto rebuilt = Martingale::from_differences(t, diffs);
  for (std::size_t n = 0; n <= 6; ++n)
    for (std::size_t c = 0; c < t->cells(n); ++c) CHECK(rebuilt.level(n)[c] == Approx(f.level(n)[c]).margin(1e-12));
}

TEST_CASE("M, S, s on simple inputs") {
  auto t = build_uniform_dyadic(3);
  auto c = Martingale::from_terminal(StepFunction::constant(t, -2.5));
  for (double v : doob_maximal(c).values()) CHECK(v == 2.5);

  auto h = Martingale::from_terminal(root_haar(t));
  for (double v : doob_maximal(h).values()) CHECK(v == 1.0);
  for (double v : square_function(h).values()) CHECK(v == Approx(1.0));
  for (double v : cond_square_function(h).values()) CHECK(v == Approx(1.0));
}

TEST_CASE("operators match brute force oracles") {
  Rng rng(17);
  for (int s = 0; s < 30; ++s) {
    auto t = random_binary_tree(1 + s % 9, rng);
    auto f = random_terminal(t, rng, s % 2 ? SampleProfile::heavy : SampleProfile::multilevel);
    auto v = vec(f);
    CHECK(oracle::max_abs_diff(vec(doob_maximal(f)), oracle::maximal(*t, v)) <= 1e-12 * (1 + oracle::sup(*t, v)));
    CHECK(oracle::max_abs_diff(vec(square_function(f)), oracle::square(*t, v)) <= 1e-10 * (1 + oracle::sup(*t, v)));
    CHECK(oracle::max_abs_diff(vec(cond_square_function(f)), oracle::cond_square(*t, v)) <=
          1e-10 * (1 + oracle::sup(*t, v)));
  }
  auto pk = build_pk_filtration({3, 2, 4});
  auto f = random_terminal(pk, rng);
  CHECK(oracle::max_abs_diff(vec(cond_square_function(f)), oracle::cond_square(*pk, vec(f))) <= 1e-12);
}

TEST_CASE("L2 isometries of S and s") {
  Rng rng(19);
  for (int s = 0; s < 50; ++s) {
    auto t = random_binary_tree(8, rng);
    auto f = random_terminal(t, rng);
    const double l2 = lp_norm(f, 2);
    CHECK(lp_norm(square_function(f), 2) == Approx(l2).epsilon(1e-10));
    CHECK(lp_norm(cond_square_function(f), 2) == Approx(l2).epsilon(1e-10));
  }
}

TEST_CASE("BV process variation norm") {
  auto t = build_uniform_dyadic(1);
  BVProcess h(t, {{1.0}, {3.0, -1.0}});
  // |1| + (|2| + |-2|) / 2
  CHECK(h.variation_norm() == Approx(3.0));
}
