#include <cmath>
#include <vector>

#include "doctest.h"
#include "generators.hpp"
#include "oracle.hpp"
#include "wmt/discrete_ot.hpp"
#include "wmt/errors.hpp"

using namespace wmt;
using testing::brute_force_ot;

TEST_CASE("single feasible plan") {
  const auto sol = solve_kantorovich(DiscreteMeasure::dirac({0, 0}), DiscreteMeasure::dirac({3, 4}), 2.0);
  CHECK(sol.cost.value == doctest::Approx(25.0));
  CHECK(sol.cost.distance == doctest::Approx(5.0));
  CHECK(sol.plan(0, 0) == 1.0);
}

TEST_CASE("two halves into one point") {
  const auto sol = solve_kantorovich(DiscreteMeasure::uniform(1, {0, 1}), DiscreteMeasure::dirac({0.5}), 2.0);
  CHECK(sol.cost.value == doctest::Approx(0.25));
  CHECK(sol.cost.distance == doctest::Approx(0.5));
}

TEST_CASE("dimension mismatch and bad exponent") {
  CHECK_THROWS_AS(solve_kantorovich(DiscreteMeasure::dirac({0}), DiscreteMeasure::dirac({0, 1})), Error);
  CHECK_THROWS_AS(solve_kantorovich(DiscreteMeasure::dirac({0}), DiscreteMeasure::dirac({1}), 0.5), Error);
}

TEST_CASE("oracle examples") {
  Rng rng(5);
  const auto m = testing::random_discrete(rng, 3, 2);
  CHECK(brute_force_ot(m, m).value == doctest::Approx(0.0));
  CHECK(brute_force_ot(DiscreteMeasure::uniform(1, {0, 1}), DiscreteMeasure::uniform(1, {2, 3})).value ==
        doctest::Approx(4.0));
  CHECK(brute_force_ot(DiscreteMeasure::dirac({0, 0}), DiscreteMeasure::dirac({1, 1}), 1.0).value ==
        doctest::Approx(std::sqrt(2.0)));
  const auto seven = testing::random_discrete(rng, 7, 1);
  CHECK_THROWS_AS(brute_force_ot(seven, m), Error);
}

TEST_CASE("4-atom uniform pairs match the permutation oracle") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = testing::random_discrete(rng, 4, 2, true);
    const auto nu = testing::random_discrete(rng, 4, 2, true);
    CHECK(solve_kantorovich(mu, nu).cost.value == doctest::Approx(brute_force_ot(mu, nu).value).epsilon(1e-12));
  }
}

TEST_CASE("general weights match the vertex oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const auto mu = testing::random_discrete(rng, testing::uniform_int(rng, 1, 4), 2);
    const auto nu = testing::random_discrete(rng, testing::uniform_int(rng, 1, 4), 2);
    for (double p : {1.0, 2.0, 3.0}) {
      const auto sol = solve_kantorovich(mu, nu, p);
      CHECK(std::abs(sol.cost.value - brute_force_ot(mu, nu, p).value) <= 1e-9);
      CHECK(sol.plan.marginal_residual(mu, nu) <= 1e-8);
    }
  }
}

TEST_CASE("oracle paths agree with each other") {
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    const auto mu = testing::random_rational(rng, 3, 1, 6);
    const auto nu = testing::random_rational(rng, 4, 1, 6);
    const double via_units = brute_force_ot(mu, nu).value;
    CHECK(via_units == doctest::Approx(testing::monotone_1d_ot(mu, nu).value).epsilon(1e-12));
  }
}

TEST_CASE("one-dimensional costs equal the monotone rearrangement") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const auto mu = testing::random_discrete(rng, testing::uniform_int(rng, 1, 15), 1);
    const auto nu = testing::random_discrete(rng, testing::uniform_int(rng, 1, 15), 1);
    CHECK(std::abs(wasserstein_distance(mu, nu) - testing::monotone_1d_ot(mu, nu).distance) <= 1e-9);
  }
}

TEST_CASE("metric axioms") {
  Rng rng(37);
  for (int trial = 0; trial < 40; ++trial) {
    const auto a = testing::random_discrete(rng, testing::uniform_int(rng, 1, 8), 2);
    const auto b = testing::random_discrete(rng, testing::uniform_int(rng, 1, 8), 2);
    const auto c = testing::random_discrete(rng, testing::uniform_int(rng, 1, 8), 2);
    CHECK(wasserstein_distance(a, a) == 0.0);
    CHECK(std::abs(wasserstein_distance(a, b) - wasserstein_distance(b, a)) <= 1e-9);
    CHECK(wasserstein_distance(a, c) <= wasserstein_distance(a, b) + wasserstein_distance(b, c) + 1e-9);
  }
}

TEST_CASE("solver output is deterministic") {
  Rng rng(41);
  const auto mu = testing::random_discrete(rng, 12, 2);
  const auto nu = testing::random_discrete(rng, 9, 2);
  const auto a = solve_kantorovich(mu, nu);
  const auto b = solve_kantorovich(mu, nu);
  CHECK(a.plan == b.plan);
  CHECK(a.cost.value == b.cost.value);
}

TEST_CASE("degenerate transport problems") {
  // Equal masses on a grid produce many ties and degenerate bases.
  std::vector<double> grid;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) grid.insert(grid.end(), {double(i), double(j)});
  auto shifted = grid;
  for (std::size_t k = 0; k < shifted.size(); k += 2) shifted[k] += 1.0;
  const auto mu = DiscreteMeasure::uniform(2, grid);
  const auto nu = DiscreteMeasure::uniform(2, shifted);
  const auto sol = solve_kantorovich(mu, nu);
  CHECK(sol.cost.value == doctest::Approx(1.0));
  CHECK(sol.plan.marginal_residual(mu, nu) <= 1e-12);
}

TEST_CASE("plan pruning and marginals") {
  CHECK_THROWS_AS(Coupling(1, 2, {0.5, -0.5}), Error);
  Coupling c(1, 2, {1.0 - 1e-13, 1e-13});
  CHECK(c(0, 1) == 0.0);
  CHECK(c.support_size() == 1);
}

TEST_CASE("lipschitz pushforward bound") {
  Rng rng(43);
  for (int trial = 0; trial < 30; ++trial) {
    const auto mu = testing::random_discrete(rng, 5, 2);
    const auto nu = testing::random_discrete(rng, 4, 2);
    const double a = 2.0 * rng.uniform() - 1.0;
    const double b = 2.0 * rng.uniform() - 1.0;
    // Linear map [[a, b], [-b, a]] has Lipschitz constant sqrt(a^2 + b^2).
    auto map = [&](std::span<const double> x) { return std::vector<double>{a * x[0] + b * x[1], -b * x[0] + a * x[1]}; };
    CHECK(wasserstein_distance(push_forward(mu, map), push_forward(nu, map)) <=
          std::hypot(a, b) * wasserstein_distance(mu, nu) + 1e-9);
  }
}
