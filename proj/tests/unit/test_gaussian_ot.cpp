#include <cmath>

#include "doctest.h"
#include "generators.hpp"
#include "wmt/errors.hpp"
#include "wmt/gaussian_ot.hpp"

using namespace wmt;

TEST_CASE("gaussian w2 closed form") {
  CHECK(gaussian_w2({0, 1}, {1, 1}) == doctest::Approx(1.0));
  CHECK(gaussian_w2({0, 1}, {0, 4}) == doctest::Approx(1.0));
  const double gap = std::sqrt(1.884) - std::sqrt(0.1084);
  CHECK(gaussian_w2({0, 1.884}, {1, 0.1084}) == doctest::Approx(std::sqrt(1.0 + gap * gap)));
  CHECK(gaussian_w2({0, 1.884}, {1, 0.1084}) == gaussian_w2({1, 0.1084}, {0, 1.884}));
}

TEST_CASE("ominus examples") {
  CHECK(gaussian_ominus({1, 4}, {0, 1}) == AffineMap{1.0, 1.0});
  CHECK(gaussian_ominus({2, 3}, {2, 3}).is_zero());
  CHECK(gaussian_ominus({0, 1}, {0, 4}) == AffineMap{-0.5, 0.0});
}

TEST_CASE("oplus examples") {
  CHECK(gaussian_oplus({0, 1}, {1, 1}) == GaussianMeasure{1, 4});
  CHECK(gaussian_oplus({3, 2}, {}) == GaussianMeasure{3, 2});
  CHECK_THROWS_AS(gaussian_oplus({0, 1}, {-1, 0}), Error);
  CHECK_THROWS_AS(gaussian_oplus({0, 1}, {-2, 0}), Error);
}

TEST_CASE("mccann examples") {
  CHECK(gaussian_mccann({0, 1}, {1, 4}, 0.5) == GaussianMeasure{0.5, 2.25});
  CHECK(gaussian_mccann({0, 1}, {1, 4}, 0.0) == GaussianMeasure{0, 1});
  CHECK(gaussian_mccann({0, 1}, {1, 4}, 1.0) == GaussianMeasure{1, 4});
  CHECK_THROWS_AS(gaussian_mccann({0, 1}, {1, 4}, 1.5), Error);
}

TEST_CASE("affine norm") {
  CHECK(affine_lp_norm(gaussian_ominus({1, 4}, {0, 1}), {0, 1}) == doctest::Approx(std::sqrt(2.0)));
  CHECK(affine_lp_norm({}, {5, 3}) == 0.0);
  CHECK(affine_lp_norm({0, -0.7}, {5, 3}) == doctest::Approx(0.7));
  CHECK_THROWS_AS(affine_lp_norm({}, {0, 1}, 1.0), Error);
}

TEST_CASE("randomized identities") {
  Rng rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto mu = testing::random_gaussian(rng);
    const auto nu = testing::random_gaussian(rng);
    const auto back = gaussian_oplus(mu, gaussian_ominus(nu, mu));
    CHECK(std::abs(back.mean() - nu.mean()) <= 1e-12);
    CHECK(std::abs(back.variance() - nu.variance()) <= 1e-12);
    CHECK(std::abs(affine_lp_norm(gaussian_ominus(nu, mu), mu) - gaussian_w2(mu, nu)) <= 1e-12);

    const double s = rng.uniform();
    const double t = s + (1.0 - s) * rng.uniform();
    const double w = gaussian_w2(gaussian_mccann(mu, nu, s), gaussian_mccann(mu, nu, t));
    CHECK(std::abs(w - (t - s) * gaussian_w2(mu, nu)) <= 1e-12);

    const auto mid = gaussian_mccann(mu, nu, 0.5);
    CHECK(gaussian_w2(gaussian_mccann(mu, nu, 0.25), gaussian_mccann(mu, mid, 0.5)) <= 1e-12);
    CHECK(gaussian_w2(gaussian_mccann(mu, nu, 0.75), gaussian_mccann(mid, nu, 0.5)) <= 1e-12);
  }
}
