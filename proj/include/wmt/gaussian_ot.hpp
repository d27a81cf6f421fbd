#pragma once

#include "wmt/measures.hpp"

namespace wmt {

/// psi(x) = slope * x + intercept on R.
struct AffineMap {
  double slope = 0.0;
  double intercept = 0.0;

  double operator()(double x) const noexcept { return slope * x + intercept; }
  bool is_zero() const noexcept { return slope == 0.0 && intercept == 0.0; }

  friend bool operator==(const AffineMap&, const AffineMap&) = default;
};

/// W_2 between two 1-D Gaussians: sqrt((m0-m1)^2 + (s0-s1)^2), s = stddev.
double gaussian_w2(const GaussianMeasure& mu0, const GaussianMeasure& mu1) noexcept;

/// nu (-) mu: the optimal map from mu to nu minus the identity.
AffineMap gaussian_ominus(const GaussianMeasure& nu, const GaussianMeasure& mu) noexcept;

/// mu (+) psi = (I + psi)_# mu. Throws DegenerateMap when slope <= -1.
GaussianMeasure gaussian_oplus(const GaussianMeasure& mu, const AffineMap& psi);

/// Point at parameter t in [0, 1] on the W_2 geodesic from mu0 to mu1.
/// Throws BadParameter for t outside [0, 1].
GaussianMeasure gaussian_mccann(const GaussianMeasure& mu0, const GaussianMeasure& mu1, double t);

/// ||psi||_{L^p(mu)}; only p = 2 has a closed form (UnsupportedExponent otherwise).
double affine_lp_norm(const AffineMap& psi, const GaussianMeasure& mu, double p = 2.0);

}  // namespace wmt
