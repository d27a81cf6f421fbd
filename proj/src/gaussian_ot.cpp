#include "wmt/gaussian_ot.hpp"

#include <cmath>
#include <string>

#include "wmt/errors.hpp"

namespace wmt {

double gaussian_w2(const GaussianMeasure& mu0, const GaussianMeasure& mu1) noexcept {
  return std::hypot(mu0.mean() - mu1.mean(), mu0.stddev() - mu1.stddev());
}

AffineMap gaussian_ominus(const GaussianMeasure& nu, const GaussianMeasure& mu) noexcept {
  if (nu == mu) return {};
  const double ratio = std::sqrt(nu.variance() / mu.variance());
  return {ratio - 1.0, nu.mean() - ratio * mu.mean()};
}

GaussianMeasure gaussian_oplus(const GaussianMeasure& mu, const AffineMap& psi) {
  if (!(psi.slope > -1.0)) {
    throw Error(ErrorCode::DegenerateMap,
                "slope " + std::to_string(psi.slope) + " <= -1 does not push a Gaussian to a Gaussian");
  }
  const double scale = psi.slope + 1.0;
  return {psi.intercept + mu.mean() * scale, mu.variance() * scale * scale};
}

GaussianMeasure gaussian_mccann(const GaussianMeasure& mu0, const GaussianMeasure& mu1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "interpolation parameter must lie in [0, 1]");
  }
  if (t == 0.0) return mu0;
  if (t == 1.0) return mu1;
  const double mean = (1.0 - t) * mu0.mean() + t * mu1.mean();
  const double factor = 1.0 + t * (std::sqrt(mu1.variance() / mu0.variance()) - 1.0);
  return {mean, factor * factor * mu0.variance()};
}

double affine_lp_norm(const AffineMap& psi, const GaussianMeasure& mu, double p) {
  if (p != 2.0) {
    throw Error(ErrorCode::UnsupportedExponent, "Gaussian closed forms exist only for p = 2");
  }
  // E[(A X + B)^2] = (A m + B)^2 + A^2 var.
  return std::hypot(psi.slope * mu.mean() + psi.intercept, psi.slope * mu.stddev());
}

}  // namespace wmt
