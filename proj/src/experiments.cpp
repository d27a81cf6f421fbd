#include "wmt/experiments.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "wmt/errors.hpp"

namespace wmt {

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  double u1 = uniform();
  while (u1 == 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  return r * std::cos(theta);
}

namespace {

void check_curve_spec(const GaussianCurveSpec& spec) {
  if (spec.n_samples < 3) throw Error(ErrorCode::BadSpec, "n_samples must be >= 3");
  if (default_level(spec.n_samples) < 1) {
    throw Error(ErrorCode::BadSpec, "n_samples must be odd so the curve has a dyadic grid");
  }
  if (!std::isfinite(spec.bump_amplitude) || spec.bump_amplitude < 0.0) {
    throw Error(ErrorCode::BadSpec, "bump_amplitude must be finite and >= 0");
  }
  if (spec.noise && (!(spec.noise->mean_sigma >= 0.0) || !(spec.noise->var_sigma >= 0.0))) {
    throw Error(ErrorCode::BadSpec, "noise sigmas must be >= 0");
  }
  if (spec.jump && !(spec.jump->variance_scale > 0.0)) {
    throw Error(ErrorCode::BadSpec, "jump variance_scale must be > 0");
  }
}

}  // namespace

GeneratedCurve gen_gaussian_curve(const GaussianCurveSpec& spec) {
  check_curve_spec(spec);
  const double m0 = spec.start.mean();
  const double m1 = spec.end.mean();
  const double s0 = spec.start.stddev();
  const double s1 = spec.end.stddev();
  const double a = spec.bump_amplitude;
  const std::size_t n = spec.n_samples;

  Rng rng(spec.seed);
  GeneratedCurve out;
  // Grid 2^-level matches t = i / (n - 1) whenever n - 1 is a power of two.
  out.sequence.level = std::countr_zero(n - 1);
  out.sequence.elements.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      out.sequence.elements.emplace_back(spec.start);
      continue;
    }
    if (i + 1 == n) {
      out.sequence.elements.emplace_back(spec.end);
      continue;
    }
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const double smoothstep = t * t * (3.0 - 2.0 * t);
    double mean = m0 + (m1 - m0) * ((1.0 - a) * t + a * smoothstep);
    const double sd = (1.0 - t) * s0 + t * s1;
    const double bump = std::sin(std::numbers::pi * t);
    double variance = sd * sd + a * bump * bump;

    if (spec.noise) {
      const double scale = spec.noise->taper ? bump : 1.0;
      mean += scale * spec.noise->mean_sigma * rng.normal();
      variance += scale * spec.noise->var_sigma * rng.normal();
    }
    if (spec.jump && t >= 1.0 / 3.0 && t <= 2.0 / 3.0) variance *= spec.jump->variance_scale;
    if (variance < kVarianceFloor) {
      variance = kVarianceFloor;
      ++out.clamped_variances;
    }
    out.sequence.elements.emplace_back(GaussianMeasure{mean, variance});
  }
  return out;
}

MeasureSequence gen_weighted_family(const MeasureSequence& smooth, double k) {
  if (!(k >= 0.0 && k <= 1.0)) throw Error(ErrorCode::BadParameter, "k must lie in [0, 1]");
  if (smooth.size() < 2) throw Error(ErrorCode::TooShort, "family needs at least two elements");
  if (smooth.kind() != MeasureKind::Gaussian) {
    throw Error(ErrorCode::BadParameter, "the weighted family is defined for Gaussian curves");
  }
  const auto& first = std::get<GaussianMeasure>(smooth.elements.front());
  const auto& last = std::get<GaussianMeasure>(smooth.elements.back());
  const std::size_t n = smooth.size();

  MeasureSequence out;
  out.level = smooth.level;
  out.grid_origin = smooth.grid_origin;
  out.elements.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (k == 1.0) {
      out.elements.push_back(smooth.elements[i]);
      continue;
    }
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    const auto& hat = std::get<GaussianMeasure>(smooth.elements[i]);
    const double geo_mean = (1.0 - t) * first.mean() + t * last.mean();
    const double geo_sd = (1.0 - t) * first.stddev() + t * last.stddev();
    const double mean = (1.0 - k) * geo_mean + k * hat.mean();
    const double sd = (1.0 - k) * geo_sd + k * hat.stddev();
    out.elements.emplace_back(GaussianMeasure{mean, sd * sd});
  }
  return out;
}

std::array<double, 2> dipole_field(double x, double y) {
  const double rp = (x + 1.0) * (x + 1.0) + y * y;
  const double rm = (x - 1.0) * (x - 1.0) + y * y;
  if (rp == 0.0 || rm == 0.0) {
    throw Error(ErrorCode::SingularPoint, "the field is singular at the charges (+-1, 0)");
  }
  const double cp = 1.0 / (rp * std::sqrt(rp));
  const double cm = 1.0 / (rm * std::sqrt(rm));
  return {cp * (x + 1.0) - cm * (x - 1.0), (cp - cm) * y};
}

namespace {

bool near_charge(double x, double y) {
  return std::hypot(x + 1.0, y) < kChargeExclusion || std::hypot(x - 1.0, y) < kChargeExclusion;
}

}  // namespace

MeasureSequence simulate_dipole(const DipoleSpec& spec) {
  if (spec.n_particles == 0) throw Error(ErrorCode::BadSpec, "n_particles must be >= 1");
  if (!(spec.timestep > 0.0)) throw Error(ErrorCode::BadSpec, "timestep must be > 0");
  if (spec.n_steps == 0) throw Error(ErrorCode::BadSpec, "n_steps must be >= 1");
  if (!(spec.start_spread >= 0.0)) throw Error(ErrorCode::BadSpec, "start_spread must be >= 0");
  if (!(spec.field_noise_sigma >= 0.0)) throw Error(ErrorCode::BadSpec, "field_noise_sigma must be >= 0");
  if (!std::isfinite(spec.charge)) throw Error(ErrorCode::BadSpec, "charge must be finite");
  if (spec.n_steps % 2 != 0) {
    throw Error(ErrorCode::BadSpec, "n_steps must be even so the trajectory has a dyadic grid");
  }

  Rng rng(spec.seed);
  const std::size_t np = spec.n_particles;
  std::vector<double> pos(2 * np);
  for (std::size_t k = 0; k < np; ++k) {
    for (int attempt = 0;; ++attempt) {
      if (attempt == 1000) throw Error(ErrorCode::BadSpec, "start region sits on a charge");
      // Uniform in the disk by rejection from the square.
      const double u = 2.0 * rng.uniform() - 1.0;
      const double v = 2.0 * rng.uniform() - 1.0;
      if (u * u + v * v > 1.0) continue;
      const double x = spec.start_center[0] + spec.start_spread * u;
      const double y = spec.start_center[1] + spec.start_spread * v;
      if (near_charge(x, y)) continue;
      pos[2 * k] = x;
      pos[2 * k + 1] = y;
      break;
    }
  }

  MeasureSequence seq;
  seq.level = default_level(spec.n_steps + 1);
  seq.elements.reserve(spec.n_steps + 1);
  seq.elements.emplace_back(DiscreteMeasure::uniform(2, pos));
  const double dt = spec.timestep;
  const double sigma = spec.field_noise_sigma;
  for (std::size_t step = 1; step <= spec.n_steps; ++step) {
    for (std::size_t k = 0; k < np; ++k) {
      double& x = pos[2 * k];
      double& y = pos[2 * k + 1];
      std::array<double, 2> v{0.0, 0.0};
      if (spec.charge != 0.0) {
        v = dipole_field(x, y);
        v[0] *= spec.charge;
        v[1] *= spec.charge;
      }
      if (sigma > 0.0) {
        v[0] += sigma * rng.normal();
        v[1] += sigma * rng.normal();
      }
      x += dt * v[0];
      y += dt * v[1];
      if (!std::isfinite(x) || !std::isfinite(y) || (spec.charge != 0.0 && near_charge(x, y))) {
        throw Error(ErrorCode::ParticleHitCharge,
                    "particle " + std::to_string(k) + " reached a charge at step " + std::to_string(step));
      }
    }
    seq.elements.emplace_back(DiscreteMeasure::uniform(2, pos));
  }
  return seq;
}

}  // namespace wmt
