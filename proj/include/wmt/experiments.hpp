#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include "wmt/measures.hpp"

namespace wmt {

/// Seedable generator with a fixed output stream on every platform:
/// std::mt19937_64 for raw bits, 53-bit uniforms, Box-Muller normals.
/// (std::normal_distribution is implementation-defined, hence not used.)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal.
  double normal();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

struct CurveNoise {
  double mean_sigma = 0.05;
  double var_sigma = 0.05;
  bool taper = true;  ///< scale by sin(pi t) so the noise fades at both ends
};

struct CurveJump {
  double variance_scale = 0.05;  ///< multiplies variances on the middle third
};

struct GaussianCurveSpec {
  GaussianMeasure start{0.0, 1.884};
  GaussianMeasure end{1.0, 0.1084};
  std::size_t n_samples = 129;
  /// Deviation from the geodesic. The mean path is (1-a) linear + a smoothstep
  /// and a * sin^2(pi t) is added to the geodesic variance.
  double bump_amplitude = 1.0;
  std::optional<CurveNoise> noise;
  std::optional<CurveJump> jump;
  std::uint64_t seed = 0;
};

struct GeneratedCurve {
  MeasureSequence sequence;
  std::size_t clamped_variances = 0;  ///< samples raised to the 1e-6 floor
};

inline constexpr double kVarianceFloor = 1e-6;

/// Synthetic Gaussian curve on t = i / (n - 1). The level is the number of
/// trailing zero bits of n - 1.
/// Throws BadSpec.
GeneratedCurve gen_gaussian_curve(const GaussianCurveSpec& spec);

/// Parameter-wise blend (1-k) * geodesic + k * curve on (mean, stddev), the
/// geodesic joining the curve's endpoints. Throws BadParameter.
MeasureSequence gen_weighted_family(const MeasureSequence& smooth, double k);

struct DipoleSpec {
  std::size_t n_particles = 10;
  std::array<double, 2> start_center{-2.5, 1.0};
  double start_spread = 0.3;  ///< radius of the uniform start disk
  double timestep = 0.15;
  std::size_t n_steps = 640;
  double field_noise_sigma = 0.0;
  double charge = 1.0;  ///< 0 switches the field off
  std::uint64_t seed = 0;
};

/// Particles closer than this to a charge are rejected or reported.
inline constexpr double kChargeExclusion = 1e-3;

/// Field of a unit positive charge at (-1, 0) and a unit negative one at
/// (1, 0). Throws SingularPoint at the charges.
std::array<double, 2> dipole_field(double x, double y);

/// Explicit Euler: x += dt * (charge * v(x) + sigma * xi) per particle and
/// step. One uniform measure per step, n_steps + 1 in total.
/// Throws BadSpec, ParticleHitCharge.
MeasureSequence simulate_dipole(const DipoleSpec& spec);

}  // namespace wmt
