#include "generators.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "wmt/transport_ops.hpp"

namespace wmt::testing {

std::size_t uniform_int(Rng& rng, std::size_t lo, std::size_t hi) {
  const auto span = static_cast<double>(hi - lo + 1);
  return lo + std::min(hi - lo, static_cast<std::size_t>(rng.uniform() * span));
}

DiscreteMeasure random_discrete(Rng& rng, std::size_t m, std::size_t dim, bool uniform_weights, double scale) {
  std::vector<double> coords(m * dim);
  for (auto& c : coords) c = scale * (2.0 * rng.uniform() - 1.0);
  if (uniform_weights) return DiscreteMeasure::uniform(dim, std::move(coords));
  std::vector<double> w(m);
  double total = 0.0;
  for (auto& x : w) total += (x = 0.1 + rng.uniform());
  for (auto& x : w) x /= total;
  return DiscreteMeasure(dim, std::move(coords), std::move(w));
}

DiscreteMeasure random_rational(Rng& rng, std::size_t m, std::size_t dim, int units) {
  std::vector<int> k(m, 1);
  for (int extra = units - static_cast<int>(m); extra > 0; --extra) ++k[uniform_int(rng, 0, m - 1)];
  std::vector<double> coords(m * dim);
  for (auto& c : coords) c = 2.0 * rng.uniform() - 1.0;
  std::vector<double> w(m);
  for (std::size_t i = 0; i < m; ++i) w[i] = static_cast<double>(k[i]) / units;
  return DiscreteMeasure(dim, std::move(coords), std::move(w));
}

GaussianMeasure random_gaussian(Rng& rng) {
  const double sd = 0.2 + 1.5 * rng.uniform();
  return {4.0 * rng.uniform() - 2.0, sd * sd};
}

MeasureSequence random_gaussian_sequence(Rng& rng, std::size_t n, int level) {
  MeasureSequence seq;
  seq.level = level;
  double mean = 0.0;
  double sd = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean += 0.3 * rng.normal();
    sd = std::clamp(sd * std::exp(0.2 * rng.normal()), 0.05, 5.0);
    seq.elements.emplace_back(GaussianMeasure{mean, sd * sd});
  }
  return seq;
}

MeasureSequence random_discrete_sequence(Rng& rng, std::size_t n, int level, std::size_t dim,
                                         std::size_t max_atoms) {
  MeasureSequence seq;
  seq.level = level;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t m = uniform_int(rng, 1, max_atoms);
    const bool uniform = rng.uniform() < 0.5;
    seq.elements.emplace_back(random_discrete(rng, m, dim, uniform, 1.0 + 0.1 * static_cast<double>(i)));
  }
  return seq;
}

MeasureSequence sampled_geodesic(const Measure& a, const Measure& b, int level) {
  const auto segment = GeodesicSegment::between(a, b);
  const std::size_t steps = std::size_t{1} << level;
  MeasureSequence seq;
  seq.level = level;
  for (std::size_t k = 0; k <= steps; ++k) seq.elements.push_back(segment.at(std::ldexp(static_cast<double>(k), -level)));
  return seq;
}

MeasureSequence constant_sequence(const Measure& m, std::size_t n, int level) {
  MeasureSequence seq;
  seq.level = level;
  seq.elements.assign(n, m);
  return seq;
}

}  // namespace wmt::testing
