#include "wmt/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wmt/errors.hpp"

namespace wmt {

namespace {

std::size_t layer_length(std::size_t coarse_size, int level) {
  return ((coarse_size - 1) << level) + 1;
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

void require_exponent(MeasureKind kind, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::BadParameter, "cost exponent must be >= 1");
  if (kind == MeasureKind::Gaussian && p != 2.0) {
    throw Error(ErrorCode::UnsupportedExponent, "Gaussian sequences support only p = 2");
  }
}

}  // namespace

MeasureSequence subdivide(const MeasureSequence& seq, double p) {
  if (seq.size() < 2) throw Error(ErrorCode::TooShort, "subdivision needs at least two elements");
  MeasureSequence out;
  out.level = seq.level + 1;
  out.grid_origin = seq.grid_origin;
  out.elements.reserve(2 * seq.size() - 1);
  for (std::size_t i = 0; i < seq.size(); ++i) {
    out.elements.push_back(seq.elements[i]);
    if (i + 1 < seq.size()) {
      out.elements.push_back(mccann_average(seq.elements[i], seq.elements[i + 1], 0.5, p));
    }
  }
  return out;
}

MeasureSequence subdivide_r(const MeasureSequence& seq, int r, double p) {
  if (r < 0) throw Error(ErrorCode::BadParameter, "refinement count must be >= 0");
  if (r == 0) return seq;
  if (seq.size() < 2) throw Error(ErrorCode::TooShort, "subdivision needs at least two elements");
  const std::size_t steps = std::size_t{1} << r;
  MeasureSequence out;
  out.level = seq.level + r;
  out.grid_origin = seq.grid_origin;
  out.elements.reserve((seq.size() - 1) * steps + 1);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    const auto segment = GeodesicSegment::between(seq.elements[i], seq.elements[i + 1], p);
    out.elements.push_back(seq.elements[i]);
    for (std::size_t k = 1; k < steps; ++k) {
      out.elements.push_back(segment.at(std::ldexp(static_cast<double>(k), -r)));
    }
  }
  out.elements.push_back(seq.elements.back());
  return out;
}

MeasureSequence downsample(const MeasureSequence& seq) {
  if (seq.size() % 2 == 0) {
    throw Error(ErrorCode::BadLength, "cannot downsample a sequence of even length " + std::to_string(seq.size()));
  }
  if (seq.level < 1) throw Error(ErrorCode::BadLength, "cannot downsample below level 0");
  MeasureSequence out;
  out.level = seq.level - 1;
  out.grid_origin = seq.grid_origin;
  out.elements.reserve(seq.size() / 2 + 1);
  for (std::size_t i = 0; i < seq.size(); i += 2) out.elements.push_back(seq.elements[i]);
  return out;
}

Pyramid analyze(const MeasureSequence& seq, int levels, double p) {
  validate_sequence(seq);
  if (levels < 0) throw Error(ErrorCode::BadParameter, "levels must be >= 0");
  if (!supports_levels(seq.size(), levels)) {
    throw Error(ErrorCode::LengthNotDyadic, "length " + std::to_string(seq.size()) +
                                                " does not allow " + std::to_string(levels) +
                                                " rounds of downsampling");
  }
  if (levels > seq.level) {
    throw Error(ErrorCode::BadParameter, "sequence at level " + std::to_string(seq.level) +
                                             " cannot be analyzed over " + std::to_string(levels) +
                                             " levels");
  }
  const MeasureKind kind = seq.kind();
  require_exponent(kind, p);

  std::vector<MeasureSequence> scales(static_cast<std::size_t>(levels) + 1);
  scales[static_cast<std::size_t>(levels)] = seq;
  for (int l = levels; l >= 1; --l) {
    scales[static_cast<std::size_t>(l - 1)] = downsample(scales[static_cast<std::size_t>(l)]);
  }

  Pyramid pyr;
  pyr.coarse = scales.front();
  pyr.p = p;
  pyr.kind = kind;
  for (int l = 1; l <= levels; ++l) {
    const auto& fine = scales[static_cast<std::size_t>(l)];
    const auto predicted = subdivide(scales[static_cast<std::size_t>(l - 1)], p);
    DetailLayer layer;
    layer.level = l;
    std::vector<double> norms(fine.size(), 0.0);
    layer.details.reserve(fine.size());
    for (std::size_t i = 0; i < fine.size(); ++i) {
      if (i % 2 == 0) {
        layer.details.emplace_back(ZeroDetail{});
        continue;
      }
      layer.details.push_back(ominus(fine.elements[i], predicted.elements[i], p));
      norms[i] = detail_norm(layer.details.back(), predicted.elements[i], p);
    }
    pyr.layers.push_back(std::move(layer));
    pyr.norms.push_back(std::move(norms));
  }
  return pyr;
}

void validate_pyramid(const Pyramid& pyr) {
  validate_sequence(pyr.coarse);
  if (pyr.coarse.kind() != pyr.kind) {
    throw Error(ErrorCode::Misaligned, "coarse sequence kind does not match the pyramid kind");
  }
  if (pyr.levels() > 0 && pyr.coarse.size() < 2) {
    throw Error(ErrorCode::Misaligned, "a pyramid with detail layers needs at least two coarse elements");
  }
  if (!pyr.norms.empty() && pyr.norms.size() != pyr.layers.size()) {
    throw Error(ErrorCode::Misaligned, "norm table does not match the layer count");
  }
  for (int l = 1; l <= pyr.levels(); ++l) {
    const auto& layer = pyr.layers[static_cast<std::size_t>(l - 1)];
    const std::size_t expected = layer_length(pyr.coarse.size(), l);
    if (layer.details.size() != expected) {
      throw Error(ErrorCode::Misaligned, "layer " + std::to_string(l) + " has " +
                                             std::to_string(layer.details.size()) + " details, expected " +
                                             std::to_string(expected));
    }
    if (!pyr.norms.empty() && pyr.norms[static_cast<std::size_t>(l - 1)].size() != expected) {
      throw Error(ErrorCode::Misaligned, "norm row " + std::to_string(l) + " is misaligned");
    }
    for (std::size_t i = 0; i < expected; i += 2) {
      if (!is_zero(layer.details[i])) {
        throw Error(ErrorCode::Misaligned,
                    "layer " + std::to_string(l) + " has a non-zero detail at even index " + std::to_string(i));
      }
    }
    for (const auto& d : layer.details) {
      const bool gaussian_detail = std::holds_alternative<AffineMap>(d);
      const bool plan_detail = std::holds_alternative<TransportDetail>(d);
      if ((pyr.kind == MeasureKind::Gaussian && plan_detail) ||
          (pyr.kind == MeasureKind::Discrete && gaussian_detail)) {
        throw Error(ErrorCode::Misaligned, "detail kind does not match the pyramid kind");
      }
    }
  }
}

MeasureSequence synthesize(const Pyramid& pyr) {
  validate_pyramid(pyr);
  MeasureSequence current = pyr.coarse;
  for (const auto& layer : pyr.layers) {
    auto predicted = subdivide(current, pyr.p);
    for (std::size_t i = 1; i < predicted.size(); i += 2) {
      predicted.elements[i] = oplus(predicted.elements[i], layer.details[i]);
    }
    current = std::move(predicted);
  }
  return current;
}

void recompute_norms(Pyramid& pyr) {
  pyr.norms.clear();
  validate_pyramid(pyr);
  MeasureSequence current = pyr.coarse;
  for (const auto& layer : pyr.layers) {
    auto predicted = subdivide(current, pyr.p);
    std::vector<double> norms(predicted.size(), 0.0);
    for (std::size_t i = 1; i < predicted.size(); i += 2) {
      norms[i] = detail_norm(layer.details[i], predicted.elements[i], pyr.p);
      predicted.elements[i] = oplus(predicted.elements[i], layer.details[i]);
    }
    pyr.norms.push_back(std::move(norms));
    current = std::move(predicted);
  }
}

double optimality_number(const Pyramid& pyr, std::span<const double> level_weights) {
  if (!level_weights.empty() && level_weights.size() != pyr.norms.size()) {
    throw Error(ErrorCode::BadParameter, "need one weight per level");
  }
  double omega = 0.0;
  for (std::size_t l = 0; l < pyr.norms.size(); ++l) {
    double one_norm = 0.0;
    for (double v : pyr.norms[l]) one_norm += v;
    omega += (level_weights.empty() ? 1.0 : level_weights[l]) * one_norm;
  }
  return omega;
}

OptimalityResult optimality_number(const MeasureSequence& seq, int levels, const OptimalityOptions& options,
                                   double p) {
  OptimalityResult result;
  result.omega_unshifted = optimality_number(analyze(seq, levels, p), options.level_weights);
  result.omega = result.omega_unshifted;
  if (!options.shift_averaged) return result;

  // Window starting one index later; keep the longest dyadic prefix.
  const std::size_t available = seq.size() - 1;
  int shift_levels = levels;
  while (shift_levels > 0 && available < (std::size_t{1} << shift_levels) + 1) --shift_levels;
  const std::size_t step = std::size_t{1} << shift_levels;
  const std::size_t length = shift_levels == 0 ? available : ((available - 1) / step) * step + 1;

  MeasureSequence shifted;
  // Grid times of the window are unused; its level only has to admit the length.
  shifted.level = seq.level;
  while (shifted.level > shift_levels && !supports_levels(length, shifted.level)) --shifted.level;
  shifted.grid_origin = seq.time_of(1);
  shifted.elements.assign(seq.elements.begin() + 1, seq.elements.begin() + 1 + static_cast<std::ptrdiff_t>(length));
  result.shifted_levels = shift_levels;
  result.dropped_trailing = available - length;

  std::vector<double> weights = options.level_weights;
  if (!weights.empty()) weights.resize(static_cast<std::size_t>(shift_levels));
  result.omega_shifted = shift_levels == 0 ? 0.0 : optimality_number(analyze(shifted, shift_levels, p), weights);
  result.omega = 0.5 * (result.omega_unshifted + result.omega_shifted);
  return result;
}

Pyramid threshold_details(const Pyramid& pyr, double threshold) {
  if (!(threshold >= 0.0)) throw Error(ErrorCode::BadParameter, "threshold must be >= 0");
  Pyramid out = pyr;
  if (out.norms.size() != out.layers.size()) recompute_norms(out);
  for (std::size_t l = 0; l < out.layers.size(); ++l) {
    auto& details = out.layers[l].details;
    for (std::size_t i = 0; i < details.size(); ++i) {
      if (out.norms[l][i] > threshold) {
        details[i] = ZeroDetail{};
        out.norms[l][i] = 0.0;
      }
    }
  }
  return out;
}

std::size_t count_nonzero_details(const Pyramid& pyr) noexcept {
  std::size_t count = 0;
  for (const auto& layer : pyr.layers)
    for (const auto& d : layer.details) count += is_zero(d) ? 0 : 1;
  return count;
}

std::vector<Anomaly> detect_anomalies(const Pyramid& pyr, const MeasureSequence& base, double k_sigma) {
  if (pyr.norms.size() != pyr.layers.size()) {
    throw Error(ErrorCode::Misaligned, "pyramid has no cached norms");
  }
  const std::size_t finest = pyr.layers.empty() ? pyr.coarse.size() : pyr.layers.back().details.size();
  if (base.size() != finest) {
    throw Error(ErrorCode::Misaligned, "base sequence does not match the finest layer");
  }
  constexpr double kMadToSigma = 1.4826;
  std::vector<Anomaly> flags;
  for (std::size_t l = 0; l < pyr.norms.size(); ++l) {
    const auto& norms = pyr.norms[l];
    const int level = static_cast<int>(l) + 1;
    const int absolute_level = base.level - pyr.levels() + level;
    std::vector<double> nonzero;
    for (std::size_t i = 1; i < norms.size(); i += 2) {
      if (norms[i] > 0.0) nonzero.push_back(norms[i]);
    }
    if (nonzero.empty()) continue;
    double cutoff = 0.0;
    if (nonzero.size() >= 3) {
      const double med = median_of(nonzero);
      std::vector<double> deviations;
      deviations.reserve(nonzero.size());
      for (double v : nonzero) deviations.push_back(std::abs(v - med));
      cutoff = med + k_sigma * kMadToSigma * median_of(std::move(deviations));
    }
    for (std::size_t i = 1; i < norms.size(); i += 2) {
      if (norms[i] > 0.0 && norms[i] > cutoff) {
        flags.push_back({level, i, norms[i],
                         base.grid_origin + std::ldexp(static_cast<double>(i), -absolute_level)});
      }
    }
  }
  std::stable_sort(flags.begin(), flags.end(), [](const Anomaly& a, const Anomaly& b) { return a.norm > b.norm; });
  return flags;
}

std::vector<double> elementwise_distance(const MeasureSequence& a, const MeasureSequence& b, double p) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::Misaligned, "sequences differ in length: " + std::to_string(a.size()) + " vs " +
                                           std::to_string(b.size()));
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = distance(a.elements[i], b.elements[i], p);
  return out;
}

}  // namespace wmt
