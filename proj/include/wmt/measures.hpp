#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <variant>
#include <vector>

namespace wmt {

/// Atoms closer than this (Euclidean) are merged into one.
inline constexpr double kAtomMergeTolerance = 1e-12;
/// Allowed deviation of a weight vector's sum from 1 before it is an error.
inline constexpr double kWeightSumTolerance = 1e-9;

/// One-dimensional Gaussian law N(mean, variance).
class GaussianMeasure {
 public:
  /// Throws BadParameter unless variance > 0 and both values are finite.
  GaussianMeasure(double mean, double variance);

  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double stddev() const noexcept;

  friend bool operator==(const GaussianMeasure&, const GaussianMeasure&) = default;

 private:
  double mean_;
  double variance_;
};

/// Finitely supported probability measure sum_i w_i delta_{x_i} on R^d.
///
/// Construction canonicalizes the input: atoms within kAtomMergeTolerance
/// of an earlier atom are merged into it (weights summed), zero-weight atoms
/// are dropped, and the weights are rescaled so that their left-to-right sum
/// is exactly 1. Atom order otherwise follows the input.
class DiscreteMeasure {
 public:
  /// `coords` holds the atoms row-major, `dim` coordinates each.
  DiscreteMeasure(std::size_t dim, std::vector<double> coords, std::vector<double> weights);

  static DiscreteMeasure dirac(std::vector<double> point);
  /// Uniform weights over the given points (row-major, `dim` coordinates each).
  static DiscreteMeasure uniform(std::size_t dim, std::vector<double> coords);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> atom(std::size_t i) const noexcept {
    return {coords_.data() + i * dim_, dim_};
  }
  double weight(std::size_t i) const noexcept { return weights_[i]; }
  std::span<const double> weights() const noexcept { return weights_; }
  std::span<const double> coords() const noexcept { return coords_; }

  /// Atoms sorted lexicographically; used for order-insensitive comparison.
  DiscreteMeasure canonical() const;

  friend bool operator==(const DiscreteMeasure&, const DiscreteMeasure&) = default;

 private:
  std::size_t dim_;
  std::vector<double> coords_;
  std::vector<double> weights_;
};

using Measure = std::variant<GaussianMeasure, DiscreteMeasure>;

enum class MeasureKind { Gaussian, Discrete };

MeasureKind kind_of(const Measure& m) noexcept;
const char* to_string(MeasureKind kind) noexcept;

/// Pushforward of a discrete measure by a map R^d -> R^d', with coincident
/// images merged.
DiscreteMeasure push_forward(const DiscreteMeasure& mu,
                             const std::function<std::vector<double>(std::span<const double>)>& map);

/// Finite window of a sequence sampled on the dyadic grid
/// grid_origin + 2^{-level} * {0, 1, ..., n-1}.
struct MeasureSequence {
  std::vector<Measure> elements;
  int level = 0;
  double grid_origin = 0.0;

  std::size_t size() const noexcept { return elements.size(); }
  double time_of(std::size_t index) const noexcept;
  MeasureKind kind() const;
};

/// Checks every sequence invariant; throws the matching error code.
///   LengthNotDyadic: n != 1 (mod 2^level) or n < 2^level + 1
///   MixedKinds, DimensionMismatch, BadWeights, BadParameter (negative level, empty)
void validate_sequence(const MeasureSequence& seq);

/// Largest J <= cap such that n = 1 (mod 2^J) and n >= 2^J + 1.
int default_level(std::size_t n, int cap = 6) noexcept;

/// True iff n = 1 (mod 2^levels) and n >= 2^levels + 1.
bool supports_levels(std::size_t n, int levels) noexcept;

}  // namespace wmt
