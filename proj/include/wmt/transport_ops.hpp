#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "wmt/discrete_ot.hpp"
#include "wmt/gaussian_ot.hpp"
#include "wmt/measures.hpp"

namespace wmt {

/// nu (-) mu returns ZeroDetail when W_p(mu, nu) falls below this.
inline constexpr double kZeroDetailTolerance = 1e-12;
/// Row marginals of a plan must match the base weights this closely for (+).
inline constexpr double kMarginalTolerance = 1e-8;

/// The trivial zero map; leaves every base measure unchanged.
struct ZeroDetail {
  friend bool operator==(const ZeroDetail&, const ZeroDetail&) = default;
};

/// Discrete difference: every vector y_j - x_i along which mass may move,
/// together with the plan saying how much does.
struct TransportDetail {
  std::size_t dim = 0;
  /// rows x cols x dim, row-major.
  std::vector<double> displacements;
  Coupling plan;

  std::span<const double> displacement(std::size_t i, std::size_t j) const noexcept {
    return {displacements.data() + (i * plan.cols() + j) * dim, dim};
  }

  friend bool operator==(const TransportDetail&, const TransportDetail&) = default;
};

using Detail = std::variant<ZeroDetail, AffineMap, TransportDetail>;

bool is_zero(const Detail& psi) noexcept;

/// Details aligned index-for-index with a refined sequence; `level` counts
/// refinements above the coarse sequence (1-based).
struct DetailLayer {
  std::vector<Detail> details;
  int level = 0;
};

/// W_p for either measure kind. Gaussian pairs require p = 2.
double distance(const Measure& a, const Measure& b, double p = 2.0);

/// nu (-) mu. Throws KindMismatch, DimensionMismatch, UnsupportedExponent.
Detail ominus(const Measure& nu, const Measure& mu, double p = 2.0);

/// mu (+) psi. Throws IncompatibleDetail or DegenerateMap.
Measure oplus(const Measure& mu, const Detail& psi);

/// McCann average M(mu, nu; t). Throws BadParameter, KindMismatch.
Measure mccann_average(const Measure& mu, const Measure& nu, double t, double p = 2.0);

/// Discrete McCann average along a given plan; atoms (1-t)x_i + t y_j with
/// mass lambda_ij, coincident atoms merged.
DiscreteMeasure mccann_average(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Coupling& plan, double t);

/// ||psi||_{L^p(mu)}; for plans, (sum_ij |d_ij|^p lambda_ij)^{1/p}.
double detail_norm(const Detail& psi, const Measure& mu, double p = 2.0);

/// max_i W_p(mu_i, mu_{i+1}). Throws TooShort for fewer than two elements.
double seq_delta(const MeasureSequence& seq, double p = 2.0);

/// W_p(mu_i, mu_{i+1}) * 2^level for every consecutive pair.
std::vector<double> discrete_velocity_norms(const MeasureSequence& seq, double p = 2.0);

struct LayerNorms {
  double one_norm = 0.0;
  double inf_norm = 0.0;
  std::vector<double> per_index;
};

/// Norms of a detail layer, each detail measured against the aligned
/// element of `base`. Throws Misaligned when the lengths differ.
LayerNorms layer_norms(const DetailLayer& layer, const MeasureSequence& base, double p = 2.0);

struct LipschitzEstimate {
  double displacement = 0.0;  ///< Lip(psi) over the base atoms
  double transport = 0.0;     ///< Lip(I + psi) over the base atoms
  std::vector<std::size_t> split_atoms;  ///< base atoms whose mass is split (excluded)
};

/// Lipschitz constants of a detail seen as a map on the base measure's support.
LipschitzEstimate detail_lipschitz(const Detail& psi, const Measure& base);

/// A McCann interpolant between two measures with its plan fixed once, so
/// that repeated refinement stays on one geodesic. A segment covers the
/// parameter window [begin, end] of its parent interpolant; `at` and `split`
/// take parameters local to that window.
class GeodesicSegment {
 public:
  static GeodesicSegment between(const Measure& source, const Measure& target, double p = 2.0);

  Measure at(double t) const;
  std::pair<GeodesicSegment, GeodesicSegment> split(double t) const;

  double begin() const noexcept { return begin_; }
  double end() const noexcept { return end_; }

  /// Plan between at(0) and at(1) induced by the parent plan (discrete only):
  /// mass lambda_ij flows from the (i,j) atom at `begin` to the (i,j) atom at `end`.
  Coupling induced_coupling() const;

 private:
  GeodesicSegment(Measure source, Measure target, std::optional<Coupling> plan, double begin, double end);

  Measure source_;
  Measure target_;
  std::optional<Coupling> plan_;
  double begin_ = 0.0;
  double end_ = 1.0;
};

}  // namespace wmt
