#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wmt/measures.hpp"
#include "wmt/transport_ops.hpp"

namespace wmt {

/// Coarse sequence plus one detail layer per refinement level.
///
/// layers[l-1] holds the details of level l (l = 1..J); norms[l-1][i] caches
/// the norm of that detail measured against its prediction at analysis time.
struct Pyramid {
  MeasureSequence coarse;
  std::vector<DetailLayer> layers;
  std::vector<std::vector<double>> norms;
  double p = 2.0;
  MeasureKind kind = MeasureKind::Gaussian;

  int levels() const noexcept { return static_cast<int>(layers.size()); }
};

/// One step of the elementary interpolating scheme: even entries copy the
/// input, odd entries are McCann midpoints. Level goes up by one.
MeasureSequence subdivide(const MeasureSequence& seq, double p = 2.0);

/// r-fold refinement. Every consecutive input pair is joined by a single
/// McCann interpolant whose plan is solved once, and all r rounds sample
/// that interpolant, so refined points of discrete sequences stay on one
/// geodesic even when optimal plans are not unique.
MeasureSequence subdivide_r(const MeasureSequence& seq, int r, double p = 2.0);

/// Keeps even-index elements. Throws BadLength for even lengths or level 0.
MeasureSequence downsample(const MeasureSequence& seq);

/// Forward transform over `levels` rounds of downsampling.
/// Throws LengthNotDyadic, BadParameter (levels > seq.level), UnsupportedExponent.
Pyramid analyze(const MeasureSequence& seq, int levels, double p = 2.0);

/// Inverse transform. Throws Misaligned for structurally invalid pyramids.
MeasureSequence synthesize(const Pyramid& pyr);

/// Structural checks used by synthesize (layer lengths, zero even details).
void validate_pyramid(const Pyramid& pyr);

/// Rebuilds the cached norms by replaying the synthesis predictions.
void recompute_norms(Pyramid& pyr);

/// sum_l w_l ||psi^(l)||_1 from cached norms; weights default to 1.
double optimality_number(const Pyramid& pyr, std::span<const double> level_weights = {});

struct OptimalityOptions {
  bool shift_averaged = false;
  std::vector<double> level_weights;  ///< empty means all ones
};

struct OptimalityResult {
  double omega = 0.0;             ///< the reported value
  double omega_unshifted = 0.0;
  double omega_shifted = 0.0;     ///< only meaningful when shift_averaged
  int shifted_levels = 0;         ///< levels used for the shifted window
  std::size_t dropped_trailing = 0;  ///< trailing elements dropped from the shifted window
};

/// Optimality number of a sequence. With shift_averaged, the window that
/// starts one index later is analyzed too (trailing elements dropped to keep
/// a dyadic length, levels reduced if the window is too short) and the two
/// values are averaged.
OptimalityResult optimality_number(const MeasureSequence& seq, int levels,
                                   const OptimalityOptions& options = {}, double p = 2.0);

/// Replaces every detail whose cached norm exceeds `threshold` with zero.
Pyramid threshold_details(const Pyramid& pyr, double threshold);

/// Count of non-zero details across all layers.
std::size_t count_nonzero_details(const Pyramid& pyr) noexcept;

struct Anomaly {
  int level = 0;          ///< 1-based layer index
  std::size_t index = 0;  ///< position within the layer
  double norm = 0.0;
  double time = 0.0;
};

/// Flags odd-index details whose norm exceeds median + k_sigma * MAD of the
/// layer's non-zero norms (MAD scaled by 1.4826). Layers with fewer than
/// three non-zero norms flag each of them. Sorted by norm, largest first.
std::vector<Anomaly> detect_anomalies(const Pyramid& pyr, const MeasureSequence& base, double k_sigma = 3.0);

/// Per-element W_p between two aligned sequences; Misaligned if lengths differ.
std::vector<double> elementwise_distance(const MeasureSequence& a, const MeasureSequence& b, double p = 2.0);

}  // namespace wmt
