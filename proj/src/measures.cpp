#include "wmt/measures.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "wmt/errors.hpp"

namespace wmt {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return s;
}

double left_sum(const std::vector<double>& w) {
  double s = 0.0;
  for (double x : w) s += x;
  return s;
}

}  // namespace

GaussianMeasure::GaussianMeasure(double mean, double variance) : mean_(mean), variance_(variance) {
  if (!std::isfinite(mean) || !std::isfinite(variance)) {
    throw Error(ErrorCode::BadParameter, "Gaussian parameters must be finite");
  }
  if (!(variance > 0.0)) {
    throw Error(ErrorCode::BadParameter,
                "Gaussian variance must be positive, got " + std::to_string(variance));
  }
}

double GaussianMeasure::stddev() const noexcept { return std::sqrt(variance_); }

DiscreteMeasure::DiscreteMeasure(std::size_t dim, std::vector<double> coords,
                                 std::vector<double> weights)
    : dim_(dim) {
  if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "atoms must have dimension >= 1");
  if (coords.size() != dim * weights.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(weights.size()) + " atoms of dimension " +
                    std::to_string(dim) + ", got " + std::to_string(coords.size()) +
                    " coordinates");
  }
  if (weights.empty()) throw Error(ErrorCode::BadWeights, "a measure needs at least one atom");
  for (double c : coords) {
    if (!std::isfinite(c)) throw Error(ErrorCode::BadParameter, "atom coordinates must be finite");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0.0) {
      throw Error(ErrorCode::BadWeights, "weights must be finite and nonnegative");
    }
  }
  const double total = left_sum(weights);
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw Error(ErrorCode::BadWeights, "weights sum to " + std::to_string(total) + ", not 1");
  }

  const double tol2 = kAtomMergeTolerance * kAtomMergeTolerance;
  const std::size_t m = weights.size();
  for (std::size_t i = 0; i < m; ++i) {
    if (weights[i] == 0.0) continue;
    std::span<const double> x{coords.data() + i * dim, dim};
    bool merged = false;
    for (std::size_t k = 0; k < weights_.size(); ++k) {
      if (squared_distance(x, atom(k)) < tol2) {
        weights_[k] += weights[i];
        merged = true;
        break;
      }
    }
    if (!merged) {
      coords_.insert(coords_.end(), x.begin(), x.end());
      weights_.push_back(weights[i]);
    }
  }

  const double s = left_sum(weights_);
  for (double& w : weights_) w /= s;
  // Division alone leaves the sum a few ulps off 1; push the residual into
  // the heaviest atom until the left-to-right sum is exactly 1.
  const auto heaviest = static_cast<std::size_t>(
      std::max_element(weights_.begin(), weights_.end()) - weights_.begin());
  for (int round = 0; round < 64; ++round) {
    const double r = 1.0 - left_sum(weights_);
    if (r == 0.0) break;
    const double before = weights_[heaviest];
    weights_[heaviest] += r;
    // Rounding can swallow the correction; fall back to single-ulp steps.
    if (round >= 2 || weights_[heaviest] == before) {
      weights_[heaviest] = std::nextafter(before, r > 0.0 ? 2.0 : 0.0);
    }
  }
  if (left_sum(weights_) != 1.0 && weights_.size() > 1) {
    // a + fl(1 - a) == 1 exactly in binary floating point.
    double head = 0.0;
    for (std::size_t i = 0; i + 1 < weights_.size(); ++i) head += weights_[i];
    if (head <= 1.0) weights_.back() = 1.0 - head;
  }
}

DiscreteMeasure DiscreteMeasure::dirac(std::vector<double> point) {
  const std::size_t d = point.size();
  return DiscreteMeasure(d, std::move(point), {1.0});
}

DiscreteMeasure DiscreteMeasure::uniform(std::size_t dim, std::vector<double> coords) {
  if (dim == 0 || coords.size() % dim != 0 || coords.empty()) {
    throw Error(ErrorCode::DimensionMismatch, "coordinate count is not a multiple of dim");
  }
  const std::size_t m = coords.size() / dim;
  return DiscreteMeasure(dim, std::move(coords),
                         std::vector<double>(m, 1.0 / static_cast<double>(m)));
}

DiscreteMeasure DiscreteMeasure::canonical() const {
  std::vector<std::size_t> order(size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto xa = atom(a);
    const auto xb = atom(b);
    return std::lexicographical_compare(xa.begin(), xa.end(), xb.begin(), xb.end());
  });
  DiscreteMeasure out = *this;
  for (std::size_t r = 0; r < order.size(); ++r) {
    const auto x = atom(order[r]);
    std::copy(x.begin(), x.end(), out.coords_.begin() + static_cast<std::ptrdiff_t>(r * dim_));
    out.weights_[r] = weights_[order[r]];
  }
  return out;
}

MeasureKind kind_of(const Measure& m) noexcept {
  return std::holds_alternative<GaussianMeasure>(m) ? MeasureKind::Gaussian : MeasureKind::Discrete;
}

const char* to_string(MeasureKind kind) noexcept {
  return kind == MeasureKind::Gaussian ? "gaussian" : "discrete";
}

DiscreteMeasure push_forward(
    const DiscreteMeasure& mu,
    const std::function<std::vector<double>(std::span<const double>)>& map) {
  std::vector<double> coords;
  std::size_t out_dim = 0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    auto y = map(mu.atom(i));
    if (i == 0) out_dim = y.size();
    if (y.size() != out_dim) {
      throw Error(ErrorCode::DimensionMismatch, "map returned points of varying dimension");
    }
    coords.insert(coords.end(), y.begin(), y.end());
  }
  return DiscreteMeasure(out_dim, std::move(coords),
                         std::vector<double>(mu.weights().begin(), mu.weights().end()));
}

double MeasureSequence::time_of(std::size_t index) const noexcept {
  return grid_origin + std::ldexp(static_cast<double>(index), -level);
}

MeasureKind MeasureSequence::kind() const {
  if (elements.empty()) throw Error(ErrorCode::TooShort, "empty sequence has no kind");
  return kind_of(elements.front());
}

bool supports_levels(std::size_t n, int levels) noexcept {
  if (levels < 0 || levels > 60) return false;
  const std::size_t step = std::size_t{1} << levels;
  return n >= step + 1 && (n - 1) % step == 0;
}

int default_level(std::size_t n, int cap) noexcept {
  int best = 0;
  for (int j = 1; j <= cap; ++j) {
    if (supports_levels(n, j)) best = j;
  }
  return best;
}

void validate_sequence(const MeasureSequence& seq) {
  if (seq.elements.empty()) throw Error(ErrorCode::TooShort, "sequence is empty");
  if (seq.level < 0) throw Error(ErrorCode::BadParameter, "level must be >= 0");
  if (!std::isfinite(seq.grid_origin)) {
    throw Error(ErrorCode::BadParameter, "grid_origin must be finite");
  }
  const std::size_t n = seq.size();
  if (!supports_levels(n, seq.level)) {
    throw Error(ErrorCode::LengthNotDyadic,
                "length " + std::to_string(n) + " is not 1 mod 2^" + std::to_string(seq.level) +
                    " (or shorter than 2^" + std::to_string(seq.level) + " + 1)");
  }
  const MeasureKind kind = kind_of(seq.elements.front());
  std::size_t dim = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Measure& m = seq.elements[i];
    if (kind_of(m) != kind) {
      throw Error(ErrorCode::MixedKinds, "element " + std::to_string(i) + " is " +
                                             to_string(kind_of(m)) + ", expected " +
                                             to_string(kind));
    }
    if (const auto* d = std::get_if<DiscreteMeasure>(&m)) {
      if (i == 0) dim = d->dim();
      if (d->dim() != dim) {
        throw Error(ErrorCode::DimensionMismatch,
                    "element " + std::to_string(i) + " has dimension " + std::to_string(d->dim()) +
                        ", expected " + std::to_string(dim));
      }
      double s = 0.0;
      for (double w : d->weights()) {
        if (w < 0.0) throw Error(ErrorCode::BadWeights, "negative weight");
        s += w;
      }
      if (std::abs(s - 1.0) > kWeightSumTolerance) {
        throw Error(ErrorCode::BadWeights, "element " + std::to_string(i) + " weights do not sum to 1");
      }
    }
  }
}

}  // namespace wmt
