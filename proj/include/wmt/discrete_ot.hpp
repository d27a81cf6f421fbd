#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "wmt/measures.hpp"

namespace wmt {

/// Plan entries below this are stored as exact zeros.
inline constexpr double kPlanPruneTolerance = 1e-12;

/// Transport plan between an m-atom source and an n-atom target, stored
/// dense and row-major. Row i is the mass leaving source atom i.
class Coupling {
 public:
  Coupling() = default;
  Coupling(std::size_t rows, std::size_t cols, std::vector<double> entries, double cost_exponent = 2.0);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double cost_exponent() const noexcept { return p_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return entries_[i * cols_ + j]; }
  std::span<const double> entries() const noexcept { return entries_; }

  std::vector<double> row_sums() const;
  std::vector<double> col_sums() const;
  /// Number of strictly positive entries.
  std::size_t support_size() const noexcept;

  /// Largest |row sum - source weight| and |col sum - target weight|.
  double marginal_residual(const DiscreteMeasure& source, const DiscreteMeasure& target) const;

  friend bool operator==(const Coupling&, const Coupling&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
  double p_ = 2.0;
};

struct TransportCost {
  double value = 0.0;     ///< optimal sum_ij lambda_ij |x_i - y_j|^p
  double distance = 0.0;  ///< value^{1/p}
};

struct TransportSolution {
  Coupling plan;
  TransportCost cost;
};

/// |x - y|^p, computed without pow() for p = 1 and p = 2.
double ground_cost(std::span<const double> x, std::span<const double> y, double p);

/// Exact discrete Kantorovich problem via network simplex with Bland's rule.
/// Throws DimensionMismatch, BadParameter (p < 1), NumericalFailure.
TransportSolution solve_kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p = 2.0);

double wasserstein_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p = 2.0);

/// Cost of an arbitrary feasible plan, sum_ij lambda_ij |x_i - y_j|^p.
double plan_cost(const Coupling& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p);

}  // namespace wmt
