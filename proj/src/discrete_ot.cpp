#include "wmt/discrete_ot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "wmt/errors.hpp"

namespace wmt {

Coupling::Coupling(std::size_t rows, std::size_t cols, std::vector<double> entries, double cost_exponent)
    : rows_(rows), cols_(cols), entries_(std::move(entries)), p_(cost_exponent) {
  if (entries_.size() != rows_ * cols_) {
    throw Error(ErrorCode::DimensionMismatch, "coupling entry count does not match its shape");
  }
  for (double& e : entries_) {
    if (!std::isfinite(e) || e < -kPlanPruneTolerance) {
      throw Error(ErrorCode::BadWeights, "coupling entries must be finite and nonnegative");
    }
    if (e < kPlanPruneTolerance) e = 0.0;
  }
}

std::vector<double> Coupling::row_sums() const {
  std::vector<double> s(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s[i] += (*this)(i, j);
  return s;
}

std::vector<double> Coupling::col_sums() const {
  std::vector<double> s(cols_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) s[j] += (*this)(i, j);
  return s;
}

std::size_t Coupling::support_size() const noexcept {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(), [](double e) { return e > 0.0; }));
}

double Coupling::marginal_residual(const DiscreteMeasure& source, const DiscreteMeasure& target) const {
  if (source.size() != rows_ || target.size() != cols_) return std::numeric_limits<double>::infinity();
  double r = 0.0;
  const auto rs = row_sums();
  const auto cs = col_sums();
  for (std::size_t i = 0; i < rows_; ++i) r = std::max(r, std::abs(rs[i] - source.weight(i)));
  for (std::size_t j = 0; j < cols_; ++j) r = std::max(r, std::abs(cs[j] - target.weight(j)));
  return r;
}

double ground_cost(std::span<const double> x, std::span<const double> y, double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  if (p == 2.0) return s;
  const double r = std::sqrt(s);
  if (p == 1.0) return r;
  return std::pow(r, p);
}

namespace {

/// Network simplex on the complete bipartite transportation graph. Nodes
/// 0..m-1 are sources, m..m+n-1 are sinks; arc k = i*n + j. Entering and
/// leaving arcs follow Bland's rule (lowest eligible index), which keeps the
/// pivot sequence finite and the output deterministic.
class TransportationSimplex {
 public:
  TransportationSimplex(std::span<const double> supply, std::span<const double> demand,
                        std::vector<double> cost)
      : m_(supply.size()),
        n_(demand.size()),
        supply_(supply.begin(), supply.end()),
        demand_(demand.begin(), demand.end()),
        cost_(std::move(cost)),
        flow_(m_ * n_, 0.0),
        basic_(m_ * n_, 0) {
    double cmax = 0.0;
    for (double c : cost_) cmax = std::max(cmax, std::abs(c));
    eps_ = 1e-14 * std::max(1.0, cmax);
  }

  std::vector<double> solve() {
    northwest_corner();
    const std::size_t cap = 50 * (m_ * n_ + m_ + n_) + 1000;
    for (std::size_t iter = 0; iter < cap; ++iter) {
      build_tree();
      compute_potentials();
      const std::size_t entering = find_entering();
      if (entering == kNone) return flow_;
      pivot(entering);
    }
    throw Error(ErrorCode::NumericalFailure,
                "network simplex did not converge within " + std::to_string(cap) + " pivots");
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  void northwest_corner() {
    std::vector<double> ra = supply_;
    std::vector<double> rb = demand_;
    std::size_t i = 0;
    std::size_t j = 0;
    for (;;) {
      const std::size_t k = i * n_ + j;
      const double f = std::max(0.0, std::min(ra[i], rb[j]));
      flow_[k] = f;
      basic_[k] = 1;
      basis_.push_back(k);
      ra[i] -= f;
      rb[j] -= f;
      if (i + 1 == m_ && j + 1 == n_) break;
      if (i + 1 == m_) {
        ++j;
      } else if (j + 1 == n_) {
        ++i;
      } else if (ra[i] <= rb[j]) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void build_tree() {
    adjacency_.assign(m_ + n_, {});
    for (std::size_t k : basis_) {
      const std::size_t i = k / n_;
      const std::size_t j = m_ + k % n_;
      adjacency_[i].push_back({j, k});
      adjacency_[j].push_back({i, k});
    }
  }

  void compute_potentials() {
    potential_.assign(m_ + n_, 0.0);
    std::vector<char> seen(m_ + n_, 0);
    std::vector<std::size_t> queue{0};
    seen[0] = 1;
    for (std::size_t q = 0; q < queue.size(); ++q) {
      const std::size_t u = queue[q];
      for (const auto& [v, k] : adjacency_[u]) {
        if (seen[v]) continue;
        seen[v] = 1;
        // u_i + v_j = c_ij on basic arcs.
        potential_[v] = cost_[k] - potential_[u];
        queue.push_back(v);
      }
    }
  }

  std::size_t find_entering() const {
    for (std::size_t k = 0; k < m_ * n_; ++k) {
      if (basic_[k]) continue;
      const double reduced = cost_[k] - potential_[k / n_] - potential_[m_ + k % n_];
      if (reduced < -eps_) return k;
    }
    return kNone;
  }

  void pivot(std::size_t entering) {
    const std::size_t row = entering / n_;
    const std::size_t col = m_ + entering % n_;

    // Tree path from the entering arc's sink back to its source.
    std::vector<std::size_t> parent_node(m_ + n_, kNone);
    std::vector<std::size_t> parent_arc(m_ + n_, kNone);
    std::vector<std::size_t> queue{col};
    parent_node[col] = col;
    for (std::size_t q = 0; q < queue.size() && parent_node[row] == kNone; ++q) {
      const std::size_t u = queue[q];
      for (const auto& [v, k] : adjacency_[u]) {
        if (parent_node[v] != kNone) continue;
        parent_node[v] = u;
        parent_arc[v] = k;
        queue.push_back(v);
      }
    }
    if (parent_node[row] == kNone) {
      throw Error(ErrorCode::NumericalFailure, "basis is not a spanning tree");
    }

    // Walking from the source towards the sink, arcs alternate -, +, -, ...
    // and the walk has odd length, so the arc at the sink end is also -.
    std::vector<std::size_t> path;
    for (std::size_t u = row; u != col; u = parent_node[u]) path.push_back(parent_arc[u]);

    double theta = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < path.size(); s += 2) theta = std::min(theta, flow_[path[s]]);
    theta = std::max(theta, 0.0);
    std::size_t leaving = kNone;
    for (std::size_t s = 0; s < path.size(); s += 2) {
      const std::size_t k = path[s];
      if (flow_[k] <= theta + kTieTolerance && (leaving == kNone || k < leaving)) leaving = k;
    }

    for (std::size_t s = 0; s < path.size(); ++s) {
      const std::size_t k = path[s];
      flow_[k] += (s % 2 == 0) ? -theta : theta;
    }
    flow_[entering] = theta;
    flow_[leaving] = 0.0;
    basic_[leaving] = 0;
    basic_[entering] = 1;
    *std::find(basis_.begin(), basis_.end(), leaving) = entering;
  }

  static constexpr double kTieTolerance = 1e-15;

  std::size_t m_;
  std::size_t n_;
  std::vector<double> supply_;
  std::vector<double> demand_;
  std::vector<double> cost_;
  std::vector<double> flow_;
  std::vector<char> basic_;
  std::vector<std::size_t> basis_;
  std::vector<double> potential_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adjacency_;
  double eps_ = 0.0;
};

/// Plan for mu == nu (same atom set): each atom stays where it is.
bool identity_plan(const DiscreteMeasure& mu, const DiscreteMeasure& nu, std::vector<double>& plan) {
  if (mu.size() != nu.size()) return false;
  const std::size_t n = mu.size();
  plan.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    bool found = false;
    for (std::size_t j = 0; j < n && !found; ++j) {
      const auto x = mu.atom(i);
      const auto y = nu.atom(j);
      if (std::equal(x.begin(), x.end(), y.begin()) && mu.weight(i) == nu.weight(j)) {
        plan[i * n + j] = mu.weight(i);
        found = true;
      }
    }
    if (!found) return false;
  }
  return true;
}

}  // namespace

double plan_cost(const Coupling& plan, const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  double total = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double lambda = plan(i, j);
      if (lambda > 0.0) total += lambda * ground_cost(mu.atom(i), nu.atom(j), p);
    }
  }
  return total;
}

TransportSolution solve_kantorovich(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (mu.dim() != nu.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "measures live in R^" + std::to_string(mu.dim()) +
                                                  " and R^" + std::to_string(nu.dim()));
  }
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw Error(ErrorCode::BadParameter, "cost exponent must be >= 1");
  }
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();

  std::vector<double> flows;
  if (!identity_plan(mu, nu, flows)) {
    std::vector<double> cost(m * n);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = ground_cost(mu.atom(i), nu.atom(j), p);
    flows = TransportationSimplex(mu.weights(), nu.weights(), std::move(cost)).solve();
  }

  TransportSolution out{Coupling(m, n, std::move(flows), p), {}};
  out.cost.value = plan_cost(out.plan, mu, nu, p);
  out.cost.distance = (p == 2.0) ? std::sqrt(out.cost.value) : std::pow(out.cost.value, 1.0 / p);
  return out;
}

double wasserstein_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  return solve_kantorovich(mu, nu, p).cost.distance;
}

}  // namespace wmt
