#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "wmt/errors.hpp"

namespace wmt::testing {

namespace {

constexpr std::size_t kMaxAtoms = 6;
constexpr int kMaxUnits = 8;

TransportCost finish(double value, double p) { return {value, p == 2.0 ? std::sqrt(value) : std::pow(value, 1.0 / p)}; }

std::vector<double> cost_matrix(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  std::vector<double> c(mu.size() * nu.size());
  for (std::size_t i = 0; i < mu.size(); ++i)
    for (std::size_t j = 0; j < nu.size(); ++j) c[i * nu.size() + j] = ground_cost(mu.atom(i), nu.atom(j), p);
  return c;
}

bool is_uniform(const DiscreteMeasure& m) {
  const double w = 1.0 / static_cast<double>(m.size());
  for (double x : m.weights())
    if (std::abs(x - w) > 1e-12) return false;
  return true;
}

double best_assignment(const std::vector<double>& cost, std::size_t cols, const std::vector<std::size_t>& row_of,
                       const std::vector<std::size_t>& col_of) {
  std::vector<std::size_t> perm(col_of.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (std::size_t u = 0; u < perm.size(); ++u) s += cost[row_of[u] * cols + col_of[perm[u]]];
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(perm.size());
}

std::optional<std::vector<std::size_t>> units(const DiscreteMeasure& m, int k) {
  std::vector<std::size_t> owner;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double scaled = m.weight(i) * k;
    const double r = std::round(scaled);
    if (r < 1.0 || std::abs(scaled - r) > 1e-9) return std::nullopt;
    owner.insert(owner.end(), static_cast<std::size_t>(r), i);
  }
  if (owner.size() != static_cast<std::size_t>(k)) return std::nullopt;
  return owner;
}

struct Dsu {
  std::vector<std::size_t> parent;
  explicit Dsu(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

/// Flows on a spanning tree are forced; peel leaves until every edge is set.
std::optional<double> tree_cost(const std::vector<std::size_t>& edges, const DiscreteMeasure& mu,
                                const DiscreteMeasure& nu, const std::vector<double>& cost) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  std::vector<double> supply(m + n);
  for (std::size_t i = 0; i < m; ++i) supply[i] = mu.weight(i);
  for (std::size_t j = 0; j < n; ++j) supply[m + j] = nu.weight(j);
  std::vector<int> degree(m + n, 0);
  std::vector<bool> done(edges.size(), false);
  for (auto e : edges) {
    ++degree[e / n];
    ++degree[m + e % n];
  }
  double total = 0.0;
  for (std::size_t assigned = 0; assigned < edges.size();) {
    bool progress = false;
    for (std::size_t k = 0; k < edges.size(); ++k) {
      if (done[k]) continue;
      const std::size_t r = edges[k] / n;
      const std::size_t c = m + edges[k] % n;
      std::size_t leaf;
      std::size_t other;
      if (degree[r] == 1) {
        leaf = r;
        other = c;
      } else if (degree[c] == 1) {
        leaf = c;
        other = r;
      } else {
        continue;
      }
      const double flow = supply[leaf];
      if (flow < -1e-12) return std::nullopt;
      total += flow * cost[edges[k]];
      supply[leaf] = 0.0;
      supply[other] -= flow;
      --degree[r];
      --degree[c];
      done[k] = true;
      ++assigned;
      progress = true;
    }
    if (!progress) return std::nullopt;
  }
  for (double s : supply)
    if (std::abs(s) > 1e-9) return std::nullopt;
  return total;
}

double enumerate_trees(const DiscreteMeasure& mu, const DiscreteMeasure& nu, const std::vector<double>& cost,
                       std::size_t max_trees) {
  const std::size_t m = mu.size();
  const std::size_t n = nu.size();
  const std::size_t need = m + n - 1;
  const std::size_t total_edges = m * n;
  double best = std::numeric_limits<double>::infinity();
  std::size_t visited = 0;
  std::vector<std::size_t> chosen;

  // Depth-first over edge subsets, skipping any edge that closes a cycle.
  auto recurse = [&](auto&& self, std::size_t next, const Dsu& dsu) -> void {
    if (chosen.size() == need) {
      if (++visited > max_trees) throw Error(ErrorCode::TooLarge, "too many spanning trees to enumerate");
      if (const auto c = tree_cost(chosen, mu, nu, cost)) best = std::min(best, *c);
      return;
    }
    for (std::size_t e = next; e + (need - chosen.size()) <= total_edges; ++e) {
      Dsu copy = dsu;
      const std::size_t a = copy.find(e / n);
      const std::size_t b = copy.find(m + e % n);
      if (a == b) continue;
      copy.parent[a] = b;
      chosen.push_back(e);
      self(self, e + 1, copy);
      chosen.pop_back();
    }
  };
  recurse(recurse, 0, Dsu(m + n));
  return best;
}

}  // namespace

TransportCost brute_force_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p, std::size_t max_trees) {
  if (mu.size() > kMaxAtoms || nu.size() > kMaxAtoms) {
    throw Error(ErrorCode::TooLarge, "brute force handles at most 6 atoms per side");
  }
  if (mu.dim() != nu.dim()) throw Error(ErrorCode::DimensionMismatch, "dimension mismatch");
  const auto cost = cost_matrix(mu, nu, p);
  const std::size_t n = nu.size();

  if (mu.size() == nu.size() && is_uniform(mu) && is_uniform(nu)) {
    std::vector<std::size_t> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    return finish(best_assignment(cost, n, ids, ids), p);
  }
  for (int k = 1; k <= kMaxUnits; ++k) {
    auto rows = units(mu, k);
    auto cols = units(nu, k);
    if (rows && cols) return finish(best_assignment(cost, n, *rows, *cols), p);
  }
  return finish(enumerate_trees(mu, nu, cost, max_trees), p);
}

TransportCost monotone_1d_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
  if (mu.dim() != 1 || nu.dim() != 1) throw Error(ErrorCode::DimensionMismatch, "monotone oracle needs R^1");
  const auto a = mu.canonical();
  const auto b = nu.canonical();
  std::size_t i = 0;
  std::size_t j = 0;
  double ra = a.weight(0);
  double rb = b.weight(0);
  double value = 0.0;
  while (i < a.size() && j < b.size()) {
    const double flow = std::min(ra, rb);
    value += flow * std::pow(std::abs(a.atom(i)[0] - b.atom(j)[0]), p);
    ra -= flow;
    rb -= flow;
    if (ra <= 1e-15 && ++i < a.size()) ra += a.weight(i);
    if (rb <= 1e-15 && ++j < b.size()) rb += b.weight(j);
  }
  return finish(value, p);
}

}  // namespace wmt::testing
