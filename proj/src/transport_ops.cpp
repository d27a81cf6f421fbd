#include "wmt/transport_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wmt/errors.hpp"

namespace wmt {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

void require_same_kind(const Measure& a, const Measure& b) {
  if (kind_of(a) != kind_of(b)) {
    throw Error(ErrorCode::KindMismatch, std::string("cannot combine ") + to_string(kind_of(a)) +
                                             " and " + to_string(kind_of(b)) + " measures");
  }
}

void require_p2(double p) {
  if (p != 2.0) throw Error(ErrorCode::UnsupportedExponent, "Gaussian measures support only p = 2");
}

double root(double value, double p) { return p == 2.0 ? std::sqrt(value) : std::pow(value, 1.0 / p); }

double norm_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::size_t find_atom(const DiscreteMeasure& mu, std::span<const double> x) {
  const double tol2 = kAtomMergeTolerance * kAtomMergeTolerance;
  for (std::size_t k = 0; k < mu.size(); ++k) {
    const auto a = mu.atom(k);
    double s = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) s += (a[c] - x[c]) * (a[c] - x[c]);
    if (s < tol2) return k;
  }
  throw Error(ErrorCode::NumericalFailure, "interpolated atom vanished during merging");
}

std::vector<double> interpolate(std::span<const double> x, std::span<const double> y, double t) {
  std::vector<double> z(x.size());
  for (std::size_t c = 0; c < x.size(); ++c) z[c] = (1.0 - t) * x[c] + t * y[c];
  return z;
}

}  // namespace

bool is_zero(const Detail& psi) noexcept { return std::holds_alternative<ZeroDetail>(psi); }

double distance(const Measure& a, const Measure& b, double p) {
  require_same_kind(a, b);
  if (const auto* ga = std::get_if<GaussianMeasure>(&a)) {
    require_p2(p);
    return gaussian_w2(*ga, std::get<GaussianMeasure>(b));
  }
  return wasserstein_distance(std::get<DiscreteMeasure>(a), std::get<DiscreteMeasure>(b), p);
}

Detail ominus(const Measure& nu, const Measure& mu, double p) {
  require_same_kind(nu, mu);
  if (const auto* gmu = std::get_if<GaussianMeasure>(&mu)) {
    require_p2(p);
    const auto& gnu = std::get<GaussianMeasure>(nu);
    if (gaussian_w2(*gmu, gnu) < kZeroDetailTolerance) return ZeroDetail{};
    return gaussian_ominus(gnu, *gmu);
  }
  const auto& dmu = std::get<DiscreteMeasure>(mu);
  const auto& dnu = std::get<DiscreteMeasure>(nu);
  auto solution = solve_kantorovich(dmu, dnu, p);
  if (solution.cost.distance < kZeroDetailTolerance) return ZeroDetail{};

  TransportDetail out;
  out.dim = dmu.dim();
  out.displacements.resize(dmu.size() * dnu.size() * out.dim);
  for (std::size_t i = 0; i < dmu.size(); ++i) {
    const auto x = dmu.atom(i);
    for (std::size_t j = 0; j < dnu.size(); ++j) {
      const auto y = dnu.atom(j);
      double* d = out.displacements.data() + (i * dnu.size() + j) * out.dim;
      for (std::size_t c = 0; c < out.dim; ++c) d[c] = y[c] - x[c];
    }
  }
  out.plan = std::move(solution.plan);
  return out;
}

Measure oplus(const Measure& mu, const Detail& psi) {
  return std::visit(
      overloaded{
          [&](const ZeroDetail&) -> Measure { return mu; },
          [&](const AffineMap& map) -> Measure {
            const auto* g = std::get_if<GaussianMeasure>(&mu);
            if (!g) throw Error(ErrorCode::IncompatibleDetail, "affine detail needs a Gaussian base");
            return gaussian_oplus(*g, map);
          },
          [&](const TransportDetail& t) -> Measure {
            const auto* d = std::get_if<DiscreteMeasure>(&mu);
            if (!d) throw Error(ErrorCode::IncompatibleDetail, "plan detail needs a discrete base");
            if (t.plan.rows() != d->size() || t.dim != d->dim() ||
                t.displacements.size() != t.plan.rows() * t.plan.cols() * t.dim) {
              throw Error(ErrorCode::IncompatibleDetail,
                          "plan has " + std::to_string(t.plan.rows()) + " rows but the base has " +
                              std::to_string(d->size()) + " atoms");
            }
            const auto rows = t.plan.row_sums();
            for (std::size_t i = 0; i < rows.size(); ++i) {
              if (std::abs(rows[i] - d->weight(i)) > kMarginalTolerance) {
                throw Error(ErrorCode::IncompatibleDetail,
                            "plan row " + std::to_string(i) + " carries " + std::to_string(rows[i]) +
                                " but the base atom has mass " + std::to_string(d->weight(i)));
              }
            }
            // Column-major walk so the output atoms follow the target order.
            std::vector<double> coords;
            std::vector<double> weights;
            for (std::size_t j = 0; j < t.plan.cols(); ++j) {
              for (std::size_t i = 0; i < t.plan.rows(); ++i) {
                const double lambda = t.plan(i, j);
                if (lambda <= 0.0) continue;
                const auto x = d->atom(i);
                const auto v = t.displacement(i, j);
                for (std::size_t c = 0; c < t.dim; ++c) coords.push_back(x[c] + v[c]);
                weights.push_back(lambda);
              }
            }
            return DiscreteMeasure(t.dim, std::move(coords), std::move(weights));
          },
      },
      psi);
}

DiscreteMeasure mccann_average(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                               const Coupling& plan, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "interpolation parameter must lie in [0, 1]");
  }
  if (plan.rows() != mu.size() || plan.cols() != nu.size()) {
    throw Error(ErrorCode::IncompatibleDetail, "plan shape does not match the measures");
  }
  if (t == 0.0) return mu;
  if (t == 1.0) return nu;
  std::vector<double> coords;
  std::vector<double> weights;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double lambda = plan(i, j);
      if (lambda <= 0.0) continue;
      const auto z = interpolate(mu.atom(i), nu.atom(j), t);
      coords.insert(coords.end(), z.begin(), z.end());
      weights.push_back(lambda);
    }
  }
  return DiscreteMeasure(mu.dim(), std::move(coords), std::move(weights));
}

Measure mccann_average(const Measure& mu, const Measure& nu, double t, double p) {
  require_same_kind(mu, nu);
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "interpolation parameter must lie in [0, 1]");
  }
  if (const auto* g = std::get_if<GaussianMeasure>(&mu)) {
    require_p2(p);
    return gaussian_mccann(*g, std::get<GaussianMeasure>(nu), t);
  }
  if (t == 0.0) return mu;
  if (t == 1.0) return nu;
  const auto& a = std::get<DiscreteMeasure>(mu);
  const auto& b = std::get<DiscreteMeasure>(nu);
  return mccann_average(a, b, solve_kantorovich(a, b, p).plan, t);
}

double detail_norm(const Detail& psi, const Measure& mu, double p) {
  return std::visit(
      overloaded{
          [&](const ZeroDetail&) { return 0.0; },
          [&](const AffineMap& map) {
            const auto* g = std::get_if<GaussianMeasure>(&mu);
            if (!g) throw Error(ErrorCode::IncompatibleDetail, "affine detail needs a Gaussian base");
            return affine_lp_norm(map, *g, p);
          },
          [&](const TransportDetail& t) {
            const auto* d = std::get_if<DiscreteMeasure>(&mu);
            if (!d || t.plan.rows() != d->size()) {
              throw Error(ErrorCode::IncompatibleDetail, "plan detail does not fit the base measure");
            }
            double total = 0.0;
            const std::vector<double> origin(t.dim, 0.0);
            for (std::size_t i = 0; i < t.plan.rows(); ++i) {
              for (std::size_t j = 0; j < t.plan.cols(); ++j) {
                const double lambda = t.plan(i, j);
                if (lambda > 0.0) total += lambda * ground_cost(t.displacement(i, j), origin, p);
              }
            }
            return root(total, p);
          },
      },
      psi);
}

double seq_delta(const MeasureSequence& seq, double p) {
  if (seq.size() < 2) throw Error(ErrorCode::TooShort, "delta needs at least two elements");
  double delta = 0.0;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    delta = std::max(delta, distance(seq.elements[i], seq.elements[i + 1], p));
  }
  return delta;
}

std::vector<double> discrete_velocity_norms(const MeasureSequence& seq, double p) {
  if (seq.size() < 2) throw Error(ErrorCode::TooShort, "velocities need at least two elements");
  std::vector<double> out;
  out.reserve(seq.size() - 1);
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    out.push_back(std::ldexp(distance(seq.elements[i], seq.elements[i + 1], p), seq.level));
  }
  return out;
}

LayerNorms layer_norms(const DetailLayer& layer, const MeasureSequence& base, double p) {
  if (layer.details.size() != base.size()) {
    throw Error(ErrorCode::Misaligned, "layer has " + std::to_string(layer.details.size()) +
                                           " details but the base has " + std::to_string(base.size()) +
                                           " elements");
  }
  LayerNorms out;
  out.per_index.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const double v = detail_norm(layer.details[i], base.elements[i], p);
    out.per_index.push_back(v);
    out.one_norm += v;
    out.inf_norm = std::max(out.inf_norm, v);
  }
  return out;
}

LipschitzEstimate detail_lipschitz(const Detail& psi, const Measure& base) {
  return std::visit(
      overloaded{
          [](const ZeroDetail&) { return LipschitzEstimate{0.0, 1.0, {}}; },
          [](const AffineMap& map) {
            return LipschitzEstimate{std::abs(map.slope), std::abs(1.0 + map.slope), {}};
          },
          [&](const TransportDetail& t) {
            const auto* d = std::get_if<DiscreteMeasure>(&base);
            if (!d || t.plan.rows() != d->size()) {
              throw Error(ErrorCode::IncompatibleDetail, "plan detail does not fit the base measure");
            }
            LipschitzEstimate est;
            std::vector<std::size_t> atoms;
            std::vector<std::size_t> partner;
            for (std::size_t i = 0; i < t.plan.rows(); ++i) {
              std::size_t count = 0;
              std::size_t last = 0;
              for (std::size_t j = 0; j < t.plan.cols(); ++j) {
                if (t.plan(i, j) > 0.0) {
                  ++count;
                  last = j;
                }
              }
              if (count > 1) {
                est.split_atoms.push_back(i);
              } else if (count == 1) {
                atoms.push_back(i);
                partner.push_back(last);
              }
            }
            for (std::size_t a = 0; a < atoms.size(); ++a) {
              for (std::size_t b = a + 1; b < atoms.size(); ++b) {
                const auto xa = d->atom(atoms[a]);
                const auto xb = d->atom(atoms[b]);
                const auto va = t.displacement(atoms[a], partner[a]);
                const auto vb = t.displacement(atoms[b], partner[b]);
                std::vector<double> dx(t.dim), dv(t.dim), dt(t.dim);
                for (std::size_t c = 0; c < t.dim; ++c) {
                  dx[c] = xa[c] - xb[c];
                  dv[c] = va[c] - vb[c];
                  dt[c] = dx[c] + dv[c];
                }
                const double sep = norm_of(dx);
                est.displacement = std::max(est.displacement, norm_of(dv) / sep);
                est.transport = std::max(est.transport, norm_of(dt) / sep);
              }
            }
            return est;
          },
      },
      psi);
}

GeodesicSegment::GeodesicSegment(Measure source, Measure target, std::optional<Coupling> plan,
                                 double begin, double end)
    : source_(std::move(source)), target_(std::move(target)), plan_(std::move(plan)), begin_(begin), end_(end) {}

GeodesicSegment GeodesicSegment::between(const Measure& source, const Measure& target, double p) {
  require_same_kind(source, target);
  std::optional<Coupling> plan;
  if (const auto* a = std::get_if<DiscreteMeasure>(&source)) {
    plan = solve_kantorovich(*a, std::get<DiscreteMeasure>(target), p).plan;
  } else {
    require_p2(p);
  }
  return GeodesicSegment(source, target, std::move(plan), 0.0, 1.0);
}

Measure GeodesicSegment::at(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "interpolation parameter must lie in [0, 1]");
  }
  const double s = begin_ + t * (end_ - begin_);
  if (const auto* g = std::get_if<GaussianMeasure>(&source_)) {
    return gaussian_mccann(*g, std::get<GaussianMeasure>(target_), s);
  }
  return mccann_average(std::get<DiscreteMeasure>(source_), std::get<DiscreteMeasure>(target_), *plan_, s);
}

std::pair<GeodesicSegment, GeodesicSegment> GeodesicSegment::split(double t) const {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::BadParameter, "split parameter must lie in [0, 1]");
  }
  const double s = begin_ + t * (end_ - begin_);
  return {GeodesicSegment(source_, target_, plan_, begin_, s),
          GeodesicSegment(source_, target_, plan_, s, end_)};
}

Coupling GeodesicSegment::induced_coupling() const {
  if (!plan_) throw Error(ErrorCode::KindMismatch, "induced couplings exist only for discrete segments");
  const auto& mu = std::get<DiscreteMeasure>(source_);
  const auto& nu = std::get<DiscreteMeasure>(target_);
  const auto from = std::get<DiscreteMeasure>(at(0.0));
  const auto to = std::get<DiscreteMeasure>(at(1.0));
  std::vector<double> entries(from.size() * to.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t j = 0; j < nu.size(); ++j) {
      const double lambda = (*plan_)(i, j);
      if (lambda <= 0.0) continue;
      const std::size_t r = find_atom(from, interpolate(mu.atom(i), nu.atom(j), begin_));
      const std::size_t c = find_atom(to, interpolate(mu.atom(i), nu.atom(j), end_));
      entries[r * to.size() + c] += lambda;
    }
  }
  return Coupling(from.size(), to.size(), std::move(entries), plan_->cost_exponent());
}

}  // namespace wmt
