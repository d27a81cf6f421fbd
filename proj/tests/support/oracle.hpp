#pragma once

#include <cstddef>

#include "wmt/discrete_ot.hpp"
#include "wmt/measures.hpp"

namespace wmt::testing {

/// Exhaustive optimum of the discrete transport problem, at most 6 atoms a side.
///  - equal sizes with uniform weights: all n! permutation plans
///  - weights that are multiples of 1/K for some K <= 8: split atoms into
///    K unit masses and enumerate K! assignments (integral vertices)
///  - otherwise every spanning tree of K_{m,n} as a candidate basis
/// Throws TooLarge above 6 atoms per side, or when the last path would
/// need more than `max_trees` trees.
TransportCost brute_force_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p = 2.0,
                             std::size_t max_trees = 5'000'000);

/// Monotone rearrangement cost for measures on R.
TransportCost monotone_1d_ot(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p = 2.0);

}  // namespace wmt::testing
