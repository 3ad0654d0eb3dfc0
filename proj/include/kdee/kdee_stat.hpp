#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "kdee/core.hpp"
#include "kdee/density.hpp"
#include "kdee/embedding.hpp"
#include "kdee/infotheory.hpp"
#include "kdee/parallel.hpp"

namespace kdee {

// KE_tau across time scales plus the range statistic delta_ke = max - min.
struct KdeeProfile {
  std::vector<std::size_t> taus;
  std::vector<Bits> ke_values;
  Bits delta_ke{0.0};
};

// KE_tau = entropy of the KDE of the tau-delay embedding. Purely the
// composition of the three stages; the grid is auto-sized per cloud.
inline Bits ke_tau(const TimeSeries& series, std::size_t tau, std::size_t n_max, int grid_nx = 128,
                   int grid_ny = 128) {
  return entropy(estimate_kde(takens_embed(series, tau, n_max), grid_nx, grid_ny));
}

// KE_tau for tau = 1..tau_max with a fixed delay upper bound tau_max, so all
// clouds share cardinality t - tau_max.
inline KdeeProfile kdee_profile(const TimeSeries& series, std::size_t tau_max = 50,
                                int grid_nx = 128, int grid_ny = 128) {
  if (tau_max < 1) throw ParameterError("tau_max must be >= 1");
  if (series.samples.size() <= tau_max)
    throw InsufficientDataError("series length must exceed tau_max");
  if (series.samples.size() - tau_max < 3)
    throw InsufficientDataError("too few embedding points for KDE at this tau_max");
  KdeeProfile profile;
  profile.taus.resize(tau_max);
  profile.ke_values.resize(tau_max);
  parallel_for_each_index(tau_max, [&](std::size_t idx) {
    const std::size_t tau = idx + 1;
    profile.taus[idx] = tau;
    profile.ke_values[idx] = ke_tau(series, tau, tau_max, grid_nx, grid_ny);
  });
  const auto [lo, hi] = std::minmax_element(
      profile.ke_values.begin(), profile.ke_values.end(),
      [](Bits a, Bits b) { return a.value < b.value; });
  profile.delta_ke = Bits{hi->value - lo->value};
  return profile;
}

}  // namespace kdee
