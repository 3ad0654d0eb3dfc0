#pragma once

#include <cstddef>
#include <vector>

#include "kdee/core.hpp"

namespace kdee {

// 2-D point cloud stored as parallel coordinate arrays.
struct PointCloud {
  std::vector<double> xs;
  std::vector<double> ys;

  std::size_t size() const { return xs.size(); }
};

// 2-D delay embedding: the points (x_i, x_{i+tau}) for i = 0..t-n_max-1.
// The cloud size depends on n_max only, so sweeps over tau at fixed n_max
// compare clouds of identical cardinality.
inline PointCloud takens_embed(const TimeSeries& series, std::size_t tau, std::size_t n_max) {
  if (tau < 1) throw ParameterError("tau must be >= 1");
  if (tau > n_max) throw ParameterError("tau must be <= n_max");
  const std::size_t t = series.samples.size();
  if (t <= n_max)
    throw InsufficientDataError("series length " + std::to_string(t) +
                                " too short for delay upper bound " + std::to_string(n_max));
  const std::size_t count = t - n_max;
  PointCloud cloud;
  cloud.xs.resize(count);
  cloud.ys.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    cloud.xs[i] = series.samples[i];
    cloud.ys[i] = series.samples[i + tau];
  }
  return cloud;
}

}  // namespace kdee
