#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "kdee/core.hpp"
#include "kdee/density.hpp"

namespace kdee {

namespace info_detail {

// -sum p log2(p) * area over cells with p > 0 (0*log 0 := 0).
inline double entropy_cells(std::span<const double> p, double cell_area) {
  double acc = 0.0;
  for (double v : p) {
    if (v > 0.0) acc -= v * std::log2(v);
  }
  return acc * cell_area;
}

// sum p log2(p/q) * area over cells with p > 0; +inf when q vanishes where p
// does not.
inline double kl_cells(std::span<const double> p, std::span<const double> q, double cell_area) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      if (!(q[i] > 0.0)) return std::numeric_limits<double>::infinity();
      acc += p[i] * std::log2(p[i] / q[i]);
    }
  }
  return acc * cell_area;
}

// p + 0.001*max(p) cellwise, optionally renormalized to integrate to 1.
inline std::vector<double> regularize(std::span<const double> p, double cell_area, bool renormalize) {
  const double peak = *std::max_element(p.begin(), p.end());
  std::vector<double> out(p.begin(), p.end());
  const double eps = 0.001 * peak;
  double mass = 0.0;
  for (double& v : out) {
    v += eps;
    mass += v;
  }
  if (renormalize) {
    mass *= cell_area;
    if (!(mass > 0.0)) throw NumericError("regularized distribution has zero mass");
    const double inv = 1.0 / mass;
    for (double& v : out) v *= inv;
  }
  return out;
}

inline double symmetrized_kl_regularized_cells(std::span<const double> p, std::span<const double> q,
                                               double cell_area, bool renormalize) {
  const std::vector<double> pr = regularize(p, cell_area, renormalize);
  const std::vector<double> qr = regularize(q, cell_area, renormalize);
  return 0.5 * (kl_cells(pr, qr, cell_area) + kl_cells(qr, pr, cell_area));
}

}  // namespace info_detail

// Differential Shannon entropy of the discretized density, in bits.
inline Bits entropy(const DensityGrid& grid) {
  return Bits{info_detail::entropy_cells(grid.values, grid.cell_area())};
}

// KL divergence D(p||q) in bits. Requires identical grid specs; returns +inf
// when q has a zero cell where p is positive (use the regularized form when
// finiteness is required).
inline Bits kl_divergence(const DensityGrid& p, const DensityGrid& q) {
  if (!(p.spec == q.spec)) throw ParameterError("KL divergence requires identical grid specs");
  return Bits{info_detail::kl_cells(p.values, q.values, p.cell_area())};
}

// (D(p'||q') + D(q'||p')) / 2 with p' = p + 0.001*max(p), q' = q + 0.001*max(q)
// (both renormalized by default). Always finite, nonnegative, and symmetric.
inline Bits symmetrized_kl_regularized(const DensityGrid& p, const DensityGrid& q,
                                       bool renormalize = true) {
  if (!(p.spec == q.spec)) throw ParameterError("KL divergence requires identical grid specs");
  return Bits{info_detail::symmetrized_kl_regularized_cells(p.values, q.values, p.cell_area(),
                                                            renormalize)};
}

// Discrete-distribution overloads (bin area 1), used for periodogram bins.
inline Bits entropy(std::span<const double> pmf) {
  return Bits{info_detail::entropy_cells(pmf, 1.0)};
}

inline Bits kl_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ParameterError("KL divergence requires equal bin counts");
  return Bits{info_detail::kl_cells(p, q, 1.0)};
}

inline Bits symmetrized_kl_regularized(std::span<const double> p, std::span<const double> q,
                                       bool renormalize = true) {
  if (p.size() != q.size()) throw ParameterError("KL divergence requires equal bin counts");
  return Bits{info_detail::symmetrized_kl_regularized_cells(p, q, 1.0, renormalize)};
}

}  // namespace kdee
