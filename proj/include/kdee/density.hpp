#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "kdee/core.hpp"
#include "kdee/embedding.hpp"
#include "kdee/parallel.hpp"

namespace kdee {

// Rectangular evaluation grid; (x0, y0) is the lower-left corner and values
// are taken at cell centers.
struct GridSpec {
  double x0 = 0.0;
  double y0 = 0.0;
  double dx = 1.0;
  double dy = 1.0;
  int nx = 2;
  int ny = 2;

  bool operator==(const GridSpec&) const = default;

  double center_x(int i) const { return x0 + (i + 0.5) * dx; }
  double center_y(int j) const { return y0 + (j + 0.5) * dy; }
  double cell_area() const { return dx * dy; }
  std::size_t cell_count() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
};

inline void validate(const GridSpec& spec) {
  if (!(spec.dx > 0.0) || !(spec.dy > 0.0)) throw ParameterError("grid cell sizes must be positive");
  if (spec.nx < 2 || spec.ny < 2) throw ParameterError("grid must have at least 2x2 cells");
  if (!std::isfinite(spec.x0) || !std::isfinite(spec.y0) || !std::isfinite(spec.dx) ||
      !std::isfinite(spec.dy))
    throw ParameterError("grid spec must be finite");
}

// Discretized probability density; integrates to 1 after estimate_kde /
// median_grid normalization. Row-major: values[j * nx + i].
struct DensityGrid {
  GridSpec spec;
  std::vector<double> values;

  double cell_area() const { return spec.cell_area(); }
};

// Scott's rule factor n^{-1/(d+4)}.
inline double scott_bandwidth(std::size_t n, int d) {
  if (n < 2) throw ParameterError("bandwidth needs at least 2 points");
  if (d < 1) throw ParameterError("dimension must be >= 1");
  return std::pow(static_cast<double>(n), -1.0 / (d + 4));
}

// 2x2 symmetric covariance.
struct Cov2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  double trace() const { return xx + yy; }
  double det() const { return xx * yy - xy * xy; }
  double max_eigenvalue() const {
    const double half_tr = 0.5 * (xx + yy);
    const double disc = std::sqrt(std::max(0.0, 0.25 * (xx - yy) * (xx - yy) + xy * xy));
    return half_tr + disc;
  }
};

// Unbiased (n-1) sample covariance, matching the reference KDE convention.
inline Cov2 sample_covariance(const PointCloud& cloud) {
  const std::size_t n = cloud.size();
  if (n < 2) throw InsufficientDataError("covariance needs at least 2 points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += cloud.xs[i];
    my += cloud.ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  Cov2 c;
  for (std::size_t i = 0; i < n; ++i) {
    const double ux = cloud.xs[i] - mx;
    const double uy = cloud.ys[i] - my;
    c.xx += ux * ux;
    c.xy += ux * uy;
    c.yy += uy * uy;
  }
  const double denom = static_cast<double>(n - 1);
  c.xx /= denom;
  c.xy /= denom;
  c.yy /= denom;
  return c;
}

namespace density_detail {

// Collinear and constant clouds produce a singular covariance; a small ridge
// keeps degenerate windows (silence, pure trends) from crashing the detector.
inline Cov2 regularized_covariance(const PointCloud& cloud) {
  Cov2 c = sample_covariance(cloud);
  const double tr = c.trace();
  const bool bad = !std::isfinite(c.xx) || !std::isfinite(c.xy) || !std::isfinite(c.yy) ||
                   !(c.det() > 1e-12 * std::max(tr * tr, 1e-300));
  if (bad) {
    const double ridge = 1e-9 * (std::max(tr, 0.0) + 1.0);
    c.xx += ridge;
    c.yy += ridge;
  }
  return c;
}

struct KernelShape {
  Cov2 kernel_cov;   // h^2 * regularized sample covariance
  double det = 0.0;  // det(kernel_cov)
  double qa = 0.0;   // inverse covariance [qa qb; qb qd]
  double qb = 0.0;
  double qd = 0.0;
};

inline KernelShape kernel_shape(const PointCloud& cloud) {
  const Cov2 c = regularized_covariance(cloud);
  const double h = scott_bandwidth(cloud.size(), 2);
  KernelShape k;
  k.kernel_cov = Cov2{h * h * c.xx, h * h * c.xy, h * h * c.yy};
  k.det = k.kernel_cov.det();
  if (!(k.det > 0.0) || !std::isfinite(k.det))
    throw NumericError("kernel covariance is not positive definite");
  k.qa = k.kernel_cov.yy / k.det;
  k.qb = -k.kernel_cov.xy / k.det;
  k.qd = k.kernel_cov.xx / k.det;
  return k;
}

// Contributions with squared Mahalanobis distance above this are below the
// rounding noise of the accumulated sum (exp(-40) ~ 4e-18 relative).
constexpr double kSquaredDistanceCutoff = 80.0;

}  // namespace density_detail

// Bounding box of the cloud expanded on each side by 3 kernel standard
// deviations (3 * sqrt(max eigenvalue of h^2 * cov)); zero-extent axes fall
// back to unit extent centered on the cloud.
inline GridSpec auto_grid(const PointCloud& cloud, int nx = 128, int ny = 128) {
  if (cloud.size() == 0) throw InsufficientDataError("auto_grid needs a nonempty cloud");
  if (nx < 2 || ny < 2) throw ParameterError("grid must have at least 2x2 cells");
  double lo_x = cloud.xs[0], hi_x = cloud.xs[0];
  double lo_y = cloud.ys[0], hi_y = cloud.ys[0];
  for (std::size_t i = 1; i < cloud.size(); ++i) {
    lo_x = std::min(lo_x, cloud.xs[i]);
    hi_x = std::max(hi_x, cloud.xs[i]);
    lo_y = std::min(lo_y, cloud.ys[i]);
    hi_y = std::max(hi_y, cloud.ys[i]);
  }
  if (!(hi_x > lo_x)) {
    const double cx = 0.5 * (lo_x + hi_x);
    lo_x = cx - 0.5;
    hi_x = cx + 0.5;
  }
  if (!(hi_y > lo_y)) {
    const double cy = 0.5 * (lo_y + hi_y);
    lo_y = cy - 0.5;
    hi_y = cy + 0.5;
  }
  double expansion = 0.0;
  if (cloud.size() >= 2) {
    const auto shape = density_detail::kernel_shape(cloud);
    expansion = 3.0 * std::sqrt(std::max(0.0, shape.kernel_cov.max_eigenvalue()));
  }
  GridSpec spec;
  spec.x0 = lo_x - expansion;
  spec.y0 = lo_y - expansion;
  spec.nx = nx;
  spec.ny = ny;
  spec.dx = (hi_x - lo_x + 2.0 * expansion) / nx;
  spec.dy = (hi_y - lo_y + 2.0 * expansion) / ny;
  return spec;
}

// Gaussian KDE of the cloud evaluated at cell centers and renormalized so the
// grid integrates to 1. The kernel covariance is h^2 * sample covariance with
// h = scott_bandwidth(n, 2).
//
// Evaluation walks each (point, row) pair once: along a row the exponent is a
// quadratic in the column index, so consecutive kernel values follow a
// two-term multiplicative recurrence (exact up to rounding) and columns
// outside the distance cutoff are skipped analytically. Threads own disjoint
// row blocks and each cell accumulates points in index order, so the result
// is bitwise identical for any thread count.
inline DensityGrid estimate_kde(const PointCloud& cloud, const GridSpec& spec) {
  using density_detail::kSquaredDistanceCutoff;
  validate(spec);
  const std::size_t n = cloud.size();
  if (n < 3) throw InsufficientDataError("KDE needs at least 3 points");
  const auto shape = density_detail::kernel_shape(cloud);
  const double qa = shape.qa, qb = shape.qb, qd = shape.qd;

  DensityGrid grid;
  grid.spec = spec;
  grid.values.assign(spec.cell_count(), 0.0);

  const double dx = spec.dx, dy = spec.dy;
  const double x_first = spec.center_x(0);
  const double y_first = spec.center_y(0);
  const int nx = spec.nx, ny = spec.ny;
  // Minimum of the quadratic over a row as a function of the row offset.
  const double row_coeff = (qa * qd - qb * qb) / qa;
  const double col_curvature = qa * dx * dx;
  const double col_ratio_step = std::exp(-col_curvature);  // exp(-qa*dx^2)

  parallel_for_chunks(static_cast<std::size_t>(ny), [&](std::size_t j_begin, std::size_t j_end) {
    for (std::size_t j = j_begin; j < j_end; ++j) {
      double* row = grid.values.data() + j * static_cast<std::size_t>(nx);
      const double cy = y_first + static_cast<double>(j) * dy;
      for (std::size_t p = 0; p < n; ++p) {
        const double ey = cy - cloud.ys[p];
        if (row_coeff * ey * ey > kSquaredDistanceCutoff) continue;
        const double ex0 = x_first - cloud.xs[p];
        // q(i) = c2*i^2 + c1*i + c0 along the row.
        const double c2 = col_curvature;
        const double c1 = 2.0 * dx * (qa * ex0 + qb * ey);
        const double c0 = qa * ex0 * ex0 + 2.0 * qb * ex0 * ey + qd * ey * ey;
        const double vertex = -c1 / (2.0 * c2);
        const double q_min = c0 - 0.25 * c1 * c1 / c2;
        if (q_min > kSquaredDistanceCutoff) continue;
        const double half_width = std::sqrt((kSquaredDistanceCutoff - q_min) / c2);
        const int ilo = std::max(0, static_cast<int>(std::ceil(vertex - half_width)));
        const int ihi = std::min(nx - 1, static_cast<int>(std::floor(vertex + half_width)));
        if (ilo > ihi) continue;
        auto q_at = [&](int i) {
          const double fi = static_cast<double>(i);
          return (c2 * fi + c1) * fi + c0;
        };
        if (c2 > 40.0 || ihi - ilo < 4) {
          for (int i = ilo; i <= ihi; ++i) row[i] += std::exp(-0.5 * q_at(i));
        } else {
          double value = std::exp(-0.5 * q_at(ilo));
          double ratio = std::exp(-0.5 * (q_at(ilo + 1) - q_at(ilo)));
          for (int i = ilo; i <= ihi; ++i) {
            row[i] += value;
            value *= ratio;
            ratio *= col_ratio_step;
          }
        }
      }
    }
  });

  const double norm = 1.0 / (static_cast<double>(n) * 2.0 * std::numbers::pi * std::sqrt(shape.det));
  double mass = 0.0;
  for (double& v : grid.values) {
    v *= norm;
    mass += v;
  }
  mass *= spec.cell_area();
  if (!(mass > 0.0)) {
    // Near-delta clouds can underflow every cell; place each point's mass in
    // its containing cell so the grid stays a valid distribution.
    std::fill(grid.values.begin(), grid.values.end(), 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      int i = static_cast<int>(std::floor((cloud.xs[p] - spec.x0) / dx));
      int j = static_cast<int>(std::floor((cloud.ys[p] - spec.y0) / dy));
      i = std::clamp(i, 0, nx - 1);
      j = std::clamp(j, 0, ny - 1);
      grid.values[static_cast<std::size_t>(j) * nx + i] += 1.0;
    }
    mass = 0.0;
    for (double v : grid.values) mass += v;
    mass *= spec.cell_area();
  }
  const double inv_mass = 1.0 / mass;
  for (double& v : grid.values) v *= inv_mass;
  return grid;
}

inline DensityGrid estimate_kde(const PointCloud& cloud, int nx = 128, int ny = 128) {
  return estimate_kde(cloud, auto_grid(cloud, nx, ny));
}

// Cellwise median across grids sharing one spec (even count: mean of the two
// middle values), renormalized to integrate to 1.
inline DensityGrid median_grid(std::span<const DensityGrid> grids) {
  if (grids.empty()) throw ParameterError("median_grid needs at least one grid");
  const GridSpec& spec = grids.front().spec;
  for (const auto& g : grids) {
    if (!(g.spec == spec)) throw ParameterError("median_grid requires identical grid specs");
  }
  const std::size_t cells = spec.cell_count();
  const std::size_t m = grids.size();
  DensityGrid out;
  out.spec = spec;
  out.values.resize(cells);
  std::vector<double> scratch(m);
  for (std::size_t c = 0; c < cells; ++c) {
    for (std::size_t g = 0; g < m; ++g) scratch[g] = grids[g].values[c];
    const std::size_t mid = m / 2;
    std::nth_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(mid), scratch.end());
    double med = scratch[mid];
    if (m % 2 == 0) {
      const double lower = *std::max_element(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(mid));
      med = 0.5 * (med + lower);
    }
    out.values[c] = med;
  }
  double mass = 0.0;
  for (double v : out.values) mass += v;
  mass *= spec.cell_area();
  if (!(mass > 0.0)) throw NumericError("median grid has zero mass");
  const double inv = 1.0 / mass;
  for (double& v : out.values) v *= inv;
  return out;
}

inline DensityGrid median_grid(const std::vector<DensityGrid>& grids) {
  return median_grid(std::span<const DensityGrid>(grids.data(), grids.size()));
}

}  // namespace kdee
