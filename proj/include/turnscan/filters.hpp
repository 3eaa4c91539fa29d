#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <vector>

#include "turnscan/core.hpp"
#include "turnscan/exec.hpp"

namespace turnscan {

/// Axis-aligned crop box; an infinite bound leaves that side open.
struct AxisRange {
  std::array<double, 3> min{-std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity(),
                            -std::numeric_limits<double>::infinity()};
  std::array<double, 3> max{std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity(),
                            std::numeric_limits<double>::infinity()};

  static AxisRange unbounded() { return {}; }
  bool contains(const Vec3& p) const {
    for (int k = 0; k < 3; ++k) {
      if (p[k] < min[k] || p[k] > max[k]) return false;
    }
    return true;
  }
  bool is_unbounded() const;
};

/// Keeps points inside the closed box, preserving order. Throws InvalidInput
/// when min > max on some axis.
PointCloud passthrough(const PointCloud& cloud, const AxisRange& range);

/// One centroid per occupied cube of side `leaf`, grid anchored at the cloud's
/// minimum corner. Output ordered by voxel (z, y, x), x fastest.
PointCloud voxel_downsample(const PointCloud& cloud, double leaf, Exec exec = Exec::parallel);

struct OutlierRemoval {
  PointCloud kept;
  std::vector<std::uint32_t> removed_indices;
  std::vector<double> mean_distances;  // d_i per input point
  double threshold = 0.0;              // mean + stddev_mult * stddev
};

/// Removes points whose mean distance to their k nearest neighbors (self
/// excluded) exceeds mean + stddev_mult * stddev over the whole cloud.
/// Throws InvalidInput when size <= k.
OutlierRemoval statistical_outlier_removal(const PointCloud& cloud, std::size_t k, double stddev_mult,
                                           Exec exec = Exec::parallel);

struct NormalEstimate {
  PointCloud cloud;                 // input points with normals
  std::size_t degenerate_count = 0; // neighborhoods of rank < 2, given (0, 0, 1)
};

/// PCA normals over the k-nearest neighborhood (point included), flipped to
/// face `viewpoint`. Throws InvalidInput when size < 3 or k < 3.
NormalEstimate estimate_normals(const PointCloud& cloud, std::size_t k, const Vec3& viewpoint,
                                Exec exec = Exec::parallel);

}  // namespace turnscan
