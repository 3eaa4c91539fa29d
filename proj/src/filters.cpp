#include "turnscan/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include <Eigen/Eigenvalues>

#include "turnscan/error.hpp"
#include "turnscan/spatial.hpp"

namespace turnscan {

bool AxisRange::is_unbounded() const {
  for (int k = 0; k < 3; ++k) {
    if (std::isfinite(min[k]) || std::isfinite(max[k])) return false;
  }
  return true;
}

PointCloud passthrough(const PointCloud& cloud, const AxisRange& range) {
  for (int k = 0; k < 3; ++k) {
    if (range.min[k] > range.max[k])
      throw InvalidInput("passthrough: empty range on axis " + std::to_string(k));
  }
  PointCloud out;
  if (cloud.normals) out.normals.emplace();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (!range.contains(cloud.points[i])) continue;
    out.points.push_back(cloud.points[i]);
    if (cloud.normals) out.normals->push_back((*cloud.normals)[i]);
  }
  return out;
}

PointCloud voxel_downsample(const PointCloud& cloud, double leaf, Exec exec) {
  if (!(leaf > 0.0)) throw InvalidInput("voxel_downsample: leaf size must be positive");
  PointCloud out;
  if (cloud.normals) out.normals.emplace();
  if (cloud.empty()) return out;

  Vec3 lo = cloud.points.front();
  for (const Vec3& p : cloud.points) lo = lo.cwiseMin(p);

  using Key = std::tuple<std::int64_t, std::int64_t, std::int64_t>;  // z, y, x
  std::vector<Key> keys(cloud.size());
  parallel_for(exec, cloud.size(), [&](std::size_t i) {
    const Vec3 cell = ((cloud.points[i] - lo) / leaf).array().floor();
    keys[i] = {static_cast<std::int64_t>(cell.z()), static_cast<std::int64_t>(cell.y()),
               static_cast<std::int64_t>(cell.x())};
  });

  std::vector<std::uint32_t> order(cloud.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });

  for (std::size_t begin = 0; begin < order.size();) {
    std::size_t end = begin;
    Vec3 sum = Vec3::Zero();
    Vec3 normal_sum = Vec3::Zero();
    while (end < order.size() && keys[order[end]] == keys[order[begin]]) {
      sum += cloud.points[order[end]];
      if (cloud.normals) normal_sum += (*cloud.normals)[order[end]];
      ++end;
    }
    out.points.push_back(sum / static_cast<double>(end - begin));
    if (cloud.normals) {
      const double len = normal_sum.norm();
      out.normals->push_back(len > 0.0 ? Vec3(normal_sum / len) : (*cloud.normals)[order[begin]]);
    }
    begin = end;
  }
  return out;
}

OutlierRemoval statistical_outlier_removal(const PointCloud& cloud, std::size_t k, double stddev_mult,
                                           Exec exec) {
  if (k == 0) throw InvalidInput("statistical_outlier_removal: k must be positive");
  if (cloud.size() <= k)
    throw InvalidInput("statistical_outlier_removal: cloud of " + std::to_string(cloud.size()) +
                       " points needs more than k = " + std::to_string(k));
  const KdTree tree(cloud.points);
  OutlierRemoval result;
  result.mean_distances.resize(cloud.size());
  parallel_for(exec, cloud.size(), [&](std::size_t i) {
    std::vector<Neighbor> nn;
    tree.k_nearest(cloud.points[i], k + 1, nn);
    // Drop the query itself; with duplicates the self entry may not be first.
    double sum = 0.0;
    std::size_t used = 0;
    bool skipped_self = false;
    for (const Neighbor& n : nn) {
      if (!skipped_self && n.index == i) {
        skipped_self = true;
        continue;
      }
      if (used == k) break;
      sum += n.distance;
      ++used;
    }
    result.mean_distances[i] = sum / static_cast<double>(used);
  });

  const auto n = static_cast<double>(cloud.size());
  double mean = 0.0;
  for (double d : result.mean_distances) mean += d;
  mean /= n;
  double var = 0.0;
  for (double d : result.mean_distances) var += (d - mean) * (d - mean);
  const double stddev = std::sqrt(var / (n - 1.0));
  result.threshold = mean + stddev_mult * stddev;

  if (cloud.normals) result.kept.normals.emplace();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (result.mean_distances[i] > result.threshold) {
      result.removed_indices.push_back(static_cast<std::uint32_t>(i));
      continue;
    }
    result.kept.points.push_back(cloud.points[i]);
    if (cloud.normals) result.kept.normals->push_back((*cloud.normals)[i]);
  }
  return result;
}

NormalEstimate estimate_normals(const PointCloud& cloud, std::size_t k, const Vec3& viewpoint, Exec exec) {
  if (cloud.size() < 3) throw InvalidInput("estimate_normals: need at least 3 points");
  if (k < 3) throw InvalidInput("estimate_normals: k must be at least 3");
  const KdTree tree(cloud.points);
  NormalEstimate result;
  result.cloud.points = cloud.points;
  std::vector<Vec3> normals(cloud.size());
  std::vector<std::uint8_t> degenerate(cloud.size(), 0);

  parallel_for(exec, cloud.size(), [&](std::size_t i) {
    std::vector<Neighbor> nn;
    tree.k_nearest(cloud.points[i], k, nn);
    Vec3 centroid = Vec3::Zero();
    for (const Neighbor& n : nn) centroid += cloud.points[n.index];
    centroid /= static_cast<double>(nn.size());
    Mat3 cov = Mat3::Zero();
    for (const Neighbor& n : nn) {
      const Vec3 d = cloud.points[n.index] - centroid;
      cov += d * d.transpose();
    }
    const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
    const Vec3 values = eig.eigenvalues();  // ascending
    if (!(values[2] > 0.0) || values[1] <= 1e-10 * values[2]) {
      normals[i] = Vec3::UnitZ();
      degenerate[i] = 1;
      return;
    }
    Vec3 normal = eig.eigenvectors().col(0).normalized();
    if (normal.dot(viewpoint - cloud.points[i]) < 0.0) normal = -normal;
    normals[i] = normal;
  });

  result.degenerate_count = static_cast<std::size_t>(std::count(degenerate.begin(), degenerate.end(), 1));
  result.cloud.normals = std::move(normals);
  return result;
}

}  // namespace turnscan
