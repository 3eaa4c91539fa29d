#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "turnscan/core.hpp"
#include "turnscan/exec.hpp"

namespace turnscan {

struct Neighbor {
  std::uint32_t index;  // position in the array the tree was built from
  double distance;      // Euclidean, meters

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Static, exact 3D k-d tree. Splits at the median of the widest axis.
/// Every query agrees with a linear scan: same index set, ascending distance,
/// distance ties broken by the lower original index.
class KdTree {
 public:
  /// Throws InvalidInput on empty or non-finite input.
  explicit KdTree(std::span<const Vec3> points);

  std::size_t size() const { return points_.size(); }
  const Vec3& point(std::uint32_t index) const { return points_[index]; }

  Neighbor nearest(const Vec3& query) const;

  /// min(k, size()) nearest points, ascending.
  std::vector<Neighbor> k_nearest(const Vec3& query, std::size_t k) const;
  void k_nearest(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const;

  /// All points with distance <= radius, ascending.
  std::vector<Neighbor> radius_search(const Vec3& query, double radius) const;
  void radius_search(const Vec3& query, double radius, std::vector<Neighbor>& out) const;

 private:
  struct Node {
    std::uint32_t begin, end;  // range in order_
    std::int32_t left = -1, right = -1;
    int axis = 0;
    double split = 0.0;
  };

  std::int32_t build(std::uint32_t begin, std::uint32_t end);
  void search_knn(std::int32_t node, const Vec3& q, std::size_t k,
                  std::vector<std::pair<double, std::uint32_t>>& heap) const;
  void search_radius(std::int32_t node, const Vec3& q, double r2,
                     std::vector<std::pair<double, std::uint32_t>>& hits) const;

  std::vector<Vec3> points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

/// k-nearest neighbors for every query, computed per query in parallel.
std::vector<std::vector<Neighbor>> k_nearest_all(const KdTree& tree, std::span<const Vec3> queries,
                                                 std::size_t k, Exec exec = Exec::parallel);

}  // namespace turnscan
