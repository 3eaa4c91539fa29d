#include "turnscan/spatial.hpp"

#include <algorithm>
#include <cmath>

#include "turnscan/error.hpp"

namespace turnscan {
namespace {

constexpr std::uint32_t kLeafSize = 12;

using Entry = std::pair<double, std::uint32_t>;  // squared distance, index

}  // namespace

KdTree::KdTree(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  if (points_.empty()) throw InvalidInput("KdTree: cannot build from an empty point set");
  for (const Vec3& p : points_) {
    if (!p.allFinite()) throw InvalidInput("KdTree: non-finite point");
  }
  order_.resize(points_.size());
  for (std::uint32_t i = 0; i < order_.size(); ++i) order_[i] = i;
  nodes_.reserve(2 * points_.size() / kLeafSize + 1);
  build(0, static_cast<std::uint32_t>(order_.size()));
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(Node{begin, end});
  if (end - begin <= kLeafSize) return id;

  Vec3 lo = points_[order_[begin]], hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis = 0;
  (hi - lo).maxCoeff(&axis);
  if (hi[axis] == lo[axis]) return id;  // all points coincide

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double ca = points_[a][axis], cb = points_[b][axis];
                     return ca < cb || (ca == cb && a < b);
                   });
  const double split = points_[order_[mid]][axis];
  const std::int32_t left = build(begin, mid);
  const std::int32_t right = build(mid, end);
  Node& node = nodes_[id];
  node.axis = axis;
  node.split = split;
  node.left = left;
  node.right = right;
  return id;
}

void KdTree::search_knn(std::int32_t id, const Vec3& q, std::size_t k,
                        std::vector<Entry>& heap) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const Entry e{(points_[idx] - q).squaredNorm(), idx};
      if (heap.size() < k) {
        heap.push_back(e);
        std::push_heap(heap.begin(), heap.end());
      } else if (e < heap.front()) {
        std::pop_heap(heap.begin(), heap.end());
        heap.back() = e;
        std::push_heap(heap.begin(), heap.end());
      }
    }
    return;
  }
  // Left holds coordinates <= split, right holds coordinates >= split.
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search_knn(near, q, k, heap);
  if (heap.size() < k || diff * diff <= heap.front().first) search_knn(far, q, k, heap);
}

void KdTree::search_radius(std::int32_t id, const Vec3& q, double r2,
                           std::vector<Entry>& hits) const {
  const Node& node = nodes_[id];
  if (node.left < 0) {
    for (std::uint32_t i = node.begin; i < node.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = (points_[idx] - q).squaredNorm();
      if (d2 <= r2) hits.emplace_back(d2, idx);
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::int32_t near = diff < 0 ? node.left : node.right;
  const std::int32_t far = diff < 0 ? node.right : node.left;
  search_radius(near, q, r2, hits);
  if (diff * diff <= r2) search_radius(far, q, r2, hits);
}

Neighbor KdTree::nearest(const Vec3& query) const {
  std::vector<Entry> heap;
  heap.reserve(1);
  search_knn(0, query, 1, heap);
  return {heap.front().second, std::sqrt(heap.front().first)};
}

void KdTree::k_nearest(const Vec3& query, std::size_t k, std::vector<Neighbor>& out) const {
  out.clear();
  if (k == 0) return;
  std::vector<Entry> heap;
  heap.reserve(std::min(k, points_.size()) + 1);
  search_knn(0, query, k, heap);
  std::sort_heap(heap.begin(), heap.end());
  out.reserve(heap.size());
  for (const Entry& e : heap) out.push_back({e.second, std::sqrt(e.first)});
}

std::vector<Neighbor> KdTree::k_nearest(const Vec3& query, std::size_t k) const {
  std::vector<Neighbor> out;
  k_nearest(query, k, out);
  return out;
}

void KdTree::radius_search(const Vec3& query, double radius, std::vector<Neighbor>& out) const {
  out.clear();
  std::vector<Entry> hits;
  search_radius(0, query, radius * radius, hits);
  std::sort(hits.begin(), hits.end());
  out.reserve(hits.size());
  for (const Entry& e : hits) out.push_back({e.second, std::sqrt(e.first)});
}

std::vector<Neighbor> KdTree::radius_search(const Vec3& query, double radius) const {
  std::vector<Neighbor> out;
  radius_search(query, radius, out);
  return out;
}

std::vector<std::vector<Neighbor>> k_nearest_all(const KdTree& tree, std::span<const Vec3> queries,
                                                 std::size_t k, Exec exec) {
  std::vector<std::vector<Neighbor>> result(queries.size());
  parallel_for(exec, queries.size(), [&](std::size_t i) { tree.k_nearest(queries[i], k, result[i]); });
  return result;
}

}  // namespace turnscan
