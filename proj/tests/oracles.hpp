// Independent reference implementations used only by the tests. They favour
// obviousness over speed: linear scans, hash maps, direct formulas.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "turnscan/core.hpp"
#include "turnscan/spatial.hpp"

namespace oracle {

using turnscan::Neighbor;
using turnscan::Vec3;

inline std::vector<Neighbor> all_sorted(std::span<const Vec3> pts, const Vec3& q) {
  std::vector<Neighbor> all;
  for (std::size_t i = 0; i < pts.size(); ++i) all.push_back({static_cast<std::uint32_t>(i), (pts[i] - q).norm()});
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.index < b.index;
  });
  return all;
}

inline std::vector<Neighbor> knn(std::span<const Vec3> pts, const Vec3& q, std::size_t k) {
  auto all = all_sorted(pts, q);
  all.resize(std::min(k, all.size()));
  return all;
}

inline std::vector<Neighbor> radius(std::span<const Vec3> pts, const Vec3& q, double r) {
  auto all = all_sorted(pts, q);
  std::erase_if(all, [r](const Neighbor& n) { return n.distance > r; });
  return all;
}

/// Mean distance to the k nearest other points, by linear scan.
inline std::vector<double> mean_knn_distances(std::span<const Vec3> pts, std::size_t k) {
  std::vector<double> d(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::vector<double> dist;
    for (std::size_t j = 0; j < pts.size(); ++j)
      if (j != i) dist.push_back((pts[i] - pts[j]).norm());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k), dist.end());
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += dist[j];
    d[i] = s / static_cast<double>(k);
  }
  return d;
}

/// Closest point on triangle abc to p, via the Voronoi-region case analysis.
inline Vec3 closest_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + d1 / (d1 - d3) * ab;
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + d2 / (d2 - d6) * ac;
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b);
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

inline double distance_to_mesh(const Vec3& p, const turnscan::TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3& b = mesh.vertices[t[1]];
    const Vec3& c = mesh.vertices[t[2]];
    best = std::min(best, (p - closest_on_triangle(p, a, b, c)).norm());
  }
  return best;
}

/// Root mean square of the point-to-surface distances.
inline double rms_to_mesh(std::span<const Vec3> pts, const turnscan::TriangleMesh& mesh) {
  std::vector<double> sq(pts.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < static_cast<long>(pts.size()); ++i) {
    const double d = distance_to_mesh(pts[static_cast<std::size_t>(i)], mesh);
    sq[static_cast<std::size_t>(i)] = d * d;
  }
  double s = 0.0;
  for (double v : sq) s += v;
  return std::sqrt(s / static_cast<double>(pts.size()));
}

struct StlFacet {
  float normal[3];
  float v[3][3];
  std::uint16_t attribute;
};

/// Minimal binary STL reader: fixed 80-byte header, count, 50-byte records.
inline bool read_stl(std::span<const std::uint8_t> bytes, std::vector<StlFacet>& facets) {
  if (bytes.size() < 84) return false;
  std::uint32_t count = 0;
  for (int i = 0; i < 4; ++i) count |= static_cast<std::uint32_t>(bytes[80 + i]) << (8 * i);
  if (bytes.size() != 84 + 50ull * count) return false;
  facets.resize(count);
  for (std::uint32_t f = 0; f < count; ++f) {
    const std::uint8_t* rec = bytes.data() + 84 + 50ull * f;
    float values[12];
    for (int k = 0; k < 12; ++k) {
      std::uint32_t bits = 0;
      for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(rec[4 * k + i]) << (8 * i);
      std::memcpy(&values[k], &bits, 4);
    }
    for (int k = 0; k < 3; ++k) facets[f].normal[k] = values[k];
    for (int v = 0; v < 3; ++v)
      for (int k = 0; k < 3; ++k) facets[f].v[v][k] = values[3 + 3 * v + k];
    facets[f].attribute = static_cast<std::uint16_t>(rec[48] | (rec[49] << 8));
  }
  return true;
}

/// Voxel centroids through a hash map keyed by integer cell, compared later
/// as an unordered set of points.
inline std::vector<Vec3> voxel_centroids(std::span<const Vec3> pts, double leaf) {
  Vec3 lo = pts[0];
  for (const Vec3& p : pts) lo = lo.cwiseMin(p);
  std::map<std::array<long, 3>, std::pair<Vec3, int>> cells;
  for (const Vec3& p : pts) {
    std::array<long, 3> key;
    for (int k = 0; k < 3; ++k) key[k] = static_cast<long>(std::floor((p[k] - lo[k]) / leaf));
    auto& cell = cells[key];
    if (cell.second == 0) cell.first = Vec3::Zero();
    cell.first += p;
    ++cell.second;
  }
  std::vector<Vec3> out;
  for (auto& [key, cell] : cells) out.push_back(cell.first / cell.second);
  return out;
}

inline turnscan::RigidTransform random_transform(std::mt19937_64& rng, double max_translation = 1.0) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(-max_translation, max_translation);
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return {q.toRotationMatrix(), Vec3(u(rng), u(rng), u(rng))};
}

/// Uniform samples on a sphere by normalizing Gaussian vectors.
inline std::vector<Vec3> sphere_points(std::mt19937_64& rng, std::size_t n, double r, const Vec3& c = Vec3::Zero()) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(c + r * Vec3(g(rng), g(rng), g(rng)).normalized());
  return pts;
}

/// Area-weighted uniform samples on a mesh surface.
inline std::vector<Vec3> sample_surface(const turnscan::TriangleMesh& mesh, std::size_t n, std::mt19937_64& rng) {
  std::vector<double> area;
  for (const auto& t : mesh.triangles)
    area.push_back(0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).norm());
  std::discrete_distribution<std::size_t> pick(area.begin(), area.end());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& t = mesh.triangles[pick(rng)];
    double a = u(rng), b = u(rng);
    if (a + b > 1.0) {
      a = 1.0 - a;
      b = 1.0 - b;
    }
    pts.push_back(mesh.vertices[t[0]] + a * (mesh.vertices[t[1]] - mesh.vertices[t[0]]) +
                  b * (mesh.vertices[t[2]] - mesh.vertices[t[0]]));
  }
  return pts;
}

/// Edge -> number of triangles using it.
inline std::map<std::pair<std::uint32_t, std::uint32_t>, int> edge_use(const turnscan::TriangleMesh& mesh) {
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> use;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++use[std::minmax(t[k], t[(k + 1) % 3])];
  return use;
}

}  // namespace oracle
