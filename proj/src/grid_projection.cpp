#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "turnscan/mesh.hpp"
#include "turnscan/spatial.hpp"

namespace turnscan {
namespace {

/// Dense index space over cells; corners use the same layout with one extra
/// sample per axis.
struct Grid {
  Vec3 origin;
  double resolution = 0.0;
  std::array<std::int64_t, 3> cells{};  // per axis

  std::int64_t cell_id(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x + cells[0] * (y + cells[1] * z);
  }
  std::int64_t corner_id(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x + (cells[0] + 1) * (y + (cells[1] + 1) * z);
  }
  std::array<std::int64_t, 3> corner_coords(std::int64_t id) const {
    const std::int64_t sx = cells[0] + 1, sy = cells[1] + 1;
    return {id % sx, (id / sx) % sy, id / (sx * sy)};
  }
  Vec3 corner_position(const std::array<std::int64_t, 3>& c) const {
    return origin + resolution * Vec3(static_cast<double>(c[0]), static_cast<double>(c[1]), static_cast<double>(c[2]));
  }
  std::size_t cell_count() const { return static_cast<std::size_t>(cells[0] * cells[1] * cells[2]); }
};

/// In-place 1D max filter of radius r along one axis of a dense byte volume.
void dilate_axis(std::vector<std::uint8_t>& v, const Grid& g, int axis, int r) {
  const std::array<std::int64_t, 3> n = g.cells;
  std::vector<std::uint8_t> line, out;
  std::array<std::int64_t, 3> c{};
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  for (c[a2] = 0; c[a2] < n[a2]; ++c[a2]) {
    for (c[a1] = 0; c[a1] < n[a1]; ++c[a1]) {
      line.resize(static_cast<std::size_t>(n[axis]));
      for (c[axis] = 0; c[axis] < n[axis]; ++c[axis]) line[static_cast<std::size_t>(c[axis])] = v[static_cast<std::size_t>(g.cell_id(c[0], c[1], c[2]))];
      out.assign(line.size(), 0);
      std::int64_t last = -(static_cast<std::int64_t>(r) + 1) - 1;  // last occupied position seen
      for (std::int64_t i = 0; i < n[axis]; ++i) {
        if (line[static_cast<std::size_t>(i)]) last = i;
        if (i - last <= r) out[static_cast<std::size_t>(i)] = 1;
      }
      last = n[axis] + r + 1;
      for (std::int64_t i = n[axis] - 1; i >= 0; --i) {
        if (line[static_cast<std::size_t>(i)]) last = i;
        if (last - i <= r) out[static_cast<std::size_t>(i)] = 1;
      }
      for (c[axis] = 0; c[axis] < n[axis]; ++c[axis]) v[static_cast<std::size_t>(g.cell_id(c[0], c[1], c[2]))] = out[static_cast<std::size_t>(c[axis])];
    }
  }
}

}  // namespace

TriangleMesh grid_projection(const PointCloud& cloud, const GridParams& params, Exec exec) {
  if (!cloud.has_normals()) throw InvalidInput("grid_projection: cloud has no normals");
  if (cloud.empty()) throw InvalidInput("grid_projection: empty cloud");
  if (!(params.resolution > 0.0)) throw InvalidInput("grid_projection: resolution must be positive");
  if (params.padding < 1) throw InvalidInput("grid_projection: padding must be at least 1");

  Vec3 lo = cloud.points.front(), hi = lo;
  for (const Vec3& p : cloud.points) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  if ((hi - lo).maxCoeff() < params.resolution)
    throw InvalidInput("grid_projection: resolution " + std::to_string(params.resolution) +
                       " exceeds the cloud's bounding box");

  const int pad = params.padding;
  Grid grid;
  grid.resolution = params.resolution;
  grid.origin = lo - Vec3::Constant((pad + 1) * params.resolution);
  for (int k = 0; k < 3; ++k)
    grid.cells[k] = static_cast<std::int64_t>(std::floor((hi[k] - lo[k]) / params.resolution)) + 2 * (pad + 1) + 1;

  // Occupied cells, then padding shells (Chebyshev dilation).
  std::vector<std::uint8_t> active(grid.cell_count(), 0);
  for (const Vec3& p : cloud.points) {
    const Vec3 c = ((p - grid.origin) / params.resolution).array().floor();
    active[static_cast<std::size_t>(grid.cell_id(static_cast<std::int64_t>(c.x()), static_cast<std::int64_t>(c.y()),
                                                 static_cast<std::int64_t>(c.z())))] = 1;
  }
  for (int axis = 0; axis < 3; ++axis) dilate_axis(active, grid, axis, pad);

  // Corners of active cells, ascending id.
  std::vector<std::int64_t> corners;
  for (std::int64_t z = 0; z < grid.cells[2]; ++z)
    for (std::int64_t y = 0; y < grid.cells[1]; ++y)
      for (std::int64_t x = 0; x < grid.cells[0]; ++x) {
        if (!active[static_cast<std::size_t>(grid.cell_id(x, y, z))]) continue;
        for (int d = 0; d < 8; ++d) corners.push_back(grid.corner_id(x + (d & 1), y + ((d >> 1) & 1), z + ((d >> 2) & 1)));
      }
  std::sort(corners.begin(), corners.end());
  corners.erase(std::unique(corners.begin(), corners.end()), corners.end());

  // Signed field: offset from the nearest data points along their normals,
  // Gaussian-weighted over the k nearest (k = 1 is the plain nearest-point
  // field).
  const KdTree tree(cloud.points);
  const std::vector<Vec3>& normals = *cloud.normals;
  const std::size_t k = std::min<std::size_t>(std::max(params.nearest_neighbors, 1), cloud.size());
  std::vector<double> field(corners.size());
  parallel_for(exec, corners.size(), [&](std::size_t i) {
    const Vec3 c = grid.corner_position(grid.corner_coords(corners[i]));
    thread_local std::vector<Neighbor> nn;
    tree.k_nearest(c, k, nn);
    const double h2 = std::max(nn.back().distance * nn.back().distance, 1e-300);
    double sum = 0.0, wsum = 0.0;
    for (const Neighbor& m : nn) {
      const double w = std::exp(-m.distance * m.distance / h2);
      sum += w * normals[m.index].dot(c - cloud.points[m.index]);
      wsum += w;
    }
    field[i] = sum / wsum;
  });
  auto value_at = [&](std::int64_t x, std::int64_t y, std::int64_t z) -> const double* {
    const std::int64_t id = grid.corner_id(x, y, z);
    const auto it = std::lower_bound(corners.begin(), corners.end(), id);
    if (it == corners.end() || *it != id) return nullptr;
    return &field[static_cast<std::size_t>(it - corners.begin())];
  };
  auto inside = [](double f) { return f < 0.0; };

  // A face whose corner signs alternate would put four quads on one mesh
  // edge. Its outside corner nearest the surface is moved inside; flips only
  // go one way, so the loop terminates.
  for (;;) {
    std::size_t flips = 0;
    for (std::size_t i = 0; i < corners.size(); ++i) {
      const auto c = grid.corner_coords(corners[i]);
      for (int axis = 0; axis < 3; ++axis) {
        const int u = (axis + 1) % 3, v = (axis + 2) % 3;
        std::array<double*, 4> f{&field[i], nullptr, nullptr, nullptr};
        static constexpr int steps[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
        bool present = true;
        for (int k = 1; k < 4 && present; ++k) {
          std::array<std::int64_t, 3> n = c;
          n[u] += steps[k][0];
          n[v] += steps[k][1];
          f[k] = const_cast<double*>(value_at(n[0], n[1], n[2]));
          present = f[k] != nullptr;
        }
        if (!present) continue;
        const bool s0 = inside(*f[0]), s1 = inside(*f[1]), s2 = inside(*f[2]), s3 = inside(*f[3]);
        if (!(s0 == s2 && s1 == s3 && s0 != s1)) continue;
        const int a = s0 ? 1 : 0, b = a + 2;
        double* weakest = *f[a] <= *f[b] ? f[a] : f[b];
        *weakest = -std::max(*weakest, 1e-12);
        ++flips;
      }
    }
    if (flips == 0) break;
  }

  // Crossing cell edges whose four surrounding cells are active become quads.
  struct Quad {
    std::array<std::int64_t, 4> cells;
  };
  std::vector<Quad> quads;
  auto is_active = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    if (x < 0 || y < 0 || z < 0 || x >= grid.cells[0] || y >= grid.cells[1] || z >= grid.cells[2]) return false;
    return active[static_cast<std::size_t>(grid.cell_id(x, y, z))] != 0;
  };
  for (std::size_t i = 0; i < corners.size(); ++i) {
    const auto c = grid.corner_coords(corners[i]);
    for (int axis = 0; axis < 3; ++axis) {
      std::array<std::int64_t, 3> n = c;
      ++n[axis];
      const double* f1 = value_at(n[0], n[1], n[2]);
      if (!f1) continue;
      const bool in0 = inside(field[i]), in1 = inside(*f1);
      if (in0 == in1) continue;
      // Cells around the edge, counter-clockwise seen from +axis.
      const int u = (axis + 1) % 3, v = (axis + 2) % 3;
      static constexpr int offsets[4][2] = {{-1, -1}, {0, -1}, {0, 0}, {-1, 0}};
      Quad q;
      bool complete = true;
      for (int k = 0; k < 4; ++k) {
        std::array<std::int64_t, 3> cell = c;
        cell[u] += offsets[k][0];
        cell[v] += offsets[k][1];
        if (!is_active(cell[0], cell[1], cell[2])) {
          complete = false;
          break;
        }
        q.cells[k] = grid.cell_id(cell[0], cell[1], cell[2]);
      }
      if (!complete) continue;
      if (!in0) std::reverse(q.cells.begin(), q.cells.end());
      quads.push_back(q);
    }
  }

  // One vertex per surface cell: mean of the zero crossings on its edges.
  std::vector<std::int64_t> surface_cells;
  surface_cells.reserve(quads.size() * 4);
  for (const Quad& q : quads) surface_cells.insert(surface_cells.end(), q.cells.begin(), q.cells.end());
  std::sort(surface_cells.begin(), surface_cells.end());
  surface_cells.erase(std::unique(surface_cells.begin(), surface_cells.end()), surface_cells.end());

  TriangleMesh mesh;
  mesh.vertices.resize(surface_cells.size());
  static constexpr int edge_corners[12][2] = {{0, 1}, {2, 3}, {4, 5}, {6, 7}, {0, 2}, {1, 3},
                                              {4, 6}, {5, 7}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};
  parallel_for(exec, surface_cells.size(), [&](std::size_t s) {
    const std::int64_t id = surface_cells[s];
    const std::int64_t x = id % grid.cells[0];
    const std::int64_t y = (id / grid.cells[0]) % grid.cells[1];
    const std::int64_t z = id / (grid.cells[0] * grid.cells[1]);
    std::array<double, 8> f{};
    std::array<Vec3, 8> pos;
    for (int d = 0; d < 8; ++d) {
      const std::array<std::int64_t, 3> cc{x + (d & 1), y + ((d >> 1) & 1), z + ((d >> 2) & 1)};
      f[d] = *value_at(cc[0], cc[1], cc[2]);
      pos[d] = grid.corner_position(cc);
    }
    Vec3 sum = Vec3::Zero();
    int count = 0;
    for (const auto& e : edge_corners) {
      const double f0 = f[e[0]], f1 = f[e[1]];
      if (inside(f0) == inside(f1)) continue;
      const double t = f0 / (f0 - f1);
      sum += pos[e[0]] + t * (pos[e[1]] - pos[e[0]]);
      ++count;
    }
    mesh.vertices[s] = sum / static_cast<double>(count);
  });

  auto vertex_of = [&](std::int64_t cell) {
    return static_cast<std::uint32_t>(std::lower_bound(surface_cells.begin(), surface_cells.end(), cell) -
                                      surface_cells.begin());
  };
  mesh.triangles.reserve(quads.size() * 2);
  for (const Quad& q : quads) {
    std::array<std::uint32_t, 4> v;
    for (int k = 0; k < 4; ++k) v[k] = vertex_of(q.cells[k]);
    const double d02 = (mesh.vertices[v[0]] - mesh.vertices[v[2]]).squaredNorm();
    const double d13 = (mesh.vertices[v[1]] - mesh.vertices[v[3]]).squaredNorm();
    if (d02 <= d13) {
      mesh.triangles.push_back({v[0], v[1], v[2]});
      mesh.triangles.push_back({v[0], v[2], v[3]});
    } else {
      mesh.triangles.push_back({v[0], v[1], v[3]});
      mesh.triangles.push_back({v[1], v[2], v[3]});
    }
  }
  return mesh;
}

}  // namespace turnscan
