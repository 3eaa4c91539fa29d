#include "turnscan/shapes.hpp"

#include <cmath>
#include <map>
#include <numbers>

#include "turnscan/error.hpp"

namespace turnscan {

TriangleMesh make_box(const Vec3& min, const Vec3& max) {
  TriangleMesh mesh = make_voxel_solid({true}, 1, 1, 1, 1.0, Vec3::Zero());
  for (Vec3& v : mesh.vertices) v = min + v.cwiseProduct(max - min);
  return mesh;
}

TriangleMesh make_voxel_solid(const std::vector<bool>& occupied, int nx, int ny, int nz, double cell,
                              const Vec3& origin) {
  if (static_cast<int>(occupied.size()) != nx * ny * nz) throw InvalidInput("make_voxel_solid: size mismatch");
  auto filled = [&](int x, int y, int z) {
    if (x < 0 || y < 0 || z < 0 || x >= nx || y >= ny || z >= nz) return false;
    return static_cast<bool>(occupied[static_cast<std::size_t>(x + nx * (y + ny * z))]);
  };
  TriangleMesh mesh;
  std::map<std::array<int, 3>, std::uint32_t> lattice;
  auto vertex = [&](int x, int y, int z) {
    const auto [it, inserted] = lattice.try_emplace({x, y, z}, static_cast<std::uint32_t>(mesh.vertices.size()));
    if (inserted) mesh.vertices.push_back(origin + cell * Vec3(x, y, z));
    return it->second;
  };
  for (int z = 0; z < nz; ++z)
    for (int y = 0; y < ny; ++y)
      for (int x = 0; x < nx; ++x) {
        if (!filled(x, y, z)) continue;
        for (int axis = 0; axis < 3; ++axis) {
          for (int side = 0; side < 2; ++side) {
            std::array<int, 3> n{x, y, z};
            n[axis] += side ? 1 : -1;
            if (filled(n[0], n[1], n[2])) continue;
            // Face corners counter-clockwise seen from outside.
            const int u = (axis + 1) % 3, v = (axis + 2) % 3;
            std::array<int, 3> base{x, y, z};
            base[axis] += side;
            std::array<std::array<int, 3>, 4> c;
            const int du[4] = {0, 1, 1, 0}, dv[4] = {0, 0, 1, 1};
            for (int k = 0; k < 4; ++k) {
              c[k] = base;
              c[k][u] += du[k];
              c[k][v] += dv[k];
            }
            std::uint32_t q[4];
            for (int k = 0; k < 4; ++k) q[k] = vertex(c[k][0], c[k][1], c[k][2]);
            if (side) {
              mesh.triangles.push_back({q[0], q[1], q[2]});
              mesh.triangles.push_back({q[0], q[2], q[3]});
            } else {
              mesh.triangles.push_back({q[0], q[2], q[1]});
              mesh.triangles.push_back({q[0], q[3], q[2]});
            }
          }
        }
      }
  return mesh;
}

TriangleMesh make_notched_cube(double size, int divisions, int notch) {
  if (divisions < 1 || notch < 0 || notch >= divisions) throw InvalidInput("make_notched_cube: bad divisions");
  const int n = divisions;
  std::vector<bool> occupied(static_cast<std::size_t>(n * n * n), true);
  for (int z = n - notch; z < n; ++z)
    for (int y = 0; y < notch; ++y)
      for (int x = n - notch; x < n; ++x) occupied[static_cast<std::size_t>(x + n * (y + n * z))] = false;
  const double cell = size / n;
  return make_voxel_solid(occupied, n, n, n, cell, Vec3::Constant(-size / 2.0));
}

TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  TriangleMesh mesh;
  mesh.vertices = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                   {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  mesh.triangles = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4},
                    {11, 10, 2}, {10, 7, 6}, {7, 1, 8},  {3, 9, 4},  {3, 4, 2},   {3, 2, 6}, {3, 6, 8},
                    {3, 8, 9},  {4, 9, 5},  {2, 4, 11}, {6, 2, 10}, {8, 6, 7},   {9, 8, 1}};
  for (Vec3& v : mesh.vertices) v.normalize();
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      const auto [it, inserted] = midpoints.try_emplace({key.first, key.second}, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) mesh.vertices.push_back((mesh.vertices[a] + mesh.vertices[b]).normalized());
      return it->second;
    };
    std::vector<Triangle> next;
    next.reserve(mesh.triangles.size() * 4);
    for (const Triangle& tri : mesh.triangles) {
      const std::uint32_t ab = midpoint(tri[0], tri[1]), bc = midpoint(tri[1], tri[2]), ca = midpoint(tri[2], tri[0]);
      next.push_back({tri[0], ab, ca});
      next.push_back({tri[1], bc, ab});
      next.push_back({tri[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    mesh.triangles = std::move(next);
  }
  for (Vec3& v : mesh.vertices) v = center + radius * v;
  return mesh;
}

TriangleMesh make_notched_icosphere(double radius, int subdivisions) {
  TriangleMesh mesh = make_icosphere(radius, subdivisions);
  const Vec3 n = Vec3(1.0, -0.4, 0.8).normalized();
  const double offset = 0.6 * radius;
  for (Vec3& v : mesh.vertices) {
    const double h = v.dot(n) - offset;
    if (h > 0.0) v -= h * n;
  }
  return mesh;
}

TriangleMesh make_blob(double radius, int subdivisions) {
  TriangleMesh mesh = make_icosphere(1.0, subdivisions);
  for (Vec3& v : mesh.vertices) {
    const double azimuth = std::atan2(v.z(), v.x());
    const double ring = 1.0 - v.y() * v.y();
    const double r = 1.0 + 0.18 * ring * std::cos(3.0 * azimuth) + 0.12 * ring * std::sin(2.0 * azimuth + 0.7) +
                     0.15 * v.x() * v.y() - 0.1 * v.y();
    v *= radius * r;
  }
  return mesh;
}

TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments) {
  TriangleMesh mesh;
  for (int i = 0; i < major_segments; ++i) {
    const double a = 2.0 * std::numbers::pi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double b = 2.0 * std::numbers::pi * j / minor_segments;
      const double r = major_radius + minor_radius * std::cos(b);
      mesh.vertices.emplace_back(r * std::cos(a), minor_radius * std::sin(b), r * std::sin(a));
    }
  }
  auto id = [&](int i, int j) {
    return static_cast<std::uint32_t>((i % major_segments) * minor_segments + (j % minor_segments));
  };
  for (int i = 0; i < major_segments; ++i)
    for (int j = 0; j < minor_segments; ++j) {
      mesh.triangles.push_back({id(i, j), id(i, j + 1), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i + 1, j)});
    }
  return mesh;
}

std::vector<std::string> named_shapes() { return {"notched-cube", "notched-icosphere", "blob", "icosphere", "cube"}; }

TriangleMesh make_named_shape(const std::string& name) {
  if (name == "notched-cube") return make_notched_cube(0.3, 4, 1);
  if (name == "notched-icosphere") return make_notched_icosphere(0.15, 4);
  if (name == "blob") return make_blob(0.12, 4);
  if (name == "icosphere") return make_icosphere(0.15, 4);
  if (name == "cube") return make_box(Vec3::Constant(-0.15), Vec3::Constant(0.15));
  throw InvalidInput("unknown shape '" + name + "'");
}

}  // namespace turnscan
