#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "turnscan/error.hpp"
#include "turnscan/smooth.hpp"

namespace turnscan {
namespace {

using EdgeKey = std::pair<std::uint32_t, std::uint32_t>;

EdgeKey edge_key(std::uint32_t a, std::uint32_t b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

/// Connectivity that stays fixed while the geometry relaxes.
struct Topology {
  std::vector<EdgeKey> edges;
  std::vector<std::vector<std::uint32_t>> edge_faces;  // per edge
  std::vector<std::vector<std::uint32_t>> ring;        // sorted 1-ring per vertex
  std::vector<std::vector<std::uint32_t>> vertex_edges;
  std::vector<std::uint32_t> face_count;               // incident triangles per vertex
};

Topology build_topology(const TriangleMesh& mesh) {
  Topology topo;
  std::map<EdgeKey, std::uint32_t> index;
  topo.ring.resize(mesh.vertices.size());
  topo.vertex_edges.resize(mesh.vertices.size());
  topo.face_count.assign(mesh.vertices.size(), 0);
  for (std::uint32_t f = 0; f < mesh.triangles.size(); ++f) {
    const Triangle& t = mesh.triangles[f];
    for (int k = 0; k < 3; ++k) {
      ++topo.face_count[t[k]];
      const EdgeKey key = edge_key(t[k], t[(k + 1) % 3]);
      auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(topo.edges.size()));
      if (inserted) {
        topo.edges.push_back(key);
        topo.edge_faces.emplace_back();
        topo.vertex_edges[key.first].push_back(it->second);
        topo.vertex_edges[key.second].push_back(it->second);
        topo.ring[key.first].push_back(key.second);
        topo.ring[key.second].push_back(key.first);
      }
      topo.edge_faces[it->second].push_back(f);
    }
  }
  for (auto& r : topo.ring) std::sort(r.begin(), r.end());
  return topo;
}

/// Boundary, non-manifold, and feature edges under the current geometry.
std::vector<std::uint8_t> special_edges(const TriangleMesh& mesh, const Topology& topo, double feature_angle) {
  std::vector<Vec3> face_normals(mesh.triangles.size());
  for (std::size_t f = 0; f < mesh.triangles.size(); ++f) {
    const Vec3 n = triangle_normal(mesh, mesh.triangles[f]);
    const double len = n.norm();
    face_normals[f] = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
  }
  const double cos_limit = std::cos(feature_angle * std::numbers::pi / 180.0);
  std::vector<std::uint8_t> special(topo.edges.size(), 0);
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto& faces = topo.edge_faces[e];
    if (faces.size() != 2) {
      special[e] = 1;
      continue;
    }
    special[e] = face_normals[faces[0]].dot(face_normals[faces[1]]) < cos_limit ? 1 : 0;
  }
  return special;
}

std::vector<VertexClass> classify(const Topology& topo, const std::vector<std::uint8_t>& special) {
  std::vector<VertexClass> classes(topo.ring.size(), VertexClass::interior);
  for (std::size_t v = 0; v < topo.ring.size(); ++v) {
    int count = 0;
    for (std::uint32_t e : topo.vertex_edges[v]) count += special[e];
    if (topo.face_count[v] <= 1 || count == 1 || count >= 3) {
      classes[v] = VertexClass::corner;
    } else if (count == 2) {
      classes[v] = VertexClass::edge;
    }
  }
  return classes;
}

}  // namespace

std::vector<VertexClass> classify_vertices(const TriangleMesh& mesh, double feature_angle) {
  const Topology topo = build_topology(mesh);
  return classify(topo, special_edges(mesh, topo, feature_angle));
}

TriangleMesh laplacian_smooth(const TriangleMesh& mesh, const LaplacianParams& params, Exec exec) {
  if (params.iterations < 1) throw InvalidInput("laplacian_smooth: iterations must be at least 1");
  if (!(params.relaxation > 0.0 && params.relaxation <= 1.0))
    throw InvalidInput("laplacian_smooth: relaxation must lie in (0, 1]");
  validate(mesh);

  const Topology topo = build_topology(mesh);
  const double lambda = params.relaxation;
  const double cos_turn_limit = std::cos(params.feature_angle * std::numbers::pi / 180.0);
  TriangleMesh current = mesh;
  std::vector<Vec3> next(mesh.vertices.size());

  for (int iter = 0; iter < params.iterations; ++iter) {
    const auto special = special_edges(current, topo, params.feature_angle);
    const auto classes = classify(topo, special);
    const std::vector<Vec3>& pos = current.vertices;

    parallel_for(exec, pos.size(), [&](std::size_t v) {
      const Vec3& p = pos[v];
      next[v] = p;
      const auto& ring = topo.ring[v];
      if (ring.empty()) return;
      switch (classes[v]) {
        case VertexClass::corner:
          return;
        case VertexClass::interior: {
          Vec3 avg = Vec3::Zero();
          for (std::uint32_t u : ring) avg += pos[u];
          avg /= static_cast<double>(ring.size());
          next[v] = (1.0 - lambda) * p + lambda * avg;
          return;
        }
        case VertexClass::edge: {
          std::uint32_t ends[2];
          int found = 0;
          bool on_boundary = false;
          for (std::uint32_t e : topo.vertex_edges[v]) {
            if (!special[e]) continue;
            const EdgeKey& key = topo.edges[e];
            ends[found++] = key.first == v ? key.second : key.first;
            on_boundary = on_boundary || topo.edge_faces[e].size() == 1;
          }
          if (on_boundary && !params.boundary_smoothing) return;
          const Vec3 in = p - pos[ends[0]];
          const Vec3 out = pos[ends[1]] - p;
          const double denom = in.norm() * out.norm();
          if (!(denom > 0.0)) return;
          // Turning angle below the limit means the feature line is nearly straight here.
          if (in.dot(out) / denom <= cos_turn_limit) return;
          next[v] = (1.0 - lambda) * p + lambda * 0.5 * (pos[ends[0]] + pos[ends[1]]);
          return;
        }
      }
    });
    current.vertices.swap(next);
  }
  return current;
}

}  // namespace turnscan
