#pragma once

#include <cstdint>
#include <vector>

#include "turnscan/core.hpp"
#include "turnscan/error.hpp"
#include "turnscan/exec.hpp"

namespace turnscan {

// --- reconstruction -------------------------------------------------------

struct GreedyParams {
  double mu = 5.0;                   // edge length bound as a multiple of the nearest-neighbor distance
  std::size_t max_nearest_neighbors = 50;
  double search_radius = 0.025;      // meters
  double min_angle = 10.0;           // degrees
  double max_angle = 120.0;          // degrees
  double max_surface_angle = 45.0;   // degrees between the normals of connected points
};

/// Greedy projection triangulation. Candidate edges from each point's bounded
/// neighborhood are examined shortest first; an edge is kept when its
/// endpoints' normals agree and it does not cross or touch a kept edge in the
/// local tangent projection. Triangles are the empty, well-shaped 3-cycles of
/// the kept edge graph. Vertices are the input points.
TriangleMesh greedy_triangulation(const PointCloud& cloud, const GreedyParams& params);

struct GridParams {
  double resolution = 0.0025;  // cell edge, meters
  int padding = 3;             // cell shells added around occupied cells
  int nearest_neighbors = 8;   // data points blended into each corner sample
};

/// Grid projection reconstruction: a signed nearest-point field sampled at
/// cell corners, one surface vertex per cell with a sign change on its edges,
/// and a quad (two triangles) around every crossing cell edge.
TriangleMesh grid_projection(const PointCloud& cloud, const GridParams& params, Exec exec = Exec::parallel);

// --- topology ---------------------------------------------------------------

using Edge = std::pair<std::uint32_t, std::uint32_t>;  // first < second

class NonManifoldError : public Error {
 public:
  NonManifoldError(const std::string& what, std::vector<Edge> edges) : Error(what), edges_(std::move(edges)) {}
  const std::vector<Edge>& edges() const { return edges_; }

 private:
  std::vector<Edge> edges_;
};

/// Closed cycle of boundary edges, oriented like the triangles that own them.
struct BoundaryLoop {
  std::vector<std::uint32_t> vertices;
};

/// Boundary loops ordered by their lowest vertex; each loop starts at its
/// lowest vertex. Throws NonManifoldError listing edges used by 3+ triangles.
std::vector<BoundaryLoop> boundary_loops(const TriangleMesh& mesh);

struct MeshAudit {
  std::size_t boundary_edges = 0;
  std::size_t non_manifold_edges = 0;
  long euler_characteristic = 0;  // V - E + F over referenced vertices
  std::size_t connected_components = 0;

  friend bool operator==(const MeshAudit&, const MeshAudit&) = default;
};

MeshAudit mesh_audit(const TriangleMesh& mesh);

struct HoleFillResult {
  TriangleMesh mesh;
  std::size_t filled = 0;
  std::vector<BoundaryLoop> left_open;  // loops longer than the cap
};

/// Closes every boundary loop with at most `max_boundary_vertices` vertices:
/// ear clipping in the loop's best-fit plane up to 6 vertices, a fan around a
/// new centroid vertex beyond that.
HoleFillResult fill_holes(const TriangleMesh& mesh, std::size_t max_boundary_vertices);

}  // namespace turnscan
