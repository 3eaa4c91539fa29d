#pragma once

#include "turnscan/core.hpp"
#include "turnscan/exec.hpp"

namespace turnscan {

struct MlsParams {
  double search_radius = 0.03;  // meters; also the Gaussian weight bandwidth
  int polynomial_order = 2;     // 1, 2 or 3
  bool upsample = false;
  double upsample_radius = 0.0;  // 0 selects search_radius / 2
  double upsample_step = 0.0;    // 0 selects upsample_radius / 2
};

struct MlsResult {
  PointCloud cloud;
  std::size_t unchanged_count = 0;  // points with too few neighbors for a fit
};

/// Projects every point onto a weighted least-squares polynomial fitted over
/// its radius neighborhood and replaces its normal with the polynomial's.
/// Throws InvalidInput when normals are missing or parameters are invalid.
MlsResult mls_smooth(const PointCloud& cloud, const MlsParams& params, Exec exec = Exec::parallel);

struct LaplacianParams {
  int iterations = 20;
  double relaxation = 0.1;       // step toward the neighbor average, (0, 1]
  double feature_angle = 45.0;   // degrees
  bool boundary_smoothing = true;
};

enum class VertexClass { interior, edge, corner };

/// Per-vertex classification against the current geometry: interior vertices
/// touch no boundary or feature edge, edge vertices touch exactly two, and
/// corners touch one, three or more, or belong to a single triangle.
std::vector<VertexClass> classify_vertices(const TriangleMesh& mesh, double feature_angle);

/// Umbrella-weight Laplacian relaxation. Interior vertices move toward their
/// 1-ring average; edge vertices move along their two edge neighbors when the
/// turning angle there is below feature_angle; corners stay fixed.
TriangleMesh laplacian_smooth(const TriangleMesh& mesh, const LaplacianParams& params,
                              Exec exec = Exec::parallel);

}  // namespace turnscan
