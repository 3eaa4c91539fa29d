#include <algorithm>
#include <set>

#include <Eigen/Eigenvalues>

#include "turnscan/mesh.hpp"

namespace turnscan {
namespace {

constexpr std::size_t kMaxEarClipVertices = 6;

using Point2 = Eigen::Vector2d;

double cross2(const Point2& a, const Point2& b, const Point2& c) {
  return (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
}

bool inside_triangle(const Point2& p, const Point2& a, const Point2& b, const Point2& c, double orientation) {
  return orientation * cross2(a, b, p) >= 0.0 && orientation * cross2(b, c, p) >= 0.0 &&
         orientation * cross2(c, a, p) >= 0.0;
}

std::vector<Point2> project_to_best_fit_plane(const std::vector<Vec3>& pts) {
  Vec3 centroid = Vec3::Zero();
  for (const Vec3& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : pts) cov += (p - centroid) * (p - centroid).transpose();
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  const Vec3 u = eig.eigenvectors().col(2);
  const Vec3 v = eig.eigenvectors().col(1);
  std::vector<Point2> out;
  out.reserve(pts.size());
  for (const Vec3& p : pts) out.emplace_back((p - centroid).dot(u), (p - centroid).dot(v));
  return out;
}

/// Ear clipping of `polygon` (patch orientation). Returns false when no valid
/// ear exists, e.g. when every candidate diagonal is already a mesh edge.
bool ear_clip(const TriangleMesh& mesh, const std::vector<std::uint32_t>& polygon,
              const std::set<Edge>& existing, std::vector<Triangle>& out) {
  std::vector<Vec3> pts;
  for (std::uint32_t v : polygon) pts.push_back(mesh.vertices[v]);
  const std::vector<Point2> flat = project_to_best_fit_plane(pts);

  double area = 0.0;
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const Point2& a = flat[i];
    const Point2& b = flat[(i + 1) % flat.size()];
    area += a.x() * b.y() - b.x() * a.y();
  }
  const double orientation = area >= 0.0 ? 1.0 : -1.0;

  std::vector<std::size_t> remaining(polygon.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  std::set<Edge> diagonals;
  std::vector<Triangle> result;
  while (remaining.size() > 3) {
    bool clipped = false;
    for (std::size_t r = 0; r < remaining.size() && !clipped; ++r) {
      const std::size_t ip = remaining[(r + remaining.size() - 1) % remaining.size()];
      const std::size_t ic = remaining[r];
      const std::size_t in = remaining[(r + 1) % remaining.size()];
      if (orientation * cross2(flat[ip], flat[ic], flat[in]) <= 0.0) continue;
      const Edge diagonal = std::minmax(polygon[ip], polygon[in]);
      if (existing.count(diagonal) || diagonals.count(diagonal)) continue;
      bool blocked = false;
      for (std::size_t other : remaining) {
        if (other == ip || other == ic || other == in) continue;
        if (inside_triangle(flat[other], flat[ip], flat[ic], flat[in], orientation)) {
          blocked = true;
          break;
        }
      }
      if (blocked) continue;
      result.push_back({polygon[ip], polygon[ic], polygon[in]});
      diagonals.insert(diagonal);
      remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(r));
      clipped = true;
    }
    if (!clipped) return false;
  }
  result.push_back({polygon[remaining[0]], polygon[remaining[1]], polygon[remaining[2]]});
  out.insert(out.end(), result.begin(), result.end());
  return true;
}

/// Splits a closed walk that revisits vertices into simple cycles.
std::vector<std::vector<std::uint32_t>> simple_cycles(const std::vector<std::uint32_t>& walk) {
  std::vector<std::vector<std::uint32_t>> cycles;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t v : walk) {
    const auto seen = std::find(stack.begin(), stack.end(), v);
    if (seen != stack.end()) {
      std::vector<std::uint32_t> cycle(seen, stack.end());
      stack.erase(seen + 1, stack.end());
      if (cycle.size() >= 3) cycles.push_back(std::move(cycle));
    } else {
      stack.push_back(v);
    }
  }
  if (stack.size() >= 3) cycles.push_back(std::move(stack));
  return cycles;
}

}  // namespace

HoleFillResult fill_holes(const TriangleMesh& mesh, std::size_t max_boundary_vertices) {
  const std::vector<BoundaryLoop> loops = boundary_loops(mesh);
  HoleFillResult result;
  result.mesh = mesh;
  if (loops.empty()) return result;

  std::set<Edge> existing;
  std::set<std::array<std::uint32_t, 3>> faces;
  for (const Triangle& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) existing.insert(std::minmax(t[k], t[(k + 1) % 3]));
    std::array<std::uint32_t, 3> key = t;
    std::sort(key.begin(), key.end());
    faces.insert(key);
  }

  for (const BoundaryLoop& loop : loops) {
    if (loop.vertices.size() > max_boundary_vertices) {
      result.left_open.push_back(loop);
      continue;
    }
    // Patch triangles traverse the loop backwards so each shared edge is used
    // once in each direction.
    const std::vector<std::uint32_t> walk(loop.vertices.rbegin(), loop.vertices.rend());
    for (const std::vector<std::uint32_t>& polygon : simple_cycles(walk)) {
      std::vector<Triangle> patch;
      bool done = false;
      if (polygon.size() <= kMaxEarClipVertices) {
        done = ear_clip(mesh, polygon, existing, patch);
        if (done && polygon.size() == 3) {
          std::array<std::uint32_t, 3> key = patch.back();
          std::sort(key.begin(), key.end());
          done = !faces.count(key);
          if (!done) patch.clear();
        }
      }
      if (!done) {
        Vec3 centroid = Vec3::Zero();
        for (std::uint32_t v : polygon) centroid += result.mesh.vertices[v];
        centroid /= static_cast<double>(polygon.size());
        const auto c = static_cast<std::uint32_t>(result.mesh.vertices.size());
        result.mesh.vertices.push_back(centroid);
        for (std::size_t i = 0; i < polygon.size(); ++i)
          patch.push_back({polygon[i], polygon[(i + 1) % polygon.size()], c});
      }
      for (const Triangle& t : patch) {
        for (int k = 0; k < 3; ++k) existing.insert(std::minmax(t[k], t[(k + 1) % 3]));
        std::array<std::uint32_t, 3> key = t;
        std::sort(key.begin(), key.end());
        faces.insert(key);
        result.mesh.triangles.push_back(t);
      }
    }
    ++result.filled;
  }
  return result;
}

}  // namespace turnscan
