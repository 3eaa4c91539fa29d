#include "turnscan/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "turnscan/error.hpp"

namespace turnscan {
namespace {

constexpr double kOrthoTolerance = 1e-9;

bool is_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

Mat3 project_to_rotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 d = Mat3::Identity();
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  return svd.matrixU() * d * svd.matrixV().transpose();
}

}  // namespace

void validate(const PointCloud& cloud) {
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    if (!is_finite(cloud.points[i]))
      throw InvalidInput("point " + std::to_string(i) + " has a non-finite coordinate");
  }
  if (!cloud.normals) return;
  if (cloud.normals->size() != cloud.points.size())
    throw InvalidInput("normal count " + std::to_string(cloud.normals->size()) +
                       " differs from point count " + std::to_string(cloud.points.size()));
  for (std::size_t i = 0; i < cloud.normals->size(); ++i) {
    const Vec3& n = (*cloud.normals)[i];
    if (!is_finite(n) || std::abs(n.norm() - 1.0) > 1e-6)
      throw InvalidInput("normal " + std::to_string(i) + " is not unit length");
  }
}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {
  const double ortho = (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = rotation_.determinant();
  if (ortho > kOrthoTolerance || std::abs(det - 1.0) > kOrthoTolerance)
    rotation_ = project_to_rotation(rotation_);
}

RigidTransform RigidTransform::rotation_about(const Vec3& axis, double degrees) {
  const double radians = degrees * std::numbers::pi / 180.0;
  return {Eigen::AngleAxisd(radians, axis.normalized()).toRotationMatrix(), Vec3::Zero()};
}

RigidTransform RigidTransform::rotation_about(const Vec3& axis, double degrees, const Vec3& pivot) {
  const RigidTransform r = rotation_about(axis, degrees);
  return {r.rotation(), pivot - r.rotation() * pivot};
}

double RigidTransform::angle_degrees() const {
  const double c = std::clamp((rotation_.trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

RigidTransform compose(const RigidTransform& first, const RigidTransform& second) {
  return {first.rotation() * second.rotation(),
          first.rotation() * second.translation() + first.translation()};
}

RigidTransform invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return {rt, -(rt * t.translation())};
}

PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud) {
  PointCloud out;
  out.points.reserve(cloud.points.size());
  for (const Vec3& p : cloud.points) out.points.push_back(t.apply(p));
  if (cloud.normals) {
    out.normals.emplace();
    out.normals->reserve(cloud.normals->size());
    for (const Vec3& n : *cloud.normals) out.normals->push_back(t.apply_direction(n));
  }
  return out;
}

double rotation_distance(const RigidTransform& a, const RigidTransform& b) {
  return (a.rotation() - b.rotation()).norm();
}

double rotation_error_degrees(const RigidTransform& a, const RigidTransform& b) {
  return compose(a, invert(b)).angle_degrees();
}

PointCloud merge(std::span<const PointCloud> clouds) {
  PointCloud out;
  if (clouds.empty()) return out;
  const bool with_normals = clouds.front().has_normals();
  std::size_t total = 0;
  for (const PointCloud& c : clouds) {
    if (c.has_normals() != with_normals)
      throw InvalidInput("merge: clouds disagree on normal presence");
    total += c.size();
  }
  out.points.reserve(total);
  if (with_normals) {
    out.normals.emplace();
    out.normals->reserve(total);
  }
  for (const PointCloud& c : clouds) {
    out.points.insert(out.points.end(), c.points.begin(), c.points.end());
    if (with_normals) out.normals->insert(out.normals->end(), c.normals->begin(), c.normals->end());
  }
  return out;
}

void validate(const TriangleMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  std::set<std::array<std::uint32_t, 3>> seen;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    for (std::uint32_t v : tri) {
      if (v >= n)
        throw InvalidInput("triangle " + std::to_string(t) + " references vertex " +
                           std::to_string(v) + " of " + std::to_string(n));
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
      throw InvalidInput("triangle " + std::to_string(t) + " repeats a vertex");
    std::array<std::uint32_t, 3> key = tri;
    std::sort(key.begin(), key.end());
    if (!seen.insert(key).second)
      throw InvalidInput("triangle " + std::to_string(t) + " duplicates an earlier triangle");
  }
}

Vec3 triangle_normal(const TriangleMesh& mesh, const Triangle& tri) {
  const Vec3& a = mesh.vertices[tri[0]];
  return (mesh.vertices[tri[1]] - a).cross(mesh.vertices[tri[2]] - a);
}

double signed_volume(const TriangleMesh& mesh) {
  double volume = 0.0;
  for (const Triangle& tri : mesh.triangles) {
    volume += mesh.vertices[tri[0]].dot(mesh.vertices[tri[1]].cross(mesh.vertices[tri[2]]));
  }
  return volume / 6.0;
}

}  // namespace turnscan
