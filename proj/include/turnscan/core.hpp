#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>

namespace turnscan {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ordered 3D samples with optional per-point unit normals. Coordinates are
/// meters.
struct PointCloud {
  std::vector<Vec3> points;
  std::optional<std::vector<Vec3>> normals;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return normals.has_value(); }
};

/// Throws InvalidInput if a coordinate is non-finite, the normal count differs
/// from the point count, or a normal is not unit length within 1e-6.
void validate(const PointCloud& cloud);

/// Element of SE(3): x -> rotation * x + translation.
class RigidTransform {
 public:
  RigidTransform() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}
  /// Projects `rotation` onto SO(3) if its orthogonality residual or
  /// determinant error exceeds 1e-9.
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform identity() { return {}; }
  static RigidTransform translation(const Vec3& t) { return {Mat3::Identity(), t}; }
  /// Right-handed rotation of `degrees` about the unit `axis` through the origin.
  static RigidTransform rotation_about(const Vec3& axis, double degrees);
  /// Rotation of `degrees` about the line through `pivot` along `axis`.
  static RigidTransform rotation_about(const Vec3& axis, double degrees, const Vec3& pivot);

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 apply(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 apply_direction(const Vec3& d) const { return rotation_ * d; }

  /// Rotation angle in degrees, in [0, 180].
  double angle_degrees() const;

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// Result applies `second` first, then `first`.
RigidTransform compose(const RigidTransform& first, const RigidTransform& second);
RigidTransform invert(const RigidTransform& t);
PointCloud apply_transform(const RigidTransform& t, const PointCloud& cloud);

/// Frobenius norm of the rotation difference.
double rotation_distance(const RigidTransform& a, const RigidTransform& b);
/// Angle in degrees of a * b^-1.
double rotation_error_degrees(const RigidTransform& a, const RigidTransform& b);

/// Concatenates clouds in order. Throws InvalidInput when some clouds carry
/// normals and others do not.
PointCloud merge(std::span<const PointCloud> clouds);

using Triangle = std::array<std::uint32_t, 3>;

/// Indexed triangle surface.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
};

/// Throws InvalidInput on out-of-range indices, repeated vertices within a
/// triangle, or duplicated triangles (same vertex set).
void validate(const TriangleMesh& mesh);

/// Unnormalized area-weighted normal of a triangle (right-hand winding).
Vec3 triangle_normal(const TriangleMesh& mesh, const Triangle& tri);

/// Signed enclosed volume (positive for outward winding on a closed mesh).
double signed_volume(const TriangleMesh& mesh);

}  // namespace turnscan
