#include <algorithm>
#include <cmath>
#include <numbers>

#include "turnscan/error.hpp"
#include "turnscan/scansim.hpp"

namespace turnscan {

void validate(const CameraIntrinsics& cam) {
  if (cam.width <= 0 || cam.height <= 0 || !(cam.fx > 0) || !(cam.fy > 0) || !(cam.cx > 0) || !(cam.cy > 0) ||
      !(cam.depth_min > 0) || !(cam.depth_max > cam.depth_min) || cam.cx >= cam.width || cam.cy >= cam.height)
    throw InvalidInput("invalid camera intrinsics");
}

RigidTransform look_at(const Vec3& eye, const Vec3& target, const Vec3& down) {
  const Vec3 z = (target - eye).normalized();
  const Vec3 y = (down - down.dot(z) * z).normalized();
  const Vec3 x = y.cross(z);
  Mat3 r;
  r.row(0) = x.transpose();
  r.row(1) = y.transpose();
  r.row(2) = z.transpose();
  return {r, -(r * eye)};
}

RigidTransform object_to_camera(double object_angle, const RigidTransform& cam_pose,
                                const TurntableGeometry& geometry) {
  return compose(cam_pose, RigidTransform::rotation_about(geometry.axis, object_angle, geometry.pivot));
}

RenderOutput render(const TriangleMesh& mesh, double object_angle, const CameraIntrinsics& cam,
                    const RigidTransform& cam_pose, const TurntableGeometry& geometry,
                    const std::set<std::uint32_t>& specular_triangles, Exec exec) {
  validate(cam);
  const std::size_t pixels = static_cast<std::size_t>(cam.width) * cam.height;
  RenderOutput out;
  out.depth.width = cam.width;
  out.depth.height = cam.height;
  out.depth.depth_min = cam.depth_min;
  out.depth.depth_max = cam.depth_max;
  out.depth.depth.assign(pixels, 0.0);
  out.surface.incidence_degrees.assign(pixels, 90.0);
  out.surface.triangle.assign(pixels, -1);
  out.surface.specular.assign(pixels, 0);

  const RigidTransform to_camera = object_to_camera(object_angle, cam_pose, geometry);
  std::vector<Vec3> verts(mesh.vertices.size());
  for (std::size_t i = 0; i < verts.size(); ++i) verts[i] = to_camera.apply(mesh.vertices[i]);

  struct Projected {
    double u[3], v[3];
    int u0, u1;
  };
  std::vector<Projected> proj(mesh.triangles.size());
  std::vector<std::vector<std::uint32_t>> rows(static_cast<std::size_t>(cam.height));
  for (std::uint32_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    Projected& p = proj[t];
    bool visible = true;
    for (int k = 0; k < 3; ++k) {
      const Vec3& q = verts[tri[k]];
      if (q.z() < 1e-6) {
        visible = false;
        break;
      }
      p.u[k] = cam.fx * q.x() / q.z() + cam.cx;
      p.v[k] = cam.fy * q.y() / q.z() + cam.cy;
    }
    if (!visible) continue;
    const double umin = std::min({p.u[0], p.u[1], p.u[2]}), umax = std::max({p.u[0], p.u[1], p.u[2]});
    const double vmin = std::min({p.v[0], p.v[1], p.v[2]}), vmax = std::max({p.v[0], p.v[1], p.v[2]});
    p.u0 = std::max(0, static_cast<int>(std::ceil(umin)));
    p.u1 = std::min(cam.width - 1, static_cast<int>(std::floor(umax)));
    const int v0 = std::max(0, static_cast<int>(std::ceil(vmin)));
    const int v1 = std::min(cam.height - 1, static_cast<int>(std::floor(vmax)));
    if (p.u0 > p.u1) continue;
    for (int v = v0; v <= v1; ++v) rows[static_cast<std::size_t>(v)].push_back(t);
  }

  parallel_for(exec, rows.size(), [&](std::size_t row) {
    const double pv = static_cast<double>(row);
    const double ry = (pv - cam.cy) / cam.fy;
    for (std::uint32_t t : rows[row]) {
      const Projected& p = proj[t];
      const Triangle& tri = mesh.triangles[t];
      const double area = (p.u[1] - p.u[0]) * (p.v[2] - p.v[0]) - (p.u[2] - p.u[0]) * (p.v[1] - p.v[0]);
      if (area == 0.0) continue;
      constexpr double tol = -1e-9;
      const Vec3 normal = (verts[tri[1]] - verts[tri[0]]).cross(verts[tri[2]] - verts[tri[0]]);
      const double normal_len = normal.norm();
      if (!(normal_len > 0.0)) continue;
      const double plane = normal.dot(verts[tri[0]]);
      for (int u = p.u0; u <= p.u1; ++u) {
        const double pu = static_cast<double>(u);
        double w[3];
        for (int k = 0; k < 3; ++k) {
          const int a = (k + 1) % 3, b = (k + 2) % 3;
          w[k] = ((p.u[b] - p.u[a]) * (pv - p.v[a]) - (pu - p.u[a]) * (p.v[b] - p.v[a])) / area;
        }
        if (w[0] < tol || w[1] < tol || w[2] < tol) continue;
        const Vec3 ray((pu - cam.cx) / cam.fx, ry, 1.0);
        const double denom = normal.dot(ray);
        if (denom == 0.0) continue;
        const double depth = plane / denom;
        if (!(depth > 0.0)) continue;
        const std::size_t px = row * static_cast<std::size_t>(cam.width) + static_cast<std::size_t>(u);
        const double current = out.depth.depth[px];
        if (out.surface.triangle[px] >= 0 && !(depth < current)) continue;
        out.depth.depth[px] = depth;
        out.surface.triangle[px] = static_cast<std::int32_t>(t);
        const double c = std::min(1.0, std::abs(denom) / (normal_len * ray.norm()));
        out.surface.incidence_degrees[px] = std::acos(c) * 180.0 / std::numbers::pi;
      }
    }
  });

  for (std::size_t px = 0; px < pixels; ++px) {
    if (out.surface.triangle[px] < 0) continue;
    const double d = out.depth.depth[px];
    if (d < cam.depth_min || d > cam.depth_max) {
      out.depth.depth[px] = 0.0;
      out.surface.triangle[px] = -1;
      out.surface.incidence_degrees[px] = 90.0;
      continue;
    }
    out.surface.specular[px] = specular_triangles.count(static_cast<std::uint32_t>(out.surface.triangle[px])) ? 1 : 0;
  }
  return out;
}

DepthImage render_depth(const TriangleMesh& mesh, double object_angle, const CameraIntrinsics& cam,
                        const RigidTransform& cam_pose, const TurntableGeometry& geometry) {
  return render(mesh, object_angle, cam, cam_pose, geometry).depth;
}

}  // namespace turnscan
