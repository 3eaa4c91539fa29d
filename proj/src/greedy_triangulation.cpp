#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <tuple>

#include "turnscan/mesh.hpp"
#include "turnscan/spatial.hpp"

namespace turnscan {
namespace {

using Point2 = Eigen::Vector2d;

double orient(const Point2& a, const Point2& b, const Point2& c) {
  return (b - a).x() * (c - a).y() - (b - a).y() * (c - a).x();
}

bool on_segment(const Point2& p, const Point2& a, const Point2& b, double eps) {
  if (std::abs(orient(a, b, p)) > eps) return false;
  return (p - a).dot(b - a) >= 0.0 && (p - b).dot(a - b) >= 0.0;
}

/// Closed segments intersect (touching counts).
bool segments_meet(const Point2& a, const Point2& b, const Point2& c, const Point2& d, double eps) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d);
  const double o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (((o1 > eps && o2 < -eps) || (o1 < -eps && o2 > eps)) &&
      ((o3 > eps && o4 < -eps) || (o3 < -eps && o4 > eps)))
    return true;
  return on_segment(c, a, b, eps) || on_segment(d, a, b, eps) || on_segment(a, c, d, eps) ||
         on_segment(b, c, d, eps);
}

struct Frame {
  Vec3 origin, u, v, n;
  Point2 project(const Vec3& p) const { return {(p - origin).dot(u), (p - origin).dot(v)}; }
};

Frame make_frame(const Vec3& origin, const Vec3& normal) {
  Frame f;
  f.origin = origin;
  f.n = normal.normalized();
  f.u = f.n.unitOrthogonal();
  f.v = f.n.cross(f.u);
  return f;
}

double angle_at(const Vec3& p, const Vec3& a, const Vec3& b) {
  const Vec3 x = a - p, y = b - p;
  return std::atan2(x.cross(y).norm(), x.dot(y)) * 180.0 / std::numbers::pi;
}

}  // namespace

TriangleMesh greedy_triangulation(const PointCloud& cloud, const GreedyParams& params) {
  if (!cloud.has_normals()) throw InvalidInput("greedy_triangulation: cloud has no normals");
  if (cloud.size() < 3) throw InvalidInput("greedy_triangulation: need at least 3 points");
  if (params.mu < 1.0 || params.max_nearest_neighbors < 3 || !(params.search_radius > 0.0) ||
      !(params.min_angle > 0.0 && params.min_angle < params.max_angle && params.max_angle < 180.0))
    throw InvalidInput("greedy_triangulation: invalid parameters");

  const std::vector<Vec3>& pts = cloud.points;
  const std::vector<Vec3>& nrm = *cloud.normals;
  const KdTree tree(pts);
  const double cos_surface = std::cos(params.max_surface_angle * std::numbers::pi / 180.0);

  // Candidate edges: bounded neighborhood of either endpoint, compatible normals.
  std::vector<std::tuple<double, std::uint32_t, std::uint32_t>> candidates;
  {
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    std::vector<Neighbor> nn;
    for (std::uint32_t i = 0; i < pts.size(); ++i) {
      tree.k_nearest(pts[i], params.max_nearest_neighbors + 1, nn);
      double nearest = -1.0;
      for (const Neighbor& n : nn) {
        if (n.index != i && n.distance > 0.0) {
          nearest = n.distance;
          break;
        }
      }
      if (nearest < 0.0) continue;
      const double limit = std::min(params.search_radius, params.mu * nearest);
      std::size_t taken = 0;
      for (const Neighbor& n : nn) {
        if (n.index == i) continue;
        if (taken++ == params.max_nearest_neighbors) break;
        if (n.distance > limit || n.distance == 0.0) continue;
        if (nrm[i].dot(nrm[n.index]) < cos_surface) continue;
        const auto key = std::minmax(i, n.index);
        if (seen.insert(key).second)
          candidates.emplace_back((pts[key.first] - pts[key.second]).squaredNorm(), key.first, key.second);
      }
    }
  }
  std::sort(candidates.begin(), candidates.end());

  std::vector<std::vector<std::uint32_t>> adjacency(pts.size());
  std::vector<Neighbor> near;
  for (const auto& [len2, a, b] : candidates) {
    const double len = std::sqrt(len2);
    const Vec3 mid = 0.5 * (pts[a] + pts[b]);
    Vec3 axis = nrm[a] + nrm[b];
    if (axis.squaredNorm() < 1e-24) axis = nrm[a];
    const Frame frame = make_frame(mid, axis);
    const Point2 pa = frame.project(pts[a]), pb = frame.project(pts[b]);
    const double eps = 1e-9 * len2;

    // Kept edges are no longer than this one, so any that meets it has an
    // endpoint within the ball.
    tree.radius_search(mid, 1.5 * len, near);
    bool blocked = false;
    for (const Neighbor& w : near) {
      if (blocked) break;
      const std::uint32_t wi = w.index;
      if (frame.n.dot(nrm[wi]) <= 0.0) continue;
      const Point2 pw = frame.project(pts[wi]);
      if (wi != a && wi != b && on_segment(pw, pa, pb, eps)) {
        blocked = true;
        break;
      }
      for (std::uint32_t xi : adjacency[wi]) {
        if (frame.n.dot(nrm[xi]) <= 0.0) continue;
        const Point2 px = frame.project(pts[xi]);
        const bool shares = wi == a || wi == b || xi == a || xi == b;
        if (shares) {
          if ((wi == a && xi == b) || (wi == b && xi == a)) continue;
          // Collinear overlap along a shared endpoint.
          const std::uint32_t common = (wi == a || wi == b) ? wi : xi;
          const std::uint32_t other = common == wi ? xi : wi;
          const std::uint32_t far_end = common == a ? b : a;
          const Point2 pc = frame.project(pts[common]);
          const Point2 po = frame.project(pts[other]);
          const Point2 pf = frame.project(pts[far_end]);
          if (on_segment(po, pc, pf, eps) || on_segment(pf, pc, po, eps)) blocked = true;
        } else if (segments_meet(pa, pb, pw, px, eps)) {
          blocked = true;
        }
        if (blocked) break;
      }
    }
    if (blocked) continue;
    adjacency[a].push_back(b);
    adjacency[b].push_back(a);
  }
  for (auto& adj : adjacency) std::sort(adj.begin(), adj.end());

  TriangleMesh mesh;
  mesh.vertices = pts;
  // Per undirected edge: third vertices of the triangles already using it.
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> edge_faces;

  for (std::uint32_t a = 0; a < pts.size(); ++a) {
    for (std::uint32_t b : adjacency[a]) {
      if (b <= a) continue;
      std::vector<std::uint32_t> common;
      std::set_intersection(adjacency[a].begin(), adjacency[a].end(), adjacency[b].begin(), adjacency[b].end(),
                            std::back_inserter(common));
      for (std::uint32_t c : common) {
        if (c <= b) continue;
        const Vec3 &A = pts[a], &B = pts[b], &C = pts[c];
        const double angles[3] = {angle_at(A, B, C), angle_at(B, C, A), angle_at(C, A, B)};
        bool shaped = true;
        for (double ang : angles) shaped = shaped && ang >= params.min_angle && ang <= params.max_angle;
        if (!shaped) continue;

        Vec3 axis = nrm[a] + nrm[b] + nrm[c];
        if (axis.squaredNorm() < 1e-24) continue;
        const Vec3 centroid = (A + B + C) / 3.0;
        const Frame frame = make_frame(centroid, axis);
        const Point2 pa = frame.project(A), pb = frame.project(B), pc = frame.project(C);
        const double area2 = orient(pa, pb, pc);
        if (std::abs(area2) < 1e-18) continue;
        const double sgn = area2 > 0 ? 1.0 : -1.0;
        const double eps = 1e-9 * std::abs(area2);

        // Empty: no other compatible point inside or on the projected triangle.
        const double reach = std::max({(A - centroid).norm(), (B - centroid).norm(), (C - centroid).norm()});
        tree.radius_search(centroid, reach, near);
        bool empty = true;
        for (const Neighbor& w : near) {
          const std::uint32_t wi = w.index;
          if (wi == a || wi == b || wi == c) continue;
          if (frame.n.dot(nrm[wi]) <= 0.0) continue;
          const Point2 pw = frame.project(pts[wi]);
          if (sgn * orient(pa, pb, pw) >= -eps && sgn * orient(pb, pc, pw) >= -eps &&
              sgn * orient(pc, pa, pw) >= -eps) {
            empty = false;
            break;
          }
        }
        if (!empty) continue;

        // At most two triangles per edge, on opposite sides.
        const std::uint32_t tri[3] = {a, b, c};
        bool fits = true;
        for (int k = 0; k < 3 && fits; ++k) {
          const std::uint32_t e0 = tri[k], e1 = tri[(k + 1) % 3], opposite = tri[(k + 2) % 3];
          auto it = edge_faces.find(std::minmax(e0, e1));
          if (it == edge_faces.end()) continue;
          if (it->second.size() >= 2) {
            fits = false;
            break;
          }
          const Point2 q0 = frame.project(pts[e0]), q1 = frame.project(pts[e1]);
          const double side_new = orient(q0, q1, frame.project(pts[opposite]));
          const double side_old = orient(q0, q1, frame.project(pts[it->second.front()]));
          if (side_new * side_old >= 0.0) fits = false;
        }
        if (!fits) continue;

        for (int k = 0; k < 3; ++k)
          edge_faces[std::minmax(tri[k], tri[(k + 1) % 3])].push_back(tri[(k + 2) % 3]);
        Triangle t{a, b, c};
        if ((B - A).cross(C - A).dot(axis) < 0.0) std::swap(t[1], t[2]);
        mesh.triangles.push_back(t);
      }
    }
  }
  return mesh;
}

}  // namespace turnscan
