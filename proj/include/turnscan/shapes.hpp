#pragma once

#include <string>
#include <vector>

#include "turnscan/core.hpp"

namespace turnscan {

/// Axis-aligned box, 8 vertices and 12 outward-wound triangles.
TriangleMesh make_box(const Vec3& min, const Vec3& max);

/// Closed surface of a voxel set given as `occupied[x + nx * (y + ny * z)]`;
/// each boundary face becomes two triangles on a shared lattice of vertices.
/// Voxels touching only along an edge or a corner produce non-manifold output.
TriangleMesh make_voxel_solid(const std::vector<bool>& occupied, int nx, int ny, int nz, double cell,
                              const Vec3& origin);

/// Cube of side `size` centered at the origin, built from divisions^3 voxels
/// with a notch of notch^3 voxels removed at the (+x, -y, +z) corner.
TriangleMesh make_notched_cube(double size, int divisions = 4, int notch = 1);

/// Subdivided icosahedron projected onto the sphere (subdivision 0: 12
/// vertices, 20 triangles).
TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = Vec3::Zero());

/// Icosphere with the cap beyond a tilted plane flattened onto that plane.
TriangleMesh make_notched_icosphere(double radius, int subdivisions);

/// Star-shaped lobed surface without rotational symmetry about y.
TriangleMesh make_blob(double radius, int subdivisions);

/// Torus around the y axis.
TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments);

/// Built-in fixture by name: "notched-cube", "notched-icosphere", "icosphere",
/// "cube". Throws InvalidInput for unknown names.
TriangleMesh make_named_shape(const std::string& name);
std::vector<std::string> named_shapes();

}  // namespace turnscan
