#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "turnscan/core.hpp"

namespace turnscan {

enum class PlyFormat { ascii, binary_little_endian };

using Bytes = std::vector<std::uint8_t>;
using PlyContent = std::variant<PointCloud, TriangleMesh>;

/// Parses PLY 1.0 (ascii or binary little-endian). Returns a TriangleMesh when
/// a face element is present, otherwise a PointCloud. Vertex properties x, y, z
/// are required; nx, ny, nz are read when all three are present. Other
/// properties are skipped. Throws ParseError.
PlyContent read_ply(std::span<const std::uint8_t> bytes);

/// Writes vertices as float32 (plus nx, ny, nz when the cloud has normals) and
/// faces as `list uchar int vertex_indices`.
Bytes write_ply(const PointCloud& cloud, PlyFormat format);
Bytes write_ply(const TriangleMesh& mesh, PlyFormat format);

/// Binary STL: 80-byte header, uint32 count, 50 bytes per facet. Facet
/// normals are recomputed from the vertex winding.
Bytes write_stl(const TriangleMesh& mesh);

/// Parses a binary STL into a triangle soup (three fresh vertices per facet).
TriangleMesh read_stl(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);

PointCloud read_ply_cloud(const std::filesystem::path& path);
TriangleMesh read_ply_mesh(const std::filesystem::path& path);

}  // namespace turnscan
