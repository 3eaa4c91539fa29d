#include <cstring>
#include <string_view>

#include "turnscan/error.hpp"
#include "turnscan/io.hpp"

namespace turnscan {
namespace {

constexpr std::size_t kHeaderSize = 80;
constexpr std::size_t kFacetSize = 50;
constexpr std::string_view kHeaderText = "binary STL written by turnscan";

void put_float(std::uint8_t*& p, double v) {
  const auto f = static_cast<float>(v);
  std::memcpy(p, &f, 4);
  p += 4;
}

float get_float(const std::uint8_t* p) {
  float f;
  std::memcpy(&f, p, 4);
  return f;
}

}  // namespace

Bytes write_stl(const TriangleMesh& mesh) {
  Bytes out(kHeaderSize + 4 + kFacetSize * mesh.triangles.size(), 0);
  std::memcpy(out.data(), kHeaderText.data(), kHeaderText.size());
  const auto count = static_cast<std::uint32_t>(mesh.triangles.size());
  std::memcpy(out.data() + kHeaderSize, &count, 4);

  std::uint8_t* p = out.data() + kHeaderSize + 4;
  for (const Triangle& tri : mesh.triangles) {
    Vec3 n = triangle_normal(mesh, tri);
    const double len = n.norm();
    n = len > 0.0 ? Vec3(n / len) : Vec3::Zero();
    for (int k = 0; k < 3; ++k) put_float(p, n[k]);
    for (std::uint32_t v : tri) {
      for (int k = 0; k < 3; ++k) put_float(p, mesh.vertices[v][k]);
    }
    p += 2;  // attribute byte count stays 0
  }
  return out;
}

TriangleMesh read_stl(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize + 4) throw ParseError("STL shorter than its header", bytes.size(), ParseError::Unit::byte);
  std::uint32_t count = 0;
  std::memcpy(&count, bytes.data() + kHeaderSize, 4);
  const std::size_t expected = kHeaderSize + 4 + kFacetSize * static_cast<std::size_t>(count);
  if (bytes.size() != expected)
    throw ParseError("STL size does not match facet count " + std::to_string(count), bytes.size(),
                     ParseError::Unit::byte);
  TriangleMesh mesh;
  mesh.vertices.reserve(3 * static_cast<std::size_t>(count));
  mesh.triangles.reserve(count);
  const std::uint8_t* p = bytes.data() + kHeaderSize + 4;
  for (std::uint32_t t = 0; t < count; ++t, p += kFacetSize) {
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int v = 0; v < 3; ++v) {
      const std::uint8_t* q = p + 12 + 12 * v;
      mesh.vertices.emplace_back(get_float(q), get_float(q + 4), get_float(q + 8));
    }
    mesh.triangles.push_back({base, base + 1, base + 2});
  }
  return mesh;
}

}  // namespace turnscan
