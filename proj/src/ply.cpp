#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string_view>

#include "turnscan/error.hpp"
#include "turnscan/io.hpp"

namespace turnscan {
namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY/STL I/O assumes a little-endian host");

enum class Scalar { int8, uint8, int16, uint16, int32, uint32, float32, float64 };

std::size_t scalar_size(Scalar s) {
  switch (s) {
    case Scalar::int8:
    case Scalar::uint8: return 1;
    case Scalar::int16:
    case Scalar::uint16: return 2;
    case Scalar::int32:
    case Scalar::uint32:
    case Scalar::float32: return 4;
    case Scalar::float64: return 8;
  }
  return 0;
}

std::optional<Scalar> parse_scalar(std::string_view name) {
  if (name == "char" || name == "int8") return Scalar::int8;
  if (name == "uchar" || name == "uint8") return Scalar::uint8;
  if (name == "short" || name == "int16") return Scalar::int16;
  if (name == "ushort" || name == "uint16") return Scalar::uint16;
  if (name == "int" || name == "int32") return Scalar::int32;
  if (name == "uint" || name == "uint32") return Scalar::uint32;
  if (name == "float" || name == "float32") return Scalar::float32;
  if (name == "double" || name == "float64") return Scalar::float64;
  return std::nullopt;
}

struct Property {
  std::string name;
  Scalar type = Scalar::float32;
  bool is_list = false;
  Scalar count_type = Scalar::uint8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

struct Header {
  PlyFormat format = PlyFormat::ascii;
  std::vector<Element> elements;
  std::size_t body_offset = 0;  // first byte after end_header\n
  std::size_t body_line = 0;    // line number of the first body line
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

Header parse_header(std::span<const std::uint8_t> bytes) {
  Header header;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool have_format = false;
  auto next_line = [&]() -> std::optional<std::string_view> {
    if (pos >= bytes.size()) return std::nullopt;
    const auto* begin = reinterpret_cast<const char*>(bytes.data()) + pos;
    const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', bytes.size() - pos));
    const std::size_t len = nl ? static_cast<std::size_t>(nl - begin) : bytes.size() - pos;
    pos += len + (nl ? 1 : 0);
    ++line_no;
    std::string_view line(begin, len);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
  };

  auto first = next_line();
  if (!first || *first != "ply") throw ParseError("missing 'ply' magic", 1, ParseError::Unit::line);

  while (true) {
    auto line = next_line();
    if (!line) throw ParseError("header ended without end_header", line_no, ParseError::Unit::line);
    const auto tok = split_ws(*line);
    if (tok.empty()) continue;
    if (tok[0] == "comment" || tok[0] == "obj_info") continue;
    if (tok[0] == "end_header") break;
    if (tok[0] == "format") {
      if (tok.size() != 3 || tok[2] != "1.0")
        throw ParseError("malformed format line", line_no, ParseError::Unit::line);
      if (tok[1] == "ascii") {
        header.format = PlyFormat::ascii;
      } else if (tok[1] == "binary_little_endian") {
        header.format = PlyFormat::binary_little_endian;
      } else {
        throw ParseError("unsupported format '" + std::string(tok[1]) + "'", line_no,
                         ParseError::Unit::line);
      }
      have_format = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError("malformed element line", line_no, ParseError::Unit::line);
      Element e;
      e.name = tok[1];
      const auto [ptr, ec] = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), e.count);
      if (ec != std::errc{} || ptr != tok[2].data() + tok[2].size())
        throw ParseError("bad element count", line_no, ParseError::Unit::line);
      header.elements.push_back(std::move(e));
    } else if (tok[0] == "property") {
      if (header.elements.empty())
        throw ParseError("property before any element", line_no, ParseError::Unit::line);
      Property p;
      if (tok.size() == 5 && tok[1] == "list") {
        auto ct = parse_scalar(tok[2]);
        auto it = parse_scalar(tok[3]);
        if (!ct || !it) throw ParseError("unknown list property type", line_no, ParseError::Unit::line);
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
        p.name = tok[4];
      } else if (tok.size() == 3) {
        auto t = parse_scalar(tok[1]);
        if (!t) throw ParseError("unknown property type '" + std::string(tok[1]) + "'", line_no,
                                 ParseError::Unit::line);
        p.type = *t;
        p.name = tok[2];
      } else {
        throw ParseError("malformed property line", line_no, ParseError::Unit::line);
      }
      header.elements.back().properties.push_back(std::move(p));
    } else {
      throw ParseError("unexpected header keyword '" + std::string(tok[0]) + "'", line_no,
                       ParseError::Unit::line);
    }
  }
  if (!have_format) throw ParseError("missing format line", line_no, ParseError::Unit::line);
  header.body_offset = pos;
  header.body_line = line_no + 1;
  return header;
}

double cast_to(Scalar type, double v) {
  switch (type) {
    case Scalar::float32: return static_cast<double>(static_cast<float>(v));
    case Scalar::float64: return v;
    default: return v;
  }
}

/// Reads element records as doubles, one vector per property (lists flattened
/// with a leading count).
class BodyReader {
 public:
  BodyReader(const Header& h, std::span<const std::uint8_t> bytes)
      : header_(h), bytes_(bytes), pos_(h.body_offset), line_(h.body_line) {}

  /// Location of the record most recently started.
  std::size_t location() const { return record_location_; }
  ParseError::Unit unit() const {
    return header_.format == PlyFormat::ascii ? ParseError::Unit::line : ParseError::Unit::byte;
  }

  void begin_record() {
    if (header_.format == PlyFormat::ascii) {
      while (true) {
        if (pos_ >= bytes_.size())
          throw ParseError("unexpected end of data: fewer records than the header declares", line_,
                           ParseError::Unit::line);
        const auto* begin = reinterpret_cast<const char*>(bytes_.data()) + pos_;
        const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', bytes_.size() - pos_));
        const std::size_t len = nl ? static_cast<std::size_t>(nl - begin) : bytes_.size() - pos_;
        pos_ += len + (nl ? 1 : 0);
        record_location_ = line_++;
        tokens_ = split_ws(std::string_view(begin, len));
        next_token_ = 0;
        if (!tokens_.empty()) break;
      }
    } else {
      record_location_ = pos_;
    }
  }

  void end_record() {
    if (header_.format == PlyFormat::ascii && next_token_ != tokens_.size())
      throw ParseError("extra values in record", record_location_, ParseError::Unit::line);
  }

  double read(Scalar type) {
    if (header_.format == PlyFormat::ascii) {
      if (next_token_ >= tokens_.size())
        throw ParseError("too few values in record", record_location_, ParseError::Unit::line);
      const std::string_view tok = tokens_[next_token_++];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError("bad numeric value '" + std::string(tok) + "'", record_location_,
                         ParseError::Unit::line);
      return cast_to(type, v);
    }
    const std::size_t n = scalar_size(type);
    if (pos_ + n > bytes_.size())
      throw ParseError("unexpected end of data: fewer records than the header declares", pos_,
                       ParseError::Unit::byte);
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    switch (type) {
      case Scalar::int8: return static_cast<std::int8_t>(*p);
      case Scalar::uint8: return *p;
      case Scalar::int16: return load<std::int16_t>(p);
      case Scalar::uint16: return load<std::uint16_t>(p);
      case Scalar::int32: return load<std::int32_t>(p);
      case Scalar::uint32: return load<std::uint32_t>(p);
      case Scalar::float32: return load<float>(p);
      case Scalar::float64: return load<double>(p);
    }
    return 0.0;
  }

  void finish() {
    if (header_.format == PlyFormat::ascii) {
      while (pos_ < bytes_.size()) {
        const auto* begin = reinterpret_cast<const char*>(bytes_.data()) + pos_;
        const auto* nl = static_cast<const char*>(std::memchr(begin, '\n', bytes_.size() - pos_));
        const std::size_t len = nl ? static_cast<std::size_t>(nl - begin) : bytes_.size() - pos_;
        pos_ += len + (nl ? 1 : 0);
        if (!split_ws(std::string_view(begin, len)).empty())
          throw ParseError("more records than the header declares", line_, ParseError::Unit::line);
        ++line_;
      }
    } else if (pos_ != bytes_.size()) {
      throw ParseError("trailing bytes after the declared records", pos_, ParseError::Unit::byte);
    }
  }

 private:
  template <typename T>
  static double load(const std::uint8_t* p) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return static_cast<double>(v);
  }

  const Header& header_;
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_;
  std::size_t line_;
  std::size_t record_location_ = 0;
  std::vector<std::string_view> tokens_;
  std::size_t next_token_ = 0;
};

int property_index(const Element& e, std::string_view name) {
  for (std::size_t i = 0; i < e.properties.size(); ++i) {
    if (e.properties[i].name == name && !e.properties[i].is_list) return static_cast<int>(i);
  }
  return -1;
}

// --- writing ---------------------------------------------------------------

void append(Bytes& out, std::string_view s) { out.insert(out.end(), s.begin(), s.end()); }

template <typename T>
void append_binary(Bytes& out, T v) {
  std::uint8_t buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.insert(out.end(), buf, buf + sizeof(T));
}

void append_float_text(Bytes& out, float v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.insert(out.end(), buf, ptr);
}

std::string header_text(PlyFormat format, std::size_t vertices, bool normals,
                        std::optional<std::size_t> faces) {
  std::ostringstream h;
  h << "ply\nformat " << (format == PlyFormat::ascii ? "ascii" : "binary_little_endian") << " 1.0\n";
  h << "element vertex " << vertices << "\n";
  h << "property float x\nproperty float y\nproperty float z\n";
  if (normals) h << "property float nx\nproperty float ny\nproperty float nz\n";
  if (faces) h << "element face " << *faces << "\nproperty list uchar int vertex_indices\n";
  h << "end_header\n";
  return h.str();
}

void write_vertices(Bytes& out, PlyFormat format, const std::vector<Vec3>& points,
                    const std::vector<Vec3>* normals) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    std::array<float, 6> values{};
    std::size_t n = 3;
    for (int k = 0; k < 3; ++k) values[k] = static_cast<float>(points[i][k]);
    if (normals) {
      for (int k = 0; k < 3; ++k) values[3 + k] = static_cast<float>((*normals)[i][k]);
      n = 6;
    }
    if (format == PlyFormat::ascii) {
      for (std::size_t k = 0; k < n; ++k) {
        if (k) out.push_back(' ');
        append_float_text(out, values[k]);
      }
      out.push_back('\n');
    } else {
      for (std::size_t k = 0; k < n; ++k) append_binary(out, values[k]);
    }
  }
}

}  // namespace

PlyContent read_ply(std::span<const std::uint8_t> bytes) {
  const Header header = parse_header(bytes);
  BodyReader body(header, bytes);

  std::vector<Vec3> points;
  std::optional<std::vector<Vec3>> normals;
  std::vector<Triangle> triangles;
  bool have_vertex = false, have_face = false;

  for (const Element& e : header.elements) {
    if (e.name == "vertex") {
      have_vertex = true;
      const int ix = property_index(e, "x"), iy = property_index(e, "y"), iz = property_index(e, "z");
      if (ix < 0 || iy < 0 || iz < 0)
        throw ParseError("vertex element lacks x/y/z properties", header.body_line - 1, ParseError::Unit::line);
      const int inx = property_index(e, "nx"), iny = property_index(e, "ny"), inz = property_index(e, "nz");
      const bool with_normals = inx >= 0 && iny >= 0 && inz >= 0;
      points.reserve(e.count);
      if (with_normals) {
        normals.emplace();
        normals->reserve(e.count);
      }
      std::vector<double> values(e.properties.size());
      for (std::size_t r = 0; r < e.count; ++r) {
        body.begin_record();
        for (std::size_t k = 0; k < e.properties.size(); ++k) {
          const Property& p = e.properties[k];
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(body.read(p.count_type));
            for (std::size_t j = 0; j < n; ++j) body.read(p.type);
            values[k] = 0.0;
          } else {
            values[k] = body.read(p.type);
          }
        }
        body.end_record();
        points.emplace_back(values[ix], values[iy], values[iz]);
        if (with_normals) normals->emplace_back(values[inx], values[iny], values[inz]);
      }
    } else if (e.name == "face") {
      have_face = true;
      triangles.reserve(e.count);
      for (std::size_t r = 0; r < e.count; ++r) {
        body.begin_record();
        std::vector<std::uint32_t> polygon;
        bool found = false;
        for (const Property& p : e.properties) {
          if (p.is_list) {
            const double count = body.read(p.count_type);
            if (count < 0) throw ParseError("negative list length", body.location(), body.unit());
            const auto n = static_cast<std::size_t>(count);
            const bool indices = !found && (p.name == "vertex_indices" || p.name == "vertex_index");
            for (std::size_t j = 0; j < n; ++j) {
              const double v = body.read(p.type);
              if (!indices) continue;
              if (v < 0 || v >= static_cast<double>(points.size()) || v != static_cast<double>(static_cast<std::int64_t>(v)))
                throw ParseError("face index " + std::to_string(static_cast<long long>(v)) +
                                     " out of range for " + std::to_string(points.size()) + " vertices",
                                 body.location(), body.unit());
              polygon.push_back(static_cast<std::uint32_t>(v));
            }
            if (indices) found = true;
          } else {
            body.read(p.type);
          }
        }
        body.end_record();
        if (!found) throw ParseError("face element lacks vertex_indices", body.location(), body.unit());
        if (polygon.size() < 3) throw ParseError("face with fewer than 3 vertices", body.location(), body.unit());
        for (std::size_t j = 1; j + 1 < polygon.size(); ++j)
          triangles.push_back({polygon[0], polygon[j], polygon[j + 1]});
      }
    } else {
      for (std::size_t r = 0; r < e.count; ++r) {
        body.begin_record();
        for (const Property& p : e.properties) {
          if (p.is_list) {
            const auto n = static_cast<std::size_t>(body.read(p.count_type));
            for (std::size_t j = 0; j < n; ++j) body.read(p.type);
          } else {
            body.read(p.type);
          }
        }
        body.end_record();
      }
    }
  }
  body.finish();
  if (!have_vertex) throw ParseError("no vertex element", header.body_line - 1, ParseError::Unit::line);

  if (have_face) {
    TriangleMesh mesh;
    mesh.vertices = std::move(points);
    mesh.triangles = std::move(triangles);
    return mesh;
  }
  PointCloud cloud;
  cloud.points = std::move(points);
  cloud.normals = std::move(normals);
  return cloud;
}

Bytes write_ply(const PointCloud& cloud, PlyFormat format) {
  Bytes out;
  append(out, header_text(format, cloud.size(), cloud.has_normals(), std::nullopt));
  write_vertices(out, format, cloud.points, cloud.normals ? &*cloud.normals : nullptr);
  return out;
}

Bytes write_ply(const TriangleMesh& mesh, PlyFormat format) {
  Bytes out;
  append(out, header_text(format, mesh.vertices.size(), false, mesh.triangles.size()));
  write_vertices(out, format, mesh.vertices, nullptr);
  for (const Triangle& t : mesh.triangles) {
    if (format == PlyFormat::ascii) {
      append(out, "3 " + std::to_string(t[0]) + " " + std::to_string(t[1]) + " " + std::to_string(t[2]) + "\n");
    } else {
      append_binary<std::uint8_t>(out, 3);
      for (std::uint32_t v : t) append_binary(out, static_cast<std::int32_t>(v));
    }
  }
  return out;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

PointCloud read_ply_cloud(const std::filesystem::path& path) {
  PlyContent content = read_ply(read_file(path));
  if (auto* cloud = std::get_if<PointCloud>(&content)) return std::move(*cloud);
  PointCloud cloud;
  cloud.points = std::move(std::get<TriangleMesh>(content).vertices);
  return cloud;
}

TriangleMesh read_ply_mesh(const std::filesystem::path& path) {
  PlyContent content = read_ply(read_file(path));
  if (auto* mesh = std::get_if<TriangleMesh>(&content)) return std::move(*mesh);
  throw Error(path.string() + " has no face element");
}

}  // namespace turnscan
