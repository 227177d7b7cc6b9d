#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numbers>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "psm/core/error.hpp"
#include "psm/core/log.hpp"
#include "psm/core/vec.hpp"

namespace psm {

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::max(), std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
  Vec3 hi{std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest(),
          std::numeric_limits<double>::lowest()};

  void extend(const Vec3& p) noexcept {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  [[nodiscard]] Vec3 size() const noexcept { return hi - lo; }
  [[nodiscard]] bool empty() const noexcept { return lo.x > hi.x; }
};

/// Indexed triangle surface in meters.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> faces;
  /// Vertex count before welding (3 per triangle for STL).
  std::size_t raw_vertex_count = 0;

  [[nodiscard]] Aabb bounds() const noexcept {
    Aabb b;
    for (const auto& v : vertices) b.extend(v);
    return b;
  }

  [[nodiscard]] std::array<Vec3, 3> triangle(std::size_t f) const noexcept {
    return {vertices[faces[f][0]], vertices[faces[f][1]], vertices[faces[f][2]]};
  }

  /// Signed enclosed volume (divergence theorem); positive for outward normals.
  [[nodiscard]] double signed_volume() const noexcept {
    double v = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto t = triangle(f);
      v += dot(t[0], cross(t[1], t[2]));
    }
    return v / 6.0;
  }

  [[nodiscard]] double volume() const noexcept { return std::abs(signed_volume()); }

  /// Center of the enclosed volume.
  [[nodiscard]] Vec3 volume_centroid() const noexcept {
    Vec3 acc{};
    double vol = 0.0;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      const auto t = triangle(f);
      const double v = dot(t[0], cross(t[1], t[2])) / 6.0;
      acc += (t[0] + t[1] + t[2]) * (v / 4.0);
      vol += v;
    }
    return vol != 0.0 ? acc / vol : Vec3{};
  }

  void translate(const Vec3& d) noexcept {
    for (auto& v : vertices) v += d;
  }
  void scale(double s) noexcept {
    for (auto& v : vertices) v *= s;
  }
  void flip_orientation() noexcept {
    for (auto& f : faces) std::swap(f[1], f[2]);
  }
};

/// Result of the closed-surface check.
struct TopologyReport {
  /// Undirected edges not shared by exactly two faces, as vertex pairs.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> non_manifold_edges;
  /// Directed edges used twice (neighbouring faces with opposite winding).
  std::size_t inconsistent_edges = 0;
  std::size_t bad_indices = 0;

  [[nodiscard]] bool watertight() const noexcept {
    return non_manifold_edges.empty() && inconsistent_edges == 0 && bad_indices == 0;
  }

  [[nodiscard]] std::string summary(std::size_t max_list = 8) const {
    std::ostringstream os;
    os << non_manifold_edges.size() << " non-manifold edge(s), " << inconsistent_edges
       << " inconsistently oriented edge(s), " << bad_indices << " out-of-range index(es)";
    if (!non_manifold_edges.empty()) {
      os << ":";
      for (std::size_t k = 0; k < std::min(max_list, non_manifold_edges.size()); ++k)
        os << " (" << non_manifold_edges[k].first << "," << non_manifold_edges[k].second << ")";
      if (non_manifold_edges.size() > max_list) os << " ...";
    }
    return os.str();
  }
};

inline TopologyReport check_topology(const TriangleMesh& mesh) {
  TopologyReport r;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> undirected;
  std::map<std::pair<std::uint32_t, std::uint32_t>, int> directed;
  const auto n = static_cast<std::uint32_t>(mesh.vertices.size());
  for (const auto& f : mesh.faces) {
    if (f[0] >= n || f[1] >= n || f[2] >= n) {
      ++r.bad_indices;
      continue;
    }
    for (int k = 0; k < 3; ++k) {
      const std::uint32_t a = f[static_cast<std::size_t>(k)], b = f[static_cast<std::size_t>((k + 1) % 3)];
      ++undirected[{std::min(a, b), std::max(a, b)}];
      ++directed[{a, b}];
    }
  }
  for (const auto& [e, count] : undirected)
    if (count != 2) r.non_manifold_edges.push_back(e);
  for (const auto& [e, count] : directed)
    if (count > 1) ++r.inconsistent_edges;
  return r;
}

enum class MeshFormat { stl_binary, stl_ascii, obj };

struct MeshLoadOptions {
  /// Strict: a non-watertight surface is a TopologyError. Permissive: warning.
  bool strict = true;
};

namespace detail {

inline std::uint32_t read_u32_le(const unsigned char* p) noexcept {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline float read_f32_le(const unsigned char* p) noexcept {
  const std::uint32_t bits = read_u32_le(p);
  float f;
  std::memcpy(&f, &bits, sizeof f);
  return f;
}

/// Merges bit-identical vertex positions.
class VertexWelder {
 public:
  std::uint32_t add(const Vec3& v) {
    const std::array<double, 3> key{v.x, v.y, v.z};
    auto [it, inserted] = index_.try_emplace(key, static_cast<std::uint32_t>(vertices_.size()));
    if (inserted) vertices_.push_back(v);
    return it->second;
  }
  std::vector<Vec3> take() { return std::move(vertices_); }

 private:
  std::map<std::array<double, 3>, std::uint32_t> index_;
  std::vector<Vec3> vertices_;
};

inline TriangleMesh parse_stl_binary(std::span<const unsigned char> bytes) {
  if (bytes.size() < 84) throw ParseError(bytes.size(), "binary STL shorter than the 84-byte header");
  const std::uint32_t count = read_u32_le(bytes.data() + 80);
  VertexWelder welder;
  TriangleMesh mesh;
  mesh.faces.reserve(count);
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::size_t off = 84 + static_cast<std::size_t>(t) * 50;
    if (off + 50 > bytes.size())
      throw ParseError(bytes.size(), "truncated binary STL: triangle " + std::to_string(t) + " of " +
                                         std::to_string(count) + " incomplete");
    std::array<std::uint32_t, 3> face{};
    for (int k = 0; k < 3; ++k) {
      const unsigned char* p = bytes.data() + off + 12 + 12 * static_cast<std::size_t>(k);
      face[static_cast<std::size_t>(k)] = welder.add({read_f32_le(p), read_f32_le(p + 4), read_f32_le(p + 8)});
    }
    mesh.faces.push_back(face);
  }
  mesh.vertices = welder.take();
  mesh.raw_vertex_count = 3 * static_cast<std::size_t>(count);
  return mesh;
}

class TextCursor {
 public:
  explicit TextCursor(std::string_view text) : text_(text) {}

  [[nodiscard]] bool eof() noexcept {
    skip_ws();
    return pos_ >= text_.size();
  }
  [[nodiscard]] std::size_t pos() const noexcept { return pos_; }

  std::string_view word() {
    skip_ws();
    const std::size_t b = pos_;
    while (pos_ < text_.size() && !std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    return text_.substr(b, pos_ - b);
  }

  double number() {
    skip_ws();
    const std::size_t at = pos_;
    const std::string_view w = word();
    double v = 0.0;
    const auto res = std::from_chars(w.data(), w.data() + w.size(), v);
    if (res.ec != std::errc{} || res.ptr != w.data() + w.size())
      throw ParseError(at, "expected a number, found '" + std::string(w) + "'");
    return v;
  }

  void expect(std::string_view kw) {
    const std::size_t at = pos_;
    const std::string_view w = word();
    if (w != kw) throw ParseError(at, "expected '" + std::string(kw) + "', found '" + std::string(w) + "'");
  }

 private:
  void skip_ws() noexcept {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  std::string_view text_;
  std::size_t pos_ = 0;
};

inline TriangleMesh parse_stl_ascii(std::string_view text) {
  TextCursor cur(text);
  cur.expect("solid");
  // Optional solid name runs to end of line.
  VertexWelder welder;
  TriangleMesh mesh;
  std::size_t raw = 0;
  for (;;) {
    if (cur.eof()) throw ParseError(cur.pos(), "ASCII STL ended without 'endsolid'");
    const std::size_t at = cur.pos();
    const std::string_view w = cur.word();
    if (w == "endsolid") break;
    if (w != "facet") {
      if (mesh.faces.empty() && raw == 0) continue;  // solid name tokens
      throw ParseError(at, "expected 'facet' or 'endsolid', found '" + std::string(w) + "'");
    }
    cur.expect("normal");
    cur.number(), cur.number(), cur.number();
    cur.expect("outer");
    cur.expect("loop");
    std::array<std::uint32_t, 3> face{};
    for (int k = 0; k < 3; ++k) {
      cur.expect("vertex");
      const double x = cur.number(), y = cur.number(), z = cur.number();
      face[static_cast<std::size_t>(k)] = welder.add({x, y, z});
      ++raw;
    }
    cur.expect("endloop");
    cur.expect("endfacet");
    mesh.faces.push_back(face);
  }
  mesh.vertices = welder.take();
  mesh.raw_vertex_count = raw;
  return mesh;
}

inline TriangleMesh parse_obj(std::string_view text) {
  TriangleMesh mesh;
  std::size_t pos = 0;
  auto parse_index = [&](std::string_view tok, std::size_t at) -> std::uint32_t {
    const std::string_view head = tok.substr(0, tok.find('/'));
    long long v = 0;
    const auto res = std::from_chars(head.data(), head.data() + head.size(), v);
    if (res.ec != std::errc{} || head.empty()) throw ParseError(at, "bad face index '" + std::string(tok) + "'");
    const auto n = static_cast<long long>(mesh.vertices.size());
    const long long idx = v < 0 ? n + v : v - 1;
    if (idx < 0 || idx >= n) throw ParseError(at, "face index " + std::to_string(v) + " out of range");
    return static_cast<std::uint32_t>(idx);
  };
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = text.substr(pos, eol - pos);
    TextCursor cur(line);
    if (!cur.eof()) {
      const std::string_view kw = cur.word();
      if (kw == "v") {
        const double x = cur.number(), y = cur.number(), z = cur.number();
        mesh.vertices.push_back({x, y, z});
      } else if (kw == "f") {
        std::vector<std::uint32_t> poly;
        while (!cur.eof()) poly.push_back(parse_index(cur.word(), pos + cur.pos()));
        if (poly.size() < 3) throw ParseError(pos, "face with fewer than 3 vertices");
        for (std::size_t k = 1; k + 1 < poly.size(); ++k) mesh.faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
      // other records (vn, vt, o, g, s, usemtl, #...) are ignored
    }
    pos = eol + 1;
  }
  mesh.raw_vertex_count = mesh.vertices.size();
  return mesh;
}

}  // namespace detail

/// Parses a mesh from raw bytes, then validates topology per `opts`.
inline TriangleMesh load_mesh(std::span<const unsigned char> bytes, MeshFormat format, MeshLoadOptions opts = {}) {
  TriangleMesh mesh;
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  switch (format) {
    case MeshFormat::stl_binary: mesh = detail::parse_stl_binary(bytes); break;
    case MeshFormat::stl_ascii: mesh = detail::parse_stl_ascii(text); break;
    case MeshFormat::obj: mesh = detail::parse_obj(text); break;
  }
  const TopologyReport topo = check_topology(mesh);
  if (!topo.watertight()) {
    if (opts.strict) throw TopologyError("mesh is not watertight: " + topo.summary());
    log::warn("mesh is not watertight: " + topo.summary());
  }
  return mesh;
}

/// Binary STL files may also begin with "solid"; the size check decides.
inline MeshFormat detect_stl_format(std::span<const unsigned char> bytes) {
  if (bytes.size() >= 84) {
    const std::uint32_t count = detail::read_u32_le(bytes.data() + 80);
    if (84 + 50ULL * count == bytes.size()) return MeshFormat::stl_binary;
  }
  const std::string_view head(reinterpret_cast<const char*>(bytes.data()), std::min<std::size_t>(bytes.size(), 5));
  return head == "solid" ? MeshFormat::stl_ascii : MeshFormat::stl_binary;
}

inline std::vector<unsigned char> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Loads by extension (.stl auto-detects ASCII/binary, .obj).
inline TriangleMesh load_mesh_file(const std::filesystem::path& path, MeshLoadOptions opts = {}) {
  const auto bytes = read_file_bytes(path);
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  MeshFormat fmt;
  if (ext == ".obj")
    fmt = MeshFormat::obj;
  else if (ext == ".stl")
    fmt = detect_stl_format(bytes);
  else
    throw IoError(path.string(), "unsupported mesh extension '" + ext + "' (expected .stl or .obj)");
  return load_mesh(bytes, fmt, opts);
}

inline void write_stl_binary(const TriangleMesh& mesh, std::ostream& os) {
  char header[80] = {};
  std::snprintf(header, sizeof header, "psm binary stl");
  os.write(header, 80);
  auto put_u32 = [&](std::uint32_t v) {
    const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                                static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
  };
  auto put_f32 = [&](double d) {
    const float f = static_cast<float>(d);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(bits);
  };
  put_u32(static_cast<std::uint32_t>(mesh.faces.size()));
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto t = mesh.triangle(f);
    const Vec3 n = normalized(cross(t[1] - t[0], t[2] - t[0]));
    put_f32(n.x), put_f32(n.y), put_f32(n.z);
    for (const auto& v : t) put_f32(v.x), put_f32(v.y), put_f32(v.z);
    os.write("\0\0", 2);
  }
}

inline void write_stl_ascii(const TriangleMesh& mesh, std::ostream& os) {
  os << "solid psm\n";
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto t = mesh.triangle(f);
    const Vec3 n = normalized(cross(t[1] - t[0], t[2] - t[0]));
    os << " facet normal " << n.x << ' ' << n.y << ' ' << n.z << "\n  outer loop\n";
    for (const auto& v : t) os << "   vertex " << v.x << ' ' << v.y << ' ' << v.z << '\n';
    os << "  endloop\n endfacet\n";
  }
  os << "endsolid psm\n";
}

// ---------------------------------------------------------------------------
// Procedural meshes

/// Axis-aligned box centred at `center`, outward-facing triangles.
inline TriangleMesh make_box(const Vec3& half, const Vec3& center = {}) {
  TriangleMesh m;
  for (int k = 0; k < 8; ++k)
    m.vertices.push_back(center + Vec3{(k & 1) ? half.x : -half.x, (k & 2) ? half.y : -half.y,
                                       (k & 4) ? half.z : -half.z});
  m.faces = {{0, 2, 1}, {1, 2, 3}, {4, 5, 6}, {5, 7, 6}, {0, 1, 4}, {1, 5, 4},
             {2, 6, 3}, {3, 6, 7}, {0, 4, 2}, {2, 4, 6}, {1, 3, 5}, {3, 7, 5}};
  m.raw_vertex_count = 8;
  return m;
}

inline TriangleMesh make_cube(double side, const Vec3& center = {}) {
  return make_box({side / 2, side / 2, side / 2}, center);
}

/// Icosahedron refined `subdivisions` times, vertices projected to the sphere.
inline TriangleMesh make_icosphere(double radius, int subdivisions, const Vec3& center = {}) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> v = {{-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
                         {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1}};
  for (auto& p : v) p = normalized(p);
  std::vector<std::array<std::uint32_t, 3>> f = {
      {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11}, {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9}, {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1}};
  for (int s = 0; s < subdivisions; ++s) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> mid;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::make_pair(std::min(a, b), std::max(a, b));
      auto [it, ins] = mid.try_emplace(key, static_cast<std::uint32_t>(v.size()));
      if (ins) v.push_back(normalized((v[a] + v[b]) * 0.5));
      return it->second;
    };
    std::vector<std::array<std::uint32_t, 3>> nf;
    nf.reserve(f.size() * 4);
    for (const auto& tri : f) {
      const std::uint32_t a = midpoint(tri[0], tri[1]), b = midpoint(tri[1], tri[2]), c = midpoint(tri[2], tri[0]);
      nf.push_back({tri[0], a, c});
      nf.push_back({tri[1], b, a});
      nf.push_back({tri[2], c, b});
      nf.push_back({a, b, c});
    }
    f = std::move(nf);
  }
  TriangleMesh m;
  for (const auto& p : v) m.vertices.push_back(center + p * radius);
  m.faces = std::move(f);
  m.raw_vertex_count = m.vertices.size();
  return m;
}

/// Thin rectangular blade of span `length` (along z), chord `chord` and
/// thickness `thickness`, twisted linearly by `twist` radians over its span.
/// Closed surface with `sections` + 1 cross sections.
inline TriangleMesh make_twisted_blade(double length, double chord, double thickness, double twist, int sections) {
  TriangleMesh m;
  const std::array<std::array<double, 2>, 4> corners{{{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}};
  for (int s = 0; s <= sections; ++s) {
    const double frac = static_cast<double>(s) / sections;
    const double z = (frac - 0.5) * length;
    const double a = (frac - 0.5) * twist;
    const double ca = std::cos(a), sa = std::sin(a);
    for (const auto& c : corners) {
      const double px = c[0] * chord, py = c[1] * thickness;
      m.vertices.push_back({ca * px - sa * py, sa * px + ca * py, z});
    }
  }
  auto id = [](int s, int k) { return static_cast<std::uint32_t>(4 * s + (k % 4)); };
  for (int s = 0; s < sections; ++s)
    for (int k = 0; k < 4; ++k) {
      m.faces.push_back({id(s, k), id(s, k + 1), id(s + 1, k + 1)});
      m.faces.push_back({id(s, k), id(s + 1, k + 1), id(s + 1, k)});
    }
  m.faces.push_back({id(0, 0), id(0, 2), id(0, 1)});
  m.faces.push_back({id(0, 0), id(0, 3), id(0, 2)});
  m.faces.push_back({id(sections, 0), id(sections, 1), id(sections, 2)});
  m.faces.push_back({id(sections, 0), id(sections, 2), id(sections, 3)});
  m.raw_vertex_count = m.vertices.size();
  return m;
}

}  // namespace psm
