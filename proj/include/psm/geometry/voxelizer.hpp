#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "psm/core/error.hpp"
#include "psm/core/log.hpp"
#include "psm/core/vec.hpp"
#include "psm/geometry/mesh.hpp"

namespace psm {

/// Binary occupancy of a body in its reference frame, sampled at spacing
/// h = dx_lbm / 2^s. Cell (i,j,k) covers [origin + i h, origin + (i+1) h).
class GeometryField {
 public:
  GeometryField() = default;

  GeometryField(int s, double dx_lbm, const Vec3& origin, std::array<std::size_t, 3> extents, double bounding_radius)
      : s_(s), dx_lbm_(dx_lbm), h_(std::ldexp(dx_lbm, -s)), origin_(origin), ext_(extents),
        bounding_radius_(bounding_radius), bits_((extents[0] * extents[1] * extents[2] + 63) / 64, 0) {}

  [[nodiscard]] int s() const noexcept { return s_; }
  [[nodiscard]] double dx_lbm() const noexcept { return dx_lbm_; }
  [[nodiscard]] double spacing() const noexcept { return h_; }
  [[nodiscard]] const Vec3& origin() const noexcept { return origin_; }
  [[nodiscard]] const std::array<std::size_t, 3>& extents() const noexcept { return ext_; }
  [[nodiscard]] std::size_t size() const noexcept { return ext_[0] * ext_[1] * ext_[2]; }
  [[nodiscard]] double bounding_radius() const noexcept { return bounding_radius_; }
  [[nodiscard]] const std::vector<std::uint64_t>& words() const noexcept { return bits_; }
  [[nodiscard]] std::vector<std::uint64_t>& words() noexcept { return bits_; }

  [[nodiscard]] Vec3 upper() const noexcept {
    return origin_ + Vec3{ext_[0] * h_, ext_[1] * h_, ext_[2] * h_};
  }

  [[nodiscard]] std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return i + ext_[0] * (j + ext_[1] * k);
  }
  [[nodiscard]] bool test(std::size_t idx) const noexcept { return (bits_[idx >> 6] >> (idx & 63)) & 1U; }
  [[nodiscard]] bool test(std::size_t i, std::size_t j, std::size_t k) const noexcept { return test(index(i, j, k)); }
  void set(std::size_t idx, bool v) noexcept {
    const std::uint64_t mask = std::uint64_t{1} << (idx & 63);
    if (v)
      bits_[idx >> 6] |= mask;
    else
      bits_[idx >> 6] &= ~mask;
  }

  [[nodiscard]] Vec3 sample_center(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return origin_ + Vec3{(i + 0.5) * h_, (j + 0.5) * h_, (k + 0.5) * h_};
  }

  /// Occupancy of the cell containing body-frame point p; outside the
  /// stored extents is empty.
  [[nodiscard]] bool lookup(const Vec3& p) const noexcept {
    const double fx = (p.x - origin_.x) / h_, fy = (p.y - origin_.y) / h_, fz = (p.z - origin_.z) / h_;
    if (!(fx >= 0.0 && fy >= 0.0 && fz >= 0.0)) return false;
    const auto i = static_cast<std::size_t>(fx), j = static_cast<std::size_t>(fy), k = static_cast<std::size_t>(fz);
    if (i >= ext_[0] || j >= ext_[1] || k >= ext_[2]) return false;
    return test(index(i, j, k));
  }

  [[nodiscard]] std::size_t count_inside() const noexcept {
    std::size_t n = 0;
    for (const auto w : bits_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  [[nodiscard]] double inside_volume() const noexcept { return static_cast<double>(count_inside()) * h_ * h_ * h_; }

  friend bool operator==(const GeometryField&, const GeometryField&) = default;

 private:
  int s_ = 0;
  double dx_lbm_ = 1.0;
  double h_ = 1.0;
  Vec3 origin_{};
  std::array<std::size_t, 3> ext_{0, 0, 0};
  double bounding_radius_ = 0.0;
  std::vector<std::uint64_t> bits_;
};

struct VoxelizeOptions {
  /// Padding around the bounding box, in LBM cells.
  int pad_cells = 2;
  /// Upper bound on the bit array size in bytes.
  std::size_t memory_cap_bytes = std::size_t{4} << 30;
  bool strict = true;
};

namespace detail {

inline GeometryField allocate_field(const Aabb& box, double bounding_radius, double dx_lbm, int s,
                                    const VoxelizeOptions& opts) {
  if (s < 0) throw ArgumentError("super-sampling factor must be non-negative");
  if (!(dx_lbm > 0.0)) throw ArgumentError("lattice spacing must be positive");
  const double h = std::ldexp(dx_lbm, -s);
  const double pad = opts.pad_cells * dx_lbm;
  Vec3 origin;
  std::array<std::size_t, 3> ext{};
  for (int a = 0; a < 3; ++a) {
    const double lo = std::floor((box.lo[a] - pad) / h);
    const double hi = std::ceil((box.hi[a] + pad) / h);
    origin[a] = lo * h;
    ext[static_cast<std::size_t>(a)] = static_cast<std::size_t>(hi - lo);
  }
  const long double cells = static_cast<long double>(ext[0]) * ext[1] * ext[2];
  const long double bytes = std::ceil(cells / 64.0L) * 8.0L;
  if (bytes > static_cast<long double>(opts.memory_cap_bytes))
    throw ResourceError("geometry field of " + std::to_string(ext[0]) + "x" + std::to_string(ext[1]) + "x" +
                        std::to_string(ext[2]) + " samples needs " + std::to_string(static_cast<double>(bytes)) +
                        " bytes, above the cap of " + std::to_string(opts.memory_cap_bytes));
  return GeometryField(s, dx_lbm, origin, ext, bounding_radius);
}

enum class RayHit { miss, hit, degenerate };

inline constexpr double kRayEdgeTolerance = 1e-9;

/// Ray from `o` along `dir` against triangle (a,b,c); returns the hit
/// parameter through `t`. Near-edge/vertex passes report `degenerate`.
inline RayHit ray_triangle(const Vec3& o, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c, double& t) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 p = cross(dir, e2);
  const double det = dot(e1, p);
  const double scale = norm(e1) * norm(e2);
  if (std::abs(det) <= 1e-14 * scale) return RayHit::miss;  // parallel to the ray
  const double inv = 1.0 / det;
  const Vec3 s = o - a;
  const double u = dot(s, p) * inv;
  const Vec3 qv = cross(s, e1);
  const double v = dot(dir, qv) * inv;
  const double w = 1.0 - u - v;
  t = dot(e2, qv) * inv;
  const double mn = std::min({u, v, w});
  if (mn < -kRayEdgeTolerance) return RayHit::miss;
  if (t < 0.0) return RayHit::miss;
  if (mn <= kRayEdgeTolerance) return RayHit::degenerate;
  return RayHit::hit;
}

/// Triangles binned on the (y,z) plane for +x ray columns.
class ColumnBins {
 public:
  ColumnBins(const TriangleMesh& mesh, const Aabb& box, double bin)
      : mesh_(mesh), lo_y_(box.lo.y), lo_z_(box.lo.z), bin_(bin) {
    ny_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((box.hi.y - box.lo.y) / bin)) + 1);
    nz_ = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil((box.hi.z - box.lo.z) / bin)) + 1);
    bins_.resize(ny_ * nz_);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
      const auto t = mesh.triangle(f);
      const double ylo = std::min({t[0].y, t[1].y, t[2].y}), yhi = std::max({t[0].y, t[1].y, t[2].y});
      const double zlo = std::min({t[0].z, t[1].z, t[2].z}), zhi = std::max({t[0].z, t[1].z, t[2].z});
      const std::size_t j0 = clampy(ylo), j1 = clampy(yhi), k0 = clampz(zlo), k1 = clampz(zhi);
      for (std::size_t k = k0; k <= k1; ++k)
        for (std::size_t j = j0; j <= j1; ++j) bins_[j + ny_ * k].push_back(static_cast<std::uint32_t>(f));
    }
  }

  /// Sorted x-intercepts of the +x line through (y,z). Returns false if the
  /// line grazes an edge or vertex.
  bool intercepts(double y, double z, std::vector<double>& xs) const {
    xs.clear();
    for (const std::uint32_t f : bins_[clampy(y) + ny_ * clampz(z)]) {
      const auto t = mesh_.triangle(f);
      const double w0 = edge(t[1], t[2], y, z), w1 = edge(t[2], t[0], y, z), w2 = edge(t[0], t[1], y, z);
      const double sum = w0 + w1 + w2;
      const double scale = std::hypot(t[1].y - t[0].y, t[1].z - t[0].z) * std::hypot(t[2].y - t[0].y, t[2].z - t[0].z);
      if (std::abs(sum) <= 1e-14 * scale || sum == 0.0) continue;  // parallel to +x
      const double b0 = w0 / sum, b1 = w1 / sum, b2 = w2 / sum;
      const double mn = std::min({b0, b1, b2});
      if (mn < -kRayEdgeTolerance) continue;
      if (mn <= kRayEdgeTolerance) return false;
      xs.push_back(b0 * t[0].x + b1 * t[1].x + b2 * t[2].x);
    }
    std::sort(xs.begin(), xs.end());
    return xs.size() % 2 == 0;
  }

 private:
  static double edge(const Vec3& a, const Vec3& b, double y, double z) noexcept {
    return (b.y - a.y) * (z - a.z) - (b.z - a.z) * (y - a.y);
  }
  std::size_t clampy(double y) const noexcept {
    const double f = std::floor((y - lo_y_) / bin_);
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(ny_ - 1)));
  }
  std::size_t clampz(double z) const noexcept {
    const double f = std::floor((z - lo_z_) / bin_);
    return static_cast<std::size_t>(std::clamp(f, 0.0, static_cast<double>(nz_ - 1)));
  }

  const TriangleMesh& mesh_;
  double lo_y_, lo_z_, bin_;
  std::size_t ny_ = 1, nz_ = 1;
  std::vector<std::vector<std::uint32_t>> bins_;
};

}  // namespace detail

/// Fallback ray directions used when the +x ray grazes an edge or vertex.
inline constexpr std::array<Vec3, 2> kFallbackRays{Vec3{0.5773502691896258, 0.6154797086703874, 0.5365729180004349},
                                                   Vec3{-0.3090169943749474, 0.8090169943749474, 0.5}};

/// Parity point-in-polyhedron test along a single direction, scanning all
/// faces. `degenerate` is set when the ray grazes an edge or vertex.
inline bool inside_by_parity(const TriangleMesh& mesh, const Vec3& p, const Vec3& dir, bool& degenerate) {
  degenerate = false;
  std::size_t crossings = 0;
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto t = mesh.triangle(f);
    double tt = 0.0;
    const auto r = detail::ray_triangle(p, dir, t[0], t[1], t[2], tt);
    if (r == detail::RayHit::degenerate) {
      degenerate = true;
      return false;
    }
    if (r == detail::RayHit::hit) ++crossings;
  }
  return crossings % 2 == 1;
}

/// Point-in-polyhedron with the fallback ray sequence.
inline bool point_inside(const TriangleMesh& mesh, const Vec3& p) {
  bool degenerate = false;
  bool in = false;
  for (const auto& dir : kFallbackRays) {
    in = inside_by_parity(mesh, p, dir, degenerate);
    if (!degenerate) return in;
  }
  return in;
}

/// Voxelizes a watertight mesh (body frame, meters) once into a geometry
/// field with spacing dx_lbm / 2^s. Each sample center is classified by
/// ray-casting parity: +x columns first, per-sample oblique rays where a
/// column grazes an edge or vertex.
inline GeometryField voxelize(const TriangleMesh& mesh, double dx_lbm, int s, const VoxelizeOptions& opts = {}) {
  if (mesh.faces.empty()) throw ArgumentError("cannot voxelize an empty mesh");
  if (opts.strict) {
    const TopologyReport topo = check_topology(mesh);
    if (!topo.watertight()) throw TopologyError("voxelize: mesh is not watertight: " + topo.summary());
  }
  const Aabb box = mesh.bounds();
  double radius = 0.0;
  for (const auto& v : mesh.vertices) radius = std::max(radius, norm(v));
  GeometryField g = detail::allocate_field(box, radius, dx_lbm, s, opts);
  const auto ext = g.extents();
  const double h = g.spacing();

  const double span = std::max(box.size().y, box.size().z);
  const double bin = std::max(h, span / 256.0);
  detail::ColumnBins bins(mesh, box, bin);

  std::vector<double> xs;
  std::size_t fallback_columns = 0;
  for (std::size_t k = 0; k < ext[2]; ++k)
    for (std::size_t j = 0; j < ext[1]; ++j) {
      const Vec3 c0 = g.sample_center(0, j, k);
      if (c0.y < box.lo.y || c0.y > box.hi.y || c0.z < box.lo.z || c0.z > box.hi.z) continue;
      if (bins.intercepts(c0.y, c0.z, xs)) {
        std::size_t next = 0;
        bool in = false;
        for (std::size_t i = 0; i < ext[0]; ++i) {
          const double x = g.origin().x + (i + 0.5) * h;
          while (next < xs.size() && xs[next] <= x) {
            in = !in;
            ++next;
          }
          if (in) g.set(g.index(i, j, k), true);
        }
      } else {
        ++fallback_columns;
        for (std::size_t i = 0; i < ext[0]; ++i) {
          const Vec3 p = g.sample_center(i, j, k);
          if (p.x < box.lo.x || p.x > box.hi.x) continue;
          if (point_inside(mesh, p)) g.set(g.index(i, j, k), true);
        }
      }
    }
  if (fallback_columns > 0) log::debug("voxelize: " + std::to_string(fallback_columns) + " column(s) used fallback rays");
  return g;
}

/// Voxelizes an analytic inside predicate over a body-frame bounding box.
inline GeometryField voxelize_predicate(const Aabb& box, double bounding_radius, double dx_lbm, int s,
                                        const std::function<bool(const Vec3&)>& inside,
                                        const VoxelizeOptions& opts = {}) {
  GeometryField g = detail::allocate_field(box, bounding_radius, dx_lbm, s, opts);
  const auto ext = g.extents();
  for (std::size_t k = 0; k < ext[2]; ++k)
    for (std::size_t j = 0; j < ext[1]; ++j)
      for (std::size_t i = 0; i < ext[0]; ++i)
        if (inside(g.sample_center(i, j, k))) g.set(g.index(i, j, k), true);
  return g;
}

/// Sphere of `radius` centred at the body-frame origin.
inline GeometryField voxelize_sphere(double radius, double dx_lbm, int s, const VoxelizeOptions& opts = {}) {
  const Aabb box{{-radius, -radius, -radius}, {radius, radius, radius}};
  const double r2 = radius * radius;
  return voxelize_predicate(box, radius, dx_lbm, s, [r2](const Vec3& p) { return dot(p, p) < r2; }, opts);
}

// ---------------------------------------------------------------------------
// Cache file: little-endian
//   magic "PSMGEOF\0" | u32 version | i32 s | f64 dx_lbm | f64 origin[3]
//   | u64 extents[3] | f64 bounding_radius | u64 word_count | u64 words[]

inline constexpr char kGeometryCacheMagic[8] = {'P', 'S', 'M', 'G', 'E', 'O', 'F', '\0'};
inline constexpr std::uint32_t kGeometryCacheVersion = 1;

namespace detail {

template <typename T>
void put_le(std::vector<unsigned char>& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.insert(out.end(), b, b + sizeof(T));
}

template <typename T>
T get_le(std::span<const unsigned char> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw ParseError(pos, "geometry cache truncated");
  unsigned char b[sizeof(T)];
  std::memcpy(b, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_geometry_cache(const GeometryField& g) {
  std::vector<unsigned char> out(kGeometryCacheMagic, kGeometryCacheMagic + 8);
  detail::put_le<std::uint32_t>(out, kGeometryCacheVersion);
  detail::put_le<std::int32_t>(out, g.s());
  detail::put_le<double>(out, g.dx_lbm());
  for (int a = 0; a < 3; ++a) detail::put_le<double>(out, g.origin()[a]);
  for (const auto e : g.extents()) detail::put_le<std::uint64_t>(out, e);
  detail::put_le<double>(out, g.bounding_radius());
  detail::put_le<std::uint64_t>(out, g.words().size());
  for (const auto w : g.words()) detail::put_le<std::uint64_t>(out, w);
  return out;
}

inline GeometryField decode_geometry_cache(std::span<const unsigned char> in) {
  if (in.size() < 8 || std::memcmp(in.data(), kGeometryCacheMagic, 8) != 0)
    throw ParseError(0, "not a geometry cache file (bad magic)");
  std::size_t pos = 8;
  const auto version = detail::get_le<std::uint32_t>(in, pos);
  if (version != kGeometryCacheVersion)
    throw ParseError(8, "unsupported geometry cache version " + std::to_string(version));
  const auto s = detail::get_le<std::int32_t>(in, pos);
  const auto dx = detail::get_le<double>(in, pos);
  Vec3 origin;
  for (int a = 0; a < 3; ++a) origin[a] = detail::get_le<double>(in, pos);
  std::array<std::size_t, 3> ext{};
  for (auto& e : ext) e = static_cast<std::size_t>(detail::get_le<std::uint64_t>(in, pos));
  const auto radius = detail::get_le<double>(in, pos);
  const std::size_t words_at = pos;
  const auto nwords = detail::get_le<std::uint64_t>(in, pos);
  GeometryField g(s, dx, origin, ext, radius);
  if (nwords != g.words().size()) throw ParseError(words_at, "word count does not match extents");
  for (auto& w : g.words()) w = detail::get_le<std::uint64_t>(in, pos);
  if (pos != in.size()) throw ParseError(pos, "trailing bytes after geometry cache payload");
  return g;
}

/// Writes through a temporary file and renames, so a failed write leaves
/// no partial cache behind.
inline void write_geometry_cache(const GeometryField& g, const std::filesystem::path& path) {
  const auto bytes = encode_geometry_cache(g);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(tmp.string(), "cannot open for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw IoError(tmp.string(), "write failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError(path.string(), "cannot move cache into place");
  }
}

inline GeometryField read_geometry_cache(const std::filesystem::path& path) {
  return decode_geometry_cache(read_file_bytes(path));
}

}  // namespace psm
