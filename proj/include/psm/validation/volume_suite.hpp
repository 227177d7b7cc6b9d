#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "psm/core/error.hpp"
#include "psm/core/worker_pool.hpp"
#include "psm/geometry/fraction.hpp"
#include "psm/geometry/mesh.hpp"
#include "psm/geometry/voxelizer.hpp"

namespace psm::validation {

enum class VolumeGeometry { cube, mesh, blade };

inline std::string_view to_string(VolumeGeometry g) noexcept {
  switch (g) {
    case VolumeGeometry::cube: return "cube";
    case VolumeGeometry::mesh: return "mesh";
    case VolumeGeometry::blade: return "blade";
  }
  return "?";
}

/// One cell of the volume-error table. N is the number of lattice cells
/// across the geometry's largest extent (span for the blade).
struct VolumeErrorCase {
  VolumeGeometry geometry = VolumeGeometry::cube;
  int N = 20;
  int s = 1;
  std::size_t steps = 100;
  std::filesystem::path mesh_path;  ///< for VolumeGeometry::mesh
  std::size_t memory_cap_bytes = std::size_t{4} << 30;
};

enum class CaseStatus { ok, skipped, failed };

inline std::string_view to_string(CaseStatus s) noexcept {
  return s == CaseStatus::ok ? "ok" : (s == CaseStatus::skipped ? "skipped" : "failed");
}

struct VolumeErrorRow {
  VolumeErrorCase input;
  CaseStatus status = CaseStatus::ok;
  double error = 0.0;           ///< time mean of squared relative volume deviation
  double mean_relative = 0.0;   ///< |mean V_s - V| / V
  double reference_volume = 0.0;
  std::string message;
};

/// Rotation schedule: the body turns about the fixed axis `axis` by
/// 2 pi * `turns` over 100 steps, so poses sample many lattice alignments.
struct RotationSchedule {
  Vec3 axis{1.0, 2.0, 3.0};
  double turns_per_100_steps = 0.37;
  Vec3 center{};

  [[nodiscard]] Pose operator()(std::size_t step) const {
    Pose p;
    p.rotation = rotation_about(axis, 2.0 * std::numbers::pi * turns_per_100_steps * static_cast<double>(step) / 100.0);
    p.translation = center;
    return p;
  }
};

namespace detail {

/// Shifts the mesh so the volume centroid sits at the origin and scales it
/// so its largest bounding-box extent equals `size`.
inline TriangleMesh normalize_mesh(TriangleMesh mesh, double size) {
  mesh.translate(mesh.volume_centroid() * -1.0);
  const Vec3 ext = mesh.bounds().size();
  mesh.scale(size / std::max({ext.x, ext.y, ext.z}));
  return mesh;
}

}  // namespace detail

/// Rotates the geometry for `steps` steps, rebuilding the fraction field
/// from a single voxelization each step, and compares V_s = sum eps dx^3
/// with the exact polyhedral volume. A missing mesh file is a skip.
inline VolumeErrorRow run_volume_case(const VolumeErrorCase& c, WorkerPool* pool = nullptr) {
  VolumeErrorRow row;
  row.input = c;
  const double dx = 1.0;
  TriangleMesh mesh;
  Vec3 axis{1.0, 2.0, 3.0};
  switch (c.geometry) {
    case VolumeGeometry::cube: mesh = make_cube(c.N * dx); break;
    case VolumeGeometry::blade:
      mesh = make_twisted_blade(c.N * dx, 0.3 * c.N * dx, 0.05 * c.N * dx, std::numbers::pi / 3.0, 24);
      axis = {0.0, 0.0, 1.0};
      break;
    case VolumeGeometry::mesh: {
      if (c.mesh_path.empty() || !std::filesystem::exists(c.mesh_path)) {
        row.status = CaseStatus::skipped;
        row.message = "mesh file not found: " + (c.mesh_path.empty() ? std::string("<unset>") : c.mesh_path.string());
        return row;
      }
      try {
        mesh = detail::normalize_mesh(load_mesh_file(c.mesh_path), c.N * dx);
      } catch (const Error& e) {
        row.status = CaseStatus::failed;
        row.message = e.what();
        return row;
      }
      break;
    }
  }
  row.reference_volume = mesh.volume();
  VoxelizeOptions opts;
  opts.memory_cap_bytes = c.memory_cap_bytes;
  const GeometryField geom = voxelize(mesh, dx, c.s, opts);
  const auto n = static_cast<std::size_t>(std::ceil(2.0 * geom.bounding_radius() / dx)) + 6;
  GridGeometry grid{{n, n, n}, dx, {}};
  RotationSchedule sched;
  sched.axis = axis;
  sched.center = Vec3{0.5, 0.5, 0.5} * (static_cast<double>(n) * dx);
  const VolumeSeries series = volume_error_series(geom, sched, c.steps, grid, row.reference_volume, pool);
  row.error = series.mean_squared_error();
  row.mean_relative = series.relative_error();
  return row;
}

/// Error table over N x s. Cases whose geometry field would exceed the
/// memory cap are recorded as skipped.
struct VolumeTable {
  VolumeGeometry geometry = VolumeGeometry::cube;
  std::vector<int> Ns, ss;
  std::vector<VolumeErrorRow> rows;  ///< row-major over (N, s)

  [[nodiscard]] const VolumeErrorRow& at(std::size_t iN, std::size_t is) const { return rows.at(iN * ss.size() + is); }

  [[nodiscard]] std::string markdown() const {
    std::ostringstream os;
    os << "| N \\ s |";
    for (int s : ss) os << ' ' << s << " |";
    os << "\n|---|";
    for (std::size_t i = 0; i < ss.size(); ++i) os << "---|";
    os << '\n';
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      os << "| " << Ns[i] << " |";
      for (std::size_t j = 0; j < ss.size(); ++j) {
        const auto& r = at(i, j);
        char buf[32];
        if (r.status == CaseStatus::ok)
          std::snprintf(buf, sizeof buf, " %.2e |", r.error);
        else
          std::snprintf(buf, sizeof buf, " %s |", std::string(to_string(r.status)).c_str());
        os << buf;
      }
      os << '\n';
    }
    return os.str();
  }
};

inline VolumeTable run_volume_table(VolumeGeometry g, std::vector<int> Ns, std::vector<int> ss,
                                    const std::filesystem::path& mesh_path = {}, WorkerPool* pool = nullptr,
                                    std::size_t memory_cap_bytes = std::size_t{4} << 30) {
  VolumeTable t{g, std::move(Ns), std::move(ss), {}};
  for (int N : t.Ns)
    for (int s : t.ss) {
      VolumeErrorCase c{g, N, s, 100, mesh_path, memory_cap_bytes};
      try {
        t.rows.push_back(run_volume_case(c, pool));
      } catch (const ResourceError& e) {
        VolumeErrorRow r;
        r.input = c;
        r.status = CaseStatus::skipped;
        r.message = e.what();
        t.rows.push_back(r);
      }
    }
  return t;
}

/// Reference errors for the cube and bunny tables (rows N = 10,
/// 20, 40; columns s = 0..3).
inline constexpr std::array<std::array<double, 4>, 3> kCubeReference{{{1.34e-05, 9.06e-06, 3.71e-06, 1.65e-06},
                                                                      {5.35e-05, 1.44e-07, 5.03e-08, 1.78e-08},
                                                                      {6.29e-06, 8.94e-09, 2.48e-09, 1.03e-09}}};
inline constexpr std::array<std::array<double, 4>, 3> kBunnyReference{{{4.17e-03, 5.00e-05, 3.59e-05, 9.44e-06},
                                                                       {3.11e-05, 1.86e-05, 2.97e-06, 7.48e-07},
                                                                       {1.63e-05, 1.35e-06, 4.35e-07, 1.71e-07}}};

/// Order-of-magnitude band: no worse than ten times the reference.
inline bool within_reference_band(double error, double reference) noexcept { return error <= 10.0 * reference; }

/// Reference lookup for N in {10, 20, 40} and s in {0..3}.
inline std::optional<double> reference_error(VolumeGeometry g, int N, int s) {
  const int row = N == 10 ? 0 : (N == 20 ? 1 : (N == 40 ? 2 : -1));
  if (row < 0 || s < 0 || s > 3) return std::nullopt;
  if (g == VolumeGeometry::cube) return kCubeReference[static_cast<std::size_t>(row)][static_cast<std::size_t>(s)];
  if (g == VolumeGeometry::mesh) return kBunnyReference[static_cast<std::size_t>(row)][static_cast<std::size_t>(s)];
  return std::nullopt;
}

}  // namespace psm::validation
