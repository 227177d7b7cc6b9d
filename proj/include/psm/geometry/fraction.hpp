#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "psm/core/error.hpp"
#include "psm/core/vec.hpp"
#include "psm/core/worker_pool.hpp"
#include "psm/geometry/pose.hpp"
#include "psm/geometry/voxelizer.hpp"
#include "psm/lattice/collision.hpp"
#include "psm/lattice/grid.hpp"

namespace psm {

/// Overlap fraction eps of one lattice cell with a body.
struct OverlapSample {
  std::size_t cell = 0;
  double eps = 0.0;
};

/// Index box of lattice cells possibly touched by a body at `center` with
/// bounding radius `radius`, clipped to the grid. Empty when fully outside.
struct CellBox {
  std::array<std::size_t, 3> lo{0, 0, 0}, hi{0, 0, 0};  // half-open
  [[nodiscard]] bool empty() const noexcept { return lo[0] >= hi[0] || lo[1] >= hi[1] || lo[2] >= hi[2]; }
};

inline CellBox cells_near(const GridGeometry& grid, const Vec3& center, double radius) {
  CellBox box;
  for (int a = 0; a < 3; ++a) {
    const auto n = static_cast<double>(grid.dims.extent(a));
    if (a == 2 && grid.dims.nz == 1) {
      box.lo[2] = 0;
      box.hi[2] = 1;
      continue;
    }
    const double lo = std::floor((center[a] - radius - grid.origin[a]) / grid.dx);
    const double hi = std::floor((center[a] + radius - grid.origin[a]) / grid.dx) + 1.0;
    box.lo[static_cast<std::size_t>(a)] = static_cast<std::size_t>(std::clamp(lo, 0.0, n));
    box.hi[static_cast<std::size_t>(a)] = static_cast<std::size_t>(std::clamp(hi, 0.0, n));
  }
  return box;
}

/// Overlap fractions for every lattice cell near a body in pose `pose`.
///
/// Each cell is split into 2^s sub-cells per axis (one layer in z for 2D
/// grids); every sub-cell center is mapped into the body frame with
/// x_body = R^T (x_world - T) and reads the containing geometry-field bit.
/// eps is the inside fraction. Returned samples have eps > 0 and ascending
/// cell index. The geometry field is only read.
inline std::vector<OverlapSample> compute_overlap(const GeometryField& geom, const Pose& pose, const GridGeometry& grid,
                                                  WorkerPool* pool = nullptr) {
  if (std::abs(geom.dx_lbm() - grid.dx) > 1e-12 * grid.dx)
    throw ArgumentError("geometry field spacing does not match the lattice spacing");
  const bool flat = grid.dims.nz == 1;
  const double dx = grid.dx;
  const double half_diag = 0.5 * dx * (flat ? std::sqrt(2.0) : std::sqrt(3.0));
  const double reach = geom.bounding_radius() + half_diag;
  const CellBox box = cells_near(grid, pose.translation, reach);
  if (box.empty()) return {};

  const std::size_t n_sub = std::size_t{1} << geom.s();
  const std::size_t n_sub_z = flat ? 1 : n_sub;
  const double h = dx / static_cast<double>(n_sub);
  const double inv_count = 1.0 / static_cast<double>(n_sub * n_sub * n_sub_z);
  const Mat3 rt = pose.rotation.transposed();
  const Vec3 step_x = rt * Vec3{h, 0, 0}, step_y = rt * Vec3{0, h, 0}, step_z = rt * Vec3{0, 0, h};
  const Vec3 glo = geom.origin(), ghi = geom.upper();
  // Conservative cell radius in the body frame, for the stored-extent cull.
  const double cull = half_diag;

  const std::size_t ny = box.hi[1] - box.lo[1];
  const std::size_t rows = ny * (box.hi[2] - box.lo[2]);
  std::vector<std::vector<OverlapSample>> per_row(rows);

  auto run = [&](std::size_t rb, std::size_t re) {
    for (std::size_t r = rb; r < re; ++r) {
      const std::size_t y = box.lo[1] + r % ny, z = box.lo[2] + r / ny;
      auto& out = per_row[r];
      for (std::size_t x = box.lo[0]; x < box.hi[0]; ++x) {
        const Vec3 c = grid.cell_center(x, y, z);
        if (norm(c - pose.translation) > reach) continue;
        const Vec3 cb = pose.to_body(c);
        if (cb.x + cull < glo.x || cb.y + cull < glo.y || cb.z + cull < glo.z || cb.x - cull > ghi.x ||
            cb.y - cull > ghi.y || cb.z - cull > ghi.z)
          continue;
        const Vec3 corner = grid.origin + Vec3{x * dx, y * dx, flat ? (z + 0.5) * dx - 0.5 * h : z * dx};
        const Vec3 first = pose.to_body(corner + Vec3{0.5 * h, 0.5 * h, 0.5 * h});
        std::size_t inside = 0;
        for (std::size_t c_ = 0; c_ < n_sub_z; ++c_) {
          const Vec3 pz = first + step_z * static_cast<double>(c_);
          for (std::size_t b = 0; b < n_sub; ++b) {
            const Vec3 py = pz + step_y * static_cast<double>(b);
            for (std::size_t a = 0; a < n_sub; ++a)
              inside += geom.lookup(py + step_x * static_cast<double>(a)) ? 1U : 0U;
          }
        }
        if (inside > 0) out.push_back({grid.dims.index(x, y, z), static_cast<double>(inside) * inv_count});
      }
    }
  };
  if (pool)
    pool->parallel_for(rows, run);
  else
    run(0, rows);

  std::vector<OverlapSample> result;
  for (auto& row : per_row) result.insert(result.end(), row.begin(), row.end());
  return result;
}

/// Dense solid weight field plus the list of covered cells.
struct FractionField {
  std::vector<double> B;
  std::vector<OverlapSample> coverage;  ///< eps per covered cell
};

/// B = weight_fraction(eps, tau, mode) on a dense grid-sized field.
inline FractionField fraction_field_from_geometry(const GeometryField& geom, const Pose& pose, const GridGeometry& grid,
                                                  double tau, FractionMode mode, WorkerPool* pool = nullptr) {
  FractionField out;
  out.B.assign(grid.dims.cells(), 0.0);
  out.coverage = compute_overlap(geom, pose, grid, pool);
  for (const auto& c : out.coverage) out.B[c.cell] = weight_fraction(c.eps, tau, mode);
  return out;
}

/// V_s = sum B dx^3.
inline double fraction_volume(std::span<const double> B, double dx) {
  double v = 0.0;
  for (const double b : B) v += b;
  return v * dx * dx * dx;
}

/// Volume from a sparse coverage list (direct mapping, B = eps).
inline double fraction_volume(std::span<const OverlapSample> coverage, double dx) {
  double v = 0.0;
  for (const auto& c : coverage) v += c.eps;
  return v * dx * dx * dx;
}

/// Time series of reconstructed volumes under a motion schedule.
struct VolumeSeries {
  std::vector<double> volumes;
  double reference = 0.0;

  [[nodiscard]] double mean() const noexcept {
    double s = 0.0;
    for (const double v : volumes) s += v;
    return volumes.empty() ? 0.0 : s / static_cast<double>(volumes.size());
  }

  /// Squared relative deviation of the time-averaged volume,
  /// ((mean V_s - V_ref) / V_ref)^2.
  [[nodiscard]] double averaged_error() const noexcept {
    const double rel = (mean() - reference) / reference;
    return rel * rel;
  }

  /// Relative deviation of the time-averaged volume, |mean V_s - V_ref| / V_ref.
  [[nodiscard]] double relative_error() const noexcept { return std::abs(mean() - reference) / reference; }

  /// Time average of the squared relative per-step deviation.
  [[nodiscard]] double mean_squared_error() const noexcept {
    double s = 0.0;
    for (const double v : volumes) {
      const double rel = (v - reference) / reference;
      s += rel * rel;
    }
    return volumes.empty() ? 0.0 : s / static_cast<double>(volumes.size());
  }
};

/// Reconstructs the fraction field for `steps` poses of `schedule` and
/// records V_s per step (direct mapping).
inline VolumeSeries volume_error_series(const GeometryField& geom, const std::function<Pose(std::size_t)>& schedule,
                                        std::size_t steps, const GridGeometry& grid, double reference_volume,
                                        WorkerPool* pool = nullptr) {
  VolumeSeries series;
  series.reference = reference_volume;
  series.volumes.reserve(steps);
  for (std::size_t n = 0; n < steps; ++n)
    series.volumes.push_back(fraction_volume(compute_overlap(geom, schedule(n), grid, pool), grid.dx));
  return series;
}

}  // namespace psm
