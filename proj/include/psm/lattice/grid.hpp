#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

#include "psm/core/vec.hpp"

namespace psm {

/// Interior extents of a uniform grid. 2D grids use nz == 1.
struct GridDims {
  std::size_t nx = 1, ny = 1, nz = 1;

  [[nodiscard]] constexpr std::size_t cells() const noexcept { return nx * ny * nz; }
  [[nodiscard]] constexpr std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return x + nx * (y + ny * z);
  }
  [[nodiscard]] constexpr std::array<std::size_t, 3> coords(std::size_t idx) const noexcept {
    return {idx % nx, (idx / nx) % ny, idx / (nx * ny)};
  }
  [[nodiscard]] constexpr std::size_t extent(int axis) const noexcept { return axis == 0 ? nx : (axis == 1 ? ny : nz); }
  friend constexpr bool operator==(const GridDims&, const GridDims&) = default;
};

/// Interior grid surrounded by one ghost layer in every active dimension.
/// PDFs live on the padded layout; interior coordinates map with +1 offsets.
struct PaddedLayout {
  GridDims interior;
  int dim = 3;

  [[nodiscard]] constexpr std::size_t gx() const noexcept { return interior.nx + 2; }
  [[nodiscard]] constexpr std::size_t gy() const noexcept { return interior.ny + 2; }
  [[nodiscard]] constexpr std::size_t gz() const noexcept { return dim == 3 ? interior.nz + 2 : 1; }
  [[nodiscard]] constexpr std::size_t zoff() const noexcept { return dim == 3 ? 1 : 0; }
  [[nodiscard]] constexpr std::size_t cells() const noexcept { return gx() * gy() * gz(); }

  /// Padded index from interior coordinates.
  [[nodiscard]] constexpr std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return (x + 1) + gx() * ((y + 1) + gy() * (z + zoff()));
  }
  /// Padded index from signed padded coordinates.
  [[nodiscard]] constexpr std::size_t raw(std::int64_t px, std::int64_t py, std::int64_t pz) const noexcept {
    return static_cast<std::size_t>(px) + gx() * (static_cast<std::size_t>(py) + gy() * static_cast<std::size_t>(pz));
  }
  [[nodiscard]] constexpr std::array<std::int64_t, 3> raw_coords(std::size_t idx) const noexcept {
    return {static_cast<std::int64_t>(idx % gx()), static_cast<std::int64_t>((idx / gx()) % gy()),
            static_cast<std::int64_t>(idx / (gx() * gy()))};
  }
  [[nodiscard]] constexpr std::int64_t offset(const std::array<int, 3>& c) const noexcept {
    return c[0] + static_cast<std::int64_t>(gx()) * (c[1] + static_cast<std::int64_t>(gy()) * c[2]);
  }
};

/// Physical placement of the lattice: cell (i,j,k) spans
/// [origin + i*dx, origin + (i+1)*dx) along each axis.
struct GridGeometry {
  GridDims dims;
  double dx = 1.0;
  Vec3 origin{};

  [[nodiscard]] Vec3 cell_center(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return origin + Vec3{(static_cast<double>(x) + 0.5) * dx, (static_cast<double>(y) + 0.5) * dx,
                         (static_cast<double>(z) + 0.5) * dx};
  }
};

}  // namespace psm
