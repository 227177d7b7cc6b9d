#pragma once

#include <array>
#include <string>
#include <string_view>

#include "psm/core/error.hpp"
#include "psm/core/log.hpp"
#include "psm/core/vec.hpp"
#include "psm/engine/units.hpp"
#include "psm/lattice/grid.hpp"

namespace psm {

enum class BoundaryType { periodic, no_slip, velocity_inflow, pressure_outflow };

inline std::string_view to_string(BoundaryType t) noexcept {
  switch (t) {
    case BoundaryType::periodic: return "periodic";
    case BoundaryType::no_slip: return "no-slip";
    case BoundaryType::velocity_inflow: return "velocity-inflow";
    case BoundaryType::pressure_outflow: return "pressure-outflow";
  }
  return "?";
}

inline BoundaryType parse_boundary_type(std::string_view s) {
  if (s == "periodic") return BoundaryType::periodic;
  if (s == "no-slip" || s == "wall") return BoundaryType::no_slip;
  if (s == "velocity-inflow" || s == "inflow") return BoundaryType::velocity_inflow;
  if (s == "pressure-outflow" || s == "outflow") return BoundaryType::pressure_outflow;
  throw ArgumentError("unknown boundary type '" + std::string(s) + "'");
}

struct FaceSpec {
  BoundaryType type = BoundaryType::periodic;
  Vec3 velocity{};       ///< inflow velocity, SI
  double density = 1.0;  ///< outflow density, lattice units
};

/// Faces ordered x-, x+, y-, y+, z-, z+.
struct BoundarySpec {
  std::array<FaceSpec, 6> faces{};

  static constexpr std::array<std::string_view, 6> face_names{"x-", "x+", "y-", "y+", "z-", "z+"};

  static BoundarySpec all(BoundaryType t) {
    BoundarySpec b;
    for (auto& f : b.faces) f.type = t;
    return b;
  }

  [[nodiscard]] const FaceSpec& face(int axis, bool upper) const noexcept {
    return faces[static_cast<std::size_t>(2 * axis + (upper ? 1 : 0))];
  }

  /// Periodicity must be paired per axis; 2D grids must be periodic in z.
  void validate(int dim) const {
    for (int a = 0; a < 3; ++a) {
      const bool lo = face(a, false).type == BoundaryType::periodic;
      const bool hi = face(a, true).type == BoundaryType::periodic;
      if (lo != hi)
        throw ConfigError("domain.boundaries." + std::string(face_names[static_cast<std::size_t>(2 * a + (lo ? 1 : 0))]),
                          "periodic face paired with a non-periodic opposite face");
      if (a == 2 && dim == 2 && !lo)
        throw ConfigError("domain.boundaries.z-", "2D domains must be periodic in z");
    }
  }
};

/// Physical description of the fluid domain.
struct Domain {
  GridDims extents{};
  double dx = 1.0;     ///< m
  double dt = 1.0;     ///< s
  double nu = 1.0 / 6.0;  ///< m^2/s
  double rho_f = 1.0;  ///< kg/m^3
  Vec3 gravity{};      ///< m/s^2, acts on bodies only
  BoundarySpec boundaries{};

  [[nodiscard]] UnitConverter units() const noexcept { return {dx, dt, rho_f}; }
  [[nodiscard]] double tau(double cs2 = 1.0 / 3.0) const noexcept { return units().tau_for(nu, cs2); }
  [[nodiscard]] GridGeometry grid() const noexcept { return {extents, dx, {}}; }

  /// Hard errors for invalid parameters, warnings for questionable ones.
  void validate(int dim) const {
    if (extents.nx == 0 || extents.ny == 0 || extents.nz == 0) throw ConfigError("domain.extents", "must be positive");
    if (dim == 2 && extents.nz != 1) throw ConfigError("domain.extents", "2D stencils require nz == 1");
    if (!(dx > 0.0)) throw ConfigError("domain.dx", "must be positive");
    if (!(dt > 0.0)) throw ConfigError("domain.dt", "must be positive");
    if (!(nu > 0.0)) throw ConfigError("domain.nu", "must be positive");
    if (!(rho_f > 0.0)) throw ConfigError("domain.rho_f", "must be positive");
    const double t = tau();
    if (!(t > 0.5)) throw ConfigError("domain.nu", "relaxation time tau = " + std::to_string(t) + " must exceed 0.5");
    if (t > 2.0) log::warn("relaxation time tau = " + std::to_string(t) + " is above 2");
    boundaries.validate(dim);
    for (std::size_t f = 0; f < 6; ++f)
      if (boundaries.faces[f].type == BoundaryType::velocity_inflow &&
          norm(units().velocity_to_lattice(boundaries.faces[f].velocity)) > 0.1)
        log::warn("inflow velocity on " + std::string(BoundarySpec::face_names[f]) + " exceeds 0.1 in lattice units");
  }
};

}  // namespace psm
