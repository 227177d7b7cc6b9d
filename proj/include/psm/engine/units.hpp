#pragma once

#include "psm/core/vec.hpp"

namespace psm {

/// SI <-> lattice conversion from the spacing dx (m), time step dt (s) and
/// reference fluid density rho_f (kg/m^3). Lattice density 1 == rho_f.
struct UnitConverter {
  double dx = 1.0;
  double dt = 1.0;
  double rho_f = 1.0;

  [[nodiscard]] double velocity_to_lattice(double u) const noexcept { return u * dt / dx; }
  [[nodiscard]] Vec3 velocity_to_lattice(const Vec3& u) const noexcept { return u * (dt / dx); }
  [[nodiscard]] Vec3 velocity_to_si(const Vec3& u) const noexcept { return u * (dx / dt); }
  [[nodiscard]] double viscosity_to_lattice(double nu) const noexcept { return nu * dt / (dx * dx); }
  [[nodiscard]] double tau_for(double nu, double cs2 = 1.0 / 3.0) const noexcept {
    return viscosity_to_lattice(nu) / cs2 + 0.5;
  }
  [[nodiscard]] Vec3 position_to_lattice(const Vec3& x) const noexcept { return x / dx; }
  [[nodiscard]] Vec3 force_to_si(const Vec3& f) const noexcept { return f * (rho_f * dx * dx * dx * dx / (dt * dt)); }
  [[nodiscard]] Vec3 torque_to_si(const Vec3& t) const noexcept {
    return t * (rho_f * dx * dx * dx * dx * dx / (dt * dt));
  }
  [[nodiscard]] double time_to_si(double steps) const noexcept { return steps * dt; }
};

}  // namespace psm
