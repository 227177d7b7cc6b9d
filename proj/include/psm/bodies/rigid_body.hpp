#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <variant>

#include "psm/core/vec.hpp"
#include "psm/geometry/mesh.hpp"
#include "psm/geometry/pose.hpp"
#include "psm/geometry/voxelizer.hpp"

namespace psm {

/// Fixed-rate motion: rotation about `axis` through the body center at
/// `angular_speed` (rad/s) and translation at constant `velocity` (m/s).
struct PrescribedMotion {
  Vec3 axis{0, 0, 1};
  double angular_speed = 0.0;
  Vec3 velocity{};
};

/// Free motion under gravity, buoyancy and hydrodynamic load.
struct DynamicMotion {
  /// Exponential smoothing weight for F_hydro/T_hydro (1 = no smoothing).
  double hydro_smoothing = 1.0;
  bool integrate_rotation = true;
};

using MotionMode = std::variant<PrescribedMotion, DynamicMotion>;

/// A rigid body: geometry in its reference frame (origin at the center of
/// mass), current pose and kinematics, mass properties. SI units.
struct RigidBody {
  std::string name;
  std::shared_ptr<const GeometryField> geometry;
  Pose initial_pose{};
  Pose pose{};
  Vec3 velocity{};
  Vec3 angular_velocity{};
  double density = 0.0;  ///< solid density (kg/m^3)
  double volume = 0.0;   ///< m^3
  double mass = 0.0;     ///< kg
  Mat3 inertia_body = Mat3::identity();
  MotionMode motion = PrescribedMotion{};

  /// Smoothed hydrodynamic load carried between steps (dynamic mode).
  std::optional<Vec3> smoothed_force, smoothed_torque;

  [[nodiscard]] const Vec3& center() const noexcept { return pose.translation; }
  [[nodiscard]] bool is_dynamic() const noexcept { return std::holds_alternative<DynamicMotion>(motion); }

  [[nodiscard]] Mat3 inertia_world() const noexcept {
    return pose.rotation * inertia_body * pose.rotation.transposed();
  }
};

/// Solid sphere inertia about its center.
inline Mat3 sphere_inertia(double mass, double radius) noexcept {
  const double i = 0.4 * mass * radius * radius;
  return Mat3::diagonal(i, i, i);
}

/// Solid cube inertia about its center.
inline Mat3 cube_inertia(double mass, double side) noexcept {
  const double i = mass * side * side / 6.0;
  return Mat3::diagonal(i, i, i);
}

/// Inertia tensor of a homogeneous closed mesh about its volume centroid,
/// from signed tetrahedra (origin, a, b, c). Orientation-independent.
inline Mat3 mesh_inertia(const TriangleMesh& mesh, double density) {
  // Second-moment tensor C = sum det(A) A C0 A^T with C0 the canonical
  // tetrahedron covariance.
  const double c0[3][3] = {{2, 1, 1}, {1, 2, 1}, {1, 1, 2}};
  Mat3 C = Mat3::zero();
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    const auto t = mesh.triangle(f);
    const double det = dot(t[0], cross(t[1], t[2]));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = 0.0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) acc += t[static_cast<std::size_t>(a)][i] * c0[a][b] * t[static_cast<std::size_t>(b)][j];
        C(i, j) += det * acc / 120.0;
      }
  }
  const double sv = mesh.signed_volume();
  const double sign = sv < 0.0 ? -1.0 : 1.0;
  const double vol = std::abs(sv);
  const Vec3 c = mesh.volume_centroid();
  Mat3 I = Mat3::zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) C(i, j) = sign * C(i, j) - vol * c[i] * c[j];
  const double tr = C(0, 0) + C(1, 1) + C(2, 2);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) I(i, j) = density * ((i == j ? tr : 0.0) - C(i, j));
  return I;
}

/// Rigid-body velocity u_s = v + omega x (x - R), SI.
inline Vec3 solid_velocity_at(const RigidBody& body, const Vec3& x) noexcept {
  return body.velocity + cross(body.angular_velocity, x - body.center());
}

/// Closed-form prescribed pose at step n: rotation by Omega n dt about the
/// motion axis (through the center), translation T0 + v n dt. Also sets
/// the body's kinematics to the schedule's velocities.
inline Pose advance_prescribed(RigidBody& body, std::size_t step, double dt) {
  const auto& m = std::get<PrescribedMotion>(body.motion);
  const double t = static_cast<double>(step) * dt;
  Pose p;
  p.rotation = rotation_about(m.axis, m.angular_speed * t) * body.initial_pose.rotation;
  p.translation = body.initial_pose.translation + m.velocity * t;
  body.pose = p;
  body.velocity = m.velocity;
  body.angular_velocity = normalized(m.axis) * m.angular_speed;
  return p;
}

/// Loads acting on a body during one step (SI).
struct BodyForces {
  Vec3 hydro_force{};
  Vec3 hydro_torque{};
  Vec3 external_force{};
};

/// Gravity plus analytic buoyancy: (rho_s - rho_f) V g.
inline Vec3 gravity_and_buoyancy(const RigidBody& body, double fluid_density, const Vec3& gravity) noexcept {
  return gravity * ((body.density - fluid_density) * body.volume);
}

/// Semi-implicit Euler step: velocities first from the total load, then
/// positions/orientation from the new velocities. Orientation is
/// re-orthonormalized after every update.
inline void integrate_dynamic(RigidBody& body, const BodyForces& forces, double dt) {
  const auto& mode = std::get<DynamicMotion>(body.motion);
  Vec3 f_h = forces.hydro_force, t_h = forces.hydro_torque;
  if (mode.hydro_smoothing < 1.0) {
    const double a = mode.hydro_smoothing;
    if (body.smoothed_force) f_h = *body.smoothed_force * (1.0 - a) + f_h * a;
    if (body.smoothed_torque) t_h = *body.smoothed_torque * (1.0 - a) + t_h * a;
    body.smoothed_force = f_h;
    body.smoothed_torque = t_h;
  }
  const Vec3 f_total = f_h + forces.external_force;
  body.velocity += f_total * (dt / body.mass);
  body.pose.translation += body.velocity * dt;

  if (mode.integrate_rotation) {
    const Mat3 iw = body.inertia_world();
    const Vec3 gyro = cross(body.angular_velocity, iw * body.angular_velocity);
    body.angular_velocity += iw.inverse() * (t_h - gyro) * dt;
    const double w = norm(body.angular_velocity);
    if (w > 0.0) body.pose.rotation = rotation_about(body.angular_velocity, w * dt) * body.pose.rotation;
    body.pose.rotation = orthonormalized(body.pose.rotation);
  }
}

}  // namespace psm
