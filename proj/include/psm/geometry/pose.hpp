#pragma once

#include <cmath>

#include "psm/core/vec.hpp"

namespace psm {

/// Rigid placement of a body frame in the world: x_world = R x_body + T.
struct Pose {
  Mat3 rotation = Mat3::identity();
  Vec3 translation{};

  [[nodiscard]] Vec3 to_world(const Vec3& p) const noexcept { return rotation * p + translation; }
  [[nodiscard]] Vec3 to_body(const Vec3& x) const noexcept { return rotation.transposed() * (x - translation); }

  /// Orthonormal with det +1 to `tol`.
  [[nodiscard]] bool valid(double tol = 1e-12) const noexcept {
    const Mat3 g = rotation.transposed() * rotation;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c)
        if (std::abs(g(r, c) - (r == c ? 1.0 : 0.0)) > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
  }

  friend bool operator==(const Pose&, const Pose&) = default;
};

}  // namespace psm
