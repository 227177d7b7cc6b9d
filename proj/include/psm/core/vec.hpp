#pragma once

#include <array>
#include <cmath>
#include <ostream>

namespace psm {

/// Small fixed-size 3-vector with value semantics.
struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  constexpr double& operator[](int i) noexcept { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double operator[](int i) const noexcept { return i == 0 ? x : (i == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) noexcept { x += o.x; y += o.y; z += o.z; return *this; }
  constexpr Vec3& operator-=(const Vec3& o) noexcept { x -= o.x; y -= o.y; z -= o.z; return *this; }
  constexpr Vec3& operator*=(double s) noexcept { x *= s; y *= s; z *= s; return *this; }

  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) noexcept { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) noexcept { return a -= b; }
  friend constexpr Vec3 operator-(const Vec3& a) noexcept { return {-a.x, -a.y, -a.z}; }
  friend constexpr Vec3 operator*(Vec3 a, double s) noexcept { return a *= s; }
  friend constexpr Vec3 operator*(double s, Vec3 a) noexcept { return a *= s; }
  friend constexpr Vec3 operator/(const Vec3& a, double s) noexcept { return {a.x / s, a.y / s, a.z / s}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

  friend std::ostream& operator<<(std::ostream& os, const Vec3& v) {
    return os << '(' << v.x << ", " << v.y << ", " << v.z << ')';
  }
};

constexpr double dot(const Vec3& a, const Vec3& b) noexcept { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) noexcept {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

inline Vec3 normalized(const Vec3& a) noexcept {
  const double n = norm(a);
  return n > 0.0 ? a / n : a;
}

/// Row-major 3x3 matrix.
struct Mat3 {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static constexpr Mat3 identity() noexcept { return {}; }
  static constexpr Mat3 zero() noexcept { return Mat3{{0, 0, 0, 0, 0, 0, 0, 0, 0}}; }
  static constexpr Mat3 diagonal(double a, double b, double c) noexcept { return Mat3{{a, 0, 0, 0, b, 0, 0, 0, c}}; }

  constexpr double& operator()(int r, int c) noexcept { return m[static_cast<std::size_t>(3 * r + c)]; }
  constexpr double operator()(int r, int c) const noexcept { return m[static_cast<std::size_t>(3 * r + c)]; }

  [[nodiscard]] constexpr Mat3 transposed() const noexcept {
    Mat3 t = zero();
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) t(c, r) = (*this)(r, c);
    return t;
  }

  [[nodiscard]] constexpr double determinant() const noexcept {
    const auto& a = *this;
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
  }

  [[nodiscard]] Mat3 inverse() const noexcept {
    const auto& a = *this;
    const double inv_det = 1.0 / determinant();
    Mat3 r = zero();
    r(0, 0) = (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) * inv_det;
    r(0, 1) = (a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2)) * inv_det;
    r(0, 2) = (a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1)) * inv_det;
    r(1, 0) = (a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2)) * inv_det;
    r(1, 1) = (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0)) * inv_det;
    r(1, 2) = (a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2)) * inv_det;
    r(2, 0) = (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0)) * inv_det;
    r(2, 1) = (a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1)) * inv_det;
    r(2, 2) = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0)) * inv_det;
    return r;
  }

  friend constexpr Mat3 operator*(const Mat3& a, const Mat3& b) noexcept {
    Mat3 r = zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += a(i, k) * b(k, j);
        r(i, j) = s;
      }
    return r;
  }

  friend constexpr Vec3 operator*(const Mat3& a, const Vec3& v) noexcept {
    return {a(0, 0) * v.x + a(0, 1) * v.y + a(0, 2) * v.z, a(1, 0) * v.x + a(1, 1) * v.y + a(1, 2) * v.z,
            a(2, 0) * v.x + a(2, 1) * v.y + a(2, 2) * v.z};
  }

  friend constexpr bool operator==(const Mat3&, const Mat3&) = default;
};

/// Rotation by `angle` radians about the unit vector `axis` (Rodrigues).
inline Mat3 rotation_about(const Vec3& axis, double angle) noexcept {
  const Vec3 k = normalized(axis);
  const double c = std::cos(angle), s = std::sin(angle), t = 1.0 - c;
  Mat3 r = Mat3::zero();
  r(0, 0) = c + k.x * k.x * t;
  r(0, 1) = k.x * k.y * t - k.z * s;
  r(0, 2) = k.x * k.z * t + k.y * s;
  r(1, 0) = k.y * k.x * t + k.z * s;
  r(1, 1) = c + k.y * k.y * t;
  r(1, 2) = k.y * k.z * t - k.x * s;
  r(2, 0) = k.z * k.x * t - k.y * s;
  r(2, 1) = k.z * k.y * t + k.x * s;
  r(2, 2) = c + k.z * k.z * t;
  return r;
}

/// Gram-Schmidt on the rows; keeps det = +1 for near-rotations.
inline Mat3 orthonormalized(const Mat3& a) noexcept {
  Vec3 r0{a(0, 0), a(0, 1), a(0, 2)};
  Vec3 r1{a(1, 0), a(1, 1), a(1, 2)};
  r0 = normalized(r0);
  r1 = normalized(r1 - r0 * dot(r0, r1));
  const Vec3 r2 = cross(r0, r1);
  return Mat3{{r0.x, r0.y, r0.z, r1.x, r1.y, r1.z, r2.x, r2.y, r2.z}};
}

}  // namespace psm
