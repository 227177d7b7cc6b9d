#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "psm/core/error.hpp"
#include "psm/core/vec.hpp"
#include "psm/lattice/stencil.hpp"

namespace psm {

template <Stencil S>
using Pdfs = std::array<double, S::Q>;

/// BGK relaxation time; construction rejects tau <= 1/2.
class RelaxationParams {
 public:
  explicit RelaxationParams(double tau) : tau_(tau) {
    if (!(tau > 0.5)) throw ArgumentError("relaxation time tau must exceed 0.5, got " + std::to_string(tau));
  }

  static RelaxationParams from_viscosity(double nu_lattice, double cs2 = 1.0 / 3.0) {
    return RelaxationParams(nu_lattice / cs2 + 0.5);
  }

  [[nodiscard]] double tau() const noexcept { return tau_; }
  [[nodiscard]] double omega() const noexcept { return 1.0 / tau_; }
  [[nodiscard]] double viscosity(double cs2 = 1.0 / 3.0) const noexcept { return cs2 * (tau_ - 0.5); }

 private:
  double tau_;
};

/// Second-order equilibrium
///   f_i^eq = w_i rho [1 + c.u/cs2 + (c.u)^2/(2 cs2^2) - u.u/(2 cs2)].
template <Stencil S>
constexpr Pdfs<S> equilibrium(const Vec3& u, double rho) noexcept {
  Pdfs<S> feq{};
  const double usq = dot(u, u) / (2.0 * S::cs2);
  for (std::size_t i = 0; i < S::Q; ++i) {
    const double cu = (S::c[i][0] * u.x + S::c[i][1] * u.y + S::c[i][2] * u.z) / S::cs2;
    feq[i] = S::w[i] * rho * (1.0 + cu + 0.5 * cu * cu - usq);
  }
  return feq;
}

struct Moments {
  double rho = 0.0;
  Vec3 u{};
};

/// Density and velocity without validation; the kernels check rho themselves.
template <Stencil S>
constexpr Moments moments_unchecked(const Pdfs<S>& f) noexcept {
  double rho = 0.0;
  Vec3 j{};
  for (std::size_t i = 0; i < S::Q; ++i) {
    rho += f[i];
    j.x += f[i] * S::c[i][0];
    j.y += f[i] * S::c[i][1];
    j.z += f[i] * S::c[i][2];
  }
  return {rho, j / rho};
}

/// rho = sum f_i, u = sum f_i c_i / rho. Throws InvalidStateError at
/// `cell` when rho <= 0 or non-finite.
template <Stencil S>
Moments macroscopic(const Pdfs<S>& f, std::array<std::int64_t, 3> cell = {-1, -1, -1}) {
  const Moments m = moments_unchecked<S>(f);
  if (!(m.rho > 0.0) || !std::isfinite(m.rho))
    throw InvalidStateError("non-positive or non-finite density " + std::to_string(m.rho), cell[0], cell[1], cell[2]);
  return m;
}

/// f + Omega^F with Omega^F = -(f - f^eq(rho,u)) / tau.
template <Stencil S>
constexpr Pdfs<S> srt_collide(const Pdfs<S>& f, double tau, double rho, const Vec3& u) noexcept {
  const auto feq = equilibrium<S>(u, rho);
  const double omega = 1.0 / tau;
  Pdfs<S> out{};
  for (std::size_t i = 0; i < S::Q; ++i) out[i] = f[i] - omega * (f[i] - feq[i]);
  return out;
}

/// Solid collision variants of the partially saturated cells method.
enum class SolidCollision { SC1, SC2, SC3 };

inline std::string_view to_string(SolidCollision v) noexcept {
  switch (v) {
    case SolidCollision::SC1: return "SC1";
    case SolidCollision::SC2: return "SC2";
    case SolidCollision::SC3: return "SC3";
  }
  return "?";
}

inline SolidCollision parse_solid_collision(std::string_view s) {
  if (s == "SC1") return SolidCollision::SC1;
  if (s == "SC2") return SolidCollision::SC2;
  if (s == "SC3") return SolidCollision::SC3;
  throw ArgumentError("unknown solid collision variant '" + std::string(s) + "' (expected SC1, SC2 or SC3)");
}

/// Omega^S_i for the given variant. `u` is the fluid velocity of the cell,
/// `u_s` the solid velocity; opposite directions come from the stencil.
///
///   SC1: [f_ib - f_ib^eq(rho,u)]   - [f_i - f_i^eq(rho,u_s)]
///   SC2: [f_i^eq(rho,u_s) - f_i]   + (1 - 1/tau) [f_i - f_i^eq(rho,u)]
///   SC3: [f_ib - f_ib^eq(rho,u_s)] - [f_i - f_i^eq(rho,u_s)]
template <Stencil S>
constexpr Pdfs<S> solid_collision(SolidCollision variant, const Pdfs<S>& f, double rho, const Vec3& u,
                                  const Vec3& u_s, double tau) noexcept {
  const auto feq_s = equilibrium<S>(u_s, rho);
  Pdfs<S> out{};
  switch (variant) {
    case SolidCollision::SC1: {
      const auto feq_f = equilibrium<S>(u, rho);
      for (std::size_t i = 0; i < S::Q; ++i) {
        const std::size_t ib = S::opposite[i];
        out[i] = (f[ib] - feq_f[ib]) - (f[i] - feq_s[i]);
      }
      break;
    }
    case SolidCollision::SC2: {
      const auto feq_f = equilibrium<S>(u, rho);
      const double keep = 1.0 - 1.0 / tau;
      for (std::size_t i = 0; i < S::Q; ++i) out[i] = (feq_s[i] - f[i]) + keep * (f[i] - feq_f[i]);
      break;
    }
    case SolidCollision::SC3:
      for (std::size_t i = 0; i < S::Q; ++i) {
        const std::size_t ib = S::opposite[i];
        out[i] = (f[ib] - feq_s[ib]) - (f[i] - feq_s[i]);
      }
      break;
  }
  return out;
}

enum class FractionMode { direct, weighted };

inline std::string_view to_string(FractionMode m) noexcept { return m == FractionMode::direct ? "direct" : "weighted"; }

inline FractionMode parse_fraction_mode(std::string_view s) {
  if (s == "direct") return FractionMode::direct;
  if (s == "weighted") return FractionMode::weighted;
  throw ArgumentError("unknown fraction mode '" + std::string(s) + "' (expected direct or weighted)");
}

inline constexpr double kFractionTolerance = 1e-9;

/// Maps an overlap fraction eps to the solid weight B.
///   direct:   B = eps
///   weighted: B = eps (tau - 1/2) / ((1 - eps) + (tau - 1/2))
/// eps within `tolerance` outside [0,1] is clamped, anything further throws.
inline double weight_fraction(double eps, double tau, FractionMode mode, double tolerance = kFractionTolerance) {
  if (!(eps >= -tolerance && eps <= 1.0 + tolerance))
    throw ArgumentError("overlap fraction " + std::to_string(eps) + " outside [0,1]");
  eps = std::clamp(eps, 0.0, 1.0);
  if (mode == FractionMode::direct) return eps;
  const double t = tau - 0.5;
  return std::clamp(eps * t / ((1.0 - eps) + t), 0.0, 1.0);
}

}  // namespace psm
